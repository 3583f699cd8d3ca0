#pragma once

#include <span>
#include <vector>

namespace invt {

/// Least-squares nondecreasing fit (pool adjacent violators, unit weights).
std::vector<double> isotonic_increasing(std::span<const double> values);

}  // namespace invt
