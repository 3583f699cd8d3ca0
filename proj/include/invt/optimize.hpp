#pragma once

#include <array>
#include <functional>

namespace invt {

struct NelderMeadResult {
    std::array<double, 2> x{};
    double value = 0.0;
    int iterations = 0;
};

/// Minimises f over R^2 from `start` with an initial simplex of edge `step`.
NelderMeadResult nelder_mead_2d(const std::function<double(const std::array<double, 2>&)>& f,
                                std::array<double, 2> start, std::array<double, 2> step,
                                double xtol = 1e-11, int max_iter = 4000);

}  // namespace invt
