#pragma once

#include "invt/transforms.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace invt {

struct HumanFamilyThreshold {
    std::string units;
    double literature = 0.0;
    double natural = 0.0;
    double natural_halfwidth = 0.0;
};

/// Reference human thresholds: the internal threshold D_tau on the normalized
/// DMOS scale and, per geometric family, the classical and natural-image values.
struct HumanConstants {
    int version = 0;
    double d_tau = 0.0;
    double d_tau_lo = 0.0;
    double d_tau_hi = 0.0;
    std::map<Family, HumanFamilyThreshold> families;

    const HumanFamilyThreshold* find(Family f) const noexcept;
};

/// The constants compiled into the library (data/human_constants.json).
const HumanConstants& builtin_human_constants();

HumanConstants parse_human_constants(const std::string& json_text);
HumanConstants load_human_constants(const std::filesystem::path& path);

}  // namespace invt
