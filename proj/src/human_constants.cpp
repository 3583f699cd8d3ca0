#include "invt/human_constants.hpp"

#include "human_constants_data.hpp"
#include "invt/error.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace invt {

const HumanFamilyThreshold* HumanConstants::find(Family f) const noexcept {
    auto it = families.find(f);
    return it == families.end() ? nullptr : &it->second;
}

HumanConstants parse_human_constants(const std::string& json_text) {
    HumanConstants hc;
    try {
        const auto j = nlohmann::json::parse(json_text);
        hc.version = j.at("version").get<int>();
        const auto& it = j.at("internal_threshold");
        hc.d_tau = it.at("center").get<double>();
        hc.d_tau_lo = it.at("lo").get<double>();
        hc.d_tau_hi = it.at("hi").get<double>();
        for (const auto& [name, v] : j.at("families").items()) {
            HumanFamilyThreshold t;
            t.units = v.value("units", "");
            t.literature = v.at("literature").get<double>();
            t.natural = v.at("natural").at("center").get<double>();
            t.natural_halfwidth = v.at("natural").at("halfwidth").get<double>();
            hc.families[parse_family(name)] = t;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("human constants: ") + e.what());
    }
    if (!(hc.d_tau_lo <= hc.d_tau && hc.d_tau <= hc.d_tau_hi))
        throw ConfigError("human constants: internal threshold quartiles must bracket the center");
    return hc;
}

const HumanConstants& builtin_human_constants() {
    static const HumanConstants hc = parse_human_constants(detail::kHumanConstantsJson);
    return hc;
}

HumanConstants load_human_constants(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read human constants file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_human_constants(ss.str());
}

}  // namespace invt
