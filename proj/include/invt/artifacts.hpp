#pragma once

#include "invt/chromatic.hpp"
#include "invt/psychophysics.hpp"
#include "invt/transduction.hpp"

#include <filesystem>
#include <json.hpp>

namespace invt {

using Json = nlohmann::ordered_json;

Json to_json(const ResponseCurve& c);
ResponseCurve curve_from_json(const Json& j);

Json to_json(const EqualizationFit& f);
EqualizationFit equalization_from_json(const Json& j);

Json to_json(const ThresholdInterval& t);
ThresholdInterval interval_from_json(const Json& j);

Json to_json(const Ellipse& e);
Ellipse ellipse_from_json(const Json& j);

Json to_json(const PsychometricFit& f);
PsychometricFit psychometric_from_json(const Json& j);

/// Writes `j` pretty-printed with a trailing newline; creates parent directories.
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace invt
