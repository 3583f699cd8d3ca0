#pragma once

#include "invt/psychophysics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace invt {

/// One JSON object per line.
std::string trial_to_json_line(const TrialRecord& record);
TrialRecord trial_from_json_line(const std::string& line);

/// Appends and flushes one record.
void append_trial(const std::filesystem::path& log, const TrialRecord& record);
std::vector<TrialRecord> read_trial_log(const std::filesystem::path& log);
void write_trial_log(const std::filesystem::path& log, const std::vector<TrialRecord>& records);

}  // namespace invt
