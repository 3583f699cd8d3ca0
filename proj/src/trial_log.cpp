#include "invt/trial_log.hpp"

#include "invt/error.hpp"

#include <fstream>
#include <json.hpp>

namespace invt {

std::string trial_to_json_line(const TrialRecord& r) {
    nlohmann::ordered_json j;
    j["session"] = r.session;
    j["trial_index"] = r.trial_index;
    j["level"] = r.level;
    j["axis"] = r.axis;
    j["reference"] = r.reference;
    j["distorted"] = r.distorted;
    j["distorted_first"] = r.distorted_first;
    j["correct"] = r.correct;
    j["timestamp_ms"] = r.timestamp_ms;
    return j.dump();
}

TrialRecord trial_from_json_line(const std::string& line) {
    try {
        const auto j = nlohmann::json::parse(line);
        TrialRecord r;
        r.session = j.at("session").get<std::string>();
        r.trial_index = j.at("trial_index").get<std::size_t>();
        r.level = j.at("level").get<double>();
        r.axis = j.value("axis", std::string("D"));
        r.reference = j.value("reference", std::string());
        r.distorted = j.value("distorted", std::string());
        r.distorted_first = j.at("distorted_first").get<bool>();
        r.correct = j.at("correct").get<bool>();
        r.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("malformed trial record: ") + e.what());
    }
}

void append_trial(const std::filesystem::path& log, const TrialRecord& record) {
    if (log.has_parent_path()) std::filesystem::create_directories(log.parent_path());
    std::ofstream out(log, std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot open trial log " + log.string());
    out << trial_to_json_line(record) << '\n';
    out.flush();
    if (!out) throw Error("cannot write trial log " + log.string());
}

std::vector<TrialRecord> read_trial_log(const std::filesystem::path& log) {
    std::ifstream in(log, std::ios::binary);
    if (!in) throw Error("cannot read trial log " + log.string());
    std::vector<TrialRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(trial_from_json_line(line));
        } catch (const DecodeError& e) {
            throw DecodeError(log.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

void write_trial_log(const std::filesystem::path& log, const std::vector<TrialRecord>& records) {
    if (log.has_parent_path()) std::filesystem::create_directories(log.parent_path());
    std::ofstream out(log, std::ios::trunc | std::ios::binary);
    if (!out) throw Error("cannot write trial log " + log.string());
    for (const auto& r : records) out << trial_to_json_line(r) << '\n';
}

}  // namespace invt
