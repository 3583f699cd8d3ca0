#include "invt/experiment.hpp"

#include "invt/csv.hpp"
#include "invt/trial_log.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace invt {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::int64_t wall_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

std::vector<StimulusLevel> read_stimulus_manifest(const fs::path& csv_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw ConfigError("cannot read stimulus manifest " + csv_path.string());
    std::vector<std::string> f;
    if (!csv::read_row(in, f) || f != std::vector<std::string>{"level", "reference", "distorted"})
        throw ConfigError(csv_path.string() + ": header must be level,reference,distorted");
    std::vector<StimulusLevel> out;
    while (csv::read_row(in, f)) {
        if (f.size() != 3) throw ConfigError(csv_path.string() + ": rows need 3 fields");
        const auto path = [&](const std::string& p) {
            const fs::path q(p);
            return (q.is_absolute() ? q : csv_path.parent_path() / q).string();
        };
        out.push_back({csv::parse_double(f[0]), path(f[1]), path(f[2])});
    }
    if (out.empty()) throw ConfigError(csv_path.string() + ": no stimulus levels");
    return out;
}

void write_stimulus_manifest(const std::vector<StimulusLevel>& levels, const fs::path& csv_path) {
    if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    csv::write_row(out, {"level", "reference", "distorted"});
    for (const auto& l : levels) csv::write_row(out, {csv::format_double(l.level), l.reference, l.distorted});
}

ExperimentStore::ExperimentStore(fs::path data_dir, std::vector<StimulusLevel> stimuli,
                                 std::function<std::int64_t()> clock)
    : dir_(std::move(data_dir)), stimuli_(std::move(stimuli)), clock_(clock ? std::move(clock) : wall_clock_ms) {
    fs::create_directories(dir_ / "sessions");
    load_existing();
}

fs::path ExperimentStore::log_path(const std::string& session) const {
    return dir_ / "sessions" / session / "trials.jsonl";
}

void ExperimentStore::load_existing() {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(dir_ / "sessions"))
        if (e.is_directory() && fs::exists(e.path() / "manifest.json")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
        std::ifstream in(d / "manifest.json", std::ios::binary);
        Json j;
        try {
            j = Json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw DecodeError((d / "manifest.json").string() + ": " + e.what());
        }
        auto s = std::make_unique<Session>();
        s->id = j.at("id").get<std::string>();
        s->observer = j.at("observer").get<std::string>();
        s->axis = j.at("axis").get<std::string>();
        s->seed = j.at("seed").get<std::uint64_t>();
        for (const auto& l : j.at("stimuli"))
            s->stimuli.push_back({l.at("level").get<double>(), l.at("reference").get<std::string>(),
                                  l.at("distorted").get<std::string>()});
        for (const auto& p : j.at("plan")) {
            PlannedTrial t;
            t.level_index = p.at(0).get<std::size_t>();
            t.distorted_first = p.at(1).get<bool>();
            t.level = s->stimuli.at(t.level_index).level;
            s->plan.push_back(t);
        }
        if (fs::exists(log_path(s->id))) s->log = read_trial_log(log_path(s->id));
        for (std::size_t i = 0; i < s->log.size(); ++i)
            if (s->log[i].trial_index != i || i >= s->plan.size())
                throw DecodeError(log_path(s->id).string() + ": log does not replay against the session plan");
        const std::string id = s->id;
        sessions_[id] = std::move(s);
    }
}

std::string ExperimentStore::create_session(const SessionRequest& req) {
    std::vector<std::string> missing;
    for (const auto& l : stimuli_)
        if (!fs::is_regular_file(l.reference) || !fs::is_regular_file(l.distorted))
            missing.push_back(csv::format_double(l.level));
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw ConfigError("stimulus files missing for levels: " + list);
    }
    if (req.reps == 0) throw ArgumentError("a session needs at least one repetition per level");

    std::lock_guard lock(mutex_);
    char id[32];
    for (std::size_t n = sessions_.size() + 1;; ++n) {
        std::snprintf(id, sizeof id, "s%04zu", n);
        if (!sessions_.count(id)) break;
    }

    auto s = std::make_unique<Session>();
    s->id = id;
    s->observer = req.observer;
    s->axis = req.axis;
    s->seed = req.seed;
    s->stimuli = stimuli_;
    std::vector<double> levels;
    for (const auto& l : stimuli_) levels.push_back(l.level);
    s->plan = schedule_trials(levels, req.reps, 1, req.seed);

    Json j;
    j["id"] = s->id;
    j["observer"] = s->observer;
    j["axis"] = s->axis;
    j["seed"] = s->seed;
    j["reps"] = req.reps;
    auto& st = j["stimuli"] = Json::array();
    for (const auto& l : s->stimuli) st.push_back({{"level", l.level}, {"reference", l.reference}, {"distorted", l.distorted}});
    auto& plan = j["plan"] = Json::array();
    for (const auto& t : s->plan) plan.push_back({t.level_index, t.distorted_first});
    const fs::path sdir = dir_ / "sessions" / s->id;
    fs::create_directories(sdir);
    {
        std::ofstream out(sdir / "manifest.json", std::ios::binary | std::ios::trunc);
        out << j.dump() << '\n';
        if (!out) throw Error("cannot persist session " + s->id);
    }
    std::ofstream(log_path(s->id), std::ios::binary | std::ios::app).close();
    const std::string out_id = s->id;
    sessions_[out_id] = std::move(s);
    return out_id;
}

ExperimentStore::Session& ExperimentStore::get(const std::string& id) {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("no session '" + id + "'");
    return *it->second;
}

std::string ExperimentStore::key_for(const Session& s, std::size_t trial, int slot) {
    // Keys depend on the session seed and slot, never on which image sits in the slot.
    const std::string key =
        hex(fnv1a(s.id + ":" + std::to_string(trial) + ":" + std::to_string(slot), fnv1a(std::to_string(s.seed) + "k")));
    const auto& t = s.plan[trial];
    const auto& stim = s.stimuli[t.level_index];
    const bool distorted_here = (slot == 0) == t.distorted_first;
    keys_[key] = distorted_here ? stim.distorted : stim.reference;
    return key;
}

std::optional<TrialPayload> ExperimentStore::next_trial(const std::string& id) {
    std::lock_guard lock(mutex_);
    Session& s = get(id);
    const std::size_t cursor = s.log.size();
    if (cursor >= s.plan.size()) return std::nullopt;
    return TrialPayload{s.id, cursor, s.plan.size(), key_for(s, cursor, 0), key_for(s, cursor, 1)};
}

TrialRecord ExperimentStore::submit_response(const std::string& id, std::size_t trial_index, Choice choice) {
    std::lock_guard lock(mutex_);
    Session& s = get(id);
    const std::size_t cursor = s.log.size();
    if (cursor >= s.plan.size()) throw ConflictError("session '" + id + "' is complete", cursor);
    if (trial_index != cursor)
        throw ConflictError("trial " + std::to_string(trial_index) + " is not the current trial " +
                                std::to_string(cursor),
                            cursor);
    const auto& t = s.plan[cursor];
    const auto& stim = s.stimuli[t.level_index];
    TrialRecord r;
    r.session = s.id;
    r.trial_index = cursor;
    r.level = stim.level;
    r.axis = s.axis;
    r.reference = stim.reference;
    r.distorted = stim.distorted;
    r.distorted_first = t.distorted_first;
    r.correct = (choice == Choice::left) == t.distorted_first;
    r.timestamp_ms = clock_();
    append_trial(log_path(s.id), r);
    s.log.push_back(r);
    return r;
}

SessionSummary ExperimentStore::summary(const std::string& id) {
    std::lock_guard lock(mutex_);
    Session& s = get(id);
    SessionSummary out;
    out.session = s.id;
    out.observer = s.observer;
    out.axis = s.axis;
    out.cursor = s.log.size();
    out.total = s.plan.size();
    out.complete = out.cursor == out.total;
    for (const auto& l : s.stimuli) out.levels.push_back({l.level, 0, 0});
    for (const auto& r : s.log) {
        auto& lv = out.levels[s.plan[r.trial_index].level_index];
        ++lv.n;
        if (r.correct) ++lv.correct;
    }
    return out;
}

std::vector<std::uint8_t> ExperimentStore::stimulus_bytes(const std::string& key) {
    std::string path;
    {
        std::lock_guard lock(mutex_);
        const auto it = keys_.find(key);
        if (it == keys_.end()) throw NotFoundError("unknown stimulus key");
        path = it->second;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("stimulus file unavailable");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> ExperimentStore::session_ids() {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

}  // namespace invt
