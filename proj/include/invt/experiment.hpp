#pragma once

#include "invt/error.hpp"
#include "invt/psychophysics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace invt {

/// Submission for a trial other than the session's current one.
class ConflictError : public Error {
public:
    ConflictError(const std::string& what, std::size_t cursor) : Error(what), cursor_(cursor) {}
    std::size_t cursor() const noexcept { return cursor_; }

private:
    std::size_t cursor_;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// One pre-generated stimulus pair per level.
struct StimulusLevel {
    double level = 0.0;
    std::string reference;  // PNG path
    std::string distorted;
};

/// CSV with columns level,reference,distorted; relative paths resolve against the CSV's directory.
std::vector<StimulusLevel> read_stimulus_manifest(const std::filesystem::path& csv);
void write_stimulus_manifest(const std::vector<StimulusLevel>& levels, const std::filesystem::path& csv);

struct SessionRequest {
    std::string observer;
    std::size_t reps = 15;
    std::uint64_t seed = 1;
    std::string axis = "D";
};

struct TrialPayload {
    std::string session;
    std::size_t trial_index = 0;
    std::size_t total = 0;
    std::string left;   // opaque stimulus keys
    std::string right;
};

enum class Choice { left, right };

struct LevelSummary {
    double level = 0.0;
    std::size_t n = 0;
    std::size_t correct = 0;
};

struct SessionSummary {
    std::string session;
    std::string observer;
    std::string axis;
    std::size_t cursor = 0;
    std::size_t total = 0;
    bool complete = false;
    std::vector<LevelSummary> levels;
};

/// Sessions persisted under `data_dir/sessions/<id>/` as manifest.json (the
/// plan) plus trials.jsonl (append-only responses). State is rebuilt from
/// disk on construction. All members are safe to call concurrently.
class ExperimentStore {
public:
    ExperimentStore(std::filesystem::path data_dir, std::vector<StimulusLevel> stimuli,
                    std::function<std::int64_t()> clock = {});

    /// Throws ConfigError listing levels whose stimulus files are absent.
    std::string create_session(const SessionRequest& request);

    /// nullopt once every trial has a response. Does not advance the cursor.
    std::optional<TrialPayload> next_trial(const std::string& session);

    /// Records the response for `trial_index`, which must equal the cursor.
    TrialRecord submit_response(const std::string& session, std::size_t trial_index, Choice choice);

    SessionSummary summary(const std::string& session);

    /// File bytes of a stimulus served by next_trial.
    std::vector<std::uint8_t> stimulus_bytes(const std::string& key);

    std::vector<std::string> session_ids();
    std::filesystem::path log_path(const std::string& session) const;

private:
    struct Session {
        std::string id;
        std::string observer;
        std::string axis;
        std::uint64_t seed = 0;
        std::vector<StimulusLevel> stimuli;
        std::vector<PlannedTrial> plan;
        std::vector<TrialRecord> log;
    };

    Session& get(const std::string& id);
    std::string key_for(const Session& s, std::size_t trial, int slot);
    void load_existing();

    std::filesystem::path dir_;
    std::vector<StimulusLevel> stimuli_;
    std::function<std::int64_t()> clock_;
    std::mutex mutex_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
    std::map<std::string, std::string> keys_;  // key -> file path
};

}  // namespace invt
