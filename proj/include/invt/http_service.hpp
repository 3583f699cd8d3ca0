#pragma once

#include "invt/experiment.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace invt {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::optional<std::filesystem::path> static_dir;  // UI bundle mounted at /
    std::size_t default_reps = 15;
    std::uint64_t default_seed = 1;
};

/// HTTP front of an ExperimentStore:
///   POST /api/session                 {"observer", "reps"?, "seed"?} -> 201 {"id", "total"}
///   GET  /api/session/{id}/trial      {"done", "session", "trial_index", "total", "left", "right"}
///   POST /api/session/{id}/response   {"trial_index", "choice": "left"|"right"} -> 200, 409 when stale
///   GET  /api/stimulus/{key}          image/png bytes
///   GET  /api/session/{id}/summary    per-level counts
class ExperimentService {
public:
    ExperimentService(ExperimentStore& store, ServiceOptions options);
    ~ExperimentService();

    /// Binds the socket; returns the bound port.
    int bind();
    /// Serves until stop() is called. bind() must have succeeded.
    void serve();
    /// Blocks until serve() accepts connections.
    void wait_ready();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace invt
