#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <sys/types.h>

namespace invt {

/// One conversation with an external metric process over its stdin/stdout.
///
/// Wire format, one line per message:
///   parent: HELLO 1                 child: READY <name> <distance|similarity>
///   parent: PAIR <ref> <dist>       child: DIST <decimal float>
///   parent: BYE                     child exits with status 0
/// Any other reply is a protocol error. A session handles one request at a time.
class AdapterSession {
public:
    AdapterSession(std::vector<std::string> command, std::chrono::milliseconds timeout);
    ~AdapterSession();

    AdapterSession(const AdapterSession&) = delete;
    AdapterSession& operator=(const AdapterSession&) = delete;

    const std::string& metric_name() const noexcept { return name_; }
    bool similarity() const noexcept { return similarity_; }

    /// Raw value the adapter reports for the pair (no polarity conversion).
    double query(const std::string& reference_path, const std::string& distorted_path);

    /// Sends BYE and waits for a clean exit.
    void close();

    const std::string& transcript() const noexcept { return transcript_; }

private:
    void send(const std::string& line);
    std::string receive();
    [[noreturn]] void fail(const std::string& what);
    void kill_child() noexcept;

    std::vector<std::string> command_;
    std::chrono::milliseconds timeout_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::string transcript_;
    std::string name_;
    bool similarity_ = false;
};

}  // namespace invt
