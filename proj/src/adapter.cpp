#include "invt/adapter.hpp"

#include "invt/error.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <csignal>
#include <cstring>
#include <mutex>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace invt {

namespace {

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

bool has_space(const std::string& s) {
    return s.find_first_of(" \t\r\n") != std::string::npos;
}

}  // namespace

AdapterSession::AdapterSession(std::vector<std::string> command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
    if (command_.empty()) throw MetricError("external metric has an empty command");
    ignore_sigpipe();

    int in_pipe[2], out_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0) throw MetricError(std::string("pipe: ") + std::strerror(errno));
    if (pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw MetricError(std::string("pipe: ") + std::strerror(errno));
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

    std::vector<char*> argv;
    for (auto& a : command_) argv.push_back(a.data());
    argv.push_back(nullptr);
    const int rc = posix_spawnp(&pid_, argv[0], &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    if (rc != 0) {
        pid_ = -1;
        ::close(to_child_);
        ::close(from_child_);
        to_child_ = from_child_ = -1;
        throw MetricError("cannot start adapter '" + command_[0] + "': " + std::strerror(rc));
    }

    send("HELLO 1");
    const auto reply = split_ws(receive());
    if (reply.size() != 3 || reply[0] != "READY" || (reply[2] != "distance" && reply[2] != "similarity"))
        fail("expected 'READY <name> <distance|similarity>'");
    name_ = reply[1];
    similarity_ = reply[2] == "similarity";
}

AdapterSession::~AdapterSession() {
    if (pid_ > 0) kill_child();
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
}

double AdapterSession::query(const std::string& reference_path, const std::string& distorted_path) {
    if (pid_ <= 0) throw MetricError("adapter session is closed", transcript_);
    if (has_space(reference_path) || has_space(distorted_path) || reference_path.empty() ||
        distorted_path.empty())
        throw MetricError("image paths sent to adapters must be non-empty and free of whitespace: '" +
                              reference_path + "', '" + distorted_path + "'",
                          transcript_);
    send("PAIR " + reference_path + " " + distorted_path);
    const auto reply = split_ws(receive());
    if (reply.size() != 2 || reply[0] != "DIST") fail("expected 'DIST <value>'");
    double v = 0.0;
    const auto& tok = reply[1];
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v))
        fail("malformed distance value '" + tok + "'");
    return v;
}

void AdapterSession::close() {
    if (pid_ <= 0) return;
    send("BYE");
    ::close(to_child_);
    to_child_ = -1;
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    int status = 0;
    for (;;) {
        const pid_t r = waitpid(pid_, &status, WNOHANG);
        if (r == pid_) break;
        if (r < 0) fail(std::string("waitpid: ") + std::strerror(errno));
        if (std::chrono::steady_clock::now() > deadline) fail("adapter did not exit after BYE");
        usleep(1000);
    }
    pid_ = -1;
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        transcript_ += "# exit status " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) + "\n";
        throw MetricError("adapter exited abnormally after BYE", transcript_);
    }
}

void AdapterSession::send(const std::string& line) {
    transcript_ += "> " + line + "\n";
    const std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(std::string("write to adapter failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

std::string AdapterSession::receive() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            transcript_ += "< " + line + "\n";
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) fail("timed out waiting for adapter reply");
        pollfd pfd{from_child_, POLLIN, 0};
        const int pr = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (pr < 0) {
            if (errno == EINTR) continue;
            fail(std::string("poll: ") + std::strerror(errno));
        }
        if (pr == 0) continue;
        char chunk[4096];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(std::string("read from adapter failed: ") + std::strerror(errno));
        }
        if (n == 0) fail("adapter closed its output (crashed or exited)");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

void AdapterSession::fail(const std::string& what) {
    kill_child();
    throw MetricError("adapter '" + command_[0] + "': " + what, transcript_);
}

void AdapterSession::kill_child() noexcept {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGKILL);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
}

}  // namespace invt
