#include "mrkl/line_channel.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace mrkl {

std::string flatten_line(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

std::string FunctionChannel::exchange(std::string_view request) {
    std::lock_guard lock(mutex_);
    return fn_(flatten_line(request));
}

ProcessChannel::ProcessChannel(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
    // A dead child must surface as EPIPE, not kill the caller.
    std::signal(SIGPIPE, SIG_IGN);
    start();
}

ProcessChannel::~ProcessChannel() { stop(); }

void ProcessChannel::start() {
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) throw TransportError("pipe: " + std::string(std::strerror(errno)));
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw TransportError("pipe: " + std::string(std::strerror(errno)));
    }
    pid_t pid = fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
        throw TransportError("fork: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

void ProcessChannel::stop() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
        int status = 0;
        if (waitpid(pid_, &status, WNOHANG) == 0) {
            kill(pid_, SIGTERM);
            waitpid(pid_, &status, 0);
        }
    }
    pid_ = -1;
}

std::string ProcessChannel::exchange(std::string_view request) {
    std::lock_guard lock(mutex_);
    if (to_child_ < 0) throw TransportError("backend '" + command_ + "' is not running");

    std::string line = flatten_line(request) + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        ssize_t n = write(to_child_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError("backend '" + command_ + "' write failed: " + std::strerror(errno));
        }
        written += static_cast<std::size_t>(n);
    }

    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (true) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string reply = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!reply.empty() && reply.back() == '\r') reply.pop_back();
            return reply;
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) throw TransportError("backend '" + command_ + "' timed out");
        pollfd pfd{from_child_, POLLIN, 0};
        int ready = poll(&pfd, 1, static_cast<int>(left.count()));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw TransportError("backend '" + command_ + "' poll failed: " + std::strerror(errno));
        }
        if (ready == 0) continue;
        char chunk[4096];
        ssize_t n = read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError("backend '" + command_ + "' read failed: " + std::strerror(errno));
        }
        if (n == 0) throw TransportError("backend '" + command_ + "' closed its output");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

}  // namespace mrkl
