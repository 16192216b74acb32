#pragma once

#include <chrono>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mrkl {

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Request/response over single text lines. One request in flight at a time.
class LineChannel {
public:
    virtual ~LineChannel() = default;
    /// Sends `request` (newlines flattened to spaces) and returns the reply
    /// without its trailing newline. Throws TransportError.
    virtual std::string exchange(std::string_view request) = 0;
};

/// Child process started with /bin/sh -c, spoken to over its stdin/stdout.
class ProcessChannel : public LineChannel {
public:
    explicit ProcessChannel(std::string command,
                            std::chrono::milliseconds timeout = std::chrono::seconds(30));
    ~ProcessChannel() override;
    ProcessChannel(const ProcessChannel&) = delete;
    ProcessChannel& operator=(const ProcessChannel&) = delete;

    std::string exchange(std::string_view request) override;

private:
    void start();
    void stop();

    std::string command_;
    std::chrono::milliseconds timeout_;
    std::mutex mutex_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

/// In-process channel backed by a function; handy for tests and adapters.
class FunctionChannel : public LineChannel {
public:
    explicit FunctionChannel(std::function<std::string(std::string_view)> fn) : fn_(std::move(fn)) {}
    std::string exchange(std::string_view request) override;

private:
    std::mutex mutex_;
    std::function<std::string(std::string_view)> fn_;
};

/// Replaces CR/LF with spaces so a request always fits one line.
std::string flatten_line(std::string_view text);

}  // namespace mrkl
