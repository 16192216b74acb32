#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include <json.hpp>

#include "mrkl/arithmetic.hpp"
#include "mrkl/extractor.hpp"
#include "mrkl/line_channel.hpp"

namespace mrkl::experts {

enum class ExpertKind { Symbolic, NeuralProxy };

std::string_view to_string(ExpertKind k);

struct ExpertDescriptor {
    std::string name;
    ExpertKind kind = ExpertKind::Symbolic;
    std::string description;
};

struct Money {
    arith::ExactNumber amount;
    std::string currency;
};

struct RecordPayload {
    std::string store;
    std::string key;
    std::optional<nlohmann::json> record;  // empty when the key is absent
};

struct Completion {
    std::string text;
};

struct ErrorPayload {
    std::string message;
};

using Payload = std::variant<std::monostate, arith::ExactNumber, std::chrono::year_month_day, Money,
                             RecordPayload, Completion, ErrorPayload>;

struct ExpertResponse {
    std::string answer_text;
    Payload payload;
    double confidence = 0.0;
    std::string rationale;
};

struct Decline {
    std::string reason;
};

using Outcome = std::variant<ExpertResponse, Decline>;

/// Confidence the router sees for an outcome; a Decline scores 0.
double confidence_of(const Outcome& o);

class Expert {
public:
    virtual ~Expert() = default;
    virtual const ExpertDescriptor& descriptor() const = 0;
    virtual Outcome handle(std::string_view text) const = 0;
    /// "ok", or a short description of a missing or broken resource.
    virtual std::string resource_status() const { return "ok"; }
};

// ---------------------------------------------------------------------------

class CalculatorExpert : public Expert {
public:
    explicit CalculatorExpert(std::shared_ptr<const extractor::ExtractorBackend> backend);
    const ExpertDescriptor& descriptor() const override { return descriptor_; }
    Outcome handle(std::string_view text) const override;

private:
    ExpertDescriptor descriptor_;
    std::shared_ptr<const extractor::ExtractorBackend> backend_;
};

using Clock = std::function<std::chrono::year_month_day()>;

Clock fixed_clock(std::chrono::year_month_day day);
Clock system_clock();
/// "YYYY-MM-DD"; throws std::invalid_argument.
std::chrono::year_month_day parse_iso_date(std::string_view s);
std::string format_iso_date(std::chrono::year_month_day d);

class DateExpert : public Expert {
public:
    explicit DateExpert(Clock clock);
    const ExpertDescriptor& descriptor() const override { return descriptor_; }
    Outcome handle(std::string_view text) const override;

private:
    ExpertDescriptor descriptor_;
    Clock clock_;
};

/// Rates file (JSON Lines, version 1):
///   {"version":1,"kind":"rates","timestamp":"2022-05-01T00:00:00Z"}
///   {"from":"USD","to":"MAD","rate":"10.0"}
/// A missing reverse pair is derived as the exact reciprocal.
struct RateTable {
    std::string timestamp;
    std::map<std::pair<std::string, std::string>, arith::ExactNumber> rates;

    std::optional<arith::ExactNumber> rate(const std::string& from, const std::string& to) const;
};

class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

RateTable load_rates(const std::string& path);
RateTable parse_rates(std::istream& in);

class CurrencyExpert : public Expert {
public:
    explicit CurrencyExpert(std::optional<RateTable> rates, std::string status = "ok");
    const ExpertDescriptor& descriptor() const override { return descriptor_; }
    Outcome handle(std::string_view text) const override;
    std::string resource_status() const override { return status_; }

private:
    ExpertDescriptor descriptor_;
    std::optional<RateTable> rates_;
    std::string status_;
};

/// Records file (JSON Lines, version 1):
///   {"version":1,"kind":"records","name":"clients"}
///   {"key":"acme","record":{...}}
/// Keys are matched case-insensitively.
struct RecordStore {
    std::string name;
    std::map<std::string, nlohmann::json> records;
};

RecordStore load_records(const std::string& path);
RecordStore parse_records(std::istream& in);

class DatabaseExpert : public Expert {
public:
    explicit DatabaseExpert(std::optional<RecordStore> store, std::string status = "ok");
    const ExpertDescriptor& descriptor() const override { return descriptor_; }
    Outcome handle(std::string_view text) const override;
    std::string resource_status() const override { return status_; }

private:
    ExpertDescriptor descriptor_;
    std::optional<RecordStore> store_;
    std::string status_;
};

/// General-purpose completion model behind the fallback expert.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual std::string name() const = 0;
    /// Throws TransportError when the backend cannot be reached.
    virtual std::string complete(std::string_view text) const = 0;
};

class StubCompletion : public CompletionBackend {
public:
    static constexpr std::string_view kText = "unhandled by symbolic experts";
    std::string name() const override { return "stub"; }
    std::string complete(std::string_view) const override { return std::string(kText); }
};

class EchoCompletion : public CompletionBackend {
public:
    std::string name() const override { return "echo"; }
    std::string complete(std::string_view text) const override { return std::string(text); }
};

class ChannelCompletion : public CompletionBackend {
public:
    ChannelCompletion(std::string name, std::unique_ptr<LineChannel> channel)
        : name_(std::move(name)), channel_(std::move(channel)) {}
    std::string name() const override { return name_; }
    std::string complete(std::string_view text) const override { return channel_->exchange(text); }

private:
    std::string name_;
    std::unique_ptr<LineChannel> channel_;
};

/// "stub", "echo" or "exec:<shell command>".
std::unique_ptr<CompletionBackend> make_completion_backend(std::string_view spec);

class FallbackExpert : public Expert {
public:
    explicit FallbackExpert(std::shared_ptr<const CompletionBackend> backend);
    const ExpertDescriptor& descriptor() const override { return descriptor_; }
    /// Never declines. Confidence is always 0.
    Outcome handle(std::string_view text) const override;

private:
    ExpertDescriptor descriptor_;
    std::shared_ptr<const CompletionBackend> backend_;
};

nlohmann::ordered_json payload_to_json(const Payload& p);
nlohmann::ordered_json to_json(const ExpertResponse& r);

}  // namespace mrkl::experts
