#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mrkl/experts.hpp"

namespace mrkl::router {

class RegistrationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExpertError {
    std::string expert;
    std::string message;
};

struct RoutingDecision {
    std::string input;
    // Registration order, fallback last. The fallback always scores 0.
    std::vector<std::pair<std::string, double>> scores;
    std::string chosen;
    bool used_fallback = false;
    experts::ExpertResponse response;
    std::vector<ExpertError> errors;
    // Decline reasons, for the trace.
    std::vector<std::pair<std::string, std::string>> declines;

    std::optional<double> score(const std::string& expert) const;
};

class Router {
public:
    explicit Router(std::shared_ptr<const experts::Expert> fallback, double threshold = 0.5);

    /// Appends an expert. Throws RegistrationError on a duplicate name.
    void register_expert(std::shared_ptr<const experts::Expert> expert);

    RoutingDecision route(std::string_view text) const;

    double threshold() const { return threshold_; }
    /// Registered experts in order, fallback last.
    std::vector<std::shared_ptr<const experts::Expert>> experts() const;

private:
    std::shared_ptr<const experts::Expert> fallback_;
    double threshold_;
    std::vector<std::shared_ptr<const experts::Expert>> experts_;
};

inline constexpr int kTraceFormatVersion = 1;

/// One JSON object per decision, suitable for a JSON Lines log.
nlohmann::ordered_json to_json(const RoutingDecision& d);

}  // namespace mrkl::router
