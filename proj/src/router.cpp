#include "mrkl/router.hpp"

#include <algorithm>

namespace mrkl::router {

std::optional<double> RoutingDecision::score(const std::string& expert) const {
    for (const auto& [name, s] : scores) {
        if (name == expert) return s;
    }
    return std::nullopt;
}

Router::Router(std::shared_ptr<const experts::Expert> fallback, double threshold)
    : fallback_(std::move(fallback)), threshold_(threshold) {
    if (!fallback_) throw RegistrationError("router needs a fallback expert");
    if (!(threshold_ >= 0.0 && threshold_ <= 1.0)) throw std::invalid_argument("threshold must lie in [0,1]");
}

void Router::register_expert(std::shared_ptr<const experts::Expert> expert) {
    if (!expert) throw RegistrationError("cannot register a null expert");
    const auto& name = expert->descriptor().name;
    if (name == fallback_->descriptor().name) throw RegistrationError("expert name '" + name + "' is taken by the fallback");
    for (const auto& e : experts_) {
        if (e->descriptor().name == name) throw RegistrationError("expert '" + name + "' is already registered");
    }
    experts_.push_back(std::move(expert));
}

std::vector<std::shared_ptr<const experts::Expert>> Router::experts() const {
    auto all = experts_;
    all.push_back(fallback_);
    return all;
}

RoutingDecision Router::route(std::string_view text) const {
    RoutingDecision d;
    d.input = std::string(text);
    std::optional<experts::ExpertResponse> best;
    double best_score = -1.0;

    for (const auto& e : experts_) {
        const auto& name = e->descriptor().name;
        double s = 0.0;
        try {
            auto outcome = e->handle(text);
            s = std::clamp(experts::confidence_of(outcome), 0.0, 1.0);
            if (auto* decline = std::get_if<experts::Decline>(&outcome)) {
                d.declines.emplace_back(name, decline->reason);
            } else if (s >= threshold_ && s > best_score) {
                // strict > keeps the earliest registration on ties
                best_score = s;
                best = std::get<experts::ExpertResponse>(std::move(outcome));
                d.chosen = name;
            }
        } catch (const std::exception& ex) {
            d.errors.push_back({name, ex.what()});
        } catch (...) {
            d.errors.push_back({name, "unknown error"});
        }
        d.scores.emplace_back(name, s);
    }
    d.scores.emplace_back(fallback_->descriptor().name, 0.0);

    if (best) {
        d.response = std::move(*best);
        return d;
    }
    d.chosen = fallback_->descriptor().name;
    d.used_fallback = true;
    try {
        auto outcome = fallback_->handle(text);
        if (auto* r = std::get_if<experts::ExpertResponse>(&outcome)) {
            d.response = std::move(*r);
        } else {
            const auto& reason = std::get<experts::Decline>(outcome).reason;
            d.response = {"", experts::ErrorPayload{"fallback declined: " + reason}, 0.0, "fallback declined"};
        }
    } catch (const std::exception& ex) {
        d.errors.push_back({d.chosen, ex.what()});
        d.response = {std::string("error: ") + ex.what(), experts::ErrorPayload{ex.what()}, 0.0,
                      "fallback: " + std::string(ex.what())};
    }
    return d;
}

nlohmann::ordered_json to_json(const RoutingDecision& d) {
    nlohmann::ordered_json j;
    j["version"] = kTraceFormatVersion;
    j["input"] = d.input;
    j["chosen"] = d.chosen;
    j["used_fallback"] = d.used_fallback;
    auto scores = nlohmann::ordered_json::object();
    for (const auto& [name, s] : d.scores) scores[name] = s;
    j["scores"] = scores;
    j["response"] = experts::to_json(d.response);
    auto declines = nlohmann::ordered_json::object();
    for (const auto& [name, reason] : d.declines) declines[name] = reason;
    j["declines"] = declines;
    auto errors = nlohmann::ordered_json::array();
    for (const auto& e : d.errors) errors.push_back({{"expert", e.expert}, {"message", e.message}});
    j["errors"] = errors;
    return j;
}

}  // namespace mrkl::router
