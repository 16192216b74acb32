#include <doctest.h>

#include <random>

#include "mrkl/router.hpp"

using namespace mrkl;
using namespace mrkl::experts;
using mrkl::router::RegistrationError;
using mrkl::router::Router;

namespace {

// Answers anything containing `needle` with a fixed confidence.
class KeywordExpert : public Expert {
public:
    KeywordExpert(std::string name, std::string needle, double confidence)
        : d_{std::move(name), ExpertKind::Symbolic, "test"}, needle_(std::move(needle)), confidence_(confidence) {}
    const ExpertDescriptor& descriptor() const override { return d_; }
    Outcome handle(std::string_view text) const override {
        if (text.find(needle_) == std::string_view::npos) return Decline{"no " + needle_};
        return ExpertResponse{d_.name, std::monostate{}, confidence_, d_.name + ": matched " + needle_};
    }

private:
    ExpertDescriptor d_;
    std::string needle_;
    double confidence_;
};

class ThrowingExpert : public Expert {
public:
    const ExpertDescriptor& descriptor() const override { return d_; }
    Outcome handle(std::string_view) const override { throw std::runtime_error("boom"); }

private:
    ExpertDescriptor d_{"broken", ExpertKind::Symbolic, "always throws"};
};

std::shared_ptr<const Expert> fallback() {
    return std::make_shared<FallbackExpert>(std::make_shared<StubCompletion>());
}

Router standard() {
    using namespace std::chrono;
    Router r(fallback());
    r.register_expert(std::make_shared<CalculatorExpert>(std::make_shared<extractor::ReferenceExtractor>()));
    r.register_expert(std::make_shared<DateExpert>(fixed_clock(year{2022} / May / 1)));
    return r;
}

}  // namespace

TEST_CASE("routing examples") {
    auto r = standard();
    auto d = r.route("How much is 58 plus 12?");
    CHECK(d.chosen == "calculator");
    CHECK_FALSE(d.used_fallback);
    CHECK(d.response.answer_text == "70");

    d = r.route("Tell me a story");
    CHECK(d.chosen == "fallback");
    CHECK(d.used_fallback);
    CHECK(d.response.answer_text == "unhandled by symbolic experts");

    d = r.route("What is today's date?");
    CHECK(d.chosen == "date");
    CHECK(d.response.answer_text == "2022-05-01");

    REQUIRE(d.scores.size() == 3);
    CHECK(d.scores[0].first == "calculator");
    CHECK(d.scores[1].first == "date");
    CHECK(d.scores[2].first == "fallback");
    CHECK(*d.score("date") == 1.0);
    CHECK(*d.score("calculator") == 0.0);
}

TEST_CASE("registration") {
    auto r = standard();
    using namespace std::chrono;
    CHECK_THROWS_AS(r.register_expert(std::make_shared<DateExpert>(fixed_clock(year{2022} / May / 1))),
                    RegistrationError);
    CHECK_THROWS_AS(r.register_expert(fallback()), RegistrationError);
    CHECK(r.experts().size() == 3);
    CHECK_THROWS_AS(Router(nullptr), RegistrationError);
    CHECK_THROWS_AS(Router(fallback(), 1.5), std::invalid_argument);

    Router empty(fallback());
    for (const char* text : {"How much is 1 plus 1", "hello", ""}) {
        auto d = empty.route(text);
        CHECK(d.chosen == "fallback");
        CHECK(d.used_fallback);
        CHECK(d.scores.size() == 1);
    }
}

TEST_CASE("ties go to the first registered expert") {
    auto a = std::make_shared<KeywordExpert>("alpha", "x", 1.0);
    auto b = std::make_shared<KeywordExpert>("beta", "x", 1.0);
    Router ab(fallback());
    ab.register_expert(a);
    ab.register_expert(b);
    Router ba(fallback());
    ba.register_expert(b);
    ba.register_expert(a);
    CHECK(ab.route("x").chosen == "alpha");
    CHECK(ba.route("x").chosen == "beta");
    // order only matters for ties
    auto c = std::make_shared<KeywordExpert>("gamma", "y", 1.0);
    ab.register_expert(c);
    ba.register_expert(std::make_shared<KeywordExpert>("gamma", "y", 1.0));
    CHECK(ab.route("y").chosen == ba.route("y").chosen);
}

TEST_CASE("threshold and argmax") {
    Router r(fallback(), 0.5);
    r.register_expert(std::make_shared<KeywordExpert>("low", "q", 0.4));
    r.register_expert(std::make_shared<KeywordExpert>("mid", "q", 0.6));
    r.register_expert(std::make_shared<KeywordExpert>("high", "q", 0.9));
    auto d = r.route("q");
    CHECK(d.chosen == "high");

    Router strict(fallback(), 0.95);
    strict.register_expert(std::make_shared<KeywordExpert>("high", "q", 0.9));
    CHECK(strict.route("q").used_fallback);

    // scaling every confidence by the same factor keeps the winner while all stay above threshold
    Router scaled(fallback(), 0.3);
    scaled.register_expert(std::make_shared<KeywordExpert>("low", "q", 0.4 * 0.8));
    scaled.register_expert(std::make_shared<KeywordExpert>("mid", "q", 0.6 * 0.8));
    scaled.register_expert(std::make_shared<KeywordExpert>("high", "q", 0.9 * 0.8));
    CHECK(scaled.route("q").chosen == "high");
}

TEST_CASE("an expert error scores zero and is traced") {
    Router r(fallback());
    r.register_expert(std::make_shared<ThrowingExpert>());
    r.register_expert(std::make_shared<CalculatorExpert>(std::make_shared<extractor::ReferenceExtractor>()));
    auto d = r.route("How much is 2 times 3");
    CHECK(d.chosen == "calculator");
    REQUIRE(d.errors.size() == 1);
    CHECK(d.errors[0].expert == "broken");
    CHECK(d.errors[0].message == "boom");
    CHECK(*d.score("broken") == 0.0);
}

TEST_CASE("non-interference and totality") {
    auto base = standard();
    auto extended = standard();
    extended.register_expert(std::make_shared<KeywordExpert>("never", "\x01", 1.0));
    extended.register_expert(std::make_shared<ThrowingExpert>());

    std::mt19937_64 rng(99);
    const std::vector<std::string> vocab{"how", "much", "is", "plus", "minus", "the", "sum", "of", "and",
                                         "date", "today's", "what", "7", "12", "three", "?", "(", ")", "*",
                                         "divided", "by", "over", "zero", "0", "look", "up", "convert", "USD"};
    for (int i = 0; i < 1000; ++i) {
        std::string text;
        const int n = static_cast<int>(rng() % 8);
        for (int k = 0; k < n; ++k) text += vocab[rng() % vocab.size()] + " ";
        auto a = base.route(text);
        auto b = extended.route(text);
        REQUIRE_FALSE(a.chosen.empty());
        CHECK(a.chosen == b.chosen);
        CHECK(a.response.answer_text == b.response.answer_text);
        CHECK(b.scores.size() == 5);
    }
}

TEST_CASE("trace JSON") {
    auto r = standard();
    auto j = router::to_json(r.route("How much is three minus 1"));
    CHECK(j["version"] == 1);
    CHECK(j["chosen"] == "calculator");
    CHECK(j["scores"]["calculator"] == 1.0);
    CHECK(j["response"]["answer"] == "2");
    auto back = nlohmann::json::parse(j.dump());
    CHECK(back["input"] == "How much is three minus 1");
}
