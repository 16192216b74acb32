#include "mrkl/experts.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mrkl::experts {

namespace {

// Lowercased words with apostrophes removed and sentence punctuation
// stripped from word edges. Inner dots survive ("2.5").
std::vector<std::string> simple_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    auto flush = [&]() {
        while (!cur.empty() && std::string_view("?!.,;:\"").find(cur.back()) != std::string_view::npos) {
            cur.pop_back();
        }
        while (!cur.empty() && std::string_view("\"(").find(cur.front()) != std::string_view::npos) {
            cur.erase(cur.begin());
        }
        if (!cur.empty()) words.push_back(std::move(cur));
        cur.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else if (c == '\'') {
            continue;
        } else if (text.substr(i, 3) == "\xE2\x80\x99") {
            i += 2;
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    flush();
    return words;
}

std::string join(const std::vector<std::string>& words, std::size_t from = 0) {
    std::string out;
    for (std::size_t i = from; i < words.size(); ++i) {
        if (!out.empty()) out += ' ';
        out += words[i];
    }
    return out;
}

bool starts_with(const std::vector<std::string>& words, std::initializer_list<std::string_view> prefix) {
    if (words.size() < prefix.size()) return false;
    return std::equal(prefix.begin(), prefix.end(), words.begin());
}

std::optional<std::string> currency_code(const std::string& w) {
    if (w.size() != 3 || !std::all_of(w.begin(), w.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
        return std::nullopt;
    }
    std::string up = w;
    for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return up;
}

std::optional<arith::ExactNumber> amount(const std::string& w) {
    if (w.empty() || w.front() == '-') return std::nullopt;
    try {
        return arith::ExactNumber::parse(w);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

nlohmann::json parse_line(const std::string& line, std::size_t line_no, const std::string& what) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ResourceError(what + " line " + std::to_string(line_no) + ": " + e.what());
    }
}

void check_header(const nlohmann::json& header, std::string_view kind, const std::string& what) {
    if (!header.is_object() || header.value("kind", "") != kind) {
        throw ResourceError(what + ": first line must be a header with kind \"" + std::string(kind) + "\"");
    }
    if (header.value("version", 0) != 1) throw ResourceError(what + ": unsupported version");
}

}  // namespace

std::string_view to_string(ExpertKind k) { return k == ExpertKind::Symbolic ? "symbolic" : "neural-proxy"; }

double confidence_of(const Outcome& o) {
    if (const auto* r = std::get_if<ExpertResponse>(&o)) return r->confidence;
    return 0.0;
}

// ---------------------------------------------------------------------------
// Calculator

CalculatorExpert::CalculatorExpert(std::shared_ptr<const extractor::ExtractorBackend> backend)
    : descriptor_{"calculator", ExpertKind::Symbolic,
                  "Exact arithmetic on one- and two-operation questions extracted from text"},
      backend_(std::move(backend)) {}

Outcome CalculatorExpert::handle(std::string_view text) const {
    auto result = backend_->extract(text);
    if (const auto* np = std::get_if<extractor::NoParse>(&result)) {
        std::string reason(extractor::to_string(np->reason));
        if (!np->detail.empty()) reason += ": " + np->detail;
        return Decline{reason};
    }
    const auto& ex = std::get<extractor::Extraction>(result);
    const std::string call = arith::to_calculator_call(ex.expr);
    try {
        auto value = arith::evaluate(ex.expr);
        return ExpertResponse{value.to_string(), value, ex.confidence,
                              "calculator: " + call + " = " + value.to_string()};
    } catch (const arith::EvaluationError& e) {
        return ExpertResponse{std::string("error: ") + e.what(), ErrorPayload{e.what()}, ex.confidence,
                              "calculator: " + call + " failed: " + e.what()};
    }
}

// ---------------------------------------------------------------------------
// Date

Clock fixed_clock(std::chrono::year_month_day day) {
    return [day] { return day; };
}

Clock system_clock() {
    return [] { return std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())}; };
}

std::chrono::year_month_day parse_iso_date(std::string_view s) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    std::string str(s);
    if (s.size() != 10 || std::sscanf(str.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
        throw std::invalid_argument("expected a YYYY-MM-DD date, got '" + str + "'");
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date '" + str + "'");
    return ymd;
}

std::string format_iso_date(std::chrono::year_month_day d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

DateExpert::DateExpert(Clock clock)
    : descriptor_{"date", ExpertKind::Symbolic, "Answers questions about today's date from an injected clock"},
      clock_(std::move(clock)) {}

Outcome DateExpert::handle(std::string_view text) const {
    static const std::set<std::string, std::less<>> patterns{
        "what is todays date",  "whats todays date",   "what is the date",      "whats the date",
        "what is the date today", "whats the date today", "what date is it",    "what date is it today",
        "todays date",          "what is the current date", "whats the current date", "current date",
        "tell me todays date",  "tell me the date"};
    const std::string normalized = join(simple_words(text));
    if (!patterns.count(normalized)) return Decline{"not a date question"};
    const auto today = clock_();
    const std::string iso = format_iso_date(today);
    return ExpertResponse{iso, today, 1.0, "date: clock reports " + iso};
}

// ---------------------------------------------------------------------------
// Currency

std::optional<arith::ExactNumber> RateTable::rate(const std::string& from, const std::string& to) const {
    if (auto it = rates.find({from, to}); it != rates.end()) return it->second;
    if (auto it = rates.find({to, from}); it != rates.end() && !it->second.is_zero()) {
        return arith::ExactNumber(1) / it->second;
    }
    return std::nullopt;
}

RateTable parse_rates(std::istream& in) {
    RateTable table;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = parse_line(line, line_no, "rates file");
        if (!header_seen) {
            check_header(j, "rates", "rates file");
            table.timestamp = j.value("timestamp", "");
            header_seen = true;
            continue;
        }
        try {
            auto from = currency_code(j.at("from").get<std::string>());
            auto to = currency_code(j.at("to").get<std::string>());
            if (!from || !to) throw std::invalid_argument("currency codes are three letters");
            auto rate = arith::ExactNumber::parse(j.at("rate").get<std::string>());
            if (rate <= arith::ExactNumber(0)) throw std::invalid_argument("rates must be positive");
            table.rates[{*from, *to}] = rate;
        } catch (const std::exception& e) {
            throw ResourceError("rates file line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!header_seen) throw ResourceError("rates file: missing header");
    return table;
}

RateTable load_rates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open rates file '" + path + "'");
    return parse_rates(in);
}

CurrencyExpert::CurrencyExpert(std::optional<RateTable> rates, std::string status)
    : descriptor_{"currency", ExpertKind::Symbolic, "Converts amounts between currencies using a loaded rate table"},
      rates_(std::move(rates)),
      status_(std::move(status)) {}

Outcome CurrencyExpert::handle(std::string_view text) const {
    auto w = simple_words(text);
    std::optional<arith::ExactNumber> amt;
    std::optional<std::string> from;
    std::optional<std::string> to;
    auto is_link = [](const std::string& s) { return s == "to" || s == "into" || s == "in"; };
    auto try_match = [&](std::size_t at) {
        if (w.size() != at + 4 || !is_link(w[at + 2])) return false;
        amt = amount(w[at]);
        from = currency_code(w[at + 1]);
        to = currency_code(w[at + 3]);
        return amt && from && to;
    };
    const bool matched = (starts_with(w, {"convert"}) && try_match(1)) ||
                         (starts_with(w, {"how", "much", "is"}) && try_match(3)) ||
                         (starts_with(w, {"what", "is"}) && try_match(2)) || try_match(0);
    if (!matched) return Decline{"not a currency conversion"};
    if (!rates_) return Decline{"no rate table loaded (" + status_ + ")"};
    auto rate = rates_->rate(*from, *to);
    if (!rate) return Decline{"unknown currency pair " + *from + "->" + *to};
    auto converted = *amt * *rate;
    std::string answer = converted.to_string() + " " + *to;
    std::string rationale = "currency: " + amt->to_string() + " " + *from + " x " + rate->to_string() + " (" + *from +
                            "->" + *to + " rate";
    if (!rates_->timestamp.empty()) rationale += " as of " + rates_->timestamp;
    rationale += ") = " + answer;
    return ExpertResponse{answer, Money{converted, *to}, 1.0, rationale};
}

// ---------------------------------------------------------------------------
// Database

RecordStore parse_records(std::istream& in) {
    RecordStore store;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = parse_line(line, line_no, "records file");
        if (!header_seen) {
            check_header(j, "records", "records file");
            store.name = j.value("name", "records");
            header_seen = true;
            continue;
        }
        if (!j.is_object() || !j.contains("key") || !j["key"].is_string() || !j.contains("record")) {
            throw ResourceError("records file line " + std::to_string(line_no) + ": expected {\"key\":..., \"record\":...}");
        }
        store.records[join(simple_words(j["key"].get<std::string>()))] = j["record"];
    }
    if (!header_seen) throw ResourceError("records file: missing header");
    return store;
}

RecordStore load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open records file '" + path + "'");
    return parse_records(in);
}

DatabaseExpert::DatabaseExpert(std::optional<RecordStore> store, std::string status)
    : descriptor_{"database", ExpertKind::Symbolic, "Looks up records by key in a loaded record store"},
      store_(std::move(store)),
      status_(std::move(status)) {}

Outcome DatabaseExpert::handle(std::string_view text) const {
    static const std::vector<std::vector<std::string>> prefixes{
        {"look", "up"}, {"lookup"}, {"find", "record"}, {"show", "record"}, {"retrieve", "record"}};
    auto w = simple_words(text);
    std::optional<std::size_t> key_at;
    for (const auto& p : prefixes) {
        if (w.size() > p.size() && std::equal(p.begin(), p.end(), w.begin())) {
            key_at = p.size();
            if (w[*key_at] == "for" && w.size() > *key_at + 1) ++*key_at;
            break;
        }
    }
    if (!key_at) return Decline{"not a lookup request"};
    if (!store_) return Decline{"no record store loaded (" + status_ + ")"};
    const std::string key = join(w, *key_at);
    auto it = store_->records.find(key);
    if (it == store_->records.end()) {
        return ExpertResponse{"no record for '" + key + "' in " + store_->name, RecordPayload{store_->name, key, std::nullopt},
                              1.0, "database: store '" + store_->name + "' has no key '" + key + "'"};
    }
    return ExpertResponse{it->second.dump(), RecordPayload{store_->name, key, it->second}, 1.0,
                          "database: store '" + store_->name + "', key '" + key + "'"};
}

// ---------------------------------------------------------------------------
// Fallback

std::unique_ptr<CompletionBackend> make_completion_backend(std::string_view spec) {
    if (spec == "stub") return std::make_unique<StubCompletion>();
    if (spec == "echo") return std::make_unique<EchoCompletion>();
    if (spec.rfind("exec:", 0) == 0) {
        return std::make_unique<ChannelCompletion>(std::string(spec),
                                                   std::make_unique<ProcessChannel>(std::string(spec.substr(5))));
    }
    throw std::invalid_argument("unknown completion backend '" + std::string(spec) +
                                "' (expected stub, echo or exec:<command>)");
}

FallbackExpert::FallbackExpert(std::shared_ptr<const CompletionBackend> backend)
    : descriptor_{"fallback", ExpertKind::NeuralProxy, "General-purpose language model for everything else"},
      backend_(std::move(backend)) {}

Outcome FallbackExpert::handle(std::string_view text) const {
    try {
        auto completion = backend_->complete(text);
        return ExpertResponse{completion, Completion{completion}, 0.0,
                              "fallback: completion from backend '" + backend_->name() + "'"};
    } catch (const std::exception& e) {
        return ExpertResponse{std::string("fallback backend error: ") + e.what(), ErrorPayload{e.what()}, 0.0,
                              "fallback: backend '" + backend_->name() + "' failed"};
    }
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json payload_to_json(const Payload& p) {
    nlohmann::ordered_json j;
    std::visit(
        [&j](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                j = nullptr;
            } else if constexpr (std::is_same_v<T, arith::ExactNumber>) {
                j = {{"type", "number"}, {"value", v.to_string()}};
            } else if constexpr (std::is_same_v<T, std::chrono::year_month_day>) {
                j = {{"type", "date"}, {"value", format_iso_date(v)}};
            } else if constexpr (std::is_same_v<T, Money>) {
                j = {{"type", "money"}, {"amount", v.amount.to_string()}, {"currency", v.currency}};
            } else if constexpr (std::is_same_v<T, RecordPayload>) {
                j = {{"type", "record"}, {"store", v.store}, {"key", v.key}, {"found", v.record.has_value()}};
                if (v.record) j["record"] = *v.record;
            } else if constexpr (std::is_same_v<T, Completion>) {
                j = {{"type", "completion"}, {"text", v.text}};
            } else {
                j = {{"type", "error"}, {"message", v.message}};
            }
        },
        p);
    return j;
}

nlohmann::ordered_json to_json(const ExpertResponse& r) {
    nlohmann::ordered_json j;
    j["answer"] = r.answer_text;
    j["payload"] = payload_to_json(r.payload);
    j["confidence"] = r.confidence;
    j["rationale"] = r.rationale;
    return j;
}

}  // namespace mrkl::experts
