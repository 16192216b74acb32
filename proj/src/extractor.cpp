#include "mrkl/extractor.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "mrkl/templates.hpp"

namespace mrkl::extractor {

using arith::Expr;
using arith::Op;

namespace {

// Misspellings found in the published two-op phrasing table.
const std::map<std::string, std::string, std::less<>>& spelling_variants() {
    static const std::map<std::string, std::string, std::less<>> variants{
        {"diffrence", "difference"},
        {"bu", "by"},
    };
    return variants;
}

struct Parse {
    Expr expr;
    std::size_t end;
};

struct OpMatch {
    Op op;
    std::size_t end;
    bool swapped;  // "x added to y" means y + x
};

class Parser {
public:
    explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

    std::vector<Expr> utterance() {
        std::vector<Expr> out;
        for (std::size_t start : leads()) {
            for (const auto& p : body(start)) {
                const bool done = p.end == toks_.size() ||
                                  (p.end + 1 == toks_.size() && is_word(p.end, "is"));
                if (!done) continue;
                if (std::none_of(out.begin(), out.end(), [&p](const Expr& e) { return e == p.expr; })) {
                    out.push_back(p.expr);
                }
            }
        }
        return out;
    }

private:
    enum Rule { kExpr, kTerm, kFactor, kBody };

    bool is_word(std::size_t i, std::string_view w) const {
        return i < toks_.size() && toks_[i].kind == Token::Kind::Word && toks_[i].text == w;
    }

    bool is_kind(std::size_t i, Token::Kind k) const { return i < toks_.size() && toks_[i].kind == k; }

    // End position if the words match starting at i.
    std::optional<std::size_t> phrase(std::size_t i, std::initializer_list<std::string_view> words) const {
        for (auto w : words) {
            if (!is_word(i, w)) return std::nullopt;
            ++i;
        }
        return i;
    }

    std::vector<std::size_t> leads() const {
        static const std::vector<std::vector<std::string_view>> kLeads{
            {"how", "much", "is"}, {"what", "is"}, {"whats"}, {"calculate"}, {"compute"}, {"evaluate"}};
        std::vector<std::size_t> out{0};
        for (const auto& words : kLeads) {
            std::size_t i = 0;
            while (i < words.size() && is_word(i, words[i])) ++i;
            if (i != words.size()) continue;
            out.push_back(i);
            if (auto q = phrase(i, {"the", "result", "of"})) out.push_back(*q);
        }
        return out;
    }

    std::vector<OpMatch> additive_ops(std::size_t i) const {
        std::vector<OpMatch> out;
        if (is_word(i, "plus") || is_kind(i, Token::Kind::Plus)) out.push_back({Op::Add, i + 1, false});
        if (is_word(i, "minus") || is_word(i, "less") || is_kind(i, Token::Kind::Minus)) {
            out.push_back({Op::Sub, i + 1, false});
        }
        if (auto p = phrase(i, {"added", "to"})) out.push_back({Op::Add, *p, true});
        return out;
    }

    std::vector<OpMatch> multiplicative_ops(std::size_t i) const {
        std::vector<OpMatch> out;
        if (is_word(i, "times") || is_kind(i, Token::Kind::Times)) out.push_back({Op::Mul, i + 1, false});
        if (auto p = phrase(i, {"multiplied", "by"})) out.push_back({Op::Mul, *p, false});
        if (is_word(i, "over") || is_kind(i, Token::Kind::Divide)) out.push_back({Op::Div, i + 1, false});
        if (auto p = phrase(i, {"divided", "by"})) out.push_back({Op::Div, *p, false});
        return out;
    }

    using OpsAt = std::vector<OpMatch> (Parser::*)(std::size_t) const;
    using Operand = const std::vector<Parse>& (Parser::*)(std::size_t);

    // Left-associative chain: operand (op operand)*, every prefix kept.
    std::vector<Parse> chain(std::size_t i, Operand operand, OpsAt ops) {
        std::vector<Parse> results = (this->*operand)(i);
        std::vector<Parse> frontier = results;
        while (!frontier.empty()) {
            std::vector<Parse> next;
            for (const auto& lhs : frontier) {
                for (const auto& m : (this->*ops)(lhs.end)) {
                    for (const auto& rhs : (this->*operand)(m.end)) {
                        Expr e = m.swapped ? Expr::node(m.op, rhs.expr, lhs.expr)
                                           : Expr::node(m.op, lhs.expr, rhs.expr);
                        next.push_back({std::move(e), rhs.end});
                    }
                }
            }
            results.insert(results.end(), next.begin(), next.end());
            frontier = std::move(next);
        }
        return results;
    }

    const std::vector<Parse>& expr(std::size_t i) {
        return memo(kExpr, i, [this](std::size_t at) { return chain(at, &Parser::term, &Parser::additive_ops); });
    }

    const std::vector<Parse>& term(std::size_t i) {
        return memo(kTerm, i,
                    [this](std::size_t at) { return chain(at, &Parser::factor, &Parser::multiplicative_ops); });
    }

    const std::vector<Parse>& factor(std::size_t i) {
        return memo(kFactor, i, [this](std::size_t at) {
            std::vector<Parse> out;
            if (is_kind(at, Token::Kind::Number)) {
                out.push_back({Expr::leaf(arith::BigInt(toks_[at].value)), at + 1});
            }
            if (is_kind(at, Token::Kind::LParen)) {
                for (const auto& inner : expr(at + 1)) {
                    if (is_kind(inner.end, Token::Kind::RParen)) out.push_back({inner.expr, inner.end + 1});
                }
            }
            prefix_phrase(at, out);
            return out;
        });
    }

    // ["the"] ("sum of" | "difference between" | "product of" | "ratio between" | "ratio of")
    //   expr "and" expr
    void prefix_phrase(std::size_t i, std::vector<Parse>& out) {
        std::size_t at = is_word(i, "the") ? i + 1 : i;
        struct Head {
            std::string_view first;
            std::string_view second;
            Op op;
        };
        static constexpr Head heads[] = {
            {"sum", "of", Op::Add},     {"difference", "between", Op::Sub}, {"product", "of", Op::Mul},
            {"ratio", "between", Op::Div}, {"ratio", "of", Op::Div},
        };
        for (const auto& head : heads) {
            auto start = phrase(at, {head.first, head.second});
            if (!start) continue;
            binary_args(*start, head.op, out);
        }
    }

    void binary_args(std::size_t i, Op op, std::vector<Parse>& out) {
        for (const auto& a : std::vector<Parse>(expr(i))) {
            if (!is_word(a.end, "and")) continue;
            for (const auto& b : std::vector<Parse>(expr(a.end + 1))) {
                out.push_back({Expr::node(op, a.expr, b.expr), b.end});
            }
        }
    }

    // "sum" expr "and" expr ["and" ("multiply" | "divide") "by" expr]
    const std::vector<Parse>& body(std::size_t i) {
        return memo(kBody, i, [this](std::size_t at) {
            std::vector<Parse> out = expr(at);
            if (is_word(at, "sum")) {
                std::vector<Parse> sums;
                binary_args(at + 1, Op::Add, sums);
                for (const auto& s : sums) {
                    out.push_back(s);
                    for (auto [verb, op] : {std::pair{"multiply", Op::Mul}, std::pair{"divide", Op::Div}}) {
                        if (auto p = phrase(s.end, {"and", verb, "by"})) {
                            for (const auto& c : std::vector<Parse>(expr(*p))) {
                                out.push_back({Expr::node(op, s.expr, c.expr), c.end});
                            }
                        }
                    }
                }
            }
            return out;
        });
    }

    template <typename F>
    const std::vector<Parse>& memo(Rule rule, std::size_t i, F compute) {
        auto key = std::pair{rule, i};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (i >= toks_.size()) return memo_[key];
        // Insert a placeholder first so left-recursion cannot loop; the
        // grammar has none, but an empty entry is the safe answer anyway.
        memo_[key];
        auto result = compute(i);
        auto& slot = memo_[key];
        slot = std::move(result);
        return slot;
    }

    const std::vector<Token>& toks_;
    std::map<std::pair<Rule, std::size_t>, std::vector<Parse>> memo_;
};

std::string shape_of(const std::vector<Token>& toks) {
    std::string out;
    for (const auto& t : toks) {
        if (!out.empty()) out += ' ';
        out += t.kind == Token::Kind::Number ? std::string("#") : t.debug_string();
    }
    return out;
}

std::vector<Token> canonical_words(std::vector<Token> toks) {
    for (auto& t : toks) {
        if (t.kind != Token::Kind::Word) continue;
        if (auto it = spelling_variants().find(t.text); it != spelling_variants().end()) t.text = it->second;
    }
    return toks;
}

// Normalised phrasing shape -> template id, over both catalog spellings.
const std::unordered_map<std::string, std::string>& template_shapes() {
    static const auto shapes = [] {
        std::unordered_map<std::string, std::string> out;
        const std::uint64_t operands[] = {1, 2, 3};
        for (auto spelling : {templates::Spelling::Corrected, templates::Spelling::Verbatim}) {
            for (int arity : {1, 2}) {
                for (const auto& t : templates::catalog(arity, spelling)) {
                    auto text = templates::render_text(t, std::span(operands, t.slot_count()),
                                                       numword::Rendering::Digits);
                    out.emplace(shape_of(canonical_words(normalize(text))), t.id);
                }
            }
        }
        return out;
    }();
    return shapes;
}

}  // namespace

std::string Token::debug_string() const {
    switch (kind) {
        case Kind::Word: return text;
        case Kind::Number: return "NUM(" + std::to_string(value) + ")";
        case Kind::Plus: return "PLUS";
        case Kind::Minus: return "MINUS";
        case Kind::Times: return "TIMES";
        case Kind::Divide: return "DIVIDE";
        case Kind::LParen: return "LPAREN";
        case Kind::RParen: return "RPAREN";
    }
    return "?";
}

std::vector<Token> normalize(std::string_view text, const NormalizeOptions& options) {
    numword::LexOptions lex_options{options.words_enabled, options.lexicon};
    std::vector<Token> out;
    for (auto& item : numword::detail::lex(text, lex_options)) {
        Token tok;
        if (item.is_number) {
            tok.kind = Token::Kind::Number;
            tok.text = item.number.surface;
            tok.value = item.number.value;
            tok.rendering = item.number.rendering;
        } else if (item.raw.kind == numword::detail::RawKind::Symbol) {
            switch (item.raw.text[0]) {
                case '+': tok.kind = Token::Kind::Plus; break;
                case '-': tok.kind = Token::Kind::Minus; break;
                case '*': tok.kind = Token::Kind::Times; break;
                case '/': tok.kind = Token::Kind::Divide; break;
                case '(': tok.kind = Token::Kind::LParen; break;
                default: tok.kind = Token::Kind::RParen; break;
            }
            tok.text = item.raw.text;
        } else {
            tok.kind = Token::Kind::Word;
            tok.text = item.raw.text;
        }
        out.push_back(std::move(tok));
    }
    return out;
}

std::string_view to_string(NoParseReason r) {
    switch (r) {
        case NoParseReason::UnknownVocabulary: return "unknown-vocabulary";
        case NoParseReason::NoTemplateMatch: return "no-template-match";
        case NoParseReason::Ambiguous: return "ambiguous";
    }
    return "?";
}

NoParseReason no_parse_reason_from_string(std::string_view s) {
    if (s == "unknown-vocabulary") return NoParseReason::UnknownVocabulary;
    if (s == "ambiguous") return NoParseReason::Ambiguous;
    if (s == "no-template-match") return NoParseReason::NoTemplateMatch;
    throw std::invalid_argument("unknown NOPARSE reason '" + std::string(s) + "'");
}

const std::vector<std::string>& ReferenceExtractor::vocabulary() {
    static const std::vector<std::string> words{
        "how",      "much",    "is",         "what",   "whats",    "the",     "result",  "of",
        "calculate", "compute", "evaluate",  "sum",    "difference", "between", "product", "ratio",
        "plus",     "minus",   "less",       "times",  "over",     "divided", "by",      "multiplied",
        "added",    "to",      "and",        "multiply", "divide"};
    return words;
}

ReferenceExtractor::ReferenceExtractor(ReferenceOptions options) : options_(std::move(options)) {}

ExtractResult ReferenceExtractor::extract(std::string_view text) const {
    auto toks = canonical_words(normalize(text, {options_.words_enabled, options_.lexicon}));
    if (toks.empty()) return NoParse{NoParseReason::NoTemplateMatch, "empty input"};

    const auto& vocab = vocabulary();
    for (const auto& t : toks) {
        if (t.kind == Token::Kind::Word && std::find(vocab.begin(), vocab.end(), t.text) == vocab.end()) {
            return NoParse{NoParseReason::UnknownVocabulary, "unknown word '" + t.text + "'"};
        }
    }

    Parser parser(toks);
    auto parses = parser.utterance();
    std::erase_if(parses, [](const Expr& e) { return e.is_leaf(); });
    if (parses.empty()) return NoParse{NoParseReason::NoTemplateMatch, "no arithmetic reading"};
    if (parses.size() > 1) {
        std::string detail = "readings:";
        for (const auto& e : parses) detail += " " + arith::to_calculator_call(e);
        return NoParse{NoParseReason::Ambiguous, detail};
    }

    Extraction out{parses.front(), 1.0, std::nullopt};
    if (auto it = template_shapes().find(shape_of(toks)); it != template_shapes().end()) {
        out.matched_template = it->second;
    }
    return out;
}

ChannelBackend::ChannelBackend(std::string name, std::unique_ptr<LineChannel> channel)
    : name_(std::move(name)), channel_(std::move(channel)) {}

ExtractResult ChannelBackend::extract(std::string_view text) const {
    return parse_backend_response(channel_->exchange(text));
}

ExtractResult parse_backend_response(std::string_view line) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
        return s;
    };
    line = trim(line);
    if (line.rfind("NOPARSE", 0) == 0) {
        auto rest = trim(line.substr(7));
        auto sp = rest.find(' ');
        auto word = rest.substr(0, sp);
        std::string detail = sp == std::string_view::npos ? "" : std::string(trim(rest.substr(sp)));
        try {
            return NoParse{word.empty() ? NoParseReason::NoTemplateMatch : no_parse_reason_from_string(word),
                           detail};
        } catch (const std::invalid_argument&) {
            return NoParse{NoParseReason::NoTemplateMatch, std::string(rest)};
        }
    }
    try {
        return Extraction{arith::parse_calculator_call(line), 1.0, std::nullopt};
    } catch (const arith::CallParseError& e) {
        return NoParse{NoParseReason::NoTemplateMatch, std::string("malformed backend response: ") + e.what()};
    }
}

std::string format_backend_response(const ExtractResult& result) {
    if (const auto* ex = std::get_if<Extraction>(&result)) return arith::to_calculator_call(ex->expr);
    const auto& np = std::get<NoParse>(result);
    std::string out = "NOPARSE " + std::string(to_string(np.reason));
    if (!np.detail.empty()) out += " " + flatten_line(np.detail);
    return out;
}

std::unique_ptr<ExtractorBackend> make_backend(std::string_view spec) {
    if (spec == "reference") return std::make_unique<ReferenceExtractor>();
    if (spec == "words-disabled") {
        return std::make_unique<ReferenceExtractor>(ReferenceOptions{false, nullptr, "words-disabled"});
    }
    if (spec.rfind("exec:", 0) == 0) {
        std::string command(spec.substr(5));
        return std::make_unique<ChannelBackend>(std::string(spec), std::make_unique<ProcessChannel>(command));
    }
    throw std::invalid_argument("unknown backend '" + std::string(spec) +
                                "' (expected reference, words-disabled or exec:<command>)");
}

}  // namespace mrkl::extractor
