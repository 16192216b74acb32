#include "mrkl/templates.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace mrkl::templates {

namespace {

struct TwoOpRow {
    Op op1;
    Op op2;
    Grouping grouping;
    std::string_view phrasing;
};

// Published phrasing table, verbatim (including its two typos).
constexpr std::array<TwoOpRow, 29> kTwoOpRows = {{
    {Op::Add, Op::Mul, Grouping::Left, "Sum A and B and multiply by C"},
    {Op::Add, Op::Mul, Grouping::Right, "What is the sum of A and the product of B and C?"},
    {Op::Sub, Op::Mul, Grouping::Left, "What is the product of A minus B and C?"},
    {Op::Div, Op::Div, Grouping::Right, "How much is A divided by the ratio between B and C?"},
    {Op::Sub, Op::Mul, Grouping::Right, "What is the difference between A and the product of B and C?"},
    {Op::Mul, Op::Sub, Grouping::Right, "How much is A times the difference between B and C?"},
    {Op::Add, Op::Div, Grouping::Left, "What is the ratio between A plus B and C?"},
    {Op::Sub, Op::Sub, Grouping::Right, "How much is A minus the diffrence between B and C?"},
    {Op::Sub, Op::Div, Grouping::Left, "What is the ratio between A minus B and C?"},
    {Op::Sub, Op::Div, Grouping::Right, "What is the difference between A and the ratio between B and C?"},
    {Op::Div, Op::Add, Grouping::Right, "How much is A divided bu the sum of B and C?"},
    {Op::Div, Op::Sub, Grouping::Right, "How much is A divided by the difference between B and C?"},
    {Op::Add, Op::Div, Grouping::Right, "what is the sum of A and the ratio between B and C?"},
    {Op::Mul, Op::Div, Grouping::Right, "How much is A times the ratio between B and C?"},
    {Op::Mul, Op::Add, Grouping::Left, "How much is the sum of A times B and C?"},
    {Op::Mul, Op::Add, Grouping::Right, "How much is A times the sum of B and C?"},
    {Op::Div, Op::Add, Grouping::Left, "How much is the sum of A divided by B and C?"},
    {Op::Div, Op::Div, Grouping::Left, "How much is A divided by B divided by C?"},
    {Op::Div, Op::Sub, Grouping::Left, "How much is the difference between A divided by B and C?"},
    {Op::Div, Op::Mul, Grouping::Left, "How much is A divided by B times C?"},
    {Op::Sub, Op::Add, Grouping::Right, "How much is A minus the sum of B and C?"},
    {Op::Mul, Op::Sub, Grouping::Left, "How much is the difference between A times B and C?"},
    {Op::Div, Op::Mul, Grouping::Right, "How much is A divided by the product of B and C?"},
    {Op::Sub, Op::Add, Grouping::Left, "How much is A minus B plus C?"},
    {Op::Add, Op::Add, Grouping::Left, "How much is A plus B plus C?"},
    {Op::Sub, Op::Sub, Grouping::Left, "How much is A minus B minus C?"},
    {Op::Mul, Op::Div, Grouping::Left, "How much is A times B divided by C?"},
    {Op::Add, Op::Sub, Grouping::Left, "How much is A plus B minus C?"},
    {Op::Mul, Op::Mul, Grouping::Left, "How much is A times B times C?"},
}};

// Single-op formats, rows = format, columns = add/sub/mul/div.
constexpr std::array<std::array<std::string_view, 4>, 5> kSingleOpRows = {{
    {"How much is {x} plus {y}?", "How much is {x} minus {y}?", "How much is {x} times {y}?",
     "How much is {x} over {y}?"},
    {"What is {x} plus {y}?", "What is {x} minus {y}?", "What is {x} times {y}?", "What is {x} over {y}?"},
    {"What is the result of {x} plus {y}?", "What is the result of {x} minus {y}?",
     "What is the result of {x} times {y}?", "What is the result of {x} over {y}?"},
    {"What is the sum of {x} and {y}?", "What is the difference between {x} and {y}?",
     "What is the product of {x} and {y}?", "What is the ratio between {x} and {y}?"},
    {"The sum of {x} and {y} is", "The difference between {x} and {y} is", "The product of {x} and {y} is",
     "The ratio of {x} and {y} is"},
}};

std::string correct_spelling(std::string s) {
    auto replace = [&s](std::string_view from, std::string_view to) {
        if (auto p = s.find(from); p != std::string::npos) s.replace(p, from.size(), to);
    };
    replace("diffrence", "difference");
    replace("divided bu ", "divided by ");
    return s;
}

std::vector<Template> build_single_catalog() {
    std::vector<Template> out;
    for (int f = 0; f < 5; ++f) {
        for (int o = 0; o < 4; ++o) {
            Template t;
            t.arity = 1;
            t.format = f;
            t.ops = {arith::kAllOps[o]};
            t.id = "f" + std::to_string(f) + "-" + std::string(arith::op_name(arith::kAllOps[o]));
            t.phrasing = std::string(kSingleOpRows[f][o]);
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::vector<Template> build_two_op_catalog(Spelling spelling) {
    std::vector<Template> out;
    for (const auto& row : kTwoOpRows) {
        Template t;
        t.arity = 2;
        t.ops = {row.op1, row.op2};
        t.grouping = row.grouping;
        t.phrasing = spelling == Spelling::Verbatim ? std::string(row.phrasing)
                                                    : correct_spelling(std::string(row.phrasing));
        t.id = t.formula();
        out.push_back(std::move(t));
    }
    return out;
}

// Text pieces of a phrasing: literal text or a slot index.
struct Piece {
    std::string text;
    int slot = -1;
};

std::vector<Piece> split_phrasing(const Template& t) {
    std::vector<Piece> pieces;
    const std::string& p = t.phrasing;
    std::string literal;
    auto flush = [&]() {
        if (!literal.empty()) pieces.push_back({std::move(literal), -1});
        literal.clear();
    };
    if (t.arity == 1) {
        std::size_t i = 0;
        while (i < p.size()) {
            if (p.compare(i, 3, "{x}") == 0 || p.compare(i, 3, "{y}") == 0) {
                flush();
                pieces.push_back({"", p[i + 1] == 'x' ? 0 : 1});
                i += 3;
            } else {
                literal += p[i++];
            }
        }
    } else {
        // Bare capital A/B/C standing as a whole word.
        for (std::size_t i = 0; i < p.size(); ++i) {
            char c = p[i];
            bool word_start = i == 0 || p[i - 1] == ' ';
            bool word_end = i + 1 == p.size() || p[i + 1] == ' ' || p[i + 1] == '?';
            if ((c == 'A' || c == 'B' || c == 'C') && word_start && word_end) {
                flush();
                pieces.push_back({"", c - 'A'});
            } else {
                literal += c;
            }
        }
    }
    flush();
    return pieces;
}

}  // namespace

std::uint64_t Rng::uniform(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) throw std::invalid_argument("Rng::uniform: empty range");
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max()) return next();
    const std::uint64_t range = span + 1;
    // Reject the tail that would bias the modulo.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return lo + x % range;
}

std::string Template::format_id() const { return arity == 1 ? std::to_string(format) : formula(); }

std::string Template::formula() const {
    auto sym = [](Op op) { return std::string(1, arith::op_symbol(op)); };
    if (arity == 1) return "(A" + sym(ops[0]) + "B)";
    const Op op1 = ops[0];
    const Op op2 = ops[1];
    std::string inner;
    if (grouping == Grouping::Left) {
        std::string head = "A" + sym(op1) + "B";
        if (arith::precedence(op1) < arith::precedence(op2)) head = "(" + head + ")";
        inner = head + sym(op2) + "C";
    } else {
        std::string tail = "B" + sym(op2) + "C";
        if (arith::precedence(op2) <= arith::precedence(op1)) tail = "(" + tail + ")";
        inner = "A" + sym(op1) + tail;
    }
    return "(" + inner + ")";
}

bool Template::requires_brackets() const {
    if (arity == 1) return false;
    const int p1 = arith::precedence(ops[0]);
    const int p2 = arith::precedence(ops[1]);
    return grouping == Grouping::Left ? p1 < p2 : p2 <= p1;
}

arith::Expr Template::build(std::span<const std::uint64_t> operands) const {
    using arith::Expr;
    if (operands.size() != slot_count()) {
        throw std::invalid_argument("template " + id + " takes " + std::to_string(slot_count()) +
                                    " operands");
    }
    auto leaf = [&](std::size_t i) { return Expr::leaf(arith::BigInt(operands[i])); };
    if (arity == 1) return Expr::node(ops[0], leaf(0), leaf(1));
    if (grouping == Grouping::Left) {
        return Expr::node(ops[1], Expr::node(ops[0], leaf(0), leaf(1)), leaf(2));
    }
    return Expr::node(ops[0], leaf(0), Expr::node(ops[1], leaf(1), leaf(2)));
}

const std::vector<Template>& catalog(int arity, Spelling spelling) {
    static const std::vector<Template> single = build_single_catalog();
    static const std::vector<Template> two_corrected = build_two_op_catalog(Spelling::Corrected);
    static const std::vector<Template> two_verbatim = build_two_op_catalog(Spelling::Verbatim);
    if (arity == 1) return single;
    if (arity == 2) return spelling == Spelling::Verbatim ? two_verbatim : two_corrected;
    throw std::invalid_argument("catalog: arity must be 1 or 2");
}

const Template& find_template(std::string_view id, Spelling spelling) {
    for (int arity : {1, 2}) {
        for (const auto& t : catalog(arity, spelling)) {
            if (t.id == id) return t;
        }
    }
    throw std::out_of_range("no template with id '" + std::string(id) + "'");
}

const Template& single_op_template(int format, Op op, Spelling spelling) {
    if (format < 0 || format > 4) throw std::out_of_range("format must be 0..4");
    return catalog(1, spelling)[static_cast<std::size_t>(format) * 4 + static_cast<std::size_t>(op)];
}

std::vector<const Template*> bracket_free_two_op(Spelling spelling) {
    std::vector<const Template*> out;
    for (const auto& t : catalog(2, spelling)) {
        if (!t.requires_brackets()) out.push_back(&t);
    }
    return out;
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Dev: return "dev";
        case Split::Test: return "test";
    }
    return "?";
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "dev") return Split::Dev;
    if (s == "test") return Split::Test;
    throw std::invalid_argument("unknown split '" + std::string(s) + "'");
}

int digit_count(std::uint64_t n) {
    int d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

std::vector<std::uint64_t> sample_operands(int digits, const Template& t, Rng& rng) {
    if (digits < 1 || digits > 9) throw std::out_of_range("digit count must be 1..9");
    std::uint64_t lo = 1;
    for (int i = 1; i < digits; ++i) lo *= 10;
    const std::uint64_t hi = lo * 10 - 1;
    std::vector<std::uint64_t> operands(t.slot_count());
    while (true) {
        for (auto& v : operands) v = rng.uniform(lo, hi);
        try {
            arith::evaluate(t.build(operands));
            return operands;
        } catch (const arith::EvaluationError&) {
            // zero-valued divisor such as B-C with B == C; draw again
        }
    }
}

std::string render_text(const Template& t, std::span<const std::uint64_t> operands, Rendering rendering) {
    std::string out;
    for (const auto& piece : split_phrasing(t)) {
        if (piece.slot < 0) {
            out += piece.text;
        } else {
            const auto v = operands[static_cast<std::size_t>(piece.slot)];
            out += rendering == Rendering::Digits ? std::to_string(v) : numword::int_to_words(v);
        }
    }
    return out;
}

Example instantiate(const Template& t, std::span<const std::uint64_t> operands, Rendering rendering) {
    arith::Expr expr = t.build(operands);
    ExampleMeta meta;
    for (auto v : operands) meta.digits.push_back(digit_count(v));
    meta.template_id = t.id;
    meta.format_id = t.format_id();
    meta.rendering = rendering;
    meta.ops = t.ops;
    return Example{"", render_text(t, operands, rendering), expr, arith::evaluate(expr), std::move(meta)};
}

TwoOpSplit two_op_split(Rng& rng) {
    std::vector<std::string> free_ids;
    std::vector<std::string> bracketed_ids;
    for (const auto& t : catalog(2)) {
        (t.requires_brackets() ? bracketed_ids : free_ids).push_back(t.id);
    }
    rng.shuffle(free_ids);
    rng.shuffle(bracketed_ids);

    std::vector<std::string> train;
    std::vector<std::string> test;
    train.push_back(bracketed_ids.front());
    test.insert(test.end(), bracketed_ids.begin() + 1, bracketed_ids.end());
    const std::size_t free_in_train = 14 - 1;
    train.insert(train.end(), free_ids.begin(), free_ids.begin() + free_in_train);
    test.insert(test.end(), free_ids.begin() + free_in_train, free_ids.end());

    // Report in catalog order.
    auto order = [](std::vector<std::string>& ids) {
        const auto& cat = catalog(2);
        std::sort(ids.begin(), ids.end(), [&cat](const std::string& a, const std::string& b) {
            auto pos = [&cat](const std::string& id) {
                return std::find_if(cat.begin(), cat.end(), [&id](const Template& t) { return t.id == id; }) -
                       cat.begin();
            };
            return pos(a) < pos(b);
        });
    };
    order(train);
    order(test);
    return {std::move(train), std::move(test)};
}

}  // namespace mrkl::templates
