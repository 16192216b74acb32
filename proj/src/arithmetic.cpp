#include "mrkl/arithmetic.hpp"

#include <algorithm>
#include <cctype>

namespace mrkl::arith {

std::string_view op_name(Op op) {
    switch (op) {
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
    }
    return "?";
}

Op op_from_name(std::string_view name) {
    for (Op op : kAllOps) {
        if (op_name(op) == name) return op;
    }
    throw std::invalid_argument("unknown operation '" + std::string(name) + "'");
}

char op_symbol(Op op) {
    switch (op) {
        case Op::Add: return '+';
        case Op::Sub: return '-';
        case Op::Mul: return '*';
        case Op::Div: return '/';
    }
    return '?';
}

int precedence(Op op) { return op == Op::Add || op == Op::Sub ? 1 : 2; }

// ---------------------------------------------------------------------------
// ExactNumber

BigInt parse_decimal(std::string_view digits) {
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw std::invalid_argument("not a decimal integer: '" + std::string(digits) + "'");
    }
    const auto first = digits.find_first_not_of('0');
    return first == std::string_view::npos ? BigInt(0) : BigInt(std::string(digits.substr(first)));
}

ExactNumber::ExactNumber(const BigInt& num, const BigInt& den) {
    if (den == 0) throw std::domain_error("ExactNumber: zero denominator");
    value_ = den < 0 ? BigRational(-num, -den) : BigRational(num, den);
}

ExactNumber operator/(const ExactNumber& a, const ExactNumber& b) {
    if (b.is_zero()) throw std::domain_error("division by zero");
    return ExactNumber(BigRational(a.value_ / b.value_));
}

std::string ExactNumber::to_string() const {
    BigInt num = numerator();
    BigInt den = denominator();
    if (den == 1) return num.str();

    BigInt rest = den;
    unsigned twos = 0;
    unsigned fives = 0;
    while (rest % 2 == 0) {
        rest /= 2;
        ++twos;
    }
    while (rest % 5 == 0) {
        rest /= 5;
        ++fives;
    }
    if (rest != 1) return num.str() + "/" + den.str();

    unsigned places = std::max(twos, fives);
    BigInt scale = boost::multiprecision::pow(BigInt(10), places);
    BigInt scaled = num * scale / den;
    bool negative = scaled < 0;
    std::string digits = (negative ? BigInt(-scaled) : scaled).str();
    if (digits.size() <= places) digits.insert(0, places + 1 - digits.size(), '0');
    digits.insert(digits.size() - places, ".");
    return negative ? "-" + digits : digits;
}

ExactNumber ExactNumber::parse(std::string_view text) {
    auto bad = [&text]() {
        return std::invalid_argument("not an exact number: '" + std::string(text) + "'");
    };
    auto all_digits = [](std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c)) != 0;
        });
    };
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && body.front() == '-') {
        negative = true;
        body.remove_prefix(1);
    }
    ExactNumber result;
    if (auto slash = body.find('/'); slash != std::string_view::npos) {
        auto num = body.substr(0, slash);
        auto den = body.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den)) throw bad();
        BigInt d = parse_decimal(den);
        if (d == 0) throw bad();
        result = ExactNumber(parse_decimal(num), d);
    } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
        auto whole = body.substr(0, dot);
        auto frac = body.substr(dot + 1);
        if (!all_digits(whole) || !all_digits(frac)) throw bad();
        BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
        result = ExactNumber(parse_decimal(whole) * scale + parse_decimal(frac), scale);
    } else {
        if (!all_digits(body)) throw bad();
        result = ExactNumber(parse_decimal(body));
    }
    return negative ? ExactNumber(0) - result : result;
}

// ---------------------------------------------------------------------------
// Expr

struct Expr::Node {
    bool leaf;
    BigInt operand;
    Op op;
    Expr left;
    Expr right;
};

Expr Expr::leaf(BigInt operand) {
    if (operand < 0) throw std::invalid_argument("Expr::leaf: operands are non-negative");
    return Expr(std::make_shared<const Node>(Node{true, std::move(operand), Op::Add, Expr(nullptr), Expr(nullptr)}));
}

Expr Expr::node(Op op, Expr left, Expr right) {
    return Expr(std::make_shared<const Node>(Node{false, BigInt(0), op, std::move(left), std::move(right)}));
}

bool Expr::is_leaf() const { return node_->leaf; }
const BigInt& Expr::operand() const { return node_->operand; }
Op Expr::op() const { return node_->op; }
const Expr& Expr::left() const { return node_->left; }
const Expr& Expr::right() const { return node_->right; }

std::size_t Expr::leaf_count() const {
    return is_leaf() ? 1 : left().leaf_count() + right().leaf_count();
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.is_leaf() != b.is_leaf()) return false;
    if (a.is_leaf()) return a.operand() == b.operand();
    return a.op() == b.op() && a.left() == b.left() && a.right() == b.right();
}

bool structurally_equal(const Expr& a, const Expr& b) { return a == b; }

ExactNumber evaluate(const Expr& expr) {
    if (expr.is_leaf()) return ExactNumber(expr.operand());
    ExactNumber l = evaluate(expr.left());
    ExactNumber r = evaluate(expr.right());
    switch (expr.op()) {
        case Op::Add: return l + r;
        case Op::Sub: return l - r;
        case Op::Mul: return l * r;
        case Op::Div:
            if (r.is_zero()) {
                throw EvaluationError("division by zero in " + to_calculator_call(expr), expr);
            }
            return l / r;
    }
    throw std::logic_error("evaluate: bad op");
}

std::string to_calculator_call(const Expr& expr) {
    if (expr.is_leaf()) return expr.operand().str();
    std::string out = "(";
    out += to_calculator_call(expr.left());
    out += op_symbol(expr.op());
    out += to_calculator_call(expr.right());
    out += ')';
    return out;
}

namespace {

class CallParser {
public:
    explicit CallParser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = parse_sum();
        skip_space();
        if (pos_ != text_.size()) fail("trailing input");
        return e;
    }

private:
    Expr parse_sum() {
        Expr e = parse_product();
        while (true) {
            skip_space();
            if (peek('+')) {
                ++pos_;
                e = Expr::node(Op::Add, e, parse_product());
            } else if (peek('-')) {
                ++pos_;
                e = Expr::node(Op::Sub, e, parse_product());
            } else {
                return e;
            }
        }
    }

    Expr parse_product() {
        Expr e = parse_atom();
        while (true) {
            skip_space();
            if (peek('*')) {
                ++pos_;
                e = Expr::node(Op::Mul, e, parse_atom());
            } else if (peek('/')) {
                ++pos_;
                e = Expr::node(Op::Div, e, parse_atom());
            } else {
                return e;
            }
        }
    }

    Expr parse_atom() {
        skip_space();
        if (peek('(')) {
            ++pos_;
            Expr e = parse_sum();
            skip_space();
            if (!peek(')')) fail("expected ')'");
            ++pos_;
            return e;
        }
        std::size_t b = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (b == pos_) fail("expected a number or '('");
        return Expr::leaf(parse_decimal(text_.substr(b, pos_ - b)));
    }

    bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw CallParseError("calculator call '" + std::string(text_) + "': " + msg + " at offset " +
                             std::to_string(pos_));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_calculator_call(std::string_view text) { return CallParser(text).parse(); }

}  // namespace mrkl::arith
