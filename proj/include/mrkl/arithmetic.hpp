#pragma once

#include <compare>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace mrkl::arith {

using BigInt = boost::multiprecision::cpp_int;

/// Base-10 digits to an integer; leading zeros are not an octal prefix.
/// Throws std::invalid_argument.
BigInt parse_decimal(std::string_view digits);
using BigRational = boost::multiprecision::cpp_rational;

enum class Op { Add, Sub, Mul, Div };

inline constexpr Op kAllOps[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};

/// "add", "sub", "mul", "div"
std::string_view op_name(Op op);
Op op_from_name(std::string_view name);
char op_symbol(Op op);
int precedence(Op op);

/// Exact rational value, always in lowest terms with a positive denominator.
class ExactNumber {
public:
    ExactNumber() = default;
    ExactNumber(long long v) : value_(v) {}  // NOLINT(google-explicit-constructor)
    explicit ExactNumber(const BigInt& v) : value_(v) {}
    explicit ExactNumber(BigRational v) : value_(std::move(v)) {}
    ExactNumber(const BigInt& num, const BigInt& den);

    BigInt numerator() const { return boost::multiprecision::numerator(value_); }
    BigInt denominator() const { return boost::multiprecision::denominator(value_); }
    const BigRational& value() const { return value_; }
    bool is_zero() const { return value_ == 0; }
    bool is_integer() const { return denominator() == 1; }

    /// Terminating decimals print exactly ("3.5", "-0.25", "70");
    /// anything else prints as "p/q" in lowest terms.
    std::string to_string() const;

    /// Accepts "[-]digits", "[-]digits.digits" and "[-]digits/digits".
    static ExactNumber parse(std::string_view text);

    friend ExactNumber operator+(const ExactNumber& a, const ExactNumber& b) {
        return ExactNumber(BigRational(a.value_ + b.value_));
    }
    friend ExactNumber operator-(const ExactNumber& a, const ExactNumber& b) {
        return ExactNumber(BigRational(a.value_ - b.value_));
    }
    friend ExactNumber operator*(const ExactNumber& a, const ExactNumber& b) {
        return ExactNumber(BigRational(a.value_ * b.value_));
    }
    /// Throws std::domain_error on a zero divisor.
    friend ExactNumber operator/(const ExactNumber& a, const ExactNumber& b);

    friend bool operator==(const ExactNumber& a, const ExactNumber& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const ExactNumber& a, const ExactNumber& b) {
        if (a.value_ < b.value_) return std::strong_ordering::less;
        if (b.value_ < a.value_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

private:
    BigRational value_;
};

/// Immutable binary expression tree. Copies share structure.
/// Bracketing is explicit: (A+B)*C and A+(B*C) are different trees.
class Expr {
public:
    static Expr leaf(BigInt operand);
    static Expr node(Op op, Expr left, Expr right);

    bool is_leaf() const;
    const BigInt& operand() const;  // precondition: is_leaf()
    Op op() const;                  // precondition: !is_leaf()
    const Expr& left() const;       // precondition: !is_leaf()
    const Expr& right() const;      // precondition: !is_leaf()

    std::size_t leaf_count() const;
    std::size_t op_count() const { return leaf_count() - 1; }

    friend bool operator==(const Expr& a, const Expr& b);

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

bool structurally_equal(const Expr& a, const Expr& b);

class EvaluationError : public std::domain_error {
public:
    EvaluationError(const std::string& what, Expr subtree)
        : std::domain_error(what), subtree_(std::move(subtree)) {}
    /// The division node whose divisor evaluated to zero.
    const Expr& subtree() const { return subtree_; }

private:
    Expr subtree_;
};

class CallParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

ExactNumber evaluate(const Expr& expr);

/// Fully parenthesised infix: every node is bracketed, "(2+(4*8))".
std::string to_calculator_call(const Expr& expr);

/// Parses calculator-call strings. Accepts the fully parenthesised form and
/// also plain infix with the usual precedence and left associativity.
Expr parse_calculator_call(std::string_view text);

}  // namespace mrkl::arith
