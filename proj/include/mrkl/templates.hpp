#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mrkl/arithmetic.hpp"
#include "mrkl/numword.hpp"

namespace mrkl::templates {

using arith::Op;
using numword::Rendering;

/// Seeded generator with portable bounded sampling, so datasets are
/// byte-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform over [lo, hi].
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform(0, i - 1)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// How a three-operand formula groups: ((A op1 B) op2 C) or (A op1 (B op2 C)).
enum class Grouping { None, Left, Right };

enum class Spelling { Corrected, Verbatim };

struct Template {
    std::string id;        // "f3-sub" for single-op, the formula "((A+B)*C)" for two-op
    int arity = 1;         // number of operations
    int format = -1;       // 0..4 for single-op templates
    std::vector<Op> ops;   // left to right as written
    Grouping grouping = Grouping::None;
    std::string phrasing;  // slots are {x} {y} (single-op) or bare A B C (two-op)

    /// "0".."4" for single-op templates, the formula for two-op ones.
    std::string format_id() const;
    /// Minimal-bracket form wrapped in parentheses, e.g. "(A+B*C)".
    std::string formula() const;
    /// True iff the grouping differs from what precedence and left
    /// associativity give for "A op1 B op2 C".
    bool requires_brackets() const;
    std::size_t slot_count() const { return ops.size() + 1; }
    arith::Expr build(std::span<const std::uint64_t> operands) const;
};

/// The fixed catalog: 20 single-op templates (format-major, then
/// add/sub/mul/div) or 29 two-op templates (in the order of the published
/// phrasing table).
const std::vector<Template>& catalog(int arity, Spelling spelling = Spelling::Corrected);

/// Looks a template up by id in either catalog. Throws std::out_of_range.
const Template& find_template(std::string_view id, Spelling spelling = Spelling::Corrected);

/// Single-op template for a given format and operation.
const Template& single_op_template(int format, Op op, Spelling spelling = Spelling::Corrected);

/// The 16 two-op templates whose tree matches the precedence parse.
std::vector<const Template*> bracket_free_two_op(Spelling spelling = Spelling::Corrected);

enum class Split { Train, Dev, Test };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

struct ExampleMeta {
    std::vector<int> digits;  // per operand
    std::string template_id;
    std::string format_id;
    Rendering rendering = Rendering::Digits;
    std::vector<Op> ops;
    Split split = Split::Train;
};

struct Example {
    std::string id;
    std::string text;
    arith::Expr gold_expr;
    arith::ExactNumber gold_answer;
    ExampleMeta meta;
};

/// Number of decimal digits in n (1 for n == 0).
int digit_count(std::uint64_t n);

/// Operands with exactly `digits` digits each (1..9 for one digit), resampled
/// until no divisor subexpression is zero.
std::vector<std::uint64_t> sample_operands(int digits, const Template& t, Rng& rng);

Example instantiate(const Template& t, std::span<const std::uint64_t> operands, Rendering rendering);

/// Text only, without building an Example.
std::string render_text(const Template& t, std::span<const std::uint64_t> operands, Rendering rendering);

struct TwoOpSplit {
    std::vector<std::string> train;  // 14 formula ids
    std::vector<std::string> test;   // 15 formula ids
};

/// Random 14/15 partition of the two-op formulae with exactly one
/// bracket-requiring formula on the training side.
TwoOpSplit two_op_split(Rng& rng);

// ---------------------------------------------------------------------------
// Datasets

/// One block of examples: `count` distinct gold expressions, each drawn by
/// picking a template and a digit count uniformly, then emitted once per
/// rendering.
struct CellSpec {
    Split split = Split::Train;
    std::vector<std::string> template_ids;
    std::vector<int> digit_counts;
    std::vector<Rendering> renderings{Rendering::Digits};
    std::size_t count = 0;
};

struct DatasetSpec {
    std::string name = "custom";
    int experiment = 0;  // 1..5, 0 for custom specs
    std::uint64_t seed = 0;
    Spelling spelling = Spelling::Corrected;
    std::vector<CellSpec> cells;
};

struct ExperimentOptions {
    std::optional<Op> operation;  // experiments 1-3 train one operation at a time
    Rendering rendering = Rendering::Digits;  // experiment 1 only
    Spelling spelling = Spelling::Corrected;
};

/// Preset specs sized as the published data-split description.
DatasetSpec experiment_spec(int experiment, std::uint64_t seed, const ExperimentOptions& options = {});

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Dataset {
    std::string name;
    std::vector<Example> examples;

    std::size_t count(Split s) const;
};

/// Deterministic for a given spec. Splits never share a gold expression.
/// Throws GenerationError when a cell asks for more distinct expressions
/// than exist.
Dataset generate(const DatasetSpec& spec);

/// Distinct gold expressions with the given shape, ignoring exclusions.
/// Saturates at UINT64_MAX.
std::uint64_t expression_space(const Template& t, int digits);

/// True iff no dev/test gold expression also occurs in train, whatever the
/// wording.
bool check_no_overlap(std::span<const Example> examples);
inline bool check_no_overlap(const Dataset& d) { return check_no_overlap(d.examples); }

/// JSON Lines, one example per line; format version 1.
inline constexpr int kDatasetFormatVersion = 1;
void write_jsonl(std::ostream& out, const Dataset& dataset);
std::string to_jsonl(const Dataset& dataset);
Dataset read_jsonl(std::istream& in);

}  // namespace mrkl::templates
