#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mrkl/extractor.hpp"
#include "mrkl/templates.hpp"

namespace mrkl::eval {

/// Row and column keys of a report, in display order.
struct Layout {
    std::string id;
    std::string title;
    std::string corner;  // top-left header cell
    std::vector<std::string> rows;
    std::vector<std::string> row_labels;
    std::vector<std::string> cols;
    std::vector<std::string> col_labels;
};

/// "exp1", "exp2", "exp3", "exp4", "exp4_two_op", "exp5". Throws std::out_of_range.
const Layout& layout(std::string_view id);
const std::vector<std::string>& layout_ids();
/// Layout id an experiment reports in.
std::string layout_for(int experiment, bool two_op = false);

struct Cell {
    double mean = 0.0;
    double std = 0.0;        // sample standard deviation across runs, 0 for one run
    int runs = 1;            // 0 when unknown (published numbers)
    std::size_t examples = 0;  // per run
};

using CellKey = std::pair<std::string, std::string>;  // (row, col)

struct EvalReport {
    std::string layout_id;
    std::map<CellKey, Cell> cells;
    // Ordered key/value provenance: backend, seeds, dataset hash, ...
    std::vector<std::pair<std::string, std::string>> provenance;

    std::optional<Cell> cell(const std::string& row, const std::string& col) const;
    std::optional<std::string> provenance_value(std::string_view key) const;
};

// ---------------------------------------------------------------------------
// Scoring

struct ScoreDetail {
    bool correct = false;
    bool no_parse = false;
    bool transport_error = false;
    std::string message;
};

/// True iff the backend's expression evaluates exactly to the gold answer.
/// Never throws for backend failures; they score false.
ScoreDetail score_detail(const templates::Example& example, const extractor::ExtractorBackend& backend);
bool score(const templates::Example& example, const extractor::ExtractorBackend& backend);

// ---------------------------------------------------------------------------
// Running experiments

/// Supplies the dataset for one run. The default generates it from the spec.
using DatasetProvider = std::function<templates::Dataset(const templates::DatasetSpec& spec, int run)>;

struct ExperimentConfig {
    int experiment = 1;                  // 1..5
    int runs = 1;                        // seeds base_seed, base_seed+1, ...
    std::uint64_t base_seed = 0;
    bool two_op = false;                 // experiment 4 only: the 29-formula table
    int splits = 10;                     // formula partitions for the two-op table
    numword::Rendering rendering = numword::Rendering::Digits;  // experiment 1 test rendering
    std::optional<arith::Op> operation;  // experiment 2 operation, addition by default
    templates::Spelling spelling = templates::Spelling::Corrected;
    // What an external backend was adapted on: row keys of the layout.
    // Recorded in the provenance and used to pick which rows to fill; the
    // harness cannot enforce it. Empty means every row.
    std::vector<std::string> trained_on;
    DatasetProvider provider;            // optional
};

/// Runs one experiment and slices accuracy in the layout of its table.
/// Throws templates::GenerationError for infeasible datasets.
EvalReport run(const ExperimentConfig& config, const extractor::ExtractorBackend& backend);

/// FNV-1a over bytes, chained from `seed`.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Mean and sample (n-1) standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& xs);

// ---------------------------------------------------------------------------
// Comparison and rendering

class LayoutMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Delta {
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> delta;  // b - a, when both exist
};

struct Comparison {
    std::string layout_id;
    std::string label_a;
    std::string label_b;
    std::map<CellKey, Delta> cells;
};

/// Per-cell b - a. Throws LayoutMismatch when the layouts differ.
Comparison compare(const EvalReport& a, const EvalReport& b, std::string label_a = "A", std::string label_b = "B");

enum class Style { Markdown, Csv };

Style style_from_string(std::string_view s);

std::string render(const EvalReport& report, Style style);
std::string render(const Comparison& comparison, Style style);

/// Reads back the CSV style of render(). Throws std::invalid_argument.
EvalReport parse_csv(std::string_view text);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Published numbers

struct BaselineRow {
    std::string label;
    std::string layout_id;
    std::string row;
    std::string col;
    double mean = 0.0;
    std::optional<double> std;
    std::string source;
};

/// CSV with header label,layout,row,col,mean,std,source.
std::vector<BaselineRow> parse_baselines(std::string_view text);
std::vector<BaselineRow> load_baselines(const std::string& path);
std::string default_baselines_path();

/// Report holding one labelled baseline for one layout. An empty layout id
/// is accepted when the label covers a single table. Throws
/// std::out_of_range when nothing matches, std::invalid_argument when the
/// layout is ambiguous.
EvalReport baseline_report(const std::vector<BaselineRow>& rows, std::string_view label,
                           std::string_view layout_id = {});
/// Labels in first-seen order, optionally restricted to one layout.
std::vector<std::string> baseline_labels(const std::vector<BaselineRow>& rows, std::string_view layout_id = {});

/// Splits one CSV record, honouring double quotes.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace mrkl::eval
