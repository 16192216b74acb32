#include "mrkl/evalharness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mrkl::eval {

using templates::Dataset;
using templates::DatasetSpec;
using templates::Example;
using templates::Split;

namespace {

const std::vector<std::string> kOps{"add", "sub", "mul", "div"};

std::vector<Layout> build_layouts() {
    std::vector<Layout> out;
    std::vector<std::string> digits;
    for (int d = 1; d <= 9; ++d) digits.push_back(std::to_string(d));
    out.push_back({"exp1", "Accuracy by number of digits (trained on 1-digit operands)", "Num. digits",
                   {"add", "mul"}, {"Addition", "Multiplication"}, digits, digits});
    out.push_back({"exp2", "Accuracy by train and test number rendering", "Train \\ Test", {"digits", "words"},
                   {"Digits", "Words"}, {"digits", "words"}, {"Digits", "Words"}});
    out.push_back({"exp3", "Accuracy by question format (trained on format 0)", "",
                   {"0", "1", "2", "3", "4"},
                   {"format 0", "format 1", "format 2", "format 3", "format 4"}, kOps, kOps});
    out.push_back({"exp4", "Accuracy across operations for single-operation problems", "Train \\ Test", kOps, kOps,
                   kOps, kOps});
    Layout two{"exp4_two_op", "Accuracy for two-operation problems across formula partitions", "Formula", {}, {},
               {"accuracy"}, {"Accuracy"}};
    for (const auto& t : templates::catalog(2)) {
        two.rows.push_back(t.id);
        two.row_labels.push_back("f=" + t.id);
    }
    out.push_back(std::move(two));
    out.push_back({"exp5", "Accuracy from single-operation training on two-operation problems",
                   "First \\ Second", kOps, kOps, kOps, kOps});
    return out;
}

const std::vector<Layout>& layouts() {
    static const std::vector<Layout> all = build_layouts();
    return all;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string join(const std::vector<std::string>& xs, std::string_view sep) {
    std::string out;
    for (const auto& x : xs) {
        if (!out.empty()) out += sep;
        out += x;
    }
    return out;
}

// Accuracy samples per cell, one per run in which the cell was measured.
struct Accumulator {
    std::map<CellKey, std::vector<double>> samples;
    std::map<CellKey, std::size_t> examples;
    std::size_t scored = 0;
    std::size_t no_parse = 0;
    std::size_t transport_errors = 0;
    std::string first_error;

    // Scores test examples grouped by `key`; returns accuracy per group.
    template <typename KeyFn>
    std::map<std::string, std::pair<std::size_t, std::size_t>> score_groups(const Dataset& ds,
                                                                            const extractor::ExtractorBackend& backend,
                                                                            KeyFn key) {
        std::map<std::string, std::pair<std::size_t, std::size_t>> groups;  // key -> (correct, total)
        for (const auto& e : ds.examples) {
            if (e.meta.split != Split::Test) continue;
            auto k = key(e);
            if (!k) continue;
            auto d = score_detail(e, backend);
            ++scored;
            if (d.no_parse) ++no_parse;
            if (d.transport_error) {
                ++transport_errors;
                if (first_error.empty()) first_error = d.message;
            }
            auto& g = groups[*k];
            g.first += d.correct ? 1 : 0;
            ++g.second;
        }
        return groups;
    }

    void add(const std::string& row, const std::string& col, std::pair<std::size_t, std::size_t> correct_total) {
        if (correct_total.second == 0) return;
        samples[{row, col}].push_back(static_cast<double>(correct_total.first) /
                                      static_cast<double>(correct_total.second));
        examples[{row, col}] = correct_total.second;
    }
};

Dataset fetch(const ExperimentConfig& config, const DatasetSpec& spec, int run, std::uint64_t& hash) {
    Dataset ds = config.provider ? config.provider(spec, run) : templates::generate(spec);
    hash = fnv1a(templates::to_jsonl(ds), hash);
    return ds;
}

}  // namespace

const Layout& layout(std::string_view id) {
    for (const auto& l : layouts()) {
        if (l.id == id) return l;
    }
    throw std::out_of_range("unknown report layout '" + std::string(id) + "'");
}

const std::vector<std::string>& layout_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> out;
        for (const auto& l : layouts()) out.push_back(l.id);
        return out;
    }();
    return ids;
}

std::string layout_for(int experiment, bool two_op) {
    if (experiment < 1 || experiment > 5) {
        throw std::invalid_argument("experiment must be 1..5, got " + std::to_string(experiment));
    }
    if (two_op && experiment != 4) throw std::invalid_argument("the two-op table exists only for experiment 4");
    return two_op ? "exp4_two_op" : "exp" + std::to_string(experiment);
}

std::optional<Cell> EvalReport::cell(const std::string& row, const std::string& col) const {
    auto it = cells.find({row, col});
    if (it == cells.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> EvalReport::provenance_value(std::string_view key) const {
    for (const auto& [k, v] : provenance) {
        if (k == key) return v;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

ScoreDetail score_detail(const Example& example, const extractor::ExtractorBackend& backend) {
    ScoreDetail d;
    try {
        auto result = backend.extract(example.text);
        if (const auto* np = std::get_if<extractor::NoParse>(&result)) {
            d.no_parse = true;
            d.message = std::string(extractor::to_string(np->reason));
            return d;
        }
        const auto& ex = std::get<extractor::Extraction>(result);
        d.correct = arith::evaluate(ex.expr) == example.gold_answer;
    } catch (const TransportError& e) {
        d.transport_error = true;
        d.message = e.what();
    } catch (const std::exception& e) {
        // division by zero in a wrong extraction, malformed replies, ...
        d.message = e.what();
    }
    return d;
}

bool score(const Example& example, const extractor::ExtractorBackend& backend) {
    return score_detail(example, backend).correct;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double sq = 0.0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    return {mean, std::sqrt(sq / static_cast<double>(xs.size() - 1))};
}

EvalReport run(const ExperimentConfig& config, const extractor::ExtractorBackend& backend) {
    const Layout& lay = layout(layout_for(config.experiment, config.two_op));
    if (config.runs < 1) throw std::invalid_argument("runs must be at least 1");
    if (config.two_op && config.splits < 1) throw std::invalid_argument("splits must be at least 1");

    const bool train_side_rows = lay.id == "exp1" || lay.id == "exp2" || lay.id == "exp4";
    if (!config.trained_on.empty() && !train_side_rows) {
        throw std::invalid_argument("--trained-on applies to the exp1, exp2 and exp4 tables only");
    }
    std::vector<std::string> fill_rows = config.trained_on.empty() ? lay.rows : config.trained_on;
    for (const auto& r : fill_rows) {
        if (std::find(lay.rows.begin(), lay.rows.end(), r) == lay.rows.end()) {
            throw std::invalid_argument("'" + r + "' is not a row of the " + lay.id + " table");
        }
    }
    auto filled = [&fill_rows](const std::string& r) {
        return std::find(fill_rows.begin(), fill_rows.end(), r) != fill_rows.end();
    };

    Accumulator acc;
    std::uint64_t hash = fnv1a("");
    const int n_runs = config.two_op ? config.splits : config.runs;
    std::vector<std::string> seeds;
    templates::ExperimentOptions options;
    options.spelling = config.spelling;

    for (int k = 0; k < n_runs; ++k) {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(k);
        seeds.push_back(std::to_string(seed));

        switch (config.experiment) {
            case 1:
                for (const auto& row : lay.rows) {
                    if (!filled(row)) continue;
                    options.operation = arith::op_from_name(row);
                    options.rendering = config.rendering;
                    auto ds = fetch(config, templates::experiment_spec(1, seed, options), k, hash);
                    auto groups = acc.score_groups(ds, backend, [](const Example& e) -> std::optional<std::string> {
                        return std::to_string(e.meta.digits.at(0));
                    });
                    for (const auto& [col, ct] : groups) acc.add(row, col, ct);
                }
                break;
            case 2: {
                options.operation = config.operation.value_or(arith::Op::Add);
                auto ds = fetch(config, templates::experiment_spec(2, seed, options), k, hash);
                auto groups = acc.score_groups(ds, backend, [](const Example& e) -> std::optional<std::string> {
                    return std::string(numword::to_string(e.meta.rendering));
                });
                for (const auto& row : fill_rows) {
                    for (const auto& [col, ct] : groups) acc.add(row, col, ct);
                }
                break;
            }
            case 3:
                for (const auto& col : lay.cols) {
                    options.operation = arith::op_from_name(col);
                    auto ds = fetch(config, templates::experiment_spec(3, seed, options), k, hash);
                    auto groups = acc.score_groups(ds, backend, [](const Example& e) -> std::optional<std::string> {
                        return e.meta.format_id;
                    });
                    for (const auto& [row, ct] : groups) acc.add(row, col, ct);
                }
                break;
            case 4: {
                auto ds = fetch(config, templates::experiment_spec(4, seed, options), k, hash);
                if (config.two_op) {
                    templates::Rng rng(seed);
                    const auto partition = templates::two_op_split(rng);
                    const std::set<std::string> held_out(partition.test.begin(), partition.test.end());
                    auto groups = acc.score_groups(ds, backend, [&](const Example& e) -> std::optional<std::string> {
                        if (e.meta.ops.size() != 2 || !held_out.count(e.meta.template_id)) return std::nullopt;
                        return e.meta.template_id;
                    });
                    for (const auto& [row, ct] : groups) acc.add(row, "accuracy", ct);
                } else {
                    auto groups = acc.score_groups(ds, backend, [](const Example& e) -> std::optional<std::string> {
                        if (e.meta.ops.size() != 1) return std::nullopt;
                        return std::string(arith::op_name(e.meta.ops[0]));
                    });
                    for (const auto& row : fill_rows) {
                        for (const auto& [col, ct] : groups) acc.add(row, col, ct);
                    }
                }
                break;
            }
            case 5: {
                auto ds = fetch(config, templates::experiment_spec(5, seed, options), k, hash);
                auto groups = acc.score_groups(ds, backend, [](const Example& e) -> std::optional<std::string> {
                    if (e.meta.ops.size() != 2) return std::nullopt;
                    return std::string(arith::op_name(e.meta.ops[0])) + "|" + std::string(arith::op_name(e.meta.ops[1]));
                });
                for (const auto& [key, ct] : groups) {
                    const auto bar = key.find('|');
                    acc.add(key.substr(0, bar), key.substr(bar + 1), ct);
                }
                break;
            }
        }
    }

    EvalReport report;
    report.layout_id = lay.id;
    for (const auto& [key, xs] : acc.samples) {
        auto [mean, sd] = mean_std(xs);
        report.cells[key] = Cell{mean, sd, static_cast<int>(xs.size()), acc.examples[key]};
    }
    auto& p = report.provenance;
    p.emplace_back("experiment", std::to_string(config.experiment));
    p.emplace_back("backend", backend.name());
    p.emplace_back(config.two_op ? "splits" : "runs", std::to_string(n_runs));
    p.emplace_back("seeds", join(seeds, " "));
    p.emplace_back("dataset_hash", hex64(hash));
    p.emplace_back("spelling", config.spelling == templates::Spelling::Verbatim ? "verbatim" : "corrected");
    if (config.experiment == 1) p.emplace_back("rendering", std::string(numword::to_string(config.rendering)));
    if (config.experiment == 2) {
        p.emplace_back("operation", std::string(arith::op_name(config.operation.value_or(arith::Op::Add))));
    }
    if (train_side_rows) {
        p.emplace_back("trained_on", config.trained_on.empty() ? "unrestricted" : join(config.trained_on, " "));
    }
    p.emplace_back("examples_scored", std::to_string(acc.scored));
    p.emplace_back("no_parse", std::to_string(acc.no_parse));
    p.emplace_back("transport_errors", std::to_string(acc.transport_errors));
    if (!acc.first_error.empty()) p.emplace_back("first_transport_error", acc.first_error);
    return report;
}

// ---------------------------------------------------------------------------

Comparison compare(const EvalReport& a, const EvalReport& b, std::string label_a, std::string label_b) {
    if (a.layout_id != b.layout_id) {
        throw LayoutMismatch("cannot compare a " + a.layout_id + " report with a " + b.layout_id + " report");
    }
    Comparison c{a.layout_id, std::move(label_a), std::move(label_b), {}};
    for (const auto& [key, cell] : a.cells) c.cells[key].a = cell.mean;
    for (const auto& [key, cell] : b.cells) c.cells[key].b = cell.mean;
    for (auto& [key, d] : c.cells) {
        if (d.a && d.b) d.delta = *d.b - *d.a;
    }
    return c;
}

Style style_from_string(std::string_view s) {
    if (s == "markdown" || s == "paper-markdown" || s == "md") return Style::Markdown;
    if (s == "csv") return Style::Csv;
    throw std::invalid_argument("unknown report style '" + std::string(s) + "' (expected markdown or csv)");
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("cannot format number");
    return std::string(buf, end);
}

namespace {

// Three decimals, trailing zeros trimmed to one: 1.0, 0.804, 0.25.
std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
}

std::string signed_number(double v) {
    std::string s = short_number(v);
    if (s.front() != '-') s = "+" + s;
    return s;
}

void markdown_header(const Layout& lay, std::ostringstream& os) {
    os << "### " << lay.title << "\n\n";
    os << "| " << lay.corner << " |";
    for (const auto& c : lay.col_labels) os << ' ' << c << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < lay.cols.size(); ++i) os << "---:|";
    os << '\n';
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return v;
}

template <typename Int>
Int parse_int(std::string_view s) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::string render(const EvalReport& report, Style style) {
    const Layout& lay = layout(report.layout_id);
    std::ostringstream os;
    if (style == Style::Csv) {
        os << "# layout=" << report.layout_id << '\n';
        for (const auto& [k, v] : report.provenance) os << "# " << k << '=' << flatten_line(v) << '\n';
        os << "layout,row,col,mean,std,runs,examples\n";
        for (const auto& row : lay.rows) {
            for (const auto& col : lay.cols) {
                auto c = report.cell(row, col);
                if (!c) continue;
                os << report.layout_id << ',' << row << ',' << col << ',' << format_double(c->mean) << ','
                   << format_double(c->std) << ',' << c->runs << ',' << c->examples << '\n';
            }
        }
        return os.str();
    }

    markdown_header(lay, os);
    if (report.cells.empty()) return os.str();
    for (std::size_t r = 0; r < lay.rows.size(); ++r) {
        os << "| " << lay.row_labels[r] << " |";
        for (const auto& col : lay.cols) {
            auto c = report.cell(lay.rows[r], col);
            if (!c) {
                os << " N/A |";
            } else if (c->runs == 1) {
                os << ' ' << short_number(c->mean) << " |";
            } else {
                os << ' ' << short_number(c->mean) << " ± " << short_number(c->std) << " |";
            }
        }
        os << '\n';
    }
    if (!report.provenance.empty()) {
        os << '\n';
        for (const auto& [k, v] : report.provenance) os << "- " << k << ": " << v << '\n';
    }
    return os.str();
}

std::string render(const Comparison& comparison, Style style) {
    const Layout& lay = layout(comparison.layout_id);
    std::ostringstream os;
    if (style == Style::Csv) {
        os << "# layout=" << comparison.layout_id << "\n# a=" << comparison.label_a << "\n# b=" << comparison.label_b
           << "\nlayout,row,col,a,b,delta\n";
        for (const auto& row : lay.rows) {
            for (const auto& col : lay.cols) {
                auto it = comparison.cells.find({row, col});
                if (it == comparison.cells.end()) continue;
                const auto& d = it->second;
                os << comparison.layout_id << ',' << row << ',' << col << ',' << (d.a ? format_double(*d.a) : "")
                   << ',' << (d.b ? format_double(*d.b) : "") << ',' << (d.delta ? format_double(*d.delta) : "")
                   << '\n';
            }
        }
        return os.str();
    }
    markdown_header(lay, os);
    if (comparison.cells.empty()) return os.str();
    for (std::size_t r = 0; r < lay.rows.size(); ++r) {
        os << "| " << lay.row_labels[r] << " |";
        for (const auto& col : lay.cols) {
            auto it = comparison.cells.find({lay.rows[r], col});
            if (it == comparison.cells.end()) {
                os << " N/A |";
                continue;
            }
            const auto& d = it->second;
            os << ' ' << (d.a ? short_number(*d.a) : "N/A") << " -> " << (d.b ? short_number(*d.b) : "N/A");
            if (d.delta) os << " (" << signed_number(*d.delta) << ')';
            os << " |";
        }
        os << '\n';
    }
    os << "\nCells read `" << comparison.label_a << " -> " << comparison.label_b << " (difference)`.\n";
    return os.str();
}

EvalReport parse_csv(std::string_view text) {
    EvalReport report;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(2, eq - 2);
            std::string value = line.substr(eq + 1);
            if (key == "layout") {
                report.layout_id = value;
            } else {
                report.provenance.emplace_back(std::move(key), std::move(value));
            }
            continue;
        }
        if (!header_seen) {
            if (line != "layout,row,col,mean,std,runs,examples") {
                throw std::invalid_argument("report CSV line " + std::to_string(line_no) + ": unexpected header");
            }
            header_seen = true;
            continue;
        }
        auto f = split_csv_line(line);
        if (f.size() != 7) {
            throw std::invalid_argument("report CSV line " + std::to_string(line_no) + ": expected 7 fields");
        }
        if (report.layout_id.empty()) report.layout_id = f[0];
        if (f[0] != report.layout_id) {
            throw std::invalid_argument("report CSV line " + std::to_string(line_no) + ": mixed layouts");
        }
        report.cells[{f[1], f[2]}] =
            Cell{parse_double(f[3]), parse_double(f[4]), parse_int<int>(f[5]), parse_int<std::size_t>(f[6])};
    }
    if (!header_seen) throw std::invalid_argument("report CSV: missing header line");
    const Layout& lay = layout(report.layout_id);
    for (const auto& [key, cell] : report.cells) {
        if (std::find(lay.rows.begin(), lay.rows.end(), key.first) == lay.rows.end() ||
            std::find(lay.cols.begin(), lay.cols.end(), key.second) == lay.cols.end()) {
            throw std::invalid_argument("report CSV: cell (" + key.first + ", " + key.second + ") is not in layout " +
                                        lay.id);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw std::invalid_argument("unterminated quote in CSV line");
    out.push_back(std::move(cur));
    return out;
}

std::vector<BaselineRow> parse_baselines(std::string_view text) {
    std::vector<BaselineRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "label,layout,row,col,mean,std,source") {
                throw std::invalid_argument("baselines line " + std::to_string(line_no) + ": unexpected header");
            }
            header_seen = true;
            continue;
        }
        auto f = split_csv_line(line);
        if (f.size() != 7) throw std::invalid_argument("baselines line " + std::to_string(line_no) + ": expected 7 fields");
        BaselineRow r{f[0], f[1], f[2], f[3], parse_double(f[4]), std::nullopt, f[6]};
        if (!f[5].empty()) r.std = parse_double(f[5]);
        const Layout& lay = layout(r.layout_id);
        if (std::find(lay.rows.begin(), lay.rows.end(), r.row) == lay.rows.end() ||
            std::find(lay.cols.begin(), lay.cols.end(), r.col) == lay.cols.end()) {
            throw std::invalid_argument("baselines line " + std::to_string(line_no) + ": cell not in layout " + lay.id);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<BaselineRow> load_baselines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open baselines file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_baselines(ss.str());
}

std::string default_baselines_path() { return std::string(MRKL_DATA_DIR) + "/published_baselines.csv"; }

EvalReport baseline_report(const std::vector<BaselineRow>& rows, std::string_view label, std::string_view layout_id) {
    std::string lay(layout_id);
    if (lay.empty()) {
        for (const auto& r : rows) {
            if (r.label != label) continue;
            if (lay.empty()) {
                lay = r.layout_id;
            } else if (r.layout_id != lay) {
                throw std::invalid_argument("baseline '" + std::string(label) +
                                            "' covers several tables; name one as <label>@<layout>");
            }
        }
    }
    EvalReport report;
    report.layout_id = lay;
    std::string source;
    for (const auto& r : rows) {
        if (r.label != label || r.layout_id != lay) continue;
        source = r.source;
        report.cells[{r.row, r.col}] = Cell{r.mean, r.std.value_or(0.0), r.std ? 0 : 1, 0};
    }
    if (report.cells.empty()) {
        throw std::out_of_range("no baseline labelled '" + std::string(label) + "'" +
                                (lay.empty() ? "" : " for layout " + lay));
    }
    report.provenance.emplace_back("backend", "published:" + std::string(label));
    report.provenance.emplace_back("source", source);
    return report;
}

std::vector<std::string> baseline_labels(const std::vector<BaselineRow>& rows, std::string_view layout_id) {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        if (!layout_id.empty() && r.layout_id != layout_id) continue;
        if (std::find(out.begin(), out.end(), r.label) == out.end()) out.push_back(r.label);
    }
    return out;
}

}  // namespace mrkl::eval
