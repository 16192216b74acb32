#include "mrkl/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrkl/evalharness.hpp"
#include "mrkl/experts.hpp"
#include "mrkl/extractor.hpp"
#include "mrkl/router.hpp"
#include "mrkl/templates.hpp"

namespace mrkl::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Raw option values as typed; empty means "not given on the command line".
struct RawOptions {
    std::string config;
    int experiment = 0;
    std::string seed;
    std::string operation;
    std::string rendering;
    bool verbatim = false;
    std::string out;
    std::string backend;
    std::string fallback_backend;
    std::string runs;
    bool two_op = false;
    std::string splits;
    std::vector<std::string> trained_on;
    std::string data_dir;
    bool no_generate = false;
    std::string style;
    bool with_baselines = false;
    std::string baselines;
    std::vector<std::string> text;
    std::string threshold;
    std::string rates;
    std::string records;
    std::string clock;
    bool trace = false;
    bool json = false;
    std::vector<std::string> compare_args;
};

// flags > environment > config file > defaults
class Settings {
public:
    Settings(const RawOptions& raw, std::map<std::string, std::string> config)
        : raw_(raw), config_(std::move(config)) {}

    std::string get(const std::string& flag_value, const char* env, const std::string& key,
                     const std::string& fallback) const {
        if (!flag_value.empty()) return flag_value;
        if (env != nullptr) {
            if (const char* v = std::getenv(env); v != nullptr && *v != '\0') return v;
        }
        if (auto it = config_.find(key); it != config_.end()) return it->second;
        return fallback;
    }

    std::uint64_t seed() const {
        const std::string s = get(raw_.seed, "MRKL_SEED", "seed", "0");
        try {
            std::size_t used = 0;
            if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
            auto v = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument("trailing text");
            return v;
        } catch (const std::exception&) {
            throw UsageError("seed must be a non-negative integer, got '" + s + "'");
        }
    }

    int positive(const std::string& flag_value, const std::string& key, int fallback) const {
        const std::string s = get(flag_value, nullptr, key, std::to_string(fallback));
        try {
            std::size_t used = 0;
            int v = std::stoi(s, &used);
            if (used != s.size() || v < 1) throw std::invalid_argument("range");
            return v;
        } catch (const std::exception&) {
            throw UsageError(key + " must be a positive integer, got '" + s + "'");
        }
    }

    double threshold() const {
        const std::string s = get(raw_.threshold, nullptr, "threshold", "0.5");
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size() || !(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("range");
            return v;
        } catch (const std::exception&) {
            throw UsageError("threshold must be a number in [0,1], got '" + s + "'");
        }
    }

    experts::Clock clock() const {
        const std::string s = get(raw_.clock, "MRKL_CLOCK", "clock", "system");
        if (s == "system") return experts::system_clock();
        try {
            return experts::fixed_clock(experts::parse_iso_date(s));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--clock: ") + e.what());
        }
    }

    std::string backend() const { return get(raw_.backend, nullptr, "backend", "reference"); }
    std::string fallback_backend() const { return get(raw_.fallback_backend, nullptr, "fallback_backend", "stub"); }
    std::string rates() const {
        return get(raw_.rates, nullptr, "rates", std::string(MRKL_DATA_DIR) + "/rates.jsonl");
    }
    std::string records() const {
        return get(raw_.records, nullptr, "records", std::string(MRKL_DATA_DIR) + "/records.jsonl");
    }
    std::string baselines() const { return get(raw_.baselines, nullptr, "baselines", eval::default_baselines_path()); }
    std::string data_dir() const { return get(raw_.data_dir, nullptr, "data_dir", ""); }
    std::string style() const { return get(raw_.style, nullptr, "style", "markdown"); }

private:
    const RawOptions& raw_;
    std::map<std::string, std::string> config_;
};

std::unique_ptr<extractor::ExtractorBackend> backend_from(const std::string& spec) {
    try {
        return extractor::make_backend(spec);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::unique_ptr<experts::CompletionBackend> completion_from(const std::string& spec) {
    try {
        return experts::make_completion_backend(spec);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::optional<arith::Op> operation_from(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        return arith::op_from_name(s);
    } catch (const std::exception&) {
        throw UsageError("operation must be add, sub, mul or div, got '" + s + "'");
    }
}

numword::Rendering rendering_from(const std::string& s) {
    if (s.empty()) return numword::Rendering::Digits;
    try {
        return numword::rendering_from_string(s);
    } catch (const std::exception&) {
        throw UsageError("rendering must be digits or words, got '" + s + "'");
    }
}

eval::Style style_from(const std::string& s) {
    try {
        return eval::style_from_string(s);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::vector<std::shared_ptr<const experts::Expert>> build_experts(const Settings& s) {
    std::vector<std::shared_ptr<const experts::Expert>> out;
    out.push_back(std::make_shared<experts::CalculatorExpert>(backend_from(s.backend())));
    out.push_back(std::make_shared<experts::DateExpert>(s.clock()));

    std::optional<experts::RateTable> rates;
    std::string rates_status = "ok (" + s.rates() + ")";
    try {
        rates = experts::load_rates(s.rates());
    } catch (const experts::ResourceError& e) {
        rates_status = std::string("resource-missing: ") + e.what();
    }
    out.push_back(std::make_shared<experts::CurrencyExpert>(std::move(rates), rates_status));

    std::optional<experts::RecordStore> store;
    std::string store_status = "ok (" + s.records() + ")";
    try {
        store = experts::load_records(s.records());
    } catch (const experts::ResourceError& e) {
        store_status = std::string("resource-missing: ") + e.what();
    }
    out.push_back(std::make_shared<experts::DatabaseExpert>(std::move(store), store_status));
    out.push_back(std::make_shared<experts::FallbackExpert>(completion_from(s.fallback_backend())));
    return out;
}

std::string split_counts(const templates::Dataset& d) {
    return "train=" + std::to_string(d.count(templates::Split::Train)) +
           " dev=" + std::to_string(d.count(templates::Split::Dev)) +
           " test=" + std::to_string(d.count(templates::Split::Test));
}

// ---------------------------------------------------------------------------

int cmd_generate(const RawOptions& raw, const Settings& s, std::ostream& out, std::ostream& err) {
    templates::ExperimentOptions options;
    options.operation = operation_from(raw.operation);
    options.rendering = rendering_from(raw.rendering);
    options.spelling = raw.verbatim ? templates::Spelling::Verbatim : templates::Spelling::Corrected;
    const auto spec = templates::experiment_spec(raw.experiment, s.seed(), options);
    const auto dataset = templates::generate(spec);

    if (raw.out == "-") {
        templates::write_jsonl(out, dataset);
        err << dataset.name << ": " << split_counts(dataset) << '\n';
        return kExitOk;
    }
    const std::string path = raw.out.empty() ? spec.name + "-seed" + std::to_string(spec.seed) + ".jsonl" : raw.out;
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    templates::write_jsonl(file, dataset);
    file.close();
    if (!file) throw std::runtime_error("failed writing '" + path + "'");
    out << "wrote " << path << " (" << dataset.name << ", " << dataset.examples.size() << " examples): "
        << split_counts(dataset) << '\n';
    return kExitOk;
}

int cmd_eval(const RawOptions& raw, const Settings& s, std::ostream& out, std::ostream& err) {
    eval::ExperimentConfig config;
    config.experiment = raw.experiment;
    config.base_seed = s.seed();
    config.two_op = raw.two_op;
    config.runs = s.positive(raw.runs, "runs", raw.experiment <= 2 ? 1 : 3);
    config.splits = s.positive(raw.splits, "splits", 10);
    config.rendering = rendering_from(raw.rendering);
    config.operation = operation_from(raw.operation);
    config.spelling = raw.verbatim ? templates::Spelling::Verbatim : templates::Spelling::Corrected;
    config.trained_on = raw.trained_on;
    const auto style = style_from(s.style());

    const std::string data_dir = s.data_dir();
    if (raw.no_generate && data_dir.empty()) throw UsageError("--no-generate needs --data-dir");
    if (!data_dir.empty()) {
        const bool no_generate = raw.no_generate;
        config.provider = [data_dir, no_generate](const templates::DatasetSpec& spec, int) {
            const fs::path path = fs::path(data_dir) / (spec.name + "-seed" + std::to_string(spec.seed) + ".jsonl");
            if (fs::exists(path)) {
                std::ifstream in(path);
                if (!in) throw std::runtime_error("cannot read dataset '" + path.string() + "'");
                return templates::read_jsonl(in);
            }
            if (no_generate) throw std::runtime_error("dataset '" + path.string() + "' not found (--no-generate)");
            auto dataset = templates::generate(spec);
            fs::create_directories(data_dir);
            std::ofstream file(path);
            if (!file) throw std::runtime_error("cannot write dataset '" + path.string() + "'");
            templates::write_jsonl(file, dataset);
            return dataset;
        };
    }

    const auto backend = backend_from(s.backend());
    eval::EvalReport report;
    try {
        report = eval::run(config, *backend);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    out << eval::render(report, style);
    if (raw.with_baselines) {
        const auto rows = eval::load_baselines(s.baselines());
        for (const auto& label : eval::baseline_labels(rows, report.layout_id)) {
            out << "\nPublished: " << label << "\n\n"
                << eval::render(eval::baseline_report(rows, label, report.layout_id), style);
        }
    }
    if (!raw.out.empty()) {
        for (auto [ext, st] : {std::pair{".md", eval::Style::Markdown}, std::pair{".csv", eval::Style::Csv}}) {
            std::ofstream file(raw.out + ext);
            if (!file) throw std::runtime_error("cannot write '" + raw.out + ext + "'");
            file << eval::render(report, st);
        }
    }
    const auto errors = report.provenance_value("transport_errors");
    if (errors && *errors != "0") {
        err << "error: backend '" << backend->name() << "' failed on " << *errors << " examples: "
            << report.provenance_value("first_transport_error").value_or("") << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

void print_decision(const router::RoutingDecision& d, const RawOptions& raw, std::ostream& out) {
    if (raw.json) {
        out << router::to_json(d).dump() << '\n';
        return;
    }
    out << d.response.answer_text << '\n';
    out << "expert: " << d.chosen << '\n';
    out << "rationale: " << d.response.rationale << '\n';
    if (raw.trace) {
        out << "scores:";
        for (const auto& [name, score] : d.scores) out << ' ' << name << '=' << eval::format_double(score);
        out << '\n';
        for (const auto& [name, reason] : d.declines) out << "declined: " << name << ": " << reason << '\n';
        for (const auto& e : d.errors) out << "expert error: " << e.expert << ": " << e.message << '\n';
    }
}

int cmd_route(const RawOptions& raw, const Settings& s, std::istream& in, std::ostream& out) {
    auto all = build_experts(s);
    router::Router r(all.back(), s.threshold());
    for (std::size_t i = 0; i + 1 < all.size(); ++i) r.register_expert(all[i]);

    if (!raw.text.empty()) {
        std::string text;
        for (const auto& w : raw.text) text += (text.empty() ? "" : " ") + w;
        print_decision(r.route(text), raw, out);
        return kExitOk;
    }
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (!first && !raw.json) out << '\n';
        first = false;
        print_decision(r.route(line), raw, out);
        out.flush();
    }
    return kExitOk;
}

int cmd_experts(const RawOptions& raw, const Settings& s, std::ostream& out) {
    auto all = build_experts(s);
    if (raw.json) {
        auto j = nlohmann::ordered_json::array();
        for (const auto& e : all) {
            const auto& d = e->descriptor();
            j.push_back({{"name", d.name},
                         {"kind", experts::to_string(d.kind)},
                         {"description", d.description},
                         {"status", e->resource_status()}});
        }
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    for (const auto& e : all) {
        const auto& d = e->descriptor();
        out << d.name << " [" << experts::to_string(d.kind) << "] " << d.description << "\n  status: "
            << e->resource_status() << '\n';
    }
    return kExitOk;
}

bool is_baseline(const std::string& arg) { return arg.rfind("baseline:", 0) == 0; }

// "baseline:<label>" or "baseline:<label>@<layout>"; without a layout the
// other report's layout is used.
eval::EvalReport load_report(const std::string& arg, const Settings& s, const std::string& layout_hint) {
    if (is_baseline(arg)) {
        std::string label = arg.substr(9);
        std::string lay = layout_hint;
        if (auto at = label.find('@'); at != std::string::npos) {
            lay = label.substr(at + 1);
            label.erase(at);
        }
        return eval::baseline_report(eval::load_baselines(s.baselines()), label, lay);
    }
    std::ifstream in(arg);
    if (!in) throw std::runtime_error("cannot open report '" + arg + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return eval::parse_csv(ss.str());
}

int cmd_compare(const RawOptions& raw, const Settings& s, std::ostream& out) {
    const auto style = style_from(s.style());
    const auto& args = raw.compare_args;
    eval::EvalReport a;
    eval::EvalReport b;
    if (is_baseline(args.at(0)) && !is_baseline(args.at(1))) {
        b = load_report(args[1], s, "");
        a = load_report(args[0], s, b.layout_id);
    } else {
        a = load_report(args.at(0), s, "");
        b = load_report(args.at(1), s, a.layout_id);
    }
    out << eval::render(eval::compare(a, b, args[0], args[1]), style);
    return kExitOk;
}

}  // namespace

std::map<std::string, std::string> parse_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        for (char& c : key) {
            if (c == '-') c = '_';
        }
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    return parse_config(in);
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Expert router with an exact calculator, and an evaluation harness for arithmetic extraction",
                 "mrkl"};
    app.require_subcommand(1);
    app.fallthrough();
    RawOptions raw;
    app.add_option("--config", raw.config, "key=value config file (default: $MRKL_CONFIG)");

    auto* gen = app.add_subcommand("generate", "Generate an experiment dataset as JSON Lines");
    auto* ev = app.add_subcommand("eval", "Evaluate an extractor backend on an experiment");
    auto* route = app.add_subcommand("route", "Route text to an expert (one-shot, or one line at a time from stdin)");
    auto* ex = app.add_subcommand("experts", "List registered experts and resource status");
    auto* cmp = app.add_subcommand("compare", "Per-cell differences between two reports");

    for (auto* sub : {gen, ev}) {
        sub->add_option("--experiment,-e", raw.experiment, "Experiment 1-5")->required()->check(CLI::Range(1, 5));
        sub->add_option("--seed", raw.seed, "Base seed (default: $MRKL_SEED or 0)");
        sub->add_option("--operation", raw.operation, "add, sub, mul or div");
        sub->add_option("--rendering", raw.rendering, "digits or words (experiment 1)");
        sub->add_flag("--verbatim-catalog", raw.verbatim, "Use two-op phrasings with their original typos");
    }
    gen->add_option("--out,-o", raw.out, "Output file, '-' for stdout");

    ev->add_option("--backend", raw.backend, "reference, words-disabled or exec:<command>");
    ev->add_option("--runs", raw.runs, "Seeds per experiment (default 1 for experiments 1-2, else 3)");
    ev->add_flag("--two-op", raw.two_op, "Experiment 4 two-operation table");
    ev->add_option("--splits", raw.splits, "Formula partitions for --two-op (default 10)");
    ev->add_option("--trained-on", raw.trained_on, "Rows the backend was adapted on (recorded, not enforced)")
        ->delimiter(',');
    ev->add_option("--data-dir", raw.data_dir, "Read datasets from here, writing generated ones");
    ev->add_flag("--no-generate", raw.no_generate, "Fail when a dataset file is missing");
    ev->add_option("--out,-o", raw.out, "Write <out>.md and <out>.csv");
    ev->add_option("--style", raw.style, "markdown or csv for stdout");
    ev->add_flag("--with-baselines", raw.with_baselines, "Also print published numbers for the same table");
    ev->add_option("--baselines", raw.baselines, "Published baselines CSV");

    for (auto* sub : {route, ex}) {
        sub->add_option("--rates", raw.rates, "Rates file");
        sub->add_option("--records", raw.records, "Records file");
        sub->add_option("--backend", raw.backend, "Calculator extractor backend");
        sub->add_option("--fallback-backend", raw.fallback_backend, "stub, echo or exec:<command>");
        sub->add_option("--clock", raw.clock, "YYYY-MM-DD or system (default: $MRKL_CLOCK)");
        sub->add_flag("--json", raw.json, "JSON output");
    }
    route->add_option("text", raw.text, "Input text; omit to read lines from stdin");
    route->add_option("--threshold", raw.threshold, "Minimum confidence to pick a symbolic expert (default 0.5)");
    route->add_flag("--trace", raw.trace, "Print the score map and declines");

    cmp->add_option("reports", raw.compare_args, "Two report CSV files or baseline:<label>")->required()->expected(2);
    cmp->add_option("--style", raw.style, "markdown or csv");
    cmp->add_option("--baselines", raw.baselines, "Published baselines CSV");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        std::map<std::string, std::string> config;
        std::string config_path = raw.config;
        if (config_path.empty()) {
            if (const char* env = std::getenv("MRKL_CONFIG"); env != nullptr) config_path = env;
        }
        if (!config_path.empty()) config = load_config(config_path);
        Settings settings(raw, std::move(config));

        if (gen->parsed()) return cmd_generate(raw, settings, out, err);
        if (ev->parsed()) return cmd_eval(raw, settings, out, err);
        if (route->parsed()) return cmd_route(raw, settings, in, out);
        if (ex->parsed()) return cmd_experts(raw, settings, out);
        if (cmp->parsed()) return cmd_compare(raw, settings, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

int main_entry(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace mrkl::cli
