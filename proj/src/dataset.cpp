#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "mrkl/templates.hpp"

namespace mrkl::templates {

namespace {

constexpr std::uint64_t kEnumerateLimit = 1u << 16;

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return b > std::numeric_limits<std::uint64_t>::max() - a ? std::numeric_limits<std::uint64_t>::max()
                                                             : a + b;
}

std::uint64_t low_bound(int digits) {
    std::uint64_t lo = 1;
    for (int i = 1; i < digits; ++i) lo *= 10;
    return lo;
}

struct Candidate {
    const Template* tmpl;
    std::vector<std::uint64_t> operands;
    std::string key;
};

void validate(const DatasetSpec& spec) {
    if (spec.cells.empty()) throw GenerationError("dataset spec '" + spec.name + "' has no cells");
    for (const auto& cell : spec.cells) {
        if (cell.count == 0) throw GenerationError("cell counts must be positive");
        if (cell.template_ids.empty()) throw GenerationError("cell has no templates");
        if (cell.digit_counts.empty()) throw GenerationError("cell has no digit counts");
        if (cell.renderings.empty()) throw GenerationError("cell has no renderings");
        for (int d : cell.digit_counts) {
            if (d < 1 || d > 9) throw GenerationError("digit counts must lie in [1,9]");
        }
    }
}

class Generator {
public:
    explicit Generator(const DatasetSpec& spec) : spec_(spec), rng_(spec.seed) {}

    Dataset run() {
        validate(spec_);
        Dataset out;
        out.name = spec_.name;
        for (const auto& cell : spec_.cells) fill(cell, out);
        return out;
    }

private:
    // Only keys already owned by another split are off limits.
    bool usable(const std::string& key, Split split) const {
        auto it = owner_.find(key);
        return it == owner_.end() || it->second == split;
    }

    void fill(const CellSpec& cell, Dataset& out) {
        std::vector<const Template*> tmpls;
        for (const auto& id : cell.template_ids) {
            try {
                tmpls.push_back(&find_template(id, spec_.spelling));
            } catch (const std::out_of_range&) {
                throw GenerationError("unknown template id '" + id + "'");
            }
        }
        std::uint64_t space = 0;
        for (const auto* t : tmpls) {
            for (int d : cell.digit_counts) space = saturating_add(space, expression_space(*t, d));
        }

        std::vector<Candidate> chosen =
            space <= kEnumerateLimit ? enumerate(cell, tmpls) : reject_sample(cell, tmpls);

        for (auto& c : chosen) {
            owner_.emplace(c.key, cell.split);
            for (Rendering r : cell.renderings) {
                Example ex = instantiate(*c.tmpl, c.operands, r);
                ex.meta.split = cell.split;
                char buf[16];
                std::snprintf(buf, sizeof buf, "%06zu", out.examples.size() + 1);
                ex.id = spec_.name + "-" + buf;
                out.examples.push_back(std::move(ex));
            }
        }
    }

    std::vector<Candidate> enumerate(const CellSpec& cell, const std::vector<const Template*>& tmpls) {
        std::vector<Candidate> all;
        for (const auto* t : tmpls) {
            for (int d : cell.digit_counts) {
                const std::uint64_t lo = low_bound(d);
                const std::uint64_t hi = lo * 10 - 1;
                std::vector<std::uint64_t> ops(t->slot_count(), lo);
                while (true) {
                    add_candidate(*t, ops, cell.split, all);
                    std::size_t k = ops.size();
                    while (k > 0 && ops[k - 1] == hi) ops[--k] = lo;
                    if (k == 0) break;
                    ++ops[k - 1];
                }
            }
        }
        rng_.shuffle(all);
        std::vector<Candidate> chosen;
        std::unordered_set<std::string> taken;
        for (auto& c : all) {
            if (chosen.size() == cell.count) break;
            if (taken.insert(c.key).second) chosen.push_back(std::move(c));
        }
        if (chosen.size() < cell.count) {
            throw GenerationError("infeasible spec '" + spec_.name + "': a " + std::string(to_string(cell.split)) +
                                  " cell requests " + std::to_string(cell.count) +
                                  " distinct expressions but only " + std::to_string(chosen.size()) +
                                  " are available");
        }
        return chosen;
    }

    void add_candidate(const Template& t, const std::vector<std::uint64_t>& ops, Split split,
                       std::vector<Candidate>& out) const {
        arith::Expr e = t.build(ops);
        try {
            arith::evaluate(e);
        } catch (const arith::EvaluationError&) {
            return;
        }
        std::string key = arith::to_calculator_call(e);
        if (usable(key, split)) out.push_back({&t, ops, std::move(key)});
    }

    std::vector<Candidate> reject_sample(const CellSpec& cell, const std::vector<const Template*>& tmpls) {
        std::vector<Candidate> chosen;
        std::unordered_set<std::string> taken;
        const std::size_t budget = 1000 + 200 * cell.count;
        std::size_t attempts = 0;
        while (chosen.size() < cell.count) {
            if (++attempts > budget) {
                throw GenerationError("infeasible spec '" + spec_.name + "': could not draw " +
                                      std::to_string(cell.count) + " distinct expressions for a " +
                                      std::string(to_string(cell.split)) + " cell");
            }
            const Template* t = tmpls[rng_.uniform(0, tmpls.size() - 1)];
            int d = cell.digit_counts[rng_.uniform(0, cell.digit_counts.size() - 1)];
            auto ops = sample_operands(d, *t, rng_);
            std::string key = arith::to_calculator_call(t->build(ops));
            if (!usable(key, cell.split) || !taken.insert(key).second) continue;
            chosen.push_back({t, std::move(ops), std::move(key)});
        }
        return chosen;
    }

    const DatasetSpec& spec_;
    Rng rng_;
    std::unordered_map<std::string, Split> owner_;
};

std::vector<int> digit_range(int lo, int hi) {
    std::vector<int> out;
    for (int d = lo; d <= hi; ++d) out.push_back(d);
    return out;
}

std::vector<std::string> single_op_ids(Op op, std::vector<int> formats) {
    std::vector<std::string> out;
    for (int f : formats) out.push_back(single_op_template(f, op).id);
    return out;
}

}  // namespace

std::size_t Dataset::count(Split s) const {
    return static_cast<std::size_t>(
        std::count_if(examples.begin(), examples.end(), [s](const Example& e) { return e.meta.split == s; }));
}

std::uint64_t expression_space(const Template& t, int digits) {
    if (digits < 1 || digits > 9) return 0;
    const std::uint64_t per_operand = 9 * low_bound(digits);
    std::uint64_t space = 1;
    for (std::size_t i = 0; i < t.slot_count(); ++i) space = saturating_mul(space, per_operand);
    return space;
}

Dataset generate(const DatasetSpec& spec) { return Generator(spec).run(); }

DatasetSpec experiment_spec(int experiment, std::uint64_t seed, const ExperimentOptions& options) {
    DatasetSpec spec;
    spec.experiment = experiment;
    spec.seed = seed;
    spec.spelling = options.spelling;
    const Op op = options.operation.value_or(Op::Add);
    const std::string op_tag(arith::op_name(op));
    const auto all_digits = digit_range(1, 9);

    switch (experiment) {
        case 1: {
            spec.name = "exp1-" + op_tag;
            if (options.rendering == Rendering::Words) spec.name += "-words";
            const auto ids = single_op_ids(op, {0});
            const std::vector<Rendering> r{options.rendering};
            spec.cells.push_back({Split::Train, ids, {1}, r, 40});
            spec.cells.push_back({Split::Test, ids, {1}, r, 41});
            for (int d = 2; d <= 9; ++d) spec.cells.push_back({Split::Test, ids, {d}, r, 50});
            break;
        }
        case 2: {
            spec.name = "exp2-" + op_tag;
            const auto ids = single_op_ids(op, {0});
            const std::vector<Rendering> both{Rendering::Digits, Rendering::Words};
            for (int d = 1; d <= 9; ++d) {
                const std::uint64_t space = expression_space(single_op_template(0, op), d);
                const std::size_t train = space >= 200 ? 100 : static_cast<std::size_t>(space / 2);
                const std::size_t test = space >= 200 ? 100 : static_cast<std::size_t>(space - space / 2);
                spec.cells.push_back({Split::Train, ids, {d}, both, train});
                spec.cells.push_back({Split::Test, ids, {d}, both, test});
            }
            break;
        }
        case 3: {
            spec.name = "exp3-" + op_tag;
            spec.cells.push_back({Split::Train, single_op_ids(op, {0}), all_digits, {Rendering::Digits}, 400});
            for (Split s : {Split::Dev, Split::Test}) {
                for (int f = 0; f < 5; ++f) {
                    spec.cells.push_back({s, single_op_ids(op, {f}), all_digits, {Rendering::Digits}, 200});
                }
            }
            break;
        }
        case 4: {
            spec.name = "exp4";
            for (Op o : arith::kAllOps) {
                const auto ids = single_op_ids(o, {0, 1, 2, 3, 4});
                spec.cells.push_back({Split::Train, ids, all_digits, {Rendering::Digits}, 635});
                spec.cells.push_back({Split::Dev, ids, all_digits, {Rendering::Digits}, 315});
                spec.cells.push_back({Split::Test, ids, all_digits, {Rendering::Digits}, 315});
            }
            for (const auto& t : catalog(2, options.spelling)) {
                for (Split s : {Split::Train, Split::Dev, Split::Test}) {
                    spec.cells.push_back({s, {t.id}, all_digits, {Rendering::Digits}, 40});
                }
            }
            break;
        }
        case 5: {
            spec.name = "exp5";
            std::vector<std::string> singles;
            for (const auto& t : catalog(1)) singles.push_back(t.id);
            spec.cells.push_back({Split::Train, singles, all_digits, {Rendering::Digits}, 700});
            for (const auto* t : bracket_free_two_op(options.spelling)) {
                for (Split s : {Split::Dev, Split::Test}) {
                    spec.cells.push_back({s, {t->id}, digit_range(1, 7), {Rendering::Digits}, 210});
                }
            }
            break;
        }
        default:
            throw std::invalid_argument("experiment must be 1..5, got " + std::to_string(experiment));
    }
    return spec;
}

bool check_no_overlap(std::span<const Example> examples) {
    std::unordered_set<std::string> train;
    for (const auto& e : examples) {
        if (e.meta.split == Split::Train) train.insert(arith::to_calculator_call(e.gold_expr));
    }
    return std::none_of(examples.begin(), examples.end(), [&train](const Example& e) {
        return e.meta.split != Split::Train && train.count(arith::to_calculator_call(e.gold_expr)) > 0;
    });
}

// ---------------------------------------------------------------------------
// JSON Lines

void write_jsonl(std::ostream& out, const Dataset& dataset) {
    for (const auto& e : dataset.examples) {
        nlohmann::ordered_json j;
        j["version"] = kDatasetFormatVersion;
        j["id"] = e.id;
        j["text"] = e.text;
        j["formula"] = arith::to_calculator_call(e.gold_expr);
        j["answer"] = e.gold_answer.to_string();
        j["digits"] = e.meta.digits;
        j["format_id"] = e.meta.format_id;
        j["rendering"] = numword::to_string(e.meta.rendering);
        auto ops = nlohmann::ordered_json::array();
        for (Op op : e.meta.ops) ops.push_back(arith::op_name(op));
        j["ops"] = std::move(ops);
        j["split"] = to_string(e.meta.split);
        out << j.dump() << '\n';
    }
}

std::string to_jsonl(const Dataset& dataset) {
    std::ostringstream os;
    write_jsonl(os, dataset);
    return os.str();
}

Dataset read_jsonl(std::istream& in) {
    Dataset out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            if (j.at("version").get<int>() != kDatasetFormatVersion) {
                throw std::runtime_error("unsupported version " + j.at("version").dump());
            }
            ExampleMeta meta;
            meta.digits = j.at("digits").get<std::vector<int>>();
            meta.format_id = j.at("format_id").get<std::string>();
            meta.rendering = numword::rendering_from_string(j.at("rendering").get<std::string>());
            for (const auto& op : j.at("ops")) meta.ops.push_back(arith::op_from_name(op.get<std::string>()));
            meta.split = split_from_string(j.at("split").get<std::string>());
            meta.template_id = meta.ops.size() == 1
                                   ? "f" + meta.format_id + "-" + std::string(arith::op_name(meta.ops[0]))
                                   : meta.format_id;
            out.examples.push_back(Example{j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                                           arith::parse_calculator_call(j.at("formula").get<std::string>()),
                                           arith::ExactNumber::parse(j.at("answer").get<std::string>()),
                                           std::move(meta)});
        } catch (const std::exception& ex) {
            throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

}  // namespace mrkl::templates
