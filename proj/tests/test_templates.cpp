#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mrkl/templates.hpp"

using namespace mrkl;
using namespace mrkl::templates;

namespace {

struct Row {
    int arity;
    std::string id;
    std::string phrasing;
};

std::vector<Row> transcription() {
    std::ifstream in(MRKL_TEST_DATA "/catalog_transcription.tsv");
    REQUIRE(in);
    std::vector<Row> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto t1 = line.find('\t');
        auto t2 = line.find('\t', t1 + 1);
        rows.push_back({std::stoi(line.substr(0, t1)), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)});
    }
    return rows;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
    return s;
}

Example make(const std::string& id, std::vector<std::uint64_t> ops, Split split, Rendering r = Rendering::Digits) {
    auto e = instantiate(find_template(id), ops, r);
    e.meta.split = split;
    return e;
}

}  // namespace

TEST_CASE("catalog sizes and lookups") {
    CHECK(catalog(1).size() == 20);
    CHECK(catalog(2).size() == 29);
    CHECK(single_op_template(3, Op::Sub).phrasing == "What is the difference between {x} and {y}?");
    CHECK(find_template("f3-sub").phrasing == "What is the difference between {x} and {y}?");
    CHECK(find_template("((A+B)*C)").phrasing == "Sum A and B and multiply by C");
    CHECK_THROWS_AS(find_template("nope"), std::out_of_range);
    std::set<std::string> ids;
    for (int arity : {1, 2}) {
        for (const auto& t : catalog(arity)) ids.insert(t.id);
    }
    CHECK(ids.size() == 49);
}

TEST_CASE("catalog matches the transcribed tables") {
    auto rows = transcription();
    REQUIRE(rows.size() == 49);
    std::map<std::string, std::string> single;
    std::vector<Row> two;
    for (const auto& r : rows) {
        if (r.arity == 1) single[r.id] = r.phrasing;
        else two.push_back(r);
    }
    for (const auto& t : catalog(1)) CHECK(single.at(t.id) == t.phrasing);
    const auto& verbatim = catalog(2, Spelling::Verbatim);
    const auto& corrected = catalog(2, Spelling::Corrected);
    REQUIRE(two.size() == 29);
    for (std::size_t i = 0; i < 29; ++i) {
        CHECK(verbatim[i].id == two[i].id);
        CHECK(verbatim[i].phrasing == two[i].phrasing);
        const auto fixed = replace_all(replace_all(two[i].phrasing, "diffrence", "difference"), " bu ", " by ");
        CHECK(corrected[i].phrasing == fixed);
        CHECK(corrected[i].id == verbatim[i].id);
    }
}

TEST_CASE("two-op catalog covers the operator grid") {
    std::ifstream in(MRKL_TEST_DATA "/two_op_grid.txt");
    REQUIRE(in);
    std::set<std::string> grid;
    std::string line;
    const std::vector<std::uint64_t> abc{1, 2, 3};
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        line = replace_all(replace_all(replace_all(line, "A", "1"), "B", "2"), "C", "3");
        grid.insert(arith::to_calculator_call(arith::parse_calculator_call(line)));
    }
    REQUIRE(grid.size() == 29);
    std::set<std::string> built;
    for (const auto& t : catalog(2)) built.insert(arith::to_calculator_call(t.build(abc)));
    CHECK(built == grid);
}

TEST_CASE("bracket classification") {
    int requiring = 0;
    std::set<std::pair<Op, Op>> free_pairs;
    const std::vector<std::uint64_t> abc{1, 2, 3};
    for (const auto& t : catalog(2)) {
        // brackets are needed iff the precedence parse of the flat sequence builds a different tree
        std::string flat = "1";
        flat += arith::op_symbol(t.ops[0]);
        flat += "2";
        flat += arith::op_symbol(t.ops[1]);
        flat += "3";
        const bool differs = !arith::structurally_equal(arith::parse_calculator_call(flat), t.build(abc));
        CHECK(t.requires_brackets() == differs);
        if (t.requires_brackets()) {
            ++requiring;
        } else {
            free_pairs.insert({t.ops[0], t.ops[1]});
        }
    }
    CHECK(requiring == 13);
    CHECK(bracket_free_two_op().size() == 16);
    CHECK(free_pairs.size() == 16);
}

TEST_CASE("sample_operands") {
    Rng rng(1);
    const auto& add = single_op_template(0, Op::Add);
    for (int i = 0; i < 2000; ++i) {
        auto o = sample_operands(1, add, rng);
        REQUIRE(o.size() == 2);
        for (auto v : o) CHECK((v >= 1 && v <= 9));
        o = sample_operands(3, add, rng);
        for (auto v : o) CHECK((v >= 100 && v <= 999));
    }
    const auto& t = find_template("(A/(B-C))");
    for (int i = 0; i < 10000; ++i) {
        auto o = sample_operands(1, t, rng);
        REQUIRE(o[1] != o[2]);
        CHECK_NOTHROW(arith::evaluate(t.build(o)));
    }
    for (int d = 1; d <= 9; ++d) {
        for (const auto& tt : catalog(2)) {
            auto o = sample_operands(d, tt, rng);
            for (auto v : o) CHECK(digit_count(v) == d);
            CHECK_NOTHROW(arith::evaluate(tt.build(o)));
        }
    }
}

TEST_CASE("instantiate") {
    auto e = instantiate(single_op_template(0, Op::Add), std::vector<std::uint64_t>{58, 12}, Rendering::Digits);
    CHECK(e.text == "How much is 58 plus 12?");
    CHECK(e.gold_answer == arith::ExactNumber(70));
    CHECK(e.meta.format_id == "0");
    CHECK(e.meta.digits == std::vector<int>{2, 2});

    e = instantiate(single_op_template(0, Op::Add), std::vector<std::uint64_t>{27, 13}, Rendering::Words);
    CHECK(e.text == "How much is twenty seven plus thirteen?");
    CHECK(e.gold_answer == arith::ExactNumber(40));

    e = instantiate(find_template("((A+B)*C)"), std::vector<std::uint64_t>{1, 1, 1}, Rendering::Digits);
    CHECK(e.text == "Sum 1 and 1 and multiply by 1");
    CHECK(e.gold_answer == arith::ExactNumber(2));
    CHECK(e.meta.template_id == "((A+B)*C)");
    CHECK(e.meta.ops == std::vector<Op>{Op::Add, Op::Mul});

    e = instantiate(find_template("(A/(B+C))", Spelling::Verbatim), std::vector<std::uint64_t>{6, 1, 2}, Rendering::Digits);
    CHECK(e.text == "How much is 6 divided bu the sum of 1 and 2?");
    CHECK(e.gold_answer == arith::ExactNumber(2));
}

TEST_CASE("experiment 1 counts") {
    auto d = generate(experiment_spec(1, 7));
    CHECK(d.count(Split::Train) == 40);
    CHECK(d.count(Split::Dev) == 0);
    CHECK(d.count(Split::Test) == 41 + 8 * 50);
    std::set<std::string> one_digit;
    std::map<int, int> per_digit;
    for (const auto& e : d.examples) {
        if (e.meta.split == Split::Train) CHECK(e.meta.digits == std::vector<int>{1, 1});
        if (e.meta.digits[0] == 1) one_digit.insert(arith::to_calculator_call(e.gold_expr));
        if (e.meta.split == Split::Test) ++per_digit[e.meta.digits[0]];
        CHECK(e.meta.format_id == "0");
    }
    CHECK(one_digit.size() == 81);
    CHECK(per_digit[1] == 41);
    for (int k = 2; k <= 9; ++k) CHECK(per_digit[k] == 50);
}

TEST_CASE("experiment 5 covers the 16 bracket-free combinations") {
    auto d = generate(experiment_spec(5, 3));
    std::set<std::string> test_ids;
    for (const auto& e : d.examples) {
        if (e.meta.split == Split::Test) {
            test_ids.insert(e.meta.template_id);
            CHECK(e.meta.digits[0] <= 7);
        } else if (e.meta.split == Split::Train) {
            CHECK(e.meta.ops.size() == 1);
        }
    }
    CHECK(test_ids.size() == 16);
    for (const auto& id : test_ids) CHECK_FALSE(find_template(id).requires_brackets());
}

TEST_CASE("generated examples satisfy their invariants") {
    for (int exp = 1; exp <= 5; ++exp) {
        auto d = generate(experiment_spec(exp, 11));
        for (const auto& e : d.examples) {
            REQUIRE(e.gold_answer == arith::evaluate(e.gold_expr));
            const auto& t = find_template(e.meta.template_id);
            std::vector<std::uint64_t> operands;
            std::function<void(const arith::Expr&)> collect = [&](const arith::Expr& x) {
                if (x.is_leaf()) {
                    operands.push_back(static_cast<std::uint64_t>(x.operand()));
                    return;
                }
                collect(x.left());
                collect(x.right());
            };
            collect(e.gold_expr);
            // leaves come out in slot order for every catalog tree
            REQUIRE(e.text == render_text(t, operands, e.meta.rendering));
        }
        CHECK(check_no_overlap(d));
    }
}

TEST_CASE("determinism and JSONL round trip") {
    auto a = to_jsonl(generate(experiment_spec(3, 5)));
    auto b = to_jsonl(generate(experiment_spec(3, 5)));
    auto c = to_jsonl(generate(experiment_spec(3, 6)));
    CHECK(a == b);
    CHECK(a != c);
    std::istringstream in(a);
    auto back = read_jsonl(in);
    CHECK(to_jsonl(back) == a);
    CHECK(back.examples.size() == 2400);

    std::istringstream bad("{\"version\":2}\n");
    CHECK_THROWS(read_jsonl(bad));
}

TEST_CASE("check_no_overlap follows the wording rule") {
    std::vector<Example> xs{make("f0-add", {3, 1}, Split::Train), make("f1-add", {3, 1}, Split::Test)};
    CHECK_FALSE(check_no_overlap(xs));
    xs = {make("f0-add", {3, 1}, Split::Train), make("f0-add", {1, 3}, Split::Test)};
    CHECK(check_no_overlap(xs));
    xs = {make("f0-add", {3, 1}, Split::Train), make("f0-add", {3, 1}, Split::Dev, Rendering::Words)};
    CHECK_FALSE(check_no_overlap(xs));
}

TEST_CASE("infeasible specs raise GenerationError") {
    DatasetSpec spec;
    spec.seed = 1;
    spec.cells.push_back({Split::Test, {"f0-add"}, {1}, {Rendering::Digits}, 82});
    CHECK_THROWS_AS(generate(spec), GenerationError);
    spec.cells[0].count = 81;
    CHECK(generate(spec).examples.size() == 81);
    CHECK(expression_space(single_op_template(0, Op::Add), 1) == 81);
    CHECK(expression_space(single_op_template(0, Op::Div), 2) == 90 * 90);
    CHECK_THROWS(experiment_spec(6, 1));
}

TEST_CASE("two_op_split") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        auto s = two_op_split(rng);
        REQUIRE(s.train.size() == 14);
        REQUIRE(s.test.size() == 15);
        int bracketed = 0;
        for (const auto& id : s.train) bracketed += find_template(id).requires_brackets() ? 1 : 0;
        CHECK(bracketed == 1);
        std::set<std::string> all(s.train.begin(), s.train.end());
        all.insert(s.test.begin(), s.test.end());
        CHECK(all.size() == 29);
    }
}
