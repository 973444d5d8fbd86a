#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "paft/error.hpp"
#include "paft/eval.hpp"
#include "paft/perturb.hpp"
#include "paft/rng.hpp"
#include "paft/task.hpp"
#include "paft/toy_model.hpp"

using namespace paft;

namespace {

PromptTemplate make_template(const std::string& body) {
    PromptTemplate t;
    t.id = template_id_for(body);
    t.body = body;
    return t;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

/// Gold-independent deterministic model: predicts by pattern-field length
/// parity, so accuracies are nontrivial and exactly recountable.
class ParityModel : public TrainableModel {
public:
    double train_step(const std::vector<RenderedExample>&, double) override { return 0.0; }
    std::string predict_label(const RenderedExample& ex) const override {
        return ex.text.size() % 2 == 0 ? "A" : "B";
    }
    std::string param_digest() const override { return "parity"; }
};

// Brute-force summary oracle with long-double accumulation.
struct OracleSummary {
    double mean, stddev, top, min;
};

OracleSummary oracle_summarize(const std::vector<PromptEvalRow>& rows, double threshold) {
    long double total = 0.0L;
    double lowest = 2.0;
    size_t at_or_above = 0;
    for (const auto& r : rows) {
        const double acc = static_cast<double>(r.n_correct) / static_cast<double>(r.n_total);
        total += acc;
        lowest = std::min(lowest, acc);
        at_or_above += acc >= threshold;
    }
    const double mean = static_cast<double>(total / rows.size());
    long double sq = 0.0L;
    for (const auto& r : rows) {
        const double acc = static_cast<double>(r.n_correct) / static_cast<double>(r.n_total);
        sq += static_cast<long double>(acc - mean) * (acc - mean);
    }
    const double stddev =
        rows.size() > 1 ? std::sqrt(static_cast<double>(sq / (rows.size() - 1))) : 0.0;
    return {mean, stddev, static_cast<double>(at_or_above) / rows.size(), lowest};
}

} // namespace

TEST_CASE("summarize on the closed-form three-row case") {
    std::vector<PromptEvalRow> rows{
        {"p1", 8, 10, 0.8}, {"p2", 9, 10, 0.9}, {"p3", 10, 10, 1.0}};
    const EvalReport report = summarize(rows, 0.85);
    CHECK(report.mean == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(report.stddev == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(report.min_accuracy == 0.8);
    CHECK(report.top_fraction == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK_FALSE(report.conditional_accuracy.has_value());
}

TEST_CASE("summarize degenerate cases") {
    const EvalReport one = summarize({{"p", 7, 10, 0.7}}, 0.5);
    CHECK(one.stddev == 0.0);
    CHECK(one.mean == doctest::Approx(0.7));
    CHECK(one.min_accuracy == doctest::Approx(0.7));

    const EvalReport equal =
        summarize({{"a", 3, 4, 0.75}, {"b", 3, 4, 0.75}, {"c", 3, 4, 0.75}}, 0.8);
    CHECK(equal.stddev == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(equal.top_fraction == 0.0);

    CHECK_THROWS_WITH_AS(summarize({}, 0.5), doctest::Contains("EmptyRows"), Error);
    CHECK_THROWS_AS(summarize({{"p", 1, 2, 0.5}}, 1.5), Error);
}

TEST_CASE("summaries match the brute-force oracle on random rows") {
    Rng rng(88);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<PromptEvalRow> rows;
        const size_t n = 1 + rng.next_index(50);
        for (size_t i = 0; i < n; ++i) {
            PromptEvalRow r;
            r.prompt_id = "p" + std::to_string(i);
            r.n_total = 1 + rng.next_index(100);
            r.n_correct = rng.next_index(r.n_total + 1);
            r.accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_total);
            rows.push_back(r);
        }
        const double threshold = rng.next_double();
        const EvalReport report = summarize(rows, threshold);
        const OracleSummary oracle = oracle_summarize(rows, threshold);
        CHECK(std::fabs(report.mean - oracle.mean) <= 1e-12);
        CHECK(std::fabs(report.stddev - oracle.stddev) <= 1e-12);
        CHECK(std::fabs(report.top_fraction - oracle.top) <= 1e-12);
        CHECK(std::fabs(report.min_accuracy - oracle.min) <= 1e-12);
    }
}

TEST_CASE("evaluate_prompt_set rows match an independent recount") {
    const TaskSchema& schema = family_schema("pattern2");
    const auto data = synth_dataset("pattern2", 60, 17);
    const std::vector<PromptTemplate> prompts{
        make_template("Sequence: {pattern} A. {option_a} B. {option_b} Answer:"),
        make_template("{pattern}\nChoose A {option_a} or B {option_b}:"),
        make_template("Judge {pattern}; options {option_a} / {option_b}. Answer:")};

    ParityModel model;
    const EvalReport report = evaluate_prompt_set(model, data, prompts, schema, 0.5);
    REQUIRE(report.rows.size() == prompts.size());

    // independent recount straight from render + predict
    for (const auto& t : prompts) {
        uint64_t correct = 0;
        for (const auto& x : data) {
            const auto rendered = render(t, x, schema);
            const std::string pred = rendered.text.size() % 2 == 0 ? "A" : "B";
            correct += pred == x.gold;
        }
        const auto it =
            std::find_if(report.rows.begin(), report.rows.end(),
                         [&](const PromptEvalRow& r) { return r.prompt_id == t.id; });
        REQUIRE(it != report.rows.end());
        CHECK(it->n_correct == correct);
        CHECK(it->n_total == data.size());
        CHECK(it->accuracy == static_cast<double>(correct) / data.size());
    }

    // rows come back sorted by prompt id
    CHECK(std::is_sorted(report.rows.begin(), report.rows.end(),
                         [](const PromptEvalRow& a, const PromptEvalRow& b) {
                             return a.prompt_id < b.prompt_id;
                         }));
}

TEST_CASE("reports are permutation invariant") {
    const TaskSchema& schema = family_schema("pattern2");
    const auto data = synth_dataset("pattern2", 40, 23);
    std::vector<PromptTemplate> prompts{
        make_template("One: {pattern} A. {option_a} B. {option_b} Answer:"),
        make_template("Two: {pattern} A) {option_a} B) {option_b} Answer:"),
        make_template("Three: {pattern} (A) {option_a} (B) {option_b} Answer:"),
        make_template("Four: {pattern} A: {option_a} B: {option_b} Answer:")};

    ParityModel model;
    const EvalReport forward = evaluate_prompt_set(model, data, prompts, schema, 0.6);
    std::reverse(prompts.begin(), prompts.end());
    const EvalReport reversed = evaluate_prompt_set(model, data, prompts, schema, 0.6);

    CHECK(report_to_json(forward) == report_to_json(reversed));
}

TEST_CASE("evaluation validates its inputs") {
    const TaskSchema& schema = family_schema("pattern2");
    const auto data = synth_dataset("pattern2", 5, 1);
    ParityModel model;
    CHECK_THROWS_WITH_AS(evaluate_prompt_set(model, data, {}, schema, 0.5),
                         doctest::Contains("EmptyPromptSet"), Error);
    CHECK_THROWS_WITH_AS(
        evaluate_prompt_set(model, {}, {make_template("x {pattern}")}, schema, 0.5),
        doctest::Contains("EmptyDataset"), Error);
    CHECK_THROWS_WITH_AS(
        evaluate_prompt_set(model, data, {make_template("{bogus} {pattern}")}, schema, 0.5),
        doctest::Contains("SchemaError"), Error);
}

TEST_CASE("conditional accuracy over the clean set equals the clean mean") {
    const TaskSchema& schema = family_schema("pattern2");
    const auto data = synth_dataset("pattern2", 30, 29);
    const std::vector<PromptTemplate> prompts{
        make_template("Alpha {pattern} A. {option_a} B. {option_b}:"),
        make_template("Beta {pattern} A) {option_a} B) {option_b}:")};
    ParityModel model;
    const EvalReport clean = evaluate_prompt_set(model, data, prompts, schema, 0.5);
    CHECK(conditional_accuracy(model, data, prompts, schema) ==
          doctest::Approx(clean.mean).epsilon(1e-15));
    CHECK_THROWS_AS(conditional_accuracy(model, data, {}, schema), Error);
}

TEST_CASE("report JSON round-trips exactly") {
    std::vector<PromptEvalRow> rows{{"pa", 17, 60, 17.0 / 60.0}, {"pb", 59, 60, 59.0 / 60.0}};
    EvalReport report = summarize(rows, 0.9);
    report.conditional_accuracy = 0.123456789012345;

    const std::string path = temp_path("paft_report.json");
    write_report(report, path);
    const EvalReport back = read_report(path);

    CHECK(back.mean == report.mean);
    CHECK(back.stddev == report.stddev);
    CHECK(back.top_threshold == report.top_threshold);
    CHECK(back.top_fraction == report.top_fraction);
    CHECK(back.min_accuracy == report.min_accuracy);
    CHECK(back.conditional_accuracy == report.conditional_accuracy);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].n_correct == 17);
    CHECK(back.rows[0].accuracy == report.rows[0].accuracy);

    // the format marker is versioned
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"format\": \"evalreport/1\"") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("CSV projection has a header and re-summarizes to the same stats") {
    Rng rng(5);
    std::vector<PromptEvalRow> rows;
    for (size_t i = 0; i < 50; ++i) {
        PromptEvalRow r;
        r.prompt_id = "p" + std::to_string(1000 + i);
        r.n_total = 1 + rng.next_index(500);
        r.n_correct = rng.next_index(r.n_total + 1);
        r.accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_total);
        rows.push_back(r);
    }
    const EvalReport report = summarize(rows, 0.85);

    const std::string path = temp_path("paft_report.csv");
    write_report_csv(report, path);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "prompt_id,accuracy");
    std::vector<double> parsed;
    size_t row_count = 0;
    while (std::getline(in, line)) {
        ++row_count;
        parsed.push_back(std::stod(line.substr(line.find(',') + 1)));
    }
    CHECK(row_count == report.rows.size());

    long double total = 0.0L;
    for (double a : parsed) total += a;
    const double mean = static_cast<double>(total / parsed.size());
    long double sq = 0.0L;
    for (double a : parsed) sq += static_cast<long double>(a - mean) * (a - mean);
    const double stddev = std::sqrt(static_cast<double>(sq / (parsed.size() - 1)));
    CHECK(std::fabs(mean - report.mean) <= 1e-9);
    CHECK(std::fabs(stddev - report.stddev) <= 1e-9);
    std::remove(path.c_str());
}

TEST_CASE("perturbation leaves placeholder-only bodies unchanged") {
    PromptTemplate t = make_template("{pattern}{option_a}{option_b}");
    PerturbSpec spec;
    spec.ops = {PerturbOp::typo_swap, PerturbOp::char_drop, PerturbOp::case_flip};
    spec.intensity = 1.0;
    spec.seed = 3;
    const PromptTemplate out = perturb_template(t, spec);
    CHECK(out.body == t.body);
    CHECK(out.split == Split::adversarial);
    CHECK(out.strategy == Strategy::adversarial);
}

TEST_CASE("perturbation preserves the placeholder multiset") {
    const TaskSchema& schema = family_schema("pattern2");
    Rng rng(71);
    const std::vector<PerturbOp> all_ops{PerturbOp::typo_swap, PerturbOp::char_drop,
                                         PerturbOp::punctuation_jitter,
                                         PerturbOp::word_shuffle_window, PerturbOp::case_flip};
    const PromptTemplate base = make_template(
        "Sort the flagged word, carefully. Sequence: {pattern}\n"
        "A. {option_a} B. {option_b}, then {pattern} again.\nAnswer:");

    for (int trial = 0; trial < 100; ++trial) {
        PerturbSpec spec;
        const size_t n_ops = 1 + rng.next_index(all_ops.size());
        for (size_t i = 0; i < n_ops; ++i) spec.ops.push_back(all_ops[rng.next_index(5)]);
        spec.intensity = 0.05 + 0.9 * rng.next_double();
        spec.seed = rng.next_u64();

        const PromptTemplate out = perturb_template(base, spec);
        auto names = placeholders(out.body);
        auto expected = placeholders(base.body);
        std::sort(names.begin(), names.end());
        std::sort(expected.begin(), expected.end());
        CHECK(names == expected);
        CHECK(validate_template(out, schema).ok);
    }
}

TEST_CASE("perturbation reproduces its golden fixture") {
    PromptTemplate t = make_template(
        "Sort the flagged word. Sequence: {pattern}\nA. {option_a} B. {option_b}\nAnswer:");
    PerturbSpec spec;
    spec.ops = {PerturbOp::typo_swap, PerturbOp::char_drop, PerturbOp::punctuation_jitter,
                PerturbOp::word_shuffle_window, PerturbOp::case_flip};
    spec.intensity = 0.15;
    spec.seed = 424242;

    const PromptTemplate out = perturb_template(t, spec);
    CHECK(out.body ==
          "oS te fLgagd wr. Sequecne: {pattern}\nA. {option_a} B. {option_b}\nAswre:");
    CHECK(out.id == "ab828dae1db57988f");
    // deterministic
    CHECK(perturb_template(t, spec).body == out.body);
}

TEST_CASE("perturb spec validation") {
    PromptTemplate t = make_template("text {pattern}");
    PerturbSpec spec;
    spec.intensity = 0.2;
    CHECK_THROWS_AS(perturb_template(t, spec), Error); // no ops

    spec.ops = {PerturbOp::case_flip};
    spec.intensity = 0.0;
    CHECK_THROWS_AS(perturb_template(t, spec), Error);
    spec.intensity = 1.5;
    CHECK_THROWS_AS(perturb_template(t, spec), Error);

    CHECK(perturb_op_from_string("word_shuffle_window") == PerturbOp::word_shuffle_window);
    CHECK_THROWS_AS(perturb_op_from_string("paraphrase"), Error);
}

TEST_CASE("summary ordering invariants hold on random rows") {
    Rng rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PromptEvalRow> rows;
        const size_t n = 1 + rng.next_index(25);
        for (size_t i = 0; i < n; ++i) {
            PromptEvalRow r;
            r.prompt_id = "p" + std::to_string(i);
            r.n_total = 1 + rng.next_index(40);
            r.n_correct = rng.next_index(r.n_total + 1);
            r.accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_total);
            rows.push_back(r);
        }
        double max_acc = 0.0;
        for (const auto& r : rows) max_acc = std::max(max_acc, r.accuracy);

        const EvalReport report = summarize(rows, 0.5);
        CHECK(report.min_accuracy <= report.mean + 1e-15);
        CHECK(report.mean <= max_acc + 1e-15);

        // top_fraction never increases as the threshold rises
        double previous = 1.0;
        for (double threshold : {0.0, 0.25, 0.5, 0.75, 0.9, 1.0}) {
            const double top = summarize(rows, threshold).top_fraction;
            CHECK(top <= previous + 1e-15);
            previous = top;
        }
    }
}
