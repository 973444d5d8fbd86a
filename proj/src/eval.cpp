#include "paft/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "paft/error.hpp"
#include "paft/stats.hpp"

namespace paft {

EvalReport summarize(std::vector<PromptEvalRow> rows, double top_threshold) {
    if (rows.empty()) raise(ErrorCode::empty_rows, "no rows to summarize");
    if (top_threshold < 0.0 || top_threshold > 1.0) {
        raise(ErrorCode::invalid_argument, "top threshold must lie in [0, 1]");
    }
    std::sort(rows.begin(), rows.end(),
              [](const PromptEvalRow& a, const PromptEvalRow& b) {
                  return a.prompt_id < b.prompt_id;
              });

    std::vector<double> accs;
    accs.reserve(rows.size());
    size_t at_or_above = 0;
    for (const auto& r : rows) {
        if (r.n_total == 0) raise(ErrorCode::invalid_argument, "row with n_total = 0");
        accs.push_back(r.accuracy);
        if (r.accuracy >= top_threshold) ++at_or_above;
    }

    EvalReport report;
    report.rows = std::move(rows);
    report.top_threshold = top_threshold;
    report.mean = stats::mean(accs);
    report.stddev = stats::sample_std(accs);
    report.min_accuracy = *std::min_element(accs.begin(), accs.end());
    report.top_fraction =
        static_cast<double>(at_or_above) / static_cast<double>(accs.size());
    return report;
}

EvalReport evaluate_prompt_set(const TrainableModel& model,
                               const std::vector<TaskInstance>& dataset,
                               const std::vector<PromptTemplate>& prompts,
                               const TaskSchema& schema, double top_threshold) {
    if (prompts.empty()) raise(ErrorCode::empty_prompt_set, "no prompts to evaluate");
    if (dataset.empty()) raise(ErrorCode::empty_dataset, "no instances to evaluate");

    std::vector<PromptEvalRow> rows;
    rows.reserve(prompts.size());
    for (const auto& t : prompts) {
        const ValidationResult v = validate_template(t, schema);
        if (!v.ok) {
            raise(ErrorCode::schema_error, "template '" + t.id + "' has unknown placeholder {" +
                                               v.unknown_placeholders.front() + "}");
        }
        PromptEvalRow row;
        row.prompt_id = t.id;
        row.n_total = dataset.size();
        for (const auto& inst : dataset) {
            const RenderedExample ex = render(t, inst, schema);
            if (model.predict_label(ex) == inst.gold) ++row.n_correct;
        }
        row.accuracy = static_cast<double>(row.n_correct) / static_cast<double>(row.n_total);
        rows.push_back(std::move(row));
    }
    return summarize(std::move(rows), top_threshold);
}

double conditional_accuracy(const TrainableModel& model,
                            const std::vector<TaskInstance>& dataset,
                            const std::vector<PromptTemplate>& adversarial_prompts,
                            const TaskSchema& schema) {
    const EvalReport report =
        evaluate_prompt_set(model, dataset, adversarial_prompts, schema, 1.0);
    return report.mean;
}

std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

nlohmann::ordered_json report_to_json_obj(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["format"] = "evalreport/1";
    j["top_threshold"] = report.top_threshold;
    j["mean"] = report.mean;
    j["std"] = report.stddev;
    j["top_fraction"] = report.top_fraction;
    j["min_accuracy"] = report.min_accuracy;
    if (report.conditional_accuracy) {
        j["conditional_accuracy"] = *report.conditional_accuracy;
    } else {
        j["conditional_accuracy"] = nullptr;
    }
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        j["rows"].push_back({{"prompt_id", r.prompt_id},
                             {"n_correct", r.n_correct},
                             {"n_total", r.n_total},
                             {"accuracy", r.accuracy}});
    }
    return j;
}

} // namespace

std::string report_to_json(const EvalReport& report) {
    return report_to_json_obj(report).dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::parse_error, std::string("report JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "evalreport/1") {
            raise(ErrorCode::parse_error, "unsupported report format");
        }
        std::vector<PromptEvalRow> rows;
        for (const auto& rj : j.at("rows")) {
            PromptEvalRow r;
            r.prompt_id = rj.at("prompt_id").get<std::string>();
            r.n_correct = rj.at("n_correct").get<uint64_t>();
            r.n_total = rj.at("n_total").get<uint64_t>();
            if (r.n_total == 0 || r.n_correct > r.n_total) {
                raise(ErrorCode::parse_error, "row counts out of range for '" + r.prompt_id + "'");
            }
            // Counts are authoritative; the accuracy invariant is exact.
            r.accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_total);
            rows.push_back(std::move(r));
        }
        EvalReport report = summarize(std::move(rows), j.at("top_threshold").get<double>());
        if (!j.at("conditional_accuracy").is_null()) {
            report.conditional_accuracy = j.at("conditional_accuracy").get<double>();
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::parse_error, std::string("report JSON: ") + e.what());
    }
}

void write_report(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << report_to_json(report);
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

EvalReport read_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

void write_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << "prompt_id,accuracy\n";
    for (const auto& r : report.rows) {
        out << r.prompt_id << "," << format_g12(r.accuracy) << "\n";
    }
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

} // namespace paft
