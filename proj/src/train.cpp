#include "paft/train.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "paft/error.hpp"
#include "paft/rng.hpp"

namespace paft {

namespace detail {

std::vector<size_t> data_order(const TrainPlan& plan, size_t dataset_size) {
    Rng data_stream = derive_stream(plan.seed, "data");
    std::vector<size_t> order;
    order.reserve(plan.epochs_T * dataset_size);
    std::vector<size_t> epoch_order(dataset_size);
    for (size_t epoch = 0; epoch < plan.epochs_T; ++epoch) {
        std::iota(epoch_order.begin(), epoch_order.end(), size_t{0});
        if (plan.shuffle_data) data_stream.shuffle(epoch_order);
        order.insert(order.end(), epoch_order.begin(), epoch_order.end());
    }
    return order;
}

} // namespace detail

namespace {

size_t steps_per_epoch_for(size_t dataset_size, size_t batch_size) {
    return (dataset_size + batch_size - 1) / batch_size;
}

/// Shared loop; the prompt for each step comes from pick_template.
template <typename PickTemplate>
TrainTrace run_loop(const TrainPlan& plan, const std::vector<TaskInstance>& dataset,
                    const TaskSchema& schema, TrainableModel& model,
                    PickTemplate&& pick_template) {
    plan.validate();
    if (dataset.empty()) raise(ErrorCode::empty_dataset, "training needs data");

    TrainTrace trace;
    if (plan.epochs_T == 0) {
        trace.param_digest = model.param_digest();
        return trace;
    }

    const size_t steps_per_epoch = steps_per_epoch_for(dataset.size(), plan.batch_size);
    const std::vector<size_t> order = detail::data_order(plan, dataset.size());

    std::vector<RenderedExample> batch;
    batch.reserve(plan.batch_size);
    for (size_t epoch = 0; epoch < plan.epochs_T; ++epoch) {
        const size_t* epoch_order = order.data() + epoch * dataset.size();
        for (size_t step = 0; step < steps_per_epoch; ++step) {
            const PromptTemplate& tmpl = pick_template(epoch, step);
            const size_t begin = step * plan.batch_size;
            const size_t end = std::min(begin + plan.batch_size, dataset.size());
            batch.clear();
            for (size_t i = begin; i < end; ++i) {
                try {
                    batch.push_back(render(tmpl, dataset[epoch_order[i]], schema));
                } catch (const Error& e) {
                    throw Error(e.code(), std::string(e.what()) + " (epoch " +
                                              std::to_string(epoch) + ", step " +
                                              std::to_string(step) + ")");
                }
            }
            const double loss = model.train_step(batch, plan.learning_rate);
            trace.records.push_back({epoch, step, tmpl.id, loss});
        }
    }
    trace.param_digest = model.param_digest();
    return trace;
}

} // namespace

TrainTrace train_paft(const TrainPlan& plan, const std::vector<TaskInstance>& dataset,
                      const PromptSet& prompts, const TaskSchema& schema,
                      TrainableModel& model) {
    std::vector<const PromptTemplate*> train_templates = prompts.with_split(Split::train);
    if (train_templates.empty()) raise(ErrorCode::empty_prompt_set, "no templates in train split");

    std::vector<std::string> ids;
    ids.reserve(train_templates.size());
    for (const auto* t : train_templates) {
        const ValidationResult v = validate_template(*t, schema);
        if (!v.ok) {
            raise(ErrorCode::schema_error,
                  "template '" + t->id + "' has unknown placeholder {" +
                      v.unknown_placeholders.front() + "}");
        }
        ids.push_back(t->id);
    }

    if (dataset.empty()) raise(ErrorCode::empty_dataset, "training needs data");
    if (plan.epochs_T == 0) {
        TrainTrace trace;
        trace.param_digest = model.param_digest();
        return trace;
    }

    const size_t steps_per_epoch = steps_per_epoch_for(dataset.size(), plan.batch_size);
    const std::vector<ScheduleEvent> schedule = build_schedule(plan, ids, steps_per_epoch);

    return run_loop(plan, dataset, schema, model,
                    [&](size_t epoch, size_t step) -> const PromptTemplate& {
                        const ScheduleEvent& ev = schedule[epoch * steps_per_epoch + step];
                        return *prompts.find(ev.prompt_id);
                    });
}

TrainTrace train_fixed(const TrainPlan& plan, const std::vector<TaskInstance>& dataset,
                       const PromptTemplate& tmpl, const TaskSchema& schema,
                       TrainableModel& model) {
    const ValidationResult v = validate_template(tmpl, schema);
    if (!v.ok) {
        raise(ErrorCode::schema_error, "template '" + tmpl.id + "' has unknown placeholder {" +
                                           v.unknown_placeholders.front() + "}");
    }
    return run_loop(plan, dataset, schema, model,
                    [&](size_t, size_t) -> const PromptTemplate& { return tmpl; });
}

void save_trace(const TrainTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    for (const auto& r : trace.records) {
        nlohmann::ordered_json j;
        j["epoch"] = r.epoch;
        j["step"] = r.step;
        j["prompt_id"] = r.prompt_id;
        j["loss"] = r.loss;
        out << j.dump() << "\n";
    }
    nlohmann::ordered_json tail;
    tail["param_digest"] = trace.param_digest;
    out << tail.dump() << "\n";
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

TrainTrace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
    TrainTrace trace;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("param_digest")) {
            trace.param_digest = j.at("param_digest").get<std::string>();
            continue;
        }
        try {
            trace.records.push_back({j.at("epoch").get<size_t>(), j.at("step").get<size_t>(),
                                     j.at("prompt_id").get<std::string>(),
                                     j.at("loss").get<double>()});
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return trace;
}

} // namespace paft
