// Command-line front end for the prompt-robustness pipeline: prompt-set
// generation and partitioning, dynamic-prompt / fixed-prompt training,
// evaluation, adversarial perturbation, MMD estimation, and the ablation
// and prompt-count scaling sweeps. All outputs are deterministic given the
// flags; reruns with an identical effective config are byte-identical.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paft/client.hpp"
#include "paft/error.hpp"
#include "paft/eval.hpp"
#include "paft/experiments.hpp"
#include "paft/forge.hpp"
#include "paft/hash.hpp"
#include "paft/mmd.hpp"
#include "paft/perturb.hpp"
#include "paft/stats.hpp"
#include "paft/toy_model.hpp"
#include "paft/train.hpp"

namespace fs = std::filesystem;
using namespace paft;

namespace {

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_grid:
    case ErrorCode::invalid_size:
    case ErrorCode::missing_example:
        return 2;
    case ErrorCode::endpoint_error:
    case ErrorCode::network_forbidden:
        return 4;
    default:
        return 3;
    }
}

struct CommonOptions {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    bool offline_flag = false;
};

/// Flags shared by the pipeline subcommands; every RunConfig key is also a
/// "--set key=value" override, and the frequent ones get their own flags.
void add_config_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "flat key=value config file");
    cmd->add_option("--set", [&opts](const std::vector<std::string>& items) {
        for (const auto& item : items) {
            const size_t eq = item.find('=');
            if (eq == std::string::npos) return false;
            opts.overrides[item.substr(0, eq)] = item.substr(eq + 1);
        }
        return true;
    }, "override config entries, key=value (repeatable)");

    auto direct = [&opts, cmd](const std::string& flag, const std::string& key,
                               const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&opts, key](const std::string& v) { opts.overrides[key] = v; }, help);
    };
    direct("--family", "family", "synthetic task family");
    direct("--prompts", "prompts", "prompt set JSON file");
    direct("--train-dataset", "train_dataset", "training dataset JSONL file");
    direct("--eval-dataset", "eval_dataset", "evaluation dataset JSONL file");
    direct("--epochs", "epochs", "training epochs T");
    direct("--k", "k", "steps per prompt K");
    direct("--lr", "lr", "learning rate");
    direct("--seed", "seed", "base seed");
    direct("--shuffle", "shuffle", "shuffle data each epoch (true/false)");
    direct("--batch", "batch", "batch size");
    direct("--n-train", "n_train", "synthesized training instances");
    direct("--n-eval", "n_eval", "synthesized evaluation instances");
    direct("--dim", "dim", "feature dimension (power of two)");
    direct("--ngram-sizes", "ngram_sizes", "comma-separated n-gram sizes");
    direct("--depth", "depth", "model depth (1 or 2)");
    direct("--hidden", "hidden", "hidden width for depth 2");
    direct("--optimizer", "optimizer", "sgd or adamw");
    direct("--weight-decay", "weight_decay", "adamw weight decay");
    direct("--top-threshold", "top_threshold", "Top-metric accuracy threshold");
    direct("--out-dir", "out_dir", "output directory");
    cmd->add_flag("--offline", opts.offline_flag, "never touch the network");
}

RunConfig build_config(const CommonOptions& opts) {
    RunConfig config;
    if (!opts.config_path.empty()) config.apply(parse_config_file(opts.config_path));
    config.apply(opts.overrides); // flags win
    if (opts.offline_flag) config.offline = true;
    return config;
}

void write_effective_config(const RunConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    for (const auto& [key, value] : config.to_kv()) {
        out << key << "=" << value << "\n";
    }
}

PromptSet require_prompt_set(const RunConfig& config) {
    if (config.prompt_set_path.empty()) {
        raise(ErrorCode::invalid_argument, "a prompt set is required (--prompts)");
    }
    return load_prompt_set(config.prompt_set_path);
}

std::vector<PromptTemplate> templates_of_split(const PromptSet& set, const std::string& split) {
    std::vector<PromptTemplate> out;
    for (const auto* t : set.with_split(split_from_string(split))) out.push_back(*t);
    if (out.empty()) {
        raise(ErrorCode::empty_prompt_set, "prompt set has no '" + split + "' templates");
    }
    return out;
}

std::vector<size_t> parse_size_list(const std::string& value, const std::string& what) {
    std::vector<size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoull(item));
        } catch (const std::exception&) {
            raise(ErrorCode::invalid_argument, "bad " + what + " entry '" + item + "'");
        }
    }
    if (out.empty()) raise(ErrorCode::invalid_argument, "empty " + what + " list");
    return out;
}

// ---------------------------------------------------------------------------
// forge

struct ForgeGenerateArgs {
    CommonOptions common;
    std::string task_description = "pattern classification problem";
    std::string strategy = "zero_shot";
    std::string example_format;
    std::string endpoint;
    std::string model_name = "offline";
    std::string out_path;
    int per_request = 20;
    size_t want = 0; // 0: keep whatever one round yields
    double timeout = 30.0;
    int retries = 2;
};

void run_forge_generate(const ForgeGenerateArgs& args) {
    const RunConfig config = build_config(args.common);
    const TaskSchema& schema = family_schema(config.family);

    std::unique_ptr<GeneratorClient> client;
    if (config.offline || args.endpoint.empty()) {
        client = make_offline_generator(config.family, config.plan.seed);
    } else {
        client = std::make_unique<HttpGeneratorClient>(args.endpoint, args.model_name,
                                                       args.timeout, args.retries);
    }

    const Strategy strategy = strategy_from_string(args.strategy);
    std::optional<std::string> example;
    if (!args.example_format.empty()) example = args.example_format;

    PromptSet set;
    set.schema_id = schema.schema_id;
    set.partition_seed = 0;

    const size_t want = args.want == 0 ? static_cast<size_t>(args.per_request) : args.want;
    const std::string origin = config.offline || args.endpoint.empty()
                                   ? std::string("offline")
                                   : args.model_name;
    for (int round = 0; round < 64 && set.templates.size() < want; ++round) {
        const MetaPrompt meta =
            compose_meta_prompt(args.task_description, strategy, args.per_request, example);
        const std::string raw = client->generate(meta);
        for (auto& t : parse_generated(raw, strategy, origin)) {
            const ValidationResult v = validate_template(t, schema);
            if (!v.ok) continue; // generators may hallucinate placeholders
            if (set.templates.size() >= want) break;
            set.add(std::move(t));
        }
    }
    if (set.templates.size() < want) {
        raise(ErrorCode::endpoint_error,
              "generator yielded only " + std::to_string(set.templates.size()) + " of " +
                  std::to_string(want) + " unique templates");
    }
    set.validate();
    save_prompt_set(set, args.out_path);
    std::cout << "wrote " << set.templates.size() << " templates to " << args.out_path << "\n";
}

struct ForgePartitionArgs {
    std::string in_path;
    std::string out_path;
    int train_weight = 8;
    int test_weight = 1;
    int64_t seed = 0;
};

void run_forge_partition(const ForgePartitionArgs& args) {
    const PromptSet set = load_prompt_set(args.in_path);
    const PromptSet split = partition_prompts(set, args.train_weight, args.test_weight, args.seed);
    save_prompt_set(split, args.out_path.empty() ? args.in_path : args.out_path);
    std::cout << "train " << split.with_split(Split::train).size() << " / test "
              << split.with_split(Split::test).size() << "\n";
}

// ---------------------------------------------------------------------------
// train / eval

void run_train(const CommonOptions& common, bool fixed_mode, const std::string& template_id) {
    const RunConfig config = build_config(common);
    const PromptSet prompts = require_prompt_set(config);
    const TaskSchema& schema = family_schema(config.family);

    const uint64_t run_seed = config.plan.seed;
    const std::vector<TaskInstance> train_data = train_data_for(config, run_seed);
    TextClassifier model = make_model(config, schema, run_seed);
    TrainPlan plan = config.plan;
    plan.seed = run_seed ^ fnv1a64("streams");

    TrainTrace trace;
    if (fixed_mode) {
        const PromptTemplate* tmpl = nullptr;
        if (!template_id.empty()) {
            tmpl = prompts.find(template_id);
            if (tmpl == nullptr) {
                raise(ErrorCode::invalid_argument, "no template '" + template_id + "'");
            }
        } else {
            tmpl = &choose_fixed_template(prompts, run_seed);
        }
        trace = train_fixed(plan, train_data, *tmpl, schema, model);
    } else {
        trace = train_paft(plan, train_data, prompts, schema, model);
    }

    const std::string run_dir = run_dir_for(config);
    fs::create_directories(run_dir);
    write_effective_config(config, run_dir + "/config.txt");
    save_trace(trace, run_dir + "/trace.jsonl");
    model.save_checkpoint(run_dir + "/checkpoint.json");
    std::cout << run_dir << "\n";
}

struct EvalArgs {
    CommonOptions common;
    std::string checkpoint;
    std::string split = "test";
    std::string adversarial_path;
    std::string out_prefix;
};

void run_eval(const EvalArgs& args) {
    const RunConfig config = build_config(args.common);
    const PromptSet prompts = require_prompt_set(config);
    const TaskSchema& schema = family_schema(config.family);

    const TextClassifier model = TextClassifier::load_checkpoint(args.checkpoint);
    const std::vector<TaskInstance> eval_data = eval_data_for(config, config.plan.seed);
    const std::vector<PromptTemplate> eval_templates = templates_of_split(prompts, args.split);

    EvalReport report =
        evaluate_prompt_set(model, eval_data, eval_templates, schema, config.top_threshold);
    if (!args.adversarial_path.empty()) {
        const PromptSet adv = load_prompt_set(args.adversarial_path);
        std::vector<PromptTemplate> adv_templates;
        for (const auto* t : adv.with_split(Split::adversarial)) adv_templates.push_back(*t);
        if (adv_templates.empty()) {
            raise(ErrorCode::empty_prompt_set, "adversarial set has no adversarial templates");
        }
        report.conditional_accuracy = conditional_accuracy(model, eval_data, adv_templates, schema);
    }

    const std::string prefix =
        args.out_prefix.empty() ? run_dir_for(config) + "/report" : args.out_prefix;
    fs::create_directories(fs::path(prefix).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(prefix).parent_path());
    write_report(report, prefix + ".json");
    write_report_csv(report, prefix + ".csv");
    std::cout << "mean " << format_g12(report.mean) << " std " << format_g12(report.stddev)
              << " top " << format_g12(report.top_fraction) << " min "
              << format_g12(report.min_accuracy);
    if (report.conditional_accuracy) {
        std::cout << " con " << format_g12(*report.conditional_accuracy);
    }
    std::cout << "\n" << prefix << ".json\n";
}

// ---------------------------------------------------------------------------
// perturb

struct PerturbArgs {
    std::string in_path;
    std::string out_path;
    std::string split = "test";
    std::string ops = "typo_swap,char_drop,punctuation_jitter,word_shuffle_window,case_flip";
    double intensity = 0.15;
    uint64_t seed = 0;
    size_t count = 10;
};

void run_perturb(const PerturbArgs& args) {
    const PromptSet set = load_prompt_set(args.in_path);
    const std::vector<PromptTemplate> sources = templates_of_split(set, args.split);

    PerturbSpec spec;
    spec.intensity = args.intensity;
    std::stringstream ss(args.ops);
    std::string op;
    while (std::getline(ss, op, ',')) spec.ops.push_back(perturb_op_from_string(op));
    spec.validate();

    PromptSet out;
    out.schema_id = set.schema_id;
    out.partition_seed = set.partition_seed;
    for (size_t i = 0; out.templates.size() < args.count; ++i) {
        if (i >= args.count * 100) {
            raise(ErrorCode::perturb_failed, "could not produce enough distinct perturbations");
        }
        PerturbSpec s = spec;
        s.seed = args.seed ^ fnv1a64("adv/" + std::to_string(i));
        out.add(perturb_template(sources[i % sources.size()], s));
    }
    out.validate();
    save_prompt_set(out, args.out_path);
    std::cout << "wrote " << out.templates.size() << " adversarial templates to "
              << args.out_path << "\n";
}

// ---------------------------------------------------------------------------
// mmd / mmd-scale

struct MmdArgs {
    CommonOptions common;
    std::string split_a = "train";
    std::string split_b = "test";
    std::string kernel = "rbf";
    std::string sigma = "auto";
    std::string estimator = "biased_v";
    double bound_constant = 0.0;
    std::string out_path;
};

Kernel make_kernel(const std::string& kind, const std::string& sigma,
                   const std::vector<PromptEmbedding>& pooled) {
    Kernel k;
    if (kind == "rbf") {
        k.kind = KernelKind::rbf;
        k.bandwidth = sigma == "auto" ? median_heuristic_bandwidth(pooled)
                                      : std::stod(sigma);
    } else if (kind == "linear") {
        k.kind = KernelKind::linear;
    } else {
        raise(ErrorCode::invalid_argument, "kernel must be rbf or linear");
    }
    k.validate();
    return k;
}

void run_mmd(const MmdArgs& args) {
    const RunConfig config = build_config(args.common);
    const PromptSet prompts = require_prompt_set(config);

    const std::vector<PromptTemplate> a_templates = templates_of_split(prompts, args.split_a);
    const std::vector<PromptTemplate> b_templates = templates_of_split(prompts, args.split_b);

    std::vector<PromptEmbedding> a, b, pooled;
    for (const auto& t : a_templates) a.push_back(embed_prompt(t, config.dim, config.ngram_sizes));
    for (const auto& t : b_templates) b.push_back(embed_prompt(t, config.dim, config.ngram_sizes));
    pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());

    const Kernel k = make_kernel(args.kernel, args.sigma, pooled);
    const MmdEstimator est = args.estimator == "unbiased_u" ? MmdEstimator::unbiased_u
                                                            : MmdEstimator::biased_v;
    const MmdEstimate e = mmd2(a, b, k, est);

    nlohmann::ordered_json j;
    j["format"] = "mmd/1";
    j["value"] = e.value;
    j["mmd_squared"] = e.mmd_squared;
    j["clamped"] = e.clamped;
    j["estimator"] = args.estimator;
    j["kernel"] = {{"kind", args.kernel}, {"bandwidth", e.kernel.bandwidth}};
    j["n_a"] = e.n_a;
    j["n_b"] = e.n_b;
    if (args.bound_constant > 0.0) {
        const DiscBound bound = disc_upper_bound(e, args.bound_constant);
        j["disc_bound"] = {{"constant", bound.constant}, {"bound", bound.bound}};
    }

    if (args.out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(args.out_path, std::ios::binary);
        if (!out) raise(ErrorCode::io_error, "cannot open '" + args.out_path + "'");
        out << j.dump(2) << "\n";
        std::cout << "mmd " << format_g12(e.value) << "\n" << args.out_path << "\n";
    }
}

struct MmdScaleArgs {
    CommonOptions common;
    std::string pool_split = "train";
    std::string test_split = "test";
    std::string kernel = "rbf";
    std::string sigma = "auto";
    std::string sizes = "5,10,20,40";
    size_t n_seeds = 20;
    std::string out_prefix = "mmd_scale";
};

void run_mmd_scale(const MmdScaleArgs& args) {
    const RunConfig config = build_config(args.common);
    const PromptSet prompts = require_prompt_set(config);
    const std::vector<PromptTemplate> pool = templates_of_split(prompts, args.pool_split);
    const std::vector<PromptTemplate> test = templates_of_split(prompts, args.test_split);

    std::vector<PromptEmbedding> pooled;
    for (const auto& t : pool) pooled.push_back(embed_prompt(t, config.dim, config.ngram_sizes));
    for (const auto& t : test) pooled.push_back(embed_prompt(t, config.dim, config.ngram_sizes));
    const Kernel k = make_kernel(args.kernel, args.sigma, pooled);

    const std::vector<size_t> sizes = parse_size_list(args.sizes, "sizes");
    const auto curve = scaling_curve(pool, test, sizes, k, args.n_seeds, config.plan.seed,
                                     config.dim, config.ngram_sizes);
    write_scaling_curve_csv(curve, args.out_prefix + ".csv");
    write_scaling_curve_json(curve, k, MmdEstimator::biased_v, args.out_prefix + ".json");
    std::cout << args.out_prefix << ".csv\n" << args.out_prefix << ".json\n";
}

// ---------------------------------------------------------------------------
// ablate / scale / report

struct AblateArgs {
    CommonOptions common;
    std::string k_values = "1,2,4,8";
    std::string t_values = "3";
    size_t n_seeds = 3;
};

void run_ablate_cmd(const AblateArgs& args) {
    const RunConfig config = build_config(args.common);
    const PromptSet prompts = require_prompt_set(config);

    AblationGrid grid;
    grid.k_values = parse_size_list(args.k_values, "K");
    grid.t_values = parse_size_list(args.t_values, "T");
    grid.n_seeds = args.n_seeds;

    const auto cells = run_ablation(config, prompts, grid);
    const std::string run_dir = run_dir_for(config);
    fs::create_directories(run_dir);
    write_effective_config(config, run_dir + "/config.txt");
    write_ablation_csv(cells, run_dir + "/ablation.csv");
    write_ablation_markdown(cells, run_dir + "/ablation.md");
    std::cout << run_dir << "\n";
}

struct ScaleArgs {
    CommonOptions common;
    std::string counts = "1,5,10,40";
    size_t n_seeds = 5;
};

void run_scale_cmd(const ScaleArgs& args) {
    const RunConfig config = build_config(args.common);
    const PromptSet prompts = require_prompt_set(config);
    const std::vector<size_t> counts = parse_size_list(args.counts, "counts");

    const auto rows = run_scaling(config, prompts, counts, args.n_seeds);
    const std::string run_dir = run_dir_for(config);
    fs::create_directories(run_dir);
    write_effective_config(config, run_dir + "/config.txt");
    write_scaling_csv(rows, run_dir + "/scaling.csv");
    write_scaling_json(rows, run_dir + "/scaling.json");
    std::cout << run_dir << "\n";
}

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out_prefix = "bundle";
};

void run_report_cmd(const ReportArgs& args) {
    const ReportBundle bundle = load_report_bundle(args.inputs);
    write_bundle_json(bundle, args.out_prefix + ".json");
    write_bundle_markdown(bundle, args.out_prefix + ".md");
    write_bundle_csv(bundle, args.out_prefix + ".csv");
    std::cout << args.out_prefix << ".md\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prompt-robust fine-tuning pipeline"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    // forge
    auto* forge = app.add_subcommand("forge", "generate and partition prompt sets");
    forge->require_subcommand(1);

    ForgeGenerateArgs gen_args;
    auto* gen = forge->add_subcommand("generate", "synthesize candidate templates");
    add_config_options(gen, gen_args.common);
    gen->add_option("--task", gen_args.task_description, "task description for the meta prompt");
    gen->add_option("--strategy", gen_args.strategy, "zero_shot or few_shot");
    gen->add_option("--example-format", gen_args.example_format, "few-shot format example");
    gen->add_option("--endpoint", gen_args.endpoint, "chat-completions base URL");
    gen->add_option("--model", gen_args.model_name, "generator model name");
    gen->add_option("--per-request", gen_args.per_request, "templates requested per call");
    gen->add_option("--count", gen_args.want, "unique templates to collect");
    gen->add_option("--timeout", gen_args.timeout, "request timeout seconds");
    gen->add_option("--retries", gen_args.retries, "max retries per request");
    gen->add_option("--out", gen_args.out_path, "output prompt-set JSON")->required();
    gen->callback([&] { run_forge_generate(gen_args); });

    ForgePartitionArgs part_args;
    auto* part = forge->add_subcommand("partition", "assign train/test splits");
    part->add_option("--in", part_args.in_path, "prompt-set JSON")->required();
    part->add_option("--out", part_args.out_path, "output path (default: in place)");
    part->add_option("--train-weight", part_args.train_weight, "train weight");
    part->add_option("--test-weight", part_args.test_weight, "test weight");
    part->add_option("--seed", part_args.seed, "shuffle seed");
    part->callback([&] { run_forge_partition(part_args); });

    // train
    auto* train = app.add_subcommand("train", "fit the classifier");
    train->require_subcommand(1);
    CommonOptions train_paft_common;
    auto* train_paft_cmd = train->add_subcommand("paft", "dynamic prompt sampling");
    add_config_options(train_paft_cmd, train_paft_common);
    train_paft_cmd->callback([&] { run_train(train_paft_common, false, ""); });

    CommonOptions train_fixed_common;
    std::string fixed_template_id;
    auto* train_fixed_cmd = train->add_subcommand("fixed", "single fixed prompt");
    add_config_options(train_fixed_cmd, train_fixed_common);
    train_fixed_cmd->add_option("--template-id", fixed_template_id,
                                "train-split template id (default: seeded choice)");
    train_fixed_cmd->callback([&] { run_train(train_fixed_common, true, fixed_template_id); });

    // eval
    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint across prompts");
    add_config_options(eval_cmd, eval_args.common);
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "checkpoint JSON")->required();
    eval_cmd->add_option("--split", eval_args.split, "prompt split to evaluate");
    eval_cmd->add_option("--adversarial", eval_args.adversarial_path,
                         "adversarial prompt set for conditional accuracy");
    eval_cmd->add_option("--out", eval_args.out_prefix, "output prefix (json + csv)");
    eval_cmd->callback([&] { run_eval(eval_args); });

    // perturb
    PerturbArgs perturb_args;
    auto* perturb_cmd = app.add_subcommand("perturb", "make adversarial prompt variants");
    perturb_cmd->add_option("--in", perturb_args.in_path, "prompt-set JSON")->required();
    perturb_cmd->add_option("--out", perturb_args.out_path, "output prompt-set JSON")->required();
    perturb_cmd->add_option("--split", perturb_args.split, "source split");
    perturb_cmd->add_option("--ops", perturb_args.ops, "comma-separated op list");
    perturb_cmd->add_option("--intensity", perturb_args.intensity, "per-site rate in (0,1]");
    perturb_cmd->add_option("--seed", perturb_args.seed, "perturbation seed");
    perturb_cmd->add_option("--count", perturb_args.count, "adversarial templates to emit");
    perturb_cmd->callback([&] { run_perturb(perturb_args); });

    // mmd
    MmdArgs mmd_args;
    auto* mmd_cmd = app.add_subcommand("mmd", "two-sample discrepancy between splits");
    add_config_options(mmd_cmd, mmd_args.common);
    mmd_cmd->add_option("--split-a", mmd_args.split_a, "first split");
    mmd_cmd->add_option("--split-b", mmd_args.split_b, "second split");
    mmd_cmd->add_option("--kernel", mmd_args.kernel, "rbf or linear");
    mmd_cmd->add_option("--sigma", mmd_args.sigma, "rbf bandwidth or 'auto'");
    mmd_cmd->add_option("--estimator", mmd_args.estimator, "biased_v or unbiased_u");
    mmd_cmd->add_option("--bound-constant", mmd_args.bound_constant,
                        "emit C * MMD discrepancy bound");
    mmd_cmd->add_option("--out", mmd_args.out_path, "output JSON (default stdout)");
    mmd_cmd->callback([&] { run_mmd(mmd_args); });

    MmdScaleArgs mmd_scale_args;
    auto* mmd_scale_cmd = app.add_subcommand("mmd-scale", "MMD vs training-prompt count");
    add_config_options(mmd_scale_cmd, mmd_scale_args.common);
    mmd_scale_cmd->add_option("--pool-split", mmd_scale_args.pool_split, "subsampled split");
    mmd_scale_cmd->add_option("--test-split", mmd_scale_args.test_split, "reference split");
    mmd_scale_cmd->add_option("--kernel", mmd_scale_args.kernel, "rbf or linear");
    mmd_scale_cmd->add_option("--sigma", mmd_scale_args.sigma, "rbf bandwidth or 'auto'");
    mmd_scale_cmd->add_option("--sizes", mmd_scale_args.sizes, "comma-separated sample sizes");
    mmd_scale_cmd->add_option("--seeds", mmd_scale_args.n_seeds, "subsample draws per size");
    mmd_scale_cmd->add_option("--out-prefix", mmd_scale_args.out_prefix, "output prefix");
    mmd_scale_cmd->callback([&] { run_mmd_scale(mmd_scale_args); });

    // ablate / scale / report
    AblateArgs ablate_args;
    auto* ablate_cmd = app.add_subcommand("ablate", "K x T hyperparameter grid");
    add_config_options(ablate_cmd, ablate_args.common);
    ablate_cmd->add_option("--k-values", ablate_args.k_values, "comma-separated K values");
    ablate_cmd->add_option("--t-values", ablate_args.t_values, "comma-separated T values");
    ablate_cmd->add_option("--seeds", ablate_args.n_seeds, "seeds per cell");
    ablate_cmd->callback([&] { run_ablate_cmd(ablate_args); });

    ScaleArgs scale_args;
    auto* scale_cmd = app.add_subcommand("scale", "accuracy vs training-prompt count");
    add_config_options(scale_cmd, scale_args.common);
    scale_cmd->add_option("--counts", scale_args.counts, "comma-separated prompt counts");
    scale_cmd->add_option("--seeds", scale_args.n_seeds, "seeds per count");
    scale_cmd->callback([&] { run_scale_cmd(scale_args); });

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "consolidate evaluation reports");
    report_cmd->add_option("inputs", report_args.inputs, "report JSON files")->required();
    report_cmd->add_option("--out-prefix", report_args.out_prefix, "output prefix");
    report_cmd->callback([&] { run_report_cmd(report_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
