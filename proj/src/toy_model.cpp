#include "paft/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "paft/error.hpp"
#include "paft/hash.hpp"
#include "paft/rng.hpp"

namespace paft {

FeatureVector featurize(const std::string& text, size_t d, const std::vector<int>& ngram_sizes) {
    if (d == 0 || (d & (d - 1)) != 0) {
        raise(ErrorCode::invalid_argument, "feature dimension must be a power of two");
    }
    if (ngram_sizes.empty()) raise(ErrorCode::invalid_argument, "need at least one n-gram size");
    for (int n : ngram_sizes) {
        if (n < 1 || n > 5) raise(ErrorCode::invalid_argument, "n-gram sizes must be in 1..5");
    }

    FeatureVector fv;
    fv.values.assign(d, 0.0);
    const size_t len = text.size();
    for (int n : ngram_sizes) {
        const size_t un = static_cast<size_t>(n);
        if (len < un) continue;
        for (size_t i = 0; i + un <= len; ++i) {
            const uint64_t h = fnv1a64(text.data() + i, un);
            fv.values[h & (d - 1)] += 1.0;
        }
    }
    return fv;
}

size_t ModelParams::expected_size() const {
    if (depth == 1) return dim * classes + classes;
    return dim * hidden + hidden + hidden * classes + classes;
}

void optimizer_step(ModelParams& params, const std::vector<double>& grad, OptimizerState& state,
                    double learning_rate) {
    const size_t n = params.values.size();
    if (grad.size() != n || n != params.expected_size()) {
        raise(ErrorCode::shape_error, "gradient shape does not match parameters");
    }

    if (state.rule == OptRule::sgd) {
        for (size_t i = 0; i < n; ++i) {
            params.values[i] -= learning_rate * grad[i];
        }
    } else {
        if (state.m.empty()) state.m.assign(n, 0.0);
        if (state.v.empty()) state.v.assign(n, 0.0);
        if (state.m.size() != n || state.v.size() != n) {
            raise(ErrorCode::shape_error, "moment shape does not match parameters");
        }
        const double t = static_cast<double>(state.step_count + 1);
        const double bc1 = 1.0 - std::pow(state.beta1, t);
        const double bc2 = 1.0 - std::pow(state.beta2, t);
        for (size_t i = 0; i < n; ++i) {
            const double g = grad[i];
            state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
            state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = state.m[i] / bc1;
            const double v_hat = state.v[i] / bc2;
            params.values[i] -=
                learning_rate * (m_hat / (std::sqrt(v_hat) + state.epsilon) +
                                 state.weight_decay * params.values[i]);
        }
    }
    ++state.step_count;
}

namespace {

void softmax_inplace(std::vector<double>& logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - mx);
        sum += z;
    }
    for (double& z : logits) z /= sum;
}

ModelParams init_params(const ClassifierConfig& cfg, uint64_t seed) {
    ModelParams p;
    p.depth = cfg.depth;
    p.dim = cfg.dim;
    p.classes = cfg.labels.size();
    p.hidden = cfg.depth == 2 ? cfg.hidden : 0;
    p.values.assign(p.expected_size(), 0.0);

    Rng rng = derive_stream(seed, "model-init");
    if (cfg.depth == 1) {
        for (size_t i = 0; i < p.dim * p.classes; ++i) {
            p.values[i] = rng.next_uniform(-0.05, 0.05);
        }
        // bias block stays zero
    } else {
        size_t off = 0;
        for (size_t i = 0; i < p.dim * p.hidden; ++i) p.values[off + i] = rng.next_uniform(-0.05, 0.05);
        off += p.dim * p.hidden + p.hidden;
        for (size_t i = 0; i < p.hidden * p.classes; ++i) p.values[off + i] = rng.next_uniform(-0.05, 0.05);
    }
    return p;
}

} // namespace

TextClassifier::TextClassifier(ClassifierConfig config, uint64_t seed)
    : config_(std::move(config)) {
    if (config_.labels.size() < 2) {
        raise(ErrorCode::invalid_argument, "classifier needs >= 2 labels");
    }
    if (config_.depth != 1 && config_.depth != 2) {
        raise(ErrorCode::invalid_argument, "depth must be 1 or 2");
    }
    if (config_.depth == 2 && config_.hidden == 0) {
        raise(ErrorCode::invalid_argument, "depth 2 needs a hidden width");
    }
    params_ = init_params(config_, seed);
    opt_.rule = config_.rule;
    opt_.weight_decay = config_.weight_decay;
}

std::vector<double> TextClassifier::probabilities(const ModelParams& p,
                                                  const std::string& text) const {
    const FeatureVector x = featurize(text, p.dim, config_.ngram_sizes);
    const size_t c = p.classes;
    std::vector<double> logits(c, 0.0);

    if (p.depth == 1) {
        const double* w = p.values.data();
        const double* b = w + p.dim * c;
        for (size_t j = 0; j < c; ++j) logits[j] = b[j];
        for (size_t i = 0; i < p.dim; ++i) {
            const double xi = x.values[i];
            if (xi == 0.0) continue;
            for (size_t j = 0; j < c; ++j) logits[j] += xi * w[i * c + j];
        }
    } else {
        const size_t h = p.hidden;
        const double* w1 = p.values.data();
        const double* b1 = w1 + p.dim * h;
        const double* w2 = b1 + h;
        const double* b2 = w2 + h * c;
        std::vector<double> act(h);
        for (size_t k = 0; k < h; ++k) act[k] = b1[k];
        for (size_t i = 0; i < p.dim; ++i) {
            const double xi = x.values[i];
            if (xi == 0.0) continue;
            for (size_t k = 0; k < h; ++k) act[k] += xi * w1[i * h + k];
        }
        for (size_t k = 0; k < h; ++k) act[k] = std::tanh(act[k]);
        for (size_t j = 0; j < c; ++j) {
            double z = b2[j];
            for (size_t k = 0; k < h; ++k) z += act[k] * w2[k * c + j];
            logits[j] = z;
        }
    }
    softmax_inplace(logits);
    return logits;
}

std::pair<double, std::vector<double>> TextClassifier::loss_and_grad(
    const ModelParams& p, const std::vector<RenderedExample>& batch) const {
    if (batch.empty()) raise(ErrorCode::empty_batch, "loss over an empty batch");
    if (p.values.size() != p.expected_size()) {
        raise(ErrorCode::shape_error, "parameter block has wrong size");
    }

    const size_t c = p.classes;
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<double> grad(p.values.size(), 0.0);
    double loss = 0.0;

    for (const auto& ex : batch) {
        size_t gold = 0;
        {
            bool found = false;
            for (size_t j = 0; j < config_.labels.size(); ++j) {
                if (config_.labels[j] == ex.gold) {
                    gold = j;
                    found = true;
                    break;
                }
            }
            if (!found) raise(ErrorCode::schema_error, "gold label '" + ex.gold + "' unknown");
        }

        const FeatureVector x = featurize(ex.text, p.dim, config_.ngram_sizes);

        if (p.depth == 1) {
            const double* w = p.values.data();
            const double* b = w + p.dim * c;
            std::vector<double> probs(c, 0.0);
            for (size_t j = 0; j < c; ++j) probs[j] = b[j];
            for (size_t i = 0; i < p.dim; ++i) {
                const double xi = x.values[i];
                if (xi == 0.0) continue;
                for (size_t j = 0; j < c; ++j) probs[j] += xi * w[i * c + j];
            }
            softmax_inplace(probs);
            loss += -std::log(std::max(probs[gold], 1e-300)) * inv_b;

            double* gw = grad.data();
            double* gb = gw + p.dim * c;
            for (size_t j = 0; j < c; ++j) {
                const double delta = (probs[j] - (j == gold ? 1.0 : 0.0)) * inv_b;
                gb[j] += delta;
                if (delta == 0.0) continue;
                for (size_t i = 0; i < p.dim; ++i) {
                    const double xi = x.values[i];
                    if (xi != 0.0) gw[i * c + j] += xi * delta;
                }
            }
        } else {
            const size_t h = p.hidden;
            const double* w1 = p.values.data();
            const double* b1 = w1 + p.dim * h;
            const double* w2 = b1 + h;
            const double* b2 = w2 + h * c;

            std::vector<double> pre(h);
            for (size_t k = 0; k < h; ++k) pre[k] = b1[k];
            for (size_t i = 0; i < p.dim; ++i) {
                const double xi = x.values[i];
                if (xi == 0.0) continue;
                for (size_t k = 0; k < h; ++k) pre[k] += xi * w1[i * h + k];
            }
            std::vector<double> act(h);
            for (size_t k = 0; k < h; ++k) act[k] = std::tanh(pre[k]);

            std::vector<double> probs(c, 0.0);
            for (size_t j = 0; j < c; ++j) {
                double z = b2[j];
                for (size_t k = 0; k < h; ++k) z += act[k] * w2[k * c + j];
                probs[j] = z;
            }
            softmax_inplace(probs);
            loss += -std::log(std::max(probs[gold], 1e-300)) * inv_b;

            double* gw1 = grad.data();
            double* gb1 = gw1 + p.dim * h;
            double* gw2 = gb1 + h;
            double* gb2 = gw2 + h * c;

            std::vector<double> dz2(c);
            for (size_t j = 0; j < c; ++j) {
                dz2[j] = (probs[j] - (j == gold ? 1.0 : 0.0)) * inv_b;
                gb2[j] += dz2[j];
            }
            std::vector<double> dz1(h, 0.0);
            for (size_t k = 0; k < h; ++k) {
                double da = 0.0;
                for (size_t j = 0; j < c; ++j) {
                    gw2[k * c + j] += act[k] * dz2[j];
                    da += w2[k * c + j] * dz2[j];
                }
                dz1[k] = da * (1.0 - act[k] * act[k]);
                gb1[k] += dz1[k];
            }
            for (size_t i = 0; i < p.dim; ++i) {
                const double xi = x.values[i];
                if (xi == 0.0) continue;
                for (size_t k = 0; k < h; ++k) gw1[i * h + k] += xi * dz1[k];
            }
        }
    }
    return {loss, std::move(grad)};
}

std::string TextClassifier::predict_with(const ModelParams& p, const RenderedExample& ex) const {
    const std::vector<double> probs = probabilities(p, ex.text);
    size_t best = 0;
    for (size_t j = 1; j < probs.size(); ++j) {
        if (probs[j] > probs[best]) best = j;
    }
    return config_.labels[best];
}

double TextClassifier::train_step(const std::vector<RenderedExample>& batch,
                                  double learning_rate) {
    auto [loss, grad] = loss_and_grad(params_, batch);
    optimizer_step(params_, grad, opt_, learning_rate);
    return loss;
}

std::string TextClassifier::predict_label(const RenderedExample& ex) const {
    return predict_with(params_, ex);
}

std::string TextClassifier::param_digest() const {
    return hex64(digest_doubles(params_.values));
}

void TextClassifier::save_checkpoint(const std::string& path) const {
    nlohmann::ordered_json j;
    j["format"] = "checkpoint/1";
    j["dim"] = config_.dim;
    j["ngram_sizes"] = config_.ngram_sizes;
    j["labels"] = config_.labels;
    j["depth"] = config_.depth;
    j["hidden"] = config_.hidden;
    j["optimizer"] = {
        {"rule", config_.rule == OptRule::sgd ? "sgd" : "adamw"},
        {"step_count", opt_.step_count},
        {"beta1", opt_.beta1},
        {"beta2", opt_.beta2},
        {"epsilon", opt_.epsilon},
        {"weight_decay", opt_.weight_decay},
        {"m", opt_.m},
        {"v", opt_.v},
    };
    j["values"] = params_.values;
    j["digest"] = param_digest();

    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << j.dump() << "\n";
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

TextClassifier TextClassifier::load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
        if (j.at("format").get<std::string>() != "checkpoint/1") {
            raise(ErrorCode::parse_error, "unsupported checkpoint format");
        }
        ClassifierConfig cfg;
        cfg.dim = j.at("dim").get<size_t>();
        cfg.ngram_sizes = j.at("ngram_sizes").get<std::vector<int>>();
        cfg.labels = j.at("labels").get<std::vector<std::string>>();
        cfg.depth = j.at("depth").get<int>();
        cfg.hidden = j.at("hidden").get<size_t>();
        const auto& oj = j.at("optimizer");
        cfg.rule = oj.at("rule").get<std::string>() == "adamw" ? OptRule::adamw : OptRule::sgd;
        cfg.weight_decay = oj.at("weight_decay").get<double>();

        TextClassifier model(cfg, 0);
        model.params_.values = j.at("values").get<std::vector<double>>();
        if (model.params_.values.size() != model.params_.expected_size()) {
            raise(ErrorCode::parse_error, "checkpoint value count does not match shapes");
        }
        model.opt_.step_count = oj.at("step_count").get<uint64_t>();
        model.opt_.beta1 = oj.at("beta1").get<double>();
        model.opt_.beta2 = oj.at("beta2").get<double>();
        model.opt_.epsilon = oj.at("epsilon").get<double>();
        model.opt_.m = oj.at("m").get<std::vector<double>>();
        model.opt_.v = oj.at("v").get<std::vector<double>>();
        if (model.param_digest() != j.at("digest").get<std::string>()) {
            raise(ErrorCode::io_error, "checkpoint digest mismatch");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::parse_error, std::string("checkpoint JSON: ") + e.what());
    }
}

} // namespace paft
