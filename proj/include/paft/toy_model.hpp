#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "paft/trainable.hpp"

namespace paft {

/// Dense hashed character n-gram counts.
struct FeatureVector {
    std::vector<double> values;
};

/// Counts of character n-grams (byte-level, sizes within 1..5) hashed into
/// d buckets with FNV-1a 64: bucket = fnv1a64(ngram bytes) & (d - 1).
/// d must be a power of two.
FeatureVector featurize(const std::string& text, size_t d, const std::vector<int>& ngram_sizes);

/// Flat parameter block. Layout (row-major):
///   depth 1: W (dim x classes), b (classes)
///   depth 2: W1 (dim x hidden), b1 (hidden), W2 (hidden x classes), b2 (classes)
struct ModelParams {
    int depth = 1;
    size_t dim = 0;
    size_t classes = 0;
    size_t hidden = 0;
    std::vector<double> values;

    size_t expected_size() const;
};

enum class OptRule { sgd, adamw };

struct OptimizerState {
    OptRule rule = OptRule::sgd;
    uint64_t step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
    std::vector<double> m; // adamw first moment, sized lazily
    std::vector<double> v; // adamw second moment
};

/// One optimizer update. sgd is exactly theta - lr * grad. adamw applies the
/// bias-corrected decoupled-weight-decay rule. step_count increments.
void optimizer_step(ModelParams& params, const std::vector<double>& grad, OptimizerState& state,
                    double learning_rate);

struct ClassifierConfig {
    size_t dim = size_t{1} << 14;
    std::vector<int> ngram_sizes = {1, 2, 3};
    std::vector<std::string> labels;
    int depth = 1;
    size_t hidden = 16;
    OptRule rule = OptRule::sgd;
    double weight_decay = 0.0;
};

/// Deterministic softmax text classifier over hashed n-gram features.
/// Weights initialize uniform(-0.05, 0.05) from the model seed, biases zero.
class TextClassifier : public TrainableModel {
public:
    TextClassifier(ClassifierConfig config, uint64_t seed);

    /// Mean cross-entropy over the batch and its exact analytic gradient
    /// (flat, same layout as params.values).
    std::pair<double, std::vector<double>> loss_and_grad(
        const ModelParams& params, const std::vector<RenderedExample>& batch) const;

    /// Softmax class probabilities for one input.
    std::vector<double> probabilities(const ModelParams& params, const std::string& text) const;

    /// Argmax label; ties break toward the lowest label index.
    std::string predict_with(const ModelParams& params, const RenderedExample& ex) const;

    double train_step(const std::vector<RenderedExample>& batch, double learning_rate) override;
    std::string predict_label(const RenderedExample& ex) const override;
    std::string param_digest() const override;

    const ClassifierConfig& config() const { return config_; }
    const ModelParams& params() const { return params_; }
    ModelParams& mutable_params() { return params_; }
    const OptimizerState& optimizer_state() const { return opt_; }

    void save_checkpoint(const std::string& path) const;
    static TextClassifier load_checkpoint(const std::string& path);

private:
    ClassifierConfig config_;
    ModelParams params_;
    OptimizerState opt_;
};

} // namespace paft
