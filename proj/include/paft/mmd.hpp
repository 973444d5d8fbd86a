#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paft/prompt.hpp"

namespace paft {

/// L2-normalized hashed n-gram counts of a template body (placeholders
/// contribute their bare names). The zero vector only embeds an empty body.
struct PromptEmbedding {
    std::vector<double> values;
    double norm = 0.0;
};

enum class KernelKind { rbf, linear };

struct Kernel {
    KernelKind kind = KernelKind::rbf;
    double bandwidth = 1.0; // rbf only

    void validate() const;
};

enum class MmdEstimator { biased_v, unbiased_u };

struct MmdEstimate {
    double value = 0.0;       // sqrt(max(mmd_squared, 0))
    double mmd_squared = 0.0; // raw estimate; may be negative for unbiased_u
    bool clamped = false;
    MmdEstimator estimator = MmdEstimator::biased_v;
    Kernel kernel;
    size_t n_a = 0;
    size_t n_b = 0;
};

struct DiscBound {
    double constant = 0.0;
    double bound = 0.0; // constant * mmd value, exactly
};

PromptEmbedding embed_prompt(const PromptTemplate& t, size_t d,
                             const std::vector<int>& ngram_sizes);

/// rbf: exp(-|u - v|^2 / (2 sigma^2)); linear: dot product.
double kernel_eval(const Kernel& k, const PromptEmbedding& u, const PromptEmbedding& v);

/// Exact (no subsampling) two-sample MMD estimate. biased_v keeps diagonal
/// kernel terms; unbiased_u excludes them and needs both sides >= 2.
MmdEstimate mmd2(const std::vector<PromptEmbedding>& a, const std::vector<PromptEmbedding>& b,
                 const Kernel& k, MmdEstimator estimator);

DiscBound disc_upper_bound(const MmdEstimate& e, double constant);

/// Median pairwise Euclidean distance over the pooled embeddings; falls back
/// to 1.0 when every distance is zero.
double median_heuristic_bandwidth(const std::vector<PromptEmbedding>& pooled);

struct ScalingPoint {
    size_t size = 0;
    double mean_mmd = 0.0;
    double std_mmd = 0.0;
    std::vector<double> per_seed;
};

/// For each size, subsamples that many pool templates without replacement
/// (one draw per seed index, derived from base_seed) and reports the
/// biased-V MMD to the fixed test set, aggregated across seeds.
std::vector<ScalingPoint> scaling_curve(const std::vector<PromptTemplate>& pool,
                                        const std::vector<PromptTemplate>& test_set,
                                        const std::vector<size_t>& sizes, const Kernel& k,
                                        size_t n_seeds, uint64_t base_seed, size_t d,
                                        const std::vector<int>& ngram_sizes);

void write_scaling_curve_csv(const std::vector<ScalingPoint>& curve, const std::string& path);
void write_scaling_curve_json(const std::vector<ScalingPoint>& curve, const Kernel& k,
                              MmdEstimator estimator, const std::string& path);

} // namespace paft
