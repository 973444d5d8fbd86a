#include "paft/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "paft/error.hpp"
#include "paft/eval.hpp"
#include "paft/rng.hpp"
#include "paft/stats.hpp"
#include "paft/toy_model.hpp"

namespace paft {

void Kernel::validate() const {
    if (kind == KernelKind::rbf && !(bandwidth > 0.0)) {
        raise(ErrorCode::invalid_argument, "rbf bandwidth must be positive");
    }
}

PromptEmbedding embed_prompt(const PromptTemplate& t, size_t d,
                             const std::vector<int>& ngram_sizes) {
    // Placeholders count as their bare names so that {pattern} and {option_a}
    // contribute stable tokens rather than brace noise.
    std::string text;
    text.reserve(t.body.size());
    size_t i = 0;
    const std::string& body = t.body;
    while (i < body.size()) {
        if (body[i] == '{') {
            size_t k = i + 1;
            while (k < body.size() && body[k] != '}' && body[k] != '{') ++k;
            if (k < body.size() && body[k] == '}' && k > i + 1) {
                text += body.substr(i + 1, k - i - 1);
                i = k + 1;
                continue;
            }
        }
        text.push_back(body[i]);
        ++i;
    }

    PromptEmbedding e;
    e.values = featurize(text, d, ngram_sizes).values;
    std::vector<double> sq(e.values.size());
    for (size_t j = 0; j < e.values.size(); ++j) sq[j] = e.values[j] * e.values[j];
    const double norm = std::sqrt(stats::pairwise_sum(sq));
    if (norm > 0.0) {
        for (double& v : e.values) v /= norm;
        e.norm = 1.0;
    }
    return e;
}

namespace {

double squared_distance(const PromptEmbedding& u, const PromptEmbedding& v) {
    double s = 0.0;
    for (size_t i = 0; i < u.values.size(); ++i) {
        const double d = u.values[i] - v.values[i];
        s += d * d;
    }
    return s;
}

} // namespace

double kernel_eval(const Kernel& k, const PromptEmbedding& u, const PromptEmbedding& v) {
    k.validate();
    if (u.values.size() != v.values.size()) {
        raise(ErrorCode::shape_error, "embedding dimensions differ");
    }
    if (k.kind == KernelKind::linear) {
        double s = 0.0;
        for (size_t i = 0; i < u.values.size(); ++i) s += u.values[i] * v.values[i];
        return s;
    }
    return std::exp(-squared_distance(u, v) / (2.0 * k.bandwidth * k.bandwidth));
}

MmdEstimate mmd2(const std::vector<PromptEmbedding>& a, const std::vector<PromptEmbedding>& b,
                 const Kernel& k, MmdEstimator estimator) {
    k.validate();
    const size_t n = a.size(), m = b.size();
    if (n < 1 || m < 1) raise(ErrorCode::too_few_samples, "both samples must be non-empty");
    if (estimator == MmdEstimator::unbiased_u && (n < 2 || m < 2)) {
        raise(ErrorCode::too_few_samples, "unbiased estimator needs >= 2 per side");
    }

    const bool keep_diag = estimator == MmdEstimator::biased_v;

    // Row sums cascaded pairwise keep the reduction order-insensitive.
    auto gram_sum = [&](const std::vector<PromptEmbedding>& x,
                        const std::vector<PromptEmbedding>& y, bool exclude_diag) {
        std::vector<double> row_sums(x.size());
        std::vector<double> row(y.size());
        for (size_t i = 0; i < x.size(); ++i) {
            for (size_t j = 0; j < y.size(); ++j) {
                row[j] = (exclude_diag && i == j) ? 0.0 : kernel_eval(k, x[i], y[j]);
            }
            row_sums[i] = stats::pairwise_sum(row);
        }
        return stats::pairwise_sum(row_sums);
    };

    const double s_aa = gram_sum(a, a, !keep_diag);
    const double s_bb = gram_sum(b, b, !keep_diag);
    const double s_ab = gram_sum(a, b, false);

    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    double mmd_sq;
    if (keep_diag) {
        mmd_sq = s_aa / (dn * dn) + s_bb / (dm * dm) - 2.0 * s_ab / (dn * dm);
    } else {
        mmd_sq = s_aa / (dn * (dn - 1.0)) + s_bb / (dm * (dm - 1.0)) - 2.0 * s_ab / (dn * dm);
    }

    MmdEstimate e;
    e.mmd_squared = mmd_sq;
    e.clamped = mmd_sq < 0.0;
    e.value = std::sqrt(std::max(mmd_sq, 0.0));
    e.estimator = estimator;
    e.kernel = k;
    e.n_a = n;
    e.n_b = m;
    return e;
}

DiscBound disc_upper_bound(const MmdEstimate& e, double constant) {
    if (!(constant > 0.0)) raise(ErrorCode::invalid_argument, "bound constant must be positive");
    return DiscBound{constant, constant * e.value};
}

double median_heuristic_bandwidth(const std::vector<PromptEmbedding>& pooled) {
    if (pooled.size() < 2) raise(ErrorCode::too_few_samples, "median heuristic needs >= 2 points");
    std::vector<double> dists;
    dists.reserve(pooled.size() * (pooled.size() - 1) / 2);
    for (size_t i = 0; i < pooled.size(); ++i) {
        for (size_t j = i + 1; j < pooled.size(); ++j) {
            dists.push_back(std::sqrt(squared_distance(pooled[i], pooled[j])));
        }
    }
    const double med = stats::median(dists);
    return med > 0.0 ? med : 1.0;
}

std::vector<ScalingPoint> scaling_curve(const std::vector<PromptTemplate>& pool,
                                        const std::vector<PromptTemplate>& test_set,
                                        const std::vector<size_t>& sizes, const Kernel& k,
                                        size_t n_seeds, uint64_t base_seed, size_t d,
                                        const std::vector<int>& ngram_sizes) {
    k.validate();
    if (test_set.empty()) raise(ErrorCode::empty_prompt_set, "test set is empty");
    if (n_seeds < 1) raise(ErrorCode::invalid_argument, "need >= 1 seed");
    if (sizes.empty()) raise(ErrorCode::invalid_argument, "no sizes given");
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1 || sizes[i] > pool.size()) {
            raise(ErrorCode::invalid_size,
                  "size " + std::to_string(sizes[i]) + " outside [1, " +
                      std::to_string(pool.size()) + "]");
        }
        if (i > 0 && sizes[i] <= sizes[i - 1]) {
            raise(ErrorCode::invalid_argument, "sizes must be strictly ascending");
        }
    }

    std::vector<PromptEmbedding> pool_emb;
    pool_emb.reserve(pool.size());
    for (const auto& t : pool) pool_emb.push_back(embed_prompt(t, d, ngram_sizes));
    std::vector<PromptEmbedding> test_emb;
    test_emb.reserve(test_set.size());
    for (const auto& t : test_set) test_emb.push_back(embed_prompt(t, d, ngram_sizes));

    std::vector<ScalingPoint> curve;
    curve.reserve(sizes.size());
    for (size_t size : sizes) {
        ScalingPoint point;
        point.size = size;
        for (size_t s = 0; s < n_seeds; ++s) {
            Rng rng = derive_stream(base_seed,
                                    "mmd-scale/" + std::to_string(size) + "/" + std::to_string(s));
            std::vector<size_t> idx(pool.size());
            std::iota(idx.begin(), idx.end(), size_t{0});
            rng.shuffle(idx);
            std::vector<PromptEmbedding> sample;
            sample.reserve(size);
            for (size_t i = 0; i < size; ++i) sample.push_back(pool_emb[idx[i]]);
            point.per_seed.push_back(mmd2(sample, test_emb, k, MmdEstimator::biased_v).value);
        }
        point.mean_mmd = stats::mean(point.per_seed);
        point.std_mmd = stats::sample_std(point.per_seed);
        curve.push_back(std::move(point));
    }
    return curve;
}

void write_scaling_curve_csv(const std::vector<ScalingPoint>& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << "size,mean_mmd,std_mmd\n";
    for (const auto& p : curve) {
        out << p.size << "," << format_g12(p.mean_mmd) << "," << format_g12(p.std_mmd) << "\n";
    }
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

void write_scaling_curve_json(const std::vector<ScalingPoint>& curve, const Kernel& k,
                              MmdEstimator estimator, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = "mmdcurve/1";
    j["kernel"] = {{"kind", k.kind == KernelKind::rbf ? "rbf" : "linear"},
                   {"bandwidth", k.bandwidth}};
    j["estimator"] = estimator == MmdEstimator::biased_v ? "biased_v" : "unbiased_u";
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : curve) {
        j["points"].push_back({{"size", p.size},
                               {"mean_mmd", p.mean_mmd},
                               {"std_mmd", p.std_mmd},
                               {"per_seed", p.per_seed}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

} // namespace paft
