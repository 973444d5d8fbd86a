#pragma once

#include <cstdint>
#include <vector>

namespace paft::stats {

/// Pairwise (cascade) summation: reduction-order independent to ~1e-12
/// relative even for large inputs.
double pairwise_sum(const std::vector<double>& values);

double mean(const std::vector<double>& values);

/// Sample standard deviation (n-1 denominator), defined as 0 for n <= 1.
double sample_std(const std::vector<double>& values);

double median(std::vector<double> values);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
/// Series expansion for x < a + 1, continued fraction otherwise.
double gamma_q(double a, double x);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Goodness-of-fit against uniform expected counts.
ChiSquareResult chi_square_uniform(const std::vector<uint64_t>& observed);

/// Average ranks; ties share the mean of the positions they occupy.
std::vector<double> ranks(const std::vector<double>& values);

/// Spearman rank correlation of paired samples (ties via average ranks).
double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys);

/// One-sided permutation p-value for H1: rho < 0, i.e. the probability of a
/// permuted rho at or below the observed one. Exact enumeration for n <= 8,
/// otherwise a seeded Monte Carlo with n_mc permutations.
double spearman_pvalue_negative(const std::vector<double>& xs, const std::vector<double>& ys,
                                uint64_t mc_seed = 17, size_t n_mc = 20000);

} // namespace paft::stats
