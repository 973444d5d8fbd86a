#include "paft/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "paft/error.hpp"
#include "paft/rng.hpp"

namespace paft::stats {

double pairwise_sum(const std::vector<double>& values) {
    // Recursive halving; base blocks summed directly.
    struct Reduce {
        static double run(const double* p, size_t n) {
            if (n <= 8) {
                double s = 0.0;
                for (size_t i = 0; i < n; ++i) s += p[i];
                return s;
            }
            size_t half = n / 2;
            return run(p, half) + run(p + half, n - half);
        }
    };
    return Reduce::run(values.data(), values.size());
}

double mean(const std::vector<double>& values) {
    if (values.empty()) raise(ErrorCode::empty_rows, "mean of empty sample");
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
    const size_t n = values.size();
    if (n <= 1) return 0.0;
    const double m = mean(values);
    std::vector<double> sq(n);
    for (size_t i = 0; i < n; ++i) {
        const double d = values[i] - m;
        sq[i] = d * d;
    }
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(n - 1));
}

double median(std::vector<double> values) {
    if (values.empty()) raise(ErrorCode::empty_rows, "median of empty sample");
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

// Lower incomplete gamma by series, returns P(a, x).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper incomplete gamma by Lentz continued fraction, returns Q(a, x).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) raise(ErrorCode::invalid_argument, "gamma_q domain");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

ChiSquareResult chi_square_uniform(const std::vector<uint64_t>& observed) {
    if (observed.size() < 2) raise(ErrorCode::invalid_argument, "need >= 2 categories");
    double total = 0.0;
    for (uint64_t c : observed) total += static_cast<double>(c);
    if (total <= 0.0) raise(ErrorCode::invalid_argument, "no observations");
    const double expected = total / static_cast<double>(observed.size());
    double stat = 0.0;
    for (uint64_t c : observed) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    ChiSquareResult r;
    r.statistic = stat;
    r.dof = static_cast<int>(observed.size()) - 1;
    r.p_value = gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * stat);
    return r;
}

std::vector<double> ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> out(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (size_t k = i; k <= j; ++k) out[order[k]] = avg;
        i = j + 1;
    }
    return out;
}

namespace {

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    const size_t n = xs.size();
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) raise(ErrorCode::shape_error, "paired samples differ in length");
    if (xs.size() < 2) raise(ErrorCode::too_few_samples, "spearman needs >= 2 pairs");
    return pearson(ranks(xs), ranks(ys));
}

double spearman_pvalue_negative(const std::vector<double>& xs, const std::vector<double>& ys,
                                uint64_t mc_seed, size_t n_mc) {
    const double observed = spearman_rho(xs, ys);
    const std::vector<double> rx = ranks(xs);
    std::vector<double> ry = ranks(ys);
    const size_t n = xs.size();
    const double eps = 1e-12;

    if (n <= 8) {
        std::vector<double> perm = ry;
        std::sort(perm.begin(), perm.end());
        size_t total = 0, at_or_below = 0;
        do {
            ++total;
            if (pearson(rx, perm) <= observed + eps) ++at_or_below;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return static_cast<double>(at_or_below) / static_cast<double>(total);
    }

    Rng rng(mc_seed);
    size_t at_or_below = 0;
    std::vector<double> perm = ry;
    for (size_t t = 0; t < n_mc; ++t) {
        rng.shuffle(perm);
        if (pearson(rx, perm) <= observed + eps) ++at_or_below;
    }
    return static_cast<double>(at_or_below + 1) / static_cast<double>(n_mc + 1);
}

} // namespace paft::stats
