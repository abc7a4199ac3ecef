// analysis.hpp — runtime lower bound, order-statistic formulas, survival
// curves, tail-exponent fits, and truncated means.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mcmt/binomial.hpp"

namespace mcmt {

// Wald's sequential-test bound on the expected number of draws needed to
// decide p1 <= alpha vs p1 > alpha with error probability epsilon:
//   [eps log(eps/(1-eps)) + (1-eps) log((1-eps)/eps)]
//   / [p1 log(p1/alpha) + (1-p1) log((1-p1)/(1-alpha))].
// The denominator is the Bernoulli KL divergence, zero iff p1 == alpha, in
// which case the bound is infinite.
inline double wald_lower_bound(double p1, double alpha, double epsilon) {
    if (!(p1 > 0.0 && p1 < 1.0) || !(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("wald_lower_bound: p1 and alpha must be in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("wald_lower_bound: epsilon must be in (0,1)");
    const double num = epsilon * std::log(epsilon / (1.0 - epsilon))
                     + (1.0 - epsilon) * std::log((1.0 - epsilon) / epsilon);
    const double den = p1 * std::log(p1 / alpha)
                     + (1.0 - p1) * std::log((1.0 - p1) / (1.0 - alpha));
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

// P(X_(r) <= x) for n i.i.d. draws with per-draw cdf value F:
// sum_{i=r}^{n} C(n,i) F^i (1-F)^{n-i}.
inline double order_statistic_cdf(std::int64_t r, std::int64_t n, double F) {
    if (n < 1 || r < 1 || r > n)
        throw std::invalid_argument("order_statistic_cdf: need 1 <= r <= n");
    if (!(F >= 0.0 && F <= 1.0))
        throw std::invalid_argument("order_statistic_cdf: F must lie in [0,1]");
    return binom_sf(n, r, F);
}

struct SurvivalCurve {
    std::vector<double> grid;    // ascending evaluation points
    std::vector<double> values;  // P(X > t) at each grid point
};

// Empirical survival function over the given grid.
inline SurvivalCurve empirical_survival(const std::vector<double>& samples,
                                        const std::vector<double>& grid) {
    if (samples.empty())
        throw std::invalid_argument("empirical_survival: samples must be non-empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("empirical_survival: grid must be ascending");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    SurvivalCurve curve;
    curve.grid = grid;
    curve.values.reserve(grid.size());
    for (double t : grid) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
        curve.values.push_back(double(above) / double(sorted.size()));
    }
    return curve;
}

struct TailFit {
    double gamma_hat = 0.0;  // least-squares slope of log value vs log t
    double t_lo = 0.0;
    double t_hi = 0.0;
    double residual = 0.0;   // RMS deviation in log space
    std::size_t points = 0;
};

// Fits value ~ t^gamma over the grid points in [t_lo, t_hi] with positive
// value, by least squares in log-log space. Needs at least five such points.
inline TailFit tail_exponent_fit(const SurvivalCurve& curve, double t_lo, double t_hi) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        const double t = curve.grid[i];
        const double v = curve.values[i];
        if (t < t_lo || t > t_hi || !(t > 0.0) || !(v > 0.0)) continue;
        xs.push_back(std::log(t));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 5)
        throw std::invalid_argument("tail_exponent_fit: need >= 5 positive points in range");
    const std::size_t k = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) { mx += xs[i]; my += ys[i]; }
    mx /= double(k);
    my /= double(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    TailFit fit;
    fit.gamma_hat = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.points = k;
    const double intercept = my - fit.gamma_hat * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double e = ys[i] - (intercept + fit.gamma_hat * xs[i]);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / double(k));
    return fit;
}

// Mean of min(sample, cap): the finite-compute witness used in place of a
// (possibly infinite) expectation.
inline double truncated_mean(const std::vector<double>& samples, double cap) {
    if (samples.empty())
        throw std::invalid_argument("truncated_mean: samples must be non-empty");
    double sum = 0.0;
    for (double s : samples) sum += std::min(s, cap);
    return sum / double(samples.size());
}

} // namespace mcmt
