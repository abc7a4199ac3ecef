// binomial.hpp — exact binomial tail sums in log space plus O(1) incremental
// trackers used by the sequential estimation loops.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace mcmt {

inline double log_binom_coeff(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    if (k == 0 || k == n) return 0.0;
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0)
         - std::lgamma(double(n - k) + 1.0);
}

inline double binom_log_pmf(std::int64_t n, std::int64_t k, double p) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    if (p <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
    return log_binom_coeff(n, k) + double(k) * std::log(p)
         + double(n - k) * std::log1p(-p);
}

namespace detail {

// Sum of pmf(k) for k = start down to 0. Requires start < mode so terms
// decrease monotonically and early termination is safe.
inline double sum_lower_from(std::int64_t n, std::int64_t start, double p) {
    double term = std::exp(binom_log_pmf(n, start, p));
    double sum = term;
    const double q = 1.0 - p;
    for (std::int64_t k = start; k > 0; --k) {
        term *= (double(k) / double(n - k + 1)) * (q / p);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

// Sum of pmf(k) for k = start up to n. Requires start > mode.
inline double sum_upper_from(std::int64_t n, std::int64_t start, double p) {
    double term = std::exp(binom_log_pmf(n, start, p));
    double sum = term;
    const double q = 1.0 - p;
    for (std::int64_t k = start; k < n; ++k) {
        term *= (double(n - k) / double(k + 1)) * (p / q);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

} // namespace detail

// P(X <= s) for X ~ Binomial(n, p). Exact summation over the shorter tail.
inline double binom_cdf(std::int64_t n, std::int64_t s, double p) {
    if (s < 0) return 0.0;
    if (s >= n) return 1.0;
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return 0.0;
    const auto mode = std::int64_t(std::floor(double(n + 1) * p));
    if (s < mode) return std::min(1.0, detail::sum_lower_from(n, s, p));
    return std::max(0.0, 1.0 - detail::sum_upper_from(n, s + 1, p));
}

// P(X >= s).
inline double binom_sf(std::int64_t n, std::int64_t s, double p) {
    if (s <= 0) return 1.0;
    if (s > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    const auto mode = std::int64_t(std::floor(double(n + 1) * p));
    if (s > mode) return std::min(1.0, detail::sum_upper_from(n, s, p));
    return std::max(0.0, 1.0 - detail::sum_lower_from(n, s - 1, p));
}

// Tracks log C(n, S) while draws arrive one at a time.
class BinomCoeffTracker {
public:
    void update(bool success) {
        n_ += 1;
        if (success) {
            s_ += 1;
            log_coeff_ += std::log(double(n_) / double(s_));
        } else {
            log_coeff_ += std::log(double(n_) / double(n_ - s_));
        }
        if ((n_ & 0xFFF) == 0) log_coeff_ = log_binom_coeff(n_, s_);
    }
    std::int64_t n() const { return n_; }
    std::int64_t successes() const { return s_; }
    double log_coeff() const { return log_coeff_; }

private:
    std::int64_t n_ = 0;
    std::int64_t s_ = 0;
    double log_coeff_ = 0.0;
};

// Maintains pmf(S_n | c), P(X_n <= S_n | c) and P(X_n >= S_n | c) at a fixed
// probe c while (n, S_n) evolves by single Bernoulli draws. All three are
// refreshed against the exact sums periodically to stop drift.
class BinomTailTracker {
public:
    explicit BinomTailTracker(double probe) : c_(probe) {
        if (!(probe > 0.0 && probe < 1.0))
            throw std::invalid_argument("BinomTailTracker: probe must be in (0,1)");
    }

    void update(bool success) {
        const double q = 1.0 - c_;
        if (success) {
            // pmf_{n+1}(S+1) = pmf_n(S) * (n+1)/(S+1) * c
            const double pmf_next = pmf_ * (double(n_ + 1) / double(s_ + 1)) * c_;
            cdf_ = (cdf_ - c_ * pmf_) + pmf_next;
            sf_ = sf_ - q * pmf_;  // P(X_{n+1}>=S+1) = P(X_n>=S+1) + c pmf_n(S)
            pmf_ = pmf_next;
        } else {
            // S unchanged; mass {X_n = S, draw = 1} leaves the lower tail
            const double pmf_next = pmf_ * (double(n_ + 1) / double(n_ + 1 - s_)) * q;
            cdf_ = cdf_ - c_ * pmf_;
            if (s_ > 0)
                sf_ = sf_ + pmf_ * q * (double(s_) / double(n_ - s_ + 1));
            pmf_ = pmf_next;
        }
        n_ += 1;
        if (success) s_ += 1;
        clamp();
        if ((n_ & 0xFFF) == 0) resync();
    }

    double cdf() const { return cdf_; }   // P(X_n <= S_n | c)
    double sf() const { return sf_; }     // P(X_n >= S_n | c)
    double pmf() const { return pmf_; }
    double probe() const { return c_; }

    void reset(double probe, std::int64_t n, std::int64_t s) {
        if (!(probe > 0.0 && probe < 1.0))
            throw std::invalid_argument("BinomTailTracker: probe must be in (0,1)");
        c_ = probe;
        n_ = n;
        s_ = s;
        resync();
    }

private:
    void clamp() {
        if (cdf_ < 0.0) cdf_ = 0.0;
        if (cdf_ > 1.0) cdf_ = 1.0;
        if (sf_ < 0.0) sf_ = 0.0;
        if (sf_ > 1.0) sf_ = 1.0;
        if (pmf_ < 0.0) pmf_ = 0.0;
    }
    void resync() {
        pmf_ = std::exp(binom_log_pmf(n_, s_, c_));
        cdf_ = binom_cdf(n_, s_, c_);
        sf_ = binom_sf(n_, s_, c_);
    }

    double c_;
    std::int64_t n_ = 0;
    std::int64_t s_ = 0;
    double pmf_ = 1.0;  // pmf(0, 0 | c) = 1
    double cdf_ = 1.0;
    double sf_ = 1.0;
};

} // namespace mcmt
