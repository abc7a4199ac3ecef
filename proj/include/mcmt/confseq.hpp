// confseq.hpp — anytime-valid binomial confidence machinery: exact
// Clopper-Pearson intervals with risk spending, Robbins likelihood-set
// intervals, a normal-approximation heuristic, and their analytic length
// bounds.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "mcmt/binomial.hpp"

namespace mcmt {

struct BinomialCount {
    std::int64_t n = 0;  // draws
    std::int64_t S = 0;  // exceedances, 0 <= S <= n

    BinomialCount(std::int64_t draws, std::int64_t exceedances)
        : n(draws), S(exceedances) {
        if (n < 1) throw std::invalid_argument("BinomialCount: n must be >= 1");
        if (S < 0 || S > n)
            throw std::invalid_argument("BinomialCount: S must satisfy 0 <= S <= n");
    }
    double estimate() const { return double(S) / double(n); }
};

struct IntervalEstimate {
    double lower = 0.0;
    double upper = 1.0;
    std::int64_t n = 0;
    double risk_spent = 0.0;
    bool degenerate = false;  // set when a set-valued construction collapsed

    double length() const { return upper - lower; }
    bool contains(double p) const { return lower <= p && p <= upper; }
};

// Per-step risk allocation. The quadratic rule spends rho_n = 6 eps/(pi^2 n^2),
// which sums to eps over all n and has -log(rho_n) growing like 2 log n.
class SpendingSchedule {
public:
    static SpendingSchedule quadratic(double epsilon) {
        check_epsilon(epsilon);
        return SpendingSchedule(epsilon, {});
    }
    static SpendingSchedule table(double epsilon, std::vector<double> levels) {
        check_epsilon(epsilon);
        double total = 0.0;
        for (double v : levels) {
            if (!(v > 0.0)) throw std::invalid_argument("SpendingSchedule: levels must be > 0");
            total += v;
        }
        if (total > epsilon + 1e-12)
            throw std::invalid_argument("SpendingSchedule: levels must sum to <= epsilon");
        return SpendingSchedule(epsilon, std::move(levels));
    }

    double level(std::int64_t n) const {
        if (n < 1) throw std::invalid_argument("SpendingSchedule: n must be >= 1");
        if (table_.empty()) {
            static const double six_over_pi2 = 6.0 / (M_PI * M_PI);
            return epsilon_ * six_over_pi2 / (double(n) * double(n));
        }
        return std::size_t(n) <= table_.size() ? table_[std::size_t(n - 1)] : 0.0;
    }
    double epsilon() const { return epsilon_; }

private:
    SpendingSchedule(double eps, std::vector<double> t)
        : epsilon_(eps), table_(std::move(t)) {}
    static void check_epsilon(double epsilon) {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("SpendingSchedule: epsilon must be in (0,1)");
    }
    double epsilon_;
    std::vector<double> table_;
};

inline double spending_level(std::int64_t n, const SpendingSchedule& schedule) {
    return schedule.level(n);
}

namespace detail {

inline void check_tail_level(double t) {
    if (!(t > 0.0 && t < 1.0))
        throw std::invalid_argument("tail_level must be in (0,1)");
}

constexpr double kEndpointTol = 1e-10;

// Upper CP endpoint: the p solving P(X <= S | p) = t, S < n. The cdf is
// strictly decreasing in p, so plain bisection on [0,1] suffices.
inline double cp_upper_endpoint(std::int64_t n, std::int64_t S, double t) {
    if (S >= n) return 1.0;
    if (S == 0) return -std::expm1(std::log(t) / double(n));
    double lo = 0.0, hi = 1.0;
    while (hi - lo > kEndpointTol) {
        const double mid = 0.5 * (lo + hi);
        if (binom_cdf(n, S, mid) < t) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Lower CP endpoint: the p solving P(X >= S | p) = t, S > 0 (sf increasing).
inline double cp_lower_endpoint(std::int64_t n, std::int64_t S, double t) {
    if (S <= 0) return 0.0;
    if (S == n) return std::exp(std::log(t) / double(n));
    double lo = 0.0, hi = 1.0;
    while (hi - lo > kEndpointTol) {
        const double mid = 0.5 * (lo + hi);
        if (binom_sf(n, S, mid) < t) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Exact two-sided Clopper-Pearson interval at the given per-tail level.
// Endpoints are found by bisection on exact binomial tail sums; the interval
// always contains S/n for tail levels below 1/2.
inline IntervalEstimate cp_exact_interval(const BinomialCount& count, double tail_level) {
    detail::check_tail_level(tail_level);
    IntervalEstimate iv;
    iv.n = count.n;
    iv.risk_spent = 2.0 * tail_level;
    iv.lower = detail::cp_lower_endpoint(count.n, count.S, tail_level);
    iv.upper = detail::cp_upper_endpoint(count.n, count.S, tail_level);
    return iv;
}

// Robbins (1970) likelihood set {p : (n+1) C(n,S) p^S (1-p)^(n-S) > eps}.
// The weighted likelihood is unimodal in p, so the set is an interval around
// S/n; we return its closure with endpoints located by bisection.
inline IntervalEstimate robbins_interval(const BinomialCount& count, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("robbins_interval: epsilon must be in (0,1)");
    const std::int64_t n = count.n;
    const std::int64_t S = count.S;
    const double phat = count.estimate();
    const double target = std::log(epsilon) - std::log(double(n + 1)) - log_binom_coeff(n, S);
    auto loglik = [&](double p) -> double {
        // S log p + (n-S) log(1-p), with the 0*log(0) = 0 conventions
        double v = 0.0;
        if (S > 0) v += (p <= 0.0) ? -std::numeric_limits<double>::infinity()
                                   : double(S) * std::log(p);
        if (S < n) v += (p >= 1.0) ? -std::numeric_limits<double>::infinity()
                                   : double(n - S) * std::log1p(-p);
        return v;
    };

    IntervalEstimate iv;
    iv.n = n;
    iv.risk_spent = epsilon;
    if (!(loglik(phat) > target)) {  // cannot happen analytically; guard only
        iv.lower = iv.upper = phat;
        iv.degenerate = true;
        return iv;
    }
    if (S == 0 || loglik(0.0) > target) {
        iv.lower = 0.0;
    } else {
        double lo = 0.0, hi = phat;
        while (hi - lo > detail::kEndpointTol) {
            const double mid = 0.5 * (lo + hi);
            if (loglik(mid) > target) hi = mid; else lo = mid;
        }
        iv.lower = 0.5 * (lo + hi);
    }
    if (S == n || loglik(1.0) > target) {
        iv.upper = 1.0;
    } else {
        double lo = phat, hi = 1.0;
        while (hi - lo > detail::kEndpointTol) {
            const double mid = 0.5 * (lo + hi);
            if (loglik(mid) > target) lo = mid; else hi = mid;
        }
        iv.upper = 0.5 * (lo + hi);
    }
    return iv;
}

// Upper-tail standard normal quantile: z with P(Z > z) = t. Rational initial
// guess refined by Newton steps against the erfc-based CDF.
inline double normal_upper_quantile(double t) {
    detail::check_tail_level(t);
    const double q = 1.0 - t;  // lower-quantile probability
    // Acklam's approximation for the inverse normal CDF.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double z;
    if (q < p_low) {
        const double u = std::sqrt(-2.0 * std::log(q));
        z = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5])
          / ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (q <= 1.0 - p_low) {
        const double u = q - 0.5;
        const double r = u * u;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u
          / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double u = std::sqrt(-2.0 * std::log1p(-q));
        z = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5])
           / ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    for (int it = 0; it < 3; ++it) {
        const double err = 0.5 * std::erfc(z / M_SQRT2) - t;  // upper tail minus target
        const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        if (pdf <= 0.0) break;
        z += err / pdf;
    }
    return z;
}

// Normal-approximation interval, p_hat +/- z sqrt(p_hat (1-p_hat)/n), clipped
// to [0,1]. Heuristic: no anytime guarantee. Degenerate variance at S in
// {0, n} is replaced by the shrunk estimate (S + 1/2)/(n + 1).
inline IntervalEstimate normal_interval(const BinomialCount& count, double tail_level) {
    detail::check_tail_level(tail_level);
    const double phat = count.estimate();
    double var_p = phat;
    if (count.S == 0 || count.S == count.n)
        var_p = (double(count.S) + 0.5) / (double(count.n) + 1.0);
    const double half =
        normal_upper_quantile(tail_level) * std::sqrt(var_p * (1.0 - var_p) / double(count.n));
    IntervalEstimate iv;
    iv.n = count.n;
    iv.risk_spent = 2.0 * tail_level;
    iv.lower = std::max(0.0, phat - half);
    iv.upper = std::min(1.0, phat + half);
    return iv;
}

// Analytic length bound for the exact CP interval solved at per-tail level
// rho: 2 (2n)^{-1/2} (-log rho)^{1/2}.
inline double cp_length_bound(std::int64_t n, double rho) {
    if (n < 1) throw std::invalid_argument("cp_length_bound: n must be >= 1");
    detail::check_tail_level(rho);
    return 2.0 * std::sqrt(-std::log(rho) / (2.0 * double(n)));
}

// Analytic length bound for the Robbins likelihood interval:
// n^{-1/2} {log(4 n log n)}^{1/2}, defined for n >= 3.
inline double robbins_length_bound(std::int64_t n) {
    if (n < 3) throw std::invalid_argument("robbins_length_bound: n must be >= 3");
    return std::sqrt(std::log(4.0 * double(n) * std::log(double(n))) / double(n));
}

// Hoeffding tail bound for the mean of n Bernoulli draws: exp(-2 delta^2 n),
// doubled when two-sided. Can exceed 1 (vacuous); callers cap if they care.
inline double hoeffding_tail(std::int64_t n, double delta, bool two_sided) {
    if (n < 1) throw std::invalid_argument("hoeffding_tail: n must be >= 1");
    const double one = std::exp(-2.0 * delta * delta * double(n));
    return two_sided ? 2.0 * one : one;
}

// ---------------------------------------------------------------------------
// Sequential engines. Each consumes one Bernoulli draw per update and yields
// the current interval. CpSequence is anytime-valid via risk spending plus
// running intersection; RobbinsSequence is anytime-valid by construction;
// NormalSequence is the documented heuristic.
// ---------------------------------------------------------------------------

enum class EngineKind { CpSpending, Robbins, NormalApprox };

// Exact CP interval at per-side level rho_n/2 each step, intersected over all
// steps. Endpoint recomputation is event-driven: fixed-probe tail trackers
// detect, in O(1) per draw, the steps at which an endpoint strictly improves;
// only those steps pay for a bisection. Results are bit-identical to the
// direct per-step construction.
class CpSequence {
public:
    explicit CpSequence(SpendingSchedule schedule) : schedule_(std::move(schedule)) {}

    IntervalEstimate update(bool exceedance) {
        n_ += 1;
        if (exceedance) S_ += 1;
        const double rho = schedule_.level(n_);
        risk_spent_ = std::min(schedule_.epsilon(), risk_spent_ + rho);
        const double t = 0.5 * rho;
        if (up_tracker_) up_tracker_->update(exceedance);
        if (lo_tracker_) lo_tracker_->update(exceedance);

        step_upper(t);
        step_lower(t);
        if (lower_ > upper_) collapsed_ = true;

        return current();
    }

    IntervalEstimate current() const {
        IntervalEstimate iv;
        iv.n = n_;
        iv.risk_spent = risk_spent_;
        if (collapsed_) {
            const double phat = n_ > 0 ? double(S_) / double(n_) : 0.0;
            iv.lower = iv.upper = phat;
            iv.degenerate = true;
        } else {
            iv.lower = lower_;
            iv.upper = upper_;
        }
        return iv;
    }

    std::int64_t n() const { return n_; }
    std::int64_t successes() const { return S_; }
    bool collapsed() const { return collapsed_; }

private:
    void step_upper(double t) {
        if (S_ == n_) return;  // this step's upper endpoint is 1: no shrink
        if (S_ == 0) {
            const double pu = -std::expm1(std::log(t) / double(n_));
            if (pu < upper_) set_upper(pu);
            return;
        }
        if (upper_ >= 1.0) {
            set_upper(detail::cp_upper_endpoint(n_, S_, t));
            return;
        }
        // p_u(n) < upper_  iff  P(X <= S | upper_) < t
        if (up_tracker_ && up_tracker_->cdf() < t) {
            const double pu = detail::cp_upper_endpoint(n_, S_, t);
            if (pu < upper_) set_upper(pu);
            else up_tracker_->reset(upper_, n_, S_);  // false alarm from drift
        }
    }

    void step_lower(double t) {
        if (S_ == 0) return;  // this step's lower endpoint is 0
        if (S_ == n_) {
            const double pl = std::exp(std::log(t) / double(n_));
            if (pl > lower_) set_lower(pl);
            return;
        }
        if (lower_ <= 0.0) {
            set_lower(detail::cp_lower_endpoint(n_, S_, t));
            return;
        }
        // p_l(n) > lower_  iff  P(X >= S | lower_) < t
        if (lo_tracker_ && lo_tracker_->sf() < t) {
            const double pl = detail::cp_lower_endpoint(n_, S_, t);
            if (pl > lower_) set_lower(pl);
            else lo_tracker_->reset(lower_, n_, S_);
        }
    }

    void set_upper(double pu) {
        upper_ = pu;
        if (pu > 0.0 && pu < 1.0) {
            if (!up_tracker_) up_tracker_.emplace(pu);
            up_tracker_->reset(pu, n_, S_);
        }
    }
    void set_lower(double pl) {
        lower_ = pl;
        if (pl > 0.0 && pl < 1.0) {
            if (!lo_tracker_) lo_tracker_.emplace(pl);
            lo_tracker_->reset(pl, n_, S_);
        }
    }

    SpendingSchedule schedule_;
    std::int64_t n_ = 0;
    std::int64_t S_ = 0;
    double lower_ = 0.0;
    double upper_ = 1.0;
    double risk_spent_ = 0.0;
    bool collapsed_ = false;
    std::optional<BinomTailTracker> up_tracker_;
    std::optional<BinomTailTracker> lo_tracker_;
};

// Robbins likelihood-set interval recomputed at every n. The whole risk
// budget backs the sequence at once, so no spending schedule is involved.
class RobbinsSequence {
public:
    explicit RobbinsSequence(double epsilon) : epsilon_(epsilon) {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("RobbinsSequence: epsilon must be in (0,1)");
    }

    IntervalEstimate update(bool exceedance) {
        coeff_.update(exceedance);
        return current();
    }

    IntervalEstimate current() const {
        const std::int64_t n = coeff_.n();
        const std::int64_t S = coeff_.successes();
        const double phat = double(S) / double(n);
        const double target =
            std::log(epsilon_) - std::log(double(n + 1)) - coeff_.log_coeff();
        auto loglik = [&](double p) -> double {
            double v = 0.0;
            if (S > 0) v += (p <= 0.0) ? -std::numeric_limits<double>::infinity()
                                       : double(S) * std::log(p);
            if (S < n) v += (p >= 1.0) ? -std::numeric_limits<double>::infinity()
                                       : double(n - S) * std::log1p(-p);
            return v;
        };
        IntervalEstimate iv;
        iv.n = n;
        iv.risk_spent = epsilon_;
        if (S == 0 || loglik(0.0) > target) {
            iv.lower = 0.0;
        } else {
            double lo = 0.0, hi = phat;
            while (hi - lo > detail::kEndpointTol) {
                const double mid = 0.5 * (lo + hi);
                if (loglik(mid) > target) hi = mid; else lo = mid;
            }
            iv.lower = 0.5 * (lo + hi);
        }
        if (S == n || loglik(1.0) > target) {
            iv.upper = 1.0;
        } else {
            double lo = phat, hi = 1.0;
            while (hi - lo > detail::kEndpointTol) {
                const double mid = 0.5 * (lo + hi);
                if (loglik(mid) > target) lo = mid; else hi = mid;
            }
            iv.upper = 0.5 * (lo + hi);
        }
        return iv;
    }

    std::int64_t n() const { return coeff_.n(); }
    std::int64_t successes() const { return coeff_.successes(); }

private:
    double epsilon_;
    BinomCoeffTracker coeff_;
};

// Normal-approximation interval per step at two-sided level epsilon.
class NormalSequence {
public:
    explicit NormalSequence(double epsilon) : epsilon_(epsilon) {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("NormalSequence: epsilon must be in (0,1)");
    }
    IntervalEstimate update(bool exceedance) {
        n_ += 1;
        if (exceedance) S_ += 1;
        return normal_interval(BinomialCount(n_, S_), 0.5 * epsilon_);
    }
    std::int64_t n() const { return n_; }
    std::int64_t successes() const { return S_; }

private:
    double epsilon_;
    std::int64_t n_ = 0;
    std::int64_t S_ = 0;
};

// Engine-polymorphic wrapper used by the sampling loop.
class ConfSequence {
public:
    ConfSequence(EngineKind kind, double epsilon) : impl_(make(kind, epsilon)) {}

    IntervalEstimate update(bool exceedance) {
        return std::visit([&](auto& e) { return e.update(exceedance); }, impl_);
    }

private:
    using Impl = std::variant<CpSequence, RobbinsSequence, NormalSequence>;
    static Impl make(EngineKind kind, double epsilon) {
        switch (kind) {
            case EngineKind::CpSpending:
                return CpSequence(SpendingSchedule::quadratic(epsilon));
            case EngineKind::Robbins: return RobbinsSequence(epsilon);
            case EngineKind::NormalApprox: return NormalSequence(epsilon);
        }
        throw std::invalid_argument("ConfSequence: unknown engine kind");
    }
    Impl impl_;
};

} // namespace mcmt
