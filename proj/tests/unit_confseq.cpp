#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mcmt/confseq.hpp"
#include "mcmt/rng.hpp"

using namespace mcmt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("cp_exact_interval endpoints") {
    // Frozen against an independent binomial-tail bisection oracle.
    const auto iv = cp_exact_interval(BinomialCount(10, 5), 0.025);
    CHECK_THAT(iv.lower, WithinAbs(0.18708602844739852, 1e-8));
    CHECK_THAT(iv.upper, WithinAbs(0.8129139715526015, 1e-8));

    CHECK(cp_exact_interval(BinomialCount(10, 10), 0.025).upper == 1.0);
    CHECK_THAT(cp_exact_interval(BinomialCount(10, 10), 0.025).lower,
               WithinAbs(0.6915028921812392, 1e-8));
    CHECK(cp_exact_interval(BinomialCount(10, 0), 0.025).lower == 0.0);

    CHECK_THROWS_AS(cp_exact_interval(BinomialCount(10, 5), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cp_exact_interval(BinomialCount(10, 5), 1.0), std::invalid_argument);
}

TEST_CASE("cp interval contains the point estimate") {
    RngStream rng(StreamSeed{11, 0, 0});
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t n = 1 + std::int64_t(rng.next_double() * 400);
        const std::int64_t S = std::int64_t(rng.next_double() * double(n + 1));
        const double t = 1e-4 + 0.45 * rng.next_double();
        const auto iv = cp_exact_interval(BinomialCount(n, S), t);
        const double phat = double(S) / double(n);
        REQUIRE(iv.lower <= phat);
        REQUIRE(iv.upper >= phat);
        REQUIRE(iv.length() <= cp_length_bound(n, t));
    }
}

TEST_CASE("spending schedule") {
    const auto sched = SpendingSchedule::quadratic(0.05);
    CHECK_THAT(spending_level(1, sched), WithinAbs(0.030396355092701337, 1e-12));
    CHECK_THAT(spending_level(2, sched), WithinAbs(spending_level(1, sched) / 4.0, 1e-15));
    double total = 0.0;
    for (std::int64_t n = 1; n <= 1000000; ++n) total += spending_level(n, sched);
    CHECK(total <= 0.05);
    // -log(rho_n) grows by exactly 2 log n
    const double c = -std::log(spending_level(1, sched));
    CHECK_THAT(-std::log(spending_level(1000, sched)), WithinAbs(c + 2.0 * std::log(1000.0), 1e-9));
}

namespace {

// Direct per-step construction of the running-intersection CP sequence.
struct ReferenceCpSequence {
    SpendingSchedule sched;
    std::int64_t n = 0, S = 0;
    double lower = 0.0, upper = 1.0, spent = 0.0;
    bool collapsed = false;

    explicit ReferenceCpSequence(double eps) : sched(SpendingSchedule::quadratic(eps)) {}

    IntervalEstimate update(bool x) {
        n += 1;
        if (x) S += 1;
        const double rho = sched.level(n);
        spent += rho;
        const auto step = cp_exact_interval(BinomialCount(n, S), 0.5 * rho);
        lower = std::max(lower, step.lower);
        upper = std::min(upper, step.upper);
        if (lower > upper) collapsed = true;
        IntervalEstimate iv;
        iv.n = n;
        iv.risk_spent = spent;
        if (collapsed) {
            iv.lower = iv.upper = double(S) / double(n);
            iv.degenerate = true;
        } else {
            iv.lower = lower;
            iv.upper = upper;
        }
        return iv;
    }
};

} // namespace

TEST_CASE("cp sequence first step and nesting") {
    CpSequence seq(SpendingSchedule::quadratic(0.05));
    const auto first = seq.update(true);
    CHECK_THAT(first.lower, WithinAbs(0.01519817754635067, 1e-9));  // tail rho_1/2
    CHECK(first.upper == 1.0);

    RngStream rng(StreamSeed{3, 2, 1});
    CpSequence seq2(SpendingSchedule::quadratic(0.05));
    IntervalEstimate prev = seq2.update(rng.next_bernoulli(0.3));
    for (int i = 0; i < 800; ++i) {
        const auto cur = seq2.update(rng.next_bernoulli(0.3));
        REQUIRE(cur.lower >= prev.lower - 1e-15);
        REQUIRE(cur.upper <= prev.upper + 1e-15);
        prev = cur;
    }
}

TEST_CASE("fast cp sequence matches the direct construction") {
    for (double p : {0.02, 0.3, 0.5, 0.97}) {
        RngStream rng(StreamSeed{99, std::uint64_t(p * 1000), 0});
        CpSequence fast(SpendingSchedule::quadratic(0.01));
        ReferenceCpSequence ref(0.01);
        for (int i = 0; i < 1200; ++i) {
            const bool x = rng.next_bernoulli(p);
            const auto a = fast.update(x);
            const auto b = ref.update(x);
            REQUIRE_THAT(a.lower, WithinAbs(b.lower, 5e-9));
            REQUIRE_THAT(a.upper, WithinAbs(b.upper, 5e-9));
            REQUIRE(a.degenerate == b.degenerate);
        }
    }
}

TEST_CASE("robbins interval closed forms at n=1") {
    const auto hit = robbins_interval(BinomialCount(1, 1), 0.5);
    CHECK_THAT(hit.lower, WithinAbs(0.25, 1e-9));
    CHECK(hit.upper == 1.0);
    const auto miss = robbins_interval(BinomialCount(1, 0), 0.5);
    CHECK(miss.lower == 0.0);
    CHECK_THAT(miss.upper, WithinAbs(0.75, 1e-9));
    CHECK_THROWS_AS(robbins_interval(BinomialCount(1, 0), 0.0), std::invalid_argument);
}

TEST_CASE("robbins interval length and containment") {
    const auto iv = robbins_interval(BinomialCount(1000, 100), 0.01);
    CHECK_THAT(iv.length(), WithinAbs(0.0774431914205228, 1e-8));
    CHECK(iv.length() <= robbins_length_bound(1000));
    CHECK(iv.contains(0.1));

    RngStream rng(StreamSeed{17, 0, 0});
    for (int trial = 0; trial < 200; ++trial) {
        const std::int64_t n = 1 + std::int64_t(rng.next_double() * 500);
        const std::int64_t S = std::int64_t(rng.next_double() * double(n + 1));
        const auto r = robbins_interval(BinomialCount(n, S), 0.05);
        REQUIRE(r.contains(double(S) / double(n)));
    }
}

TEST_CASE("normal interval") {
    const auto iv = normal_interval(BinomialCount(100, 50), 0.025);
    CHECK_THAT(iv.lower, WithinAbs(0.5 - 1.9599639845400545 * 0.05, 1e-9));
    CHECK_THAT(iv.upper, WithinAbs(0.5 + 1.9599639845400545 * 0.05, 1e-9));

    const auto wide = normal_interval(BinomialCount(100, 50), 0.025);
    const auto narrow = normal_interval(BinomialCount(400, 200), 0.025);
    CHECK_THAT(narrow.length(), WithinRel(wide.length() / 2.0, 1e-9));

    CHECK(normal_interval(BinomialCount(100, 0), 0.025).lower == 0.0);
    CHECK_THROWS_AS(normal_interval(BinomialCount(100, 50), 0.0), std::invalid_argument);
}

TEST_CASE("normal quantile against bisection oracle") {
    for (double t : {0.4, 0.1, 0.025, 0.01, 1e-4, 1e-8}) {
        double lo = -10.0, hi = 40.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (0.5 * std::erfc(mid / M_SQRT2) > t) lo = mid; else hi = mid;
        }
        REQUIRE_THAT(normal_upper_quantile(t), WithinAbs(0.5 * (lo + hi), 1e-9));
    }
}

TEST_CASE("analytic length bounds") {
    CHECK_THAT(cp_length_bound(2, std::exp(-1.0)), WithinAbs(1.0, 1e-12));
    CHECK_THAT(cp_length_bound(8, std::exp(-1.0)), WithinAbs(0.5, 1e-12));
    CHECK_THAT(cp_length_bound(10000, 0.01), WithinAbs(0.030348542587702927, 1e-12));

    CHECK_THAT(robbins_length_bound(3), WithinAbs(0.9271739278410674, 1e-12));
    CHECK_THAT(robbins_length_bound(1000000), WithinAbs(0.004222273893716533, 1e-12));
    CHECK_THROWS_AS(robbins_length_bound(2), std::invalid_argument);

    double prev = robbins_length_bound(3);
    for (std::int64_t n = 4; n <= 1000000; n += (n < 1000 ? 1 : n / 128)) {
        const double cur = robbins_length_bound(n);
        REQUIRE(cur < prev);
        prev = cur;
    }
}

TEST_CASE("length bounds are compatible with a length exponent of -0.4") {
    // bound(n) / n^gamma should fall toward zero along a geometric grid. The
    // Robbins ratio only turns monotone past n ~ 50, so start at 100.
    const double gamma = -0.4;
    double prev_cp = 1e300, prev_rb = 1e300, first_cp = 0.0, last_cp = 0.0;
    bool first = true;
    for (double nd = 100.0; nd <= 1e6; nd *= 1.5) {
        const auto n = std::int64_t(nd);
        const double cp = cp_length_bound(n, 0.01) / std::pow(double(n), gamma);
        const double rb = robbins_length_bound(n) / std::pow(double(n), gamma);
        REQUIRE(cp < prev_cp);
        REQUIRE(rb < prev_rb);
        prev_cp = cp;
        prev_rb = rb;
        if (first) { first_cp = cp; first = false; }
        last_cp = cp;
    }
    CHECK(last_cp < 0.5 * first_cp);
}

TEST_CASE("hoeffding tail") {
    CHECK(hoeffding_tail(123, 0.0, true) == 2.0);
    CHECK_THAT(hoeffding_tail(100, 0.1, false), WithinAbs(std::exp(-2.0), 1e-12));
    CHECK_THAT(hoeffding_tail(400, 0.05, true),
               WithinAbs(hoeffding_tail(100, 0.1, true), 1e-15));
}
