#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mcmt/binomial.hpp"
#include "mcmt/rng.hpp"

using namespace mcmt;

namespace {

// Plain reference sum, no early termination.
double cdf_reference(std::int64_t n, std::int64_t s, double p) {
    double sum = 0.0;
    for (std::int64_t k = 0; k <= s; ++k) sum += std::exp(binom_log_pmf(n, k, p));
    return std::min(1.0, sum);
}

} // namespace

TEST_CASE("binom_cdf matches direct summation") {
    const std::int64_t ns[] = {1, 2, 7, 10, 50, 200};
    const double ps[] = {0.01, 0.1, 0.37, 0.5, 0.9, 0.99};
    for (auto n : ns)
        for (auto p : ps)
            for (std::int64_t s = 0; s <= n; s += std::max<std::int64_t>(1, n / 7)) {
                const double want = cdf_reference(n, s, p);
                REQUIRE_THAT(binom_cdf(n, s, p),
                             Catch::Matchers::WithinAbs(want, 1e-12));
                REQUIRE_THAT(binom_sf(n, s, p),
                             Catch::Matchers::WithinAbs(1.0 - cdf_reference(n, s - 1, p), 1e-12));
            }
}

TEST_CASE("binom_cdf edge cases") {
    CHECK(binom_cdf(10, 10, 0.3) == 1.0);
    CHECK(binom_cdf(10, -1, 0.3) == 0.0);
    CHECK(binom_cdf(10, 3, 0.0) == 1.0);
    CHECK(binom_cdf(10, 3, 1.0) == 0.0);
    CHECK(binom_sf(10, 0, 0.3) == 1.0);
    CHECK(binom_sf(10, 11, 0.3) == 0.0);
    CHECK_THAT(binom_cdf(1000000, 499000, 0.5), Catch::Matchers::WithinAbs(0.02275, 5e-4));
}

TEST_CASE("tail tracker stays in lockstep with exact sums") {
    RngStream rng(StreamSeed{42, 0, 0});
    for (double true_p : {0.05, 0.4, 0.9}) {
        for (double probe : {0.02, 0.3, 0.55, 0.97}) {
            BinomTailTracker tracker(probe);
            std::int64_t n = 0, s = 0;
            for (int step = 0; step < 3000; ++step) {
                const bool draw = rng.next_bernoulli(true_p);
                tracker.update(draw);
                n += 1;
                if (draw) s += 1;
                if (step % 251 == 0) {
                    const double cdf = binom_cdf(n, s, probe);
                    const double sf = binom_sf(n, s, probe);
                    REQUIRE_THAT(tracker.cdf(), Catch::Matchers::WithinAbs(cdf, 1e-9));
                    REQUIRE_THAT(tracker.sf(), Catch::Matchers::WithinAbs(sf, 1e-9));
                    REQUIRE_THAT(tracker.pmf(),
                                 Catch::Matchers::WithinAbs(
                                     std::exp(binom_log_pmf(n, s, probe)), 1e-9));
                }
            }
        }
    }
}

TEST_CASE("coefficient tracker matches lgamma") {
    RngStream rng(StreamSeed{7, 1, 2});
    BinomCoeffTracker coeff;
    std::int64_t n = 0, s = 0;
    for (int step = 0; step < 5000; ++step) {
        const bool draw = rng.next_bernoulli(0.23);
        coeff.update(draw);
        n += 1;
        if (draw) s += 1;
        if (step % 509 == 0)
            REQUIRE_THAT(coeff.log_coeff(),
                         Catch::Matchers::WithinAbs(log_binom_coeff(n, s), 1e-8));
    }
    CHECK(coeff.n() == n);
    CHECK(coeff.successes() == s);
}
