// audits.hpp — runnable verification suites: interval length bounds, anytime
// coverage, containment classification, and the partial-decision oracle.
// Shared by the CLI audit subcommand and the acceptance tests.
#pragma once

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "mcmt/analysis.hpp"
#include "mcmt/confseq.hpp"
#include "mcmt/montecarlo.hpp"
#include "mcmt/partition.hpp"
#include "mcmt/procedures.hpp"
#include "mcmt/rng.hpp"

namespace mcmt {

struct AuditResult {
    std::string name;
    bool pass = true;
    std::vector<std::string> violations;
    std::vector<std::string> notes;

    void fail(std::string what) {
        pass = false;
        if (violations.size() < 50) violations.push_back(std::move(what));
    }
};

inline const std::vector<std::int64_t>& audit_grid() {
    static const std::vector<std::int64_t> grid = {10, 31, 100, 316, 1000, 3162, 10000};
    return grid;
}

// Exact CP length against 2 (2n)^{-1/2} (-log rho)^{1/2}, every S on the
// grid, per-tail level rho.
inline AuditResult audit_cp_length() {
    AuditResult res;
    res.name = "cp-length-bound";
    std::size_t checked = 0;
    for (const auto n : audit_grid()) {
        for (const double rho : {0.05, 0.01, 1e-4}) {
            const double bound = cp_length_bound(n, rho);
            for (std::int64_t S = 0; S <= n; ++S) {
                const auto iv = cp_exact_interval(BinomialCount(n, S), rho);
                checked += 1;
                if (iv.length() > bound) {
                    std::ostringstream os;
                    os << "n=" << n << " S=" << S << " rho=" << rho
                       << " length=" << iv.length() << " bound=" << bound;
                    res.fail(os.str());
                }
            }
        }
    }
    res.notes.push_back("checked " + std::to_string(checked) + " intervals");
    return res;
}

// Robbins interval length against n^{-1/2} {log(4 n log n)}^{1/2} with S
// drawn from Binomial(n, p). Reports the smallest grid n from which every
// tested draw complies, per p. Violations only count for n >= 1000.
inline AuditResult audit_robbins_length(double epsilon, std::uint64_t seed,
                                        int draws_per_cell = 30) {
    AuditResult res;
    res.name = "robbins-length-bound";
    for (const double p : {0.01, 0.1, 0.5}) {
        std::int64_t n0 = -1;  // smallest grid n with compliance from there on
        for (std::size_t gi = 0; gi < audit_grid().size(); ++gi) {
            const auto n = audit_grid()[gi];
            if (n < 3) continue;
            const double bound = robbins_length_bound(n);
            RngStream rng(StreamSeed{seed, std::uint64_t(gi), std::uint64_t(p * 1e6)});
            bool cell_ok = true;
            for (int d = 0; d < draws_per_cell; ++d) {
                std::int64_t S = 0;
                for (std::int64_t i = 0; i < n; ++i)
                    if (rng.next_bernoulli(p)) S += 1;
                const auto iv = robbins_interval(BinomialCount(n, S), epsilon);
                if (iv.length() > bound) {
                    cell_ok = false;
                    if (n >= 1000) {
                        std::ostringstream os;
                        os << "p=" << p << " n=" << n << " S=" << S
                           << " length=" << iv.length() << " bound=" << bound;
                        res.fail(os.str());
                    }
                }
            }
            if (!cell_ok) n0 = -1;
            else if (n0 < 0) n0 = n;
        }
        std::ostringstream os;
        os << "p=" << p << ": smallest compliant grid n0 = ";
        if (n0 < 0) os << "none up to " << audit_grid().back();
        else os << n0;
        res.notes.push_back(os.str());
    }
    return res;
}

struct CoverageCell {
    EngineKind engine;
    double true_p = 0.0;
    std::size_t misses = 0;
    std::size_t streams = 0;
    double fraction = 0.0;
    double limit = 0.0;
};

namespace detail {

// Whether the CP interval at (n, S, per-tail level t) excludes p. The upper
// endpoint solves P(X <= S | q) = t with the cdf decreasing in q, so
// p > p_u iff P(X <= S | p) < t; mirrored for the lower endpoint.
inline bool cp_step_excludes(std::int64_t n, std::int64_t S, double t, double p) {
    if (S < n && binom_cdf(n, S, p) < t) return true;
    if (S > 0 && binom_sf(n, S, p) < t) return true;
    return false;
}

} // namespace detail

// Ever-miscoverage of the CP-with-spending and Robbins sequences: fraction of
// streams whose running interval ever excludes the true p within the horizon.
// Tracker hits are confirmed with exact tail sums before they count.
inline std::vector<CoverageCell> coverage_misses(double epsilon, std::int64_t horizon,
                                                 std::size_t streams,
                                                 const std::vector<double>& true_ps,
                                                 std::uint64_t seed, unsigned workers = 1) {
    std::vector<CoverageCell> cells;
    for (const auto engine : {EngineKind::CpSpending, EngineKind::Robbins})
        for (const double p : true_ps)
            cells.push_back(CoverageCell{engine, p, 0, streams, 0.0, 0.0});

    mcmt::detail::parallel_for(cells.size(), workers, [&](std::size_t ci) {
        auto& cell = cells[ci];
        const auto sched = SpendingSchedule::quadratic(epsilon);
        const double logp = std::log(cell.true_p);
        const double logq = std::log1p(-cell.true_p);
        const double logeps = std::log(epsilon);
        for (std::size_t s = 0; s < streams; ++s) {
            BernoulliStream stream(cell.true_p,
                                   StreamSeed{seed + (cell.engine == EngineKind::Robbins),
                                              std::uint64_t(cell.true_p * 1e9), s});
            bool missed = false;
            if (cell.engine == EngineKind::CpSpending) {
                BinomTailTracker tracker(cell.true_p);
                std::int64_t n = 0, S = 0;
                for (; n < horizon && !missed;) {
                    const bool x = stream.next();
                    tracker.update(x);
                    n += 1;
                    if (x) S += 1;
                    const double t = 0.5 * sched.level(n);
                    if ((S < n && tracker.cdf() < t) || (S > 0 && tracker.sf() < t))
                        missed = detail::cp_step_excludes(n, S, t, cell.true_p);
                }
            } else {
                BinomCoeffTracker coeff;
                for (std::int64_t n = 1; n <= horizon && !missed; ++n) {
                    coeff.update(stream.next());
                    const std::int64_t S = coeff.successes();
                    const double logv = std::log(double(n + 1)) + coeff.log_coeff()
                                      + double(S) * logp + double(n - S) * logq;
                    if (logv <= logeps) {
                        const double exact = std::log(double(n + 1)) + log_binom_coeff(n, S)
                                           + double(S) * logp + double(n - S) * logq;
                        missed = exact <= logeps;
                    }
                }
            }
            if (missed) cell.misses += 1;
        }
        cell.fraction = double(cell.misses) / double(cell.streams);
        cell.limit = epsilon
                   + 3.0 * std::sqrt(epsilon * (1.0 - epsilon) / double(cell.streams));
    });
    return cells;
}

inline AuditResult audit_coverage(double epsilon, std::int64_t horizon, std::size_t streams,
                                  const std::vector<double>& true_ps, std::uint64_t seed,
                                  unsigned workers = 1) {
    AuditResult res;
    res.name = "anytime-coverage";
    for (const auto& cell : coverage_misses(epsilon, horizon, streams, true_ps, seed, workers)) {
        std::ostringstream os;
        os << (cell.engine == EngineKind::CpSpending ? "cp" : "robbins")
           << " p=" << cell.true_p << " ever-miss=" << cell.fraction
           << " limit=" << cell.limit;
        res.notes.push_back(os.str());
        if (cell.fraction > cell.limit) res.fail(os.str());
    }
    return res;
}

// Containment classification on randomized (thresholds, p, phat, width)
// instances satisfying |phat - p| < D/2 and width < D/2.
inline AuditResult audit_containment(std::size_t instances, std::uint64_t seed) {
    AuditResult res;
    res.name = "containment-classification";
    RngStream rng(StreamSeed{seed, 0, 0});
    std::size_t tested = 0;
    while (tested < instances) {
        const std::size_t m = 1 + std::size_t(rng.next_double() * 4);
        std::vector<double> thr(m);
        for (auto& t : thr) t = 0.02 + 0.96 * rng.next_double();
        std::sort(thr.begin(), thr.end());
        bool distinct = true;
        for (std::size_t i = 1; i < m; ++i)
            if (thr[i] - thr[i - 1] < 1e-6) distinct = false;
        if (!distinct) continue;
        const ThresholdPartition part(thr);

        const double p = rng.next_double();
        const double D = part.min_boundary_distance(p);
        if (D <= 1e-12) continue;
        const double phat = p + (rng.next_double() - 0.5) * D * 0.999;
        const double width = rng.next_double() * 0.499 * D;
        double lo = phat - rng.next_double() * width;
        lo = std::max(0.0, std::min(lo, 1.0 - width));
        IntervalEstimate iv;
        iv.lower = lo;
        iv.upper = lo + width;
        const auto cls = classify(iv, part);
        tested += 1;
        if (!cls.is_decided || cls.cell != part.cell_of(p)) {
            std::ostringstream os;
            os << "p=" << p << " phat=" << phat << " interval=[" << iv.lower << ","
               << iv.upper << "] D=" << D;
            res.fail(os.str());
        }
    }
    res.notes.push_back("checked " + std::to_string(tested) + " instances");
    return res;
}

// partial_decisions vs the exhaustive oracle: all knowledge vectors for
// m in {2,3}, random instances for m in {4,5}, both cell-bound semantics.
inline AuditResult audit_partial_decisions(std::size_t random_instances, std::uint64_t seed) {
    AuditResult res;
    res.name = "partial-decision-oracle";
    const std::array<ProcedureKind, 3> kinds = {ProcedureKind::Bonferroni,
                                                ProcedureKind::BenjaminiHochberg,
                                                ProcedureKind::Holm};
    std::size_t checked = 0;

    for (const auto kind : kinds) {
        for (std::size_t m : {std::size_t(2), std::size_t(3)}) {
            const ProcedureSpec spec{kind, 0.1, m};
            const auto part = partition_for(spec);
            const std::size_t choices = part.cell_count() + 1;
            std::vector<std::size_t> pick(m, 0);
            while (true) {
                KnowledgeVector k(m);
                for (std::size_t i = 0; i < m; ++i)
                    k[i] = pick[i] < part.cell_count()
                               ? Classification::decided(pick[i])
                               : Classification::undecided();
                for (const auto bound : {CellBound::Closed, CellBound::Interior}) {
                    checked += 1;
                    if (!(partial_decisions(spec, k, part, bound)
                          == brute_force_decisions(spec, k, part, bound))) {
                        std::ostringstream os;
                        os << "exhaustive disagreement kind=" << int(kind) << " m=" << m;
                        res.fail(os.str());
                    }
                }
                std::size_t pos = 0;
                while (pos < m && ++pick[pos] == choices) pick[pos++] = 0;
                if (pos == m) break;
            }
        }
    }

    RngStream rng(StreamSeed{seed, 1, 0});
    for (std::size_t trial = 0; trial < random_instances; ++trial) {
        const std::size_t m = 4 + std::size_t(rng.next_double() * 2);
        const auto kind = kinds[std::size_t(rng.next_double() * 3)];
        const ProcedureSpec spec{kind, 0.1, m};
        const auto part = partition_for(spec);
        KnowledgeVector k(m);
        for (auto& c : k) {
            const double u = rng.next_double();
            c = u < 0.3 ? Classification::undecided()
                        : Classification::decided(
                              std::size_t(rng.next_double() * double(part.cell_count())));
        }
        const auto bound = rng.next_double() < 0.5 ? CellBound::Closed : CellBound::Interior;
        checked += 1;
        if (!(partial_decisions(spec, k, part, bound)
              == brute_force_decisions(spec, k, part, bound))) {
            std::ostringstream os;
            os << "random disagreement kind=" << int(kind) << " m=" << m << " trial=" << trial;
            res.fail(os.str());
        }
    }
    res.notes.push_back("checked " + std::to_string(checked) + " instances");
    return res;
}

} // namespace mcmt
