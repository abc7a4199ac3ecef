// montecarlo.hpp — p-value priors, seeded exceedance streams, and the
// sequential per-hypothesis sampling loop with stopping-time measurement.
#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mcmt/confseq.hpp"
#include "mcmt/partition.hpp"
#include "mcmt/procedures.hpp"
#include "mcmt/rng.hpp"

namespace mcmt {

enum class PriorKind { Uniform01, UniformBetaMixture, StraddleTop, PointMass };

// Distribution of true p-values across hypotheses. StraddleTop places every
// coordinate except the last strictly inside the second-highest partition
// cell and lets the last straddle the top threshold, so the largest value is
// always the straddling one.
struct PriorSpec {
    PriorKind kind = PriorKind::Uniform01;
    double pi0 = 0.0;      // mixture: weight of the uniform component
    double beta_a = 0.0;   // mixture: beta shape a
    double beta_b = 0.0;   // mixture: beta shape b
    double point = 0.0;    // point mass location
    double band_lo = 0.0;  // straddle: second-highest threshold
    double band_hi = 0.0;  // straddle: top threshold
    double eta = 0.0;      // straddle: half-width around the top threshold

    static PriorSpec uniform() { return PriorSpec{}; }

    static PriorSpec mixture(double pi0, double a, double b) {
        if (!(pi0 >= 0.0 && pi0 <= 1.0))
            throw std::invalid_argument("PriorSpec: pi0 must lie in [0,1]");
        if (!(a > 0.0 && b > 0.0))
            throw std::invalid_argument("PriorSpec: beta shapes must be positive");
        PriorSpec s;
        s.kind = PriorKind::UniformBetaMixture;
        s.pi0 = pi0;
        s.beta_a = a;
        s.beta_b = b;
        return s;
    }

    static PriorSpec point_mass(double p) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("PriorSpec: point mass must lie in [0,1]");
        PriorSpec s;
        s.kind = PriorKind::PointMass;
        s.point = p;
        return s;
    }

    static PriorSpec straddle_top(double second_highest, double top, double eta) {
        if (!(second_highest > 0.0 && top < 1.0 && second_highest < top))
            throw std::invalid_argument("PriorSpec: need 0 < second_highest < top < 1");
        if (!(eta > 0.0 && eta < (top - second_highest) / 4.0))
            throw std::invalid_argument("PriorSpec: eta must lie in (0, (top - second_highest)/4)");
        PriorSpec s;
        s.kind = PriorKind::StraddleTop;
        s.band_lo = second_highest;
        s.band_hi = top;
        s.eta = eta;
        return s;
    }

    static PriorSpec straddle_top(const ThresholdPartition& partition, double eta) {
        const auto& thr = partition.thresholds();
        if (thr.size() < 2)
            throw std::invalid_argument("PriorSpec: straddle prior needs >= 2 thresholds");
        return straddle_top(thr[thr.size() - 2], thr.back(), eta);
    }
};

inline std::vector<double> sample_prior(const PriorSpec& spec, std::size_t m,
                                        const StreamSeed& seed) {
    RngStream rng(seed);
    std::vector<double> p(m);
    switch (spec.kind) {
        case PriorKind::Uniform01:
            for (auto& v : p) v = rng.next_double();
            break;
        case PriorKind::UniformBetaMixture:
            for (auto& v : p)
                v = rng.next_double() < spec.pi0 ? rng.next_double()
                                                 : rng.next_beta(spec.beta_a, spec.beta_b);
            break;
        case PriorKind::PointMass:
            for (auto& v : p) v = spec.point;
            break;
        case PriorKind::StraddleTop: {
            if (m < 1) break;
            for (std::size_t i = 0; i + 1 < m; ++i)
                p[i] = rng.next_uniform(spec.band_lo + 2.0 * spec.eta,
                                        spec.band_hi - 2.0 * spec.eta);
            p[m - 1] = rng.next_uniform(spec.band_hi - spec.eta, spec.band_hi + spec.eta);
            break;
        }
    }
    return p;
}

// Deterministic i.i.d. Bernoulli(p) exceedance indicators.
class BernoulliStream {
public:
    BernoulliStream(double p, const StreamSeed& seed) : p_(p), rng_(seed) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("BernoulliStream: p must lie in [0,1]");
    }
    bool next() { return rng_.next_bernoulli(p_); }

private:
    double p_;
    RngStream rng_;
};

struct StoppingRecord {
    std::int64_t tau_decided = 0;  // first n at which the interval classifies Decided
    std::int64_t tau_oracle = 0;   // first n with |phat - p| < D/2 and g(n) < D/2
    bool truncated = false;        // a time hit the cap without firing
    double boundary_distance = 0.0;
    bool boundary_degenerate = false;  // true_p sat exactly on a cell boundary
};

struct HypothesisState {
    double true_p = 0.0;
    std::int64_t n = 0;
    std::int64_t S = 0;
    IntervalEstimate interval;
    Classification classification;
};

struct HypothesisRun {
    StoppingRecord stopping;
    HypothesisState state;
};

// Draws sequentially, feeding the chosen confidence sequence, until both the
// operational stopping time (first Decided classification) and the oracle
// stopping time (needs the simulator's knowledge of true_p) have fired, or
// the cap is reached. Unfired times are reported as the cap with the
// truncation flag set.
inline HypothesisRun run_hypothesis(double true_p, EngineKind engine,
                                    const ThresholdPartition& partition, double epsilon,
                                    std::int64_t cap, const StreamSeed& seed) {
    if (cap < 1) throw std::invalid_argument("run_hypothesis: cap must be >= 1");
    if (!(true_p >= 0.0 && true_p <= 1.0))
        throw std::invalid_argument("run_hypothesis: true_p must lie in [0,1]");

    HypothesisRun run;
    run.state.true_p = true_p;
    const double D = partition.min_boundary_distance(true_p);
    run.stopping.boundary_distance = D;
    if (D <= 0.0) {
        run.stopping.boundary_degenerate = true;
        run.stopping.truncated = true;
        run.stopping.tau_decided = cap;
        run.stopping.tau_oracle = cap;
        run.state.classification = Classification::undecided();
        return run;
    }

    BernoulliStream stream(true_p, seed);
    ConfSequence sequence(engine, epsilon);
    const double half_d = 0.5 * D;
    std::int64_t n = 0, S = 0;
    std::int64_t tau_decided = 0, tau_oracle = 0;
    IntervalEstimate interval;
    Classification cls = Classification::undecided();

    while (n < cap && (tau_decided == 0 || tau_oracle == 0)) {
        const bool exceedance = stream.next();
        n += 1;
        if (exceedance) S += 1;
        interval = sequence.update(exceedance);
        if (tau_decided == 0) {
            cls = classify(interval, partition);
            if (cls.is_decided) tau_decided = n;
        }
        if (tau_oracle == 0) {
            const double phat = double(S) / double(n);
            if (std::fabs(phat - true_p) < half_d && interval.length() < half_d)
                tau_oracle = n;
        }
    }

    run.stopping.truncated = (tau_decided == 0 || tau_oracle == 0);
    run.stopping.tau_decided = tau_decided == 0 ? cap : tau_decided;
    run.stopping.tau_oracle = tau_oracle == 0 ? cap : tau_oracle;
    run.state.n = n;
    run.state.S = S;
    run.state.interval = interval;
    run.state.classification = tau_decided == 0 ? classify(interval, partition) : cls;
    return run;
}

struct RepetitionResult {
    std::vector<double> pvalues;
    std::vector<HypothesisRun> hypotheses;
    DecisionState decisions;
};

struct ExperimentResult {
    std::vector<RepetitionResult> repetitions;
};

namespace detail {

// Fan work items across a pool; results must be written to preassigned slots
// so the output is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const unsigned spawn = std::min<unsigned>(workers, unsigned(count));
    pool.reserve(spawn);
    for (unsigned w = 0; w < spawn; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
}

} // namespace detail

// The prior for repetition r draws from substream (master_seed, r, m); the
// hypotheses use substreams 0..m-1. Output is a pure function of the
// configuration and master seed, bit-identical for any worker count.
inline ExperimentResult run_experiment(const PriorSpec& prior, const ProcedureSpec& spec,
                                       EngineKind engine, double epsilon, std::int64_t cap,
                                       std::size_t repetitions, std::uint64_t master_seed,
                                       unsigned workers = 1,
                                       CellBound bound = CellBound::Closed) {
    const ThresholdPartition partition = partition_for(spec);
    ExperimentResult result;
    result.repetitions.resize(repetitions);

    detail::parallel_for(repetitions, workers, [&](std::size_t r) {
        RepetitionResult rep;
        rep.pvalues = sample_prior(prior, spec.m, StreamSeed{master_seed, r, spec.m});
        rep.hypotheses.reserve(spec.m);
        KnowledgeVector knowledge(spec.m);
        for (std::size_t h = 0; h < spec.m; ++h) {
            rep.hypotheses.push_back(run_hypothesis(rep.pvalues[h], engine, partition, epsilon,
                                                    cap, StreamSeed{master_seed, r, h}));
            knowledge[h] = rep.hypotheses.back().state.classification;
        }
        rep.decisions = partial_decisions(spec, knowledge, partition, bound);
        result.repetitions[r] = std::move(rep);
    });
    return result;
}

} // namespace mcmt
