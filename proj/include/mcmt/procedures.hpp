// procedures.hpp — Bonferroni, Benjamini-Hochberg step-up and Holm step-down
// evaluation, plus exact partial-decision computation when p-values are known
// only up to partition cells.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mcmt/partition.hpp"

namespace mcmt {

enum class ProcedureKind { Bonferroni, BenjaminiHochberg, Holm };

struct ProcedureSpec {
    ProcedureKind kind = ProcedureKind::BenjaminiHochberg;
    double alpha = 0.1;   // overall level in (0,1)
    std::size_t m = 1;    // hypothesis count

    ProcedureSpec(ProcedureKind k, double a, std::size_t count)
        : kind(k), alpha(a), m(count) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("ProcedureSpec: alpha must be in (0,1)");
        if (m < 1) throw std::invalid_argument("ProcedureSpec: m must be >= 1");
    }

    // Threshold compared against the k-th smallest p-value, k in 1..m.
    double rank_threshold(std::size_t k) const {
        switch (kind) {
            case ProcedureKind::Bonferroni: return alpha / double(m);
            case ProcedureKind::BenjaminiHochberg: return double(k) * alpha / double(m);
            case ProcedureKind::Holm: return alpha / double(m - k + 1);
        }
        return 0.0;
    }
};

// Ascending, deduplicated testing thresholds (Bonferroni collapses to one).
inline std::vector<double> procedure_thresholds(const ProcedureSpec& spec) {
    std::vector<double> out;
    out.reserve(spec.m);
    for (std::size_t k = 1; k <= spec.m; ++k) {
        const double t = spec.rank_threshold(k);
        if (out.empty() || t > out.back()) out.push_back(t);
    }
    return out;
}

inline ThresholdPartition partition_for(const ProcedureSpec& spec) {
    return ThresholdPartition(procedure_thresholds(spec));
}

// Exact rejection set for fully known p-values.
inline std::vector<bool> evaluate_exact(const ProcedureSpec& spec,
                                        const std::vector<double>& pvalues) {
    if (pvalues.size() != spec.m)
        throw std::invalid_argument("evaluate_exact: p-value count != spec.m");
    for (double p : pvalues)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("evaluate_exact: p-values must lie in [0,1]");

    const std::size_t m = spec.m;
    std::vector<bool> reject(m, false);
    if (spec.kind == ProcedureKind::Bonferroni) {
        const double t = spec.rank_threshold(1);
        for (std::size_t i = 0; i < m; ++i) reject[i] = pvalues[i] <= t;
        return reject;
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

    if (spec.kind == ProcedureKind::BenjaminiHochberg) {
        std::size_t k_star = 0;  // max k with p_(k) <= k alpha / m
        for (std::size_t k = 1; k <= m; ++k)
            if (pvalues[order[k - 1]] <= spec.rank_threshold(k)) k_star = k;
        if (k_star == 0) return reject;
        const double cut = spec.rank_threshold(k_star);
        for (std::size_t i = 0; i < m; ++i) reject[i] = pvalues[i] <= cut;
        return reject;
    }

    // Holm step-down: reject along the sorted order until the first failure.
    for (std::size_t k = 1; k <= m; ++k) {
        if (pvalues[order[k - 1]] <= spec.rank_threshold(k)) reject[order[k - 1]] = true;
        else break;
    }
    return reject;
}

enum class DecisionStatus { ForcedReject, ForcedAccept, Undecided };

struct DecisionState {
    std::vector<DecisionStatus> status;

    std::size_t count(DecisionStatus s) const {
        return std::size_t(std::count(status.begin(), status.end(), s));
    }
    std::size_t forced_reject_count() const { return count(DecisionStatus::ForcedReject); }
    std::size_t forced_accept_count() const { return count(DecisionStatus::ForcedAccept); }
    std::size_t undecided_count() const { return count(DecisionStatus::Undecided); }
    bool operator==(const DecisionState&) const = default;
};

using KnowledgeVector = std::vector<Classification>;

// Whether a decided cell's closed left endpoint counts as an attainable
// completion. Closed is the exact set semantics for raw cell knowledge: a
// p-value at exactly the left threshold compares like the cell below it.
// Interior applies when the knowledge source guarantees p lies strictly
// inside its cell (continuous draws), which resolves every comparison.
enum class CellBound { Closed, Interior };

namespace detail {

// Symbolic completions are comparison classes indexed by cell: class c means
// "p strictly between threshold c and threshold c+1" (thresholds 0 and 1
// padded). A p-value at exactly threshold j compares identically to class
// j-1 under every "p <= alpha_k" test, so classes cover all completions.
// class c satisfies p <= alpha_k (1-based threshold index k) iff c < k.

// Map each procedure rank to its (1-based) index in the deduplicated
// partition threshold list; also validates the partition matches the spec.
inline std::vector<std::size_t> rank_to_partition_index(const ProcedureSpec& spec,
                                                        const ThresholdPartition& partition) {
    const auto expect = procedure_thresholds(spec);
    if (partition.thresholds() != expect)
        throw std::invalid_argument(
            "partial_decisions: partition thresholds do not match the procedure");
    std::vector<std::size_t> map(spec.m + 1, 0);
    for (std::size_t k = 1; k <= spec.m; ++k) {
        const double t = spec.rank_threshold(k);
        const auto& thr = partition.thresholds();
        const auto it = std::lower_bound(thr.begin(), thr.end(), t);
        if (it == thr.end() || *it != t)
            throw std::invalid_argument("partial_decisions: rank threshold missing from partition");
        map[k] = std::size_t(it - thr.begin()) + 1;
    }
    return map;
}

// Rejection set for symbolic cell classes. Mirrors evaluate_exact.
inline std::vector<bool> evaluate_cells(const ProcedureSpec& spec,
                                        const std::vector<std::size_t>& cls,
                                        const std::vector<std::size_t>& rank_idx) {
    const std::size_t m = spec.m;
    std::vector<bool> reject(m, false);
    auto leq = [&](std::size_t c, std::size_t k) { return c < rank_idx[k]; };

    if (spec.kind == ProcedureKind::Bonferroni) {
        for (std::size_t i = 0; i < m; ++i) reject[i] = leq(cls[i], 1);
        return reject;
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cls[a] < cls[b]; });

    if (spec.kind == ProcedureKind::BenjaminiHochberg) {
        std::size_t k_star = 0;
        for (std::size_t k = 1; k <= m; ++k)
            if (leq(cls[order[k - 1]], k)) k_star = k;
        if (k_star == 0) return reject;
        for (std::size_t i = 0; i < m; ++i) reject[i] = leq(cls[i], k_star);
        return reject;
    }

    for (std::size_t k = 1; k <= m; ++k) {
        if (leq(cls[order[k - 1]], k)) reject[order[k - 1]] = true;
        else break;
    }
    return reject;
}

struct CompletionRange {
    std::size_t lo = 0;  // smallest comparison class consistent with knowledge
    std::size_t hi = 0;  // largest
};

inline CompletionRange completion_range(const Classification& c,
                                        std::size_t top_cell, CellBound bound) {
    if (!c.is_decided) return {0, top_cell};
    if (c.cell > top_cell)
        throw std::invalid_argument("partial_decisions: cell index out of range");
    if (bound == CellBound::Interior || c.cell == 0) return {c.cell, c.cell};
    // The closed left endpoint at threshold j compares like class j-1.
    return {c.cell - 1, c.cell};
}

} // namespace detail

// Decisions forced by interval knowledge: a hypothesis is ForcedReject when
// every completion of the unknowns rejects it and ForcedAccept when none
// does. Since each rejection indicator is componentwise antitone in the
// p-value vector, the two corner completions (all p-values at their smallest
// compatible comparison class / all at their largest) decide both questions.
inline DecisionState partial_decisions(const ProcedureSpec& spec,
                                       const KnowledgeVector& knowledge,
                                       const ThresholdPartition& partition,
                                       CellBound bound = CellBound::Closed) {
    if (knowledge.size() != spec.m)
        throw std::invalid_argument("partial_decisions: knowledge size != spec.m");
    const auto rank_idx = detail::rank_to_partition_index(spec, partition);
    const std::size_t top_cell = partition.threshold_count();

    std::vector<std::size_t> lo_corner(spec.m), hi_corner(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
        const auto range = detail::completion_range(knowledge[i], top_cell, bound);
        lo_corner[i] = range.lo;
        hi_corner[i] = range.hi;
    }
    const auto reject_at_lo = detail::evaluate_cells(spec, lo_corner, rank_idx);
    const auto reject_at_hi = detail::evaluate_cells(spec, hi_corner, rank_idx);

    DecisionState out;
    out.status.resize(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
        if (reject_at_hi[i]) out.status[i] = DecisionStatus::ForcedReject;
        else if (!reject_at_lo[i]) out.status[i] = DecisionStatus::ForcedAccept;
        else out.status[i] = DecisionStatus::Undecided;
    }
    return out;
}

// Exhaustive oracle: enumerates every assignment of hypotheses to compatible
// comparison classes and aggregates the rejection indicators. Exponential;
// guarded to small m.
inline DecisionState brute_force_decisions(const ProcedureSpec& spec,
                                           const KnowledgeVector& knowledge,
                                           const ThresholdPartition& partition,
                                           CellBound bound = CellBound::Closed) {
    if (knowledge.size() != spec.m)
        throw std::invalid_argument("brute_force_decisions: knowledge size != spec.m");
    if (spec.m > 12)
        throw std::invalid_argument("brute_force_decisions: m too large for enumeration");
    const auto rank_idx = detail::rank_to_partition_index(spec, partition);
    const std::size_t top_cell = partition.threshold_count();

    std::vector<std::vector<std::size_t>> candidates(spec.m);
    double total = 1.0;
    for (std::size_t i = 0; i < spec.m; ++i) {
        const auto range = detail::completion_range(knowledge[i], top_cell, bound);
        for (std::size_t c = range.lo; c <= range.hi; ++c) candidates[i].push_back(c);
        total *= double(candidates[i].size());
    }
    if (total > double(1 << 24))
        throw std::invalid_argument("brute_force_decisions: enumeration too large");

    std::vector<bool> always(spec.m, true), never(spec.m, true);
    std::vector<std::size_t> pick(spec.m, 0);
    std::vector<std::size_t> cls(spec.m);
    while (true) {
        for (std::size_t i = 0; i < spec.m; ++i) cls[i] = candidates[i][pick[i]];
        const auto rej = detail::evaluate_cells(spec, cls, rank_idx);
        for (std::size_t i = 0; i < spec.m; ++i) {
            if (rej[i]) never[i] = false;
            else always[i] = false;
        }
        std::size_t pos = 0;
        while (pos < spec.m && ++pick[pos] == candidates[pos].size()) pick[pos++] = 0;
        if (pos == spec.m) break;
    }

    DecisionState out;
    out.status.resize(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
        if (always[i]) out.status[i] = DecisionStatus::ForcedReject;
        else if (never[i]) out.status[i] = DecisionStatus::ForcedAccept;
        else out.status[i] = DecisionStatus::Undecided;
    }
    return out;
}

// Classifies true p-values into cells, masks the `leave_undecided` hypotheses
// with the smallest boundary distance (ties to the lowest index), and counts
// the decisions that remain unforced. Defaults to Interior completions: the
// knowledge here comes from continuous draws, which lie strictly inside their
// cells, so with zero masked hypotheses every decision is forced.
inline std::size_t undecided_count_experiment(const ProcedureSpec& spec,
                                              const std::vector<double>& pvalues,
                                              std::size_t leave_undecided,
                                              CellBound bound = CellBound::Interior) {
    if (pvalues.size() != spec.m)
        throw std::invalid_argument("undecided_count_experiment: p-value count != spec.m");
    if (leave_undecided > spec.m)
        throw std::invalid_argument("undecided_count_experiment: leave_undecided > m");
    const auto partition = partition_for(spec);

    std::vector<std::size_t> order(spec.m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> dist(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) dist[i] = partition.min_boundary_distance(pvalues[i]);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

    KnowledgeVector knowledge(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i)
        knowledge[i] = Classification::decided(partition.cell_of(pvalues[i]));
    for (std::size_t r = 0; r < leave_undecided; ++r)
        knowledge[order[r]] = Classification::undecided();

    return partial_decisions(spec, knowledge, partition, bound).undecided_count();
}

} // namespace mcmt
