// partition.hpp — the threshold partition of [0,1] into half-open cells (the
// last cell closed), boundary distances, and classification of intervals
// into cells.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mcmt/confseq.hpp"

namespace mcmt {

// Cells for thresholds a_1 < ... < a_m:
//   [0, a_1), [a_1, a_2), ..., [a_{m-1}, a_m), [a_m, 1]
// Indices 0..m; cell boundaries are {0, 1} plus the thresholds.
class ThresholdPartition {
public:
    explicit ThresholdPartition(std::vector<double> thresholds)
        : thresholds_(std::move(thresholds)) {
        if (thresholds_.empty())
            throw std::invalid_argument("ThresholdPartition: need at least one threshold");
        double prev = 0.0;
        for (double a : thresholds_) {
            if (!(a > prev))
                throw std::invalid_argument(
                    "ThresholdPartition: thresholds must be strictly ascending, in (0,1), "
                    "with duplicates removed by the caller");
            prev = a;
        }
        if (!(prev < 1.0))
            throw std::invalid_argument("ThresholdPartition: thresholds must be below 1");
    }

    const std::vector<double>& thresholds() const { return thresholds_; }
    std::size_t threshold_count() const { return thresholds_.size(); }
    std::size_t cell_count() const { return thresholds_.size() + 1; }

    double cell_left(std::size_t j) const {
        check_cell(j);
        return j == 0 ? 0.0 : thresholds_[j - 1];
    }
    double cell_right(std::size_t j) const {
        check_cell(j);
        return j == thresholds_.size() ? 1.0 : thresholds_[j];
    }
    bool cell_closed_right(std::size_t j) const {
        check_cell(j);
        return j == thresholds_.size();
    }

    // Index of the unique cell containing p.
    std::size_t cell_of(double p) const {
        check_probability(p);
        const auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), p);
        return std::size_t(it - thresholds_.begin());
    }

    // Distance from p to the nearest cell boundary point ({0,1} or a threshold).
    double min_boundary_distance(double p) const {
        check_probability(p);
        double best = std::min(p, 1.0 - p);
        for (double a : thresholds_) best = std::min(best, std::fabs(p - a));
        return best;
    }

private:
    static void check_probability(double p) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("ThresholdPartition: p must lie in [0,1]");
    }
    void check_cell(std::size_t j) const {
        if (j > thresholds_.size())
            throw std::invalid_argument("ThresholdPartition: cell index out of range");
    }

    std::vector<double> thresholds_;
};

inline ThresholdPartition build_partition(std::vector<double> thresholds) {
    return ThresholdPartition(std::move(thresholds));
}

struct Classification {
    bool is_decided = false;
    std::size_t cell = 0;

    static Classification decided(std::size_t cell_index) { return {true, cell_index}; }
    static Classification undecided() { return {false, 0}; }
    bool operator==(const Classification&) const = default;
};

// Decided(j) iff the interval sits strictly inside cell j: left <= lower and
// upper < right for half-open cells, upper <= 1 for the final closed cell.
inline Classification classify(const IntervalEstimate& interval,
                               const ThresholdPartition& partition) {
    if (interval.lower > interval.upper) return Classification::undecided();
    const std::size_t j = partition.cell_of(std::clamp(interval.lower, 0.0, 1.0));
    const bool fits_right = partition.cell_closed_right(j)
                                ? interval.upper <= 1.0
                                : interval.upper < partition.cell_right(j);
    if (fits_right) return Classification::decided(j);
    return Classification::undecided();
}

inline double min_boundary_distance(double p, const ThresholdPartition& partition) {
    return partition.min_boundary_distance(p);
}

} // namespace mcmt
