#pragma once

#include "mwprob/core.hpp"

#include <cstdint>
#include <vector>

namespace mwprob {

/// Worlds after n two-outcome branchings, grouped by success count k.
struct AggregatedBranchState {
    TheoryKind theory = TheoryKind::Quantum;
    std::int64_t trials = 0;
    double q = 0.0;
    /// class_weights[k]: total rule probability of the worlds with k
    /// successes, k = 0..n.
    std::vector<double> class_weights;
};

inline constexpr std::int64_t kMaxTrials = 100000;

/// Iterates the branching recurrence for n <= 1000; beyond that the class
/// weights come from a log-space recurrence started at the mode.
AggregatedBranchState repeated_experiment(TheoryKind theory, double q,
                                          std::int64_t n);

/// Mass of the classes with |k/n - q| <= eps.
double typical_measure(const AggregatedBranchState &agg, double eps);

/// Fraction of the 2^n worlds with |k/n - q| <= eps, counted uniformly.
double naive_count_measure(std::int64_t n, double q, double eps);

/// 1 - 2 exp(-2 n eps^2).
double hoeffding_floor(std::int64_t n, double eps);

} // namespace mwprob
