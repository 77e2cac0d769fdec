#pragma once

#include "mwprob/core.hpp"
#include "mwprob/impossibility.hpp"
#include "mwprob/transforms.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mwprob {

/// States with at most this many entries are kept whole in a trace.
inline constexpr std::size_t kSnapshotLimit = 10000;
/// Branching maps up to this stride are built in full and validated;
/// larger ones are applied through their source columns only.
inline constexpr std::int64_t kMaterializeLimit = 1024;

struct DerivationStep {
    std::string description;
    /// Digest of the state after the step.
    std::string digest;
    /// Partition the axiom-3 inference of this step is taken over.
    Partition partition;
    std::optional<WorldState> snapshot;
    /// The full transform was built and passed validate_transform.
    bool validated = false;
};

struct Inference {
    std::string by; // "axiom1", "axiom2", "axiom3", "lemma1", ...
    std::string statement;
};

struct DerivationTrace {
    std::string procedure;
    TheoryKind theory = TheoryKind::Quantum;
    WorldLabel target = 0;
    std::vector<DerivationStep> steps;
    std::vector<Inference> inferences;
    std::string conclusion;

    std::optional<BranchPlan> plan;
    std::int64_t resolution = 0;   // M
    std::uint64_t world_count = 0; // N
    /// Lower bound on the probability of one equal-amplitude world used by
    /// the bound formula: 1/(M+N), or 1/(MX+N) for unnormalised states.
    double delta = 0.0;
    /// 1/(equal worlds + remainder worlds), never below delta.
    double delta_tight = 0.0;
    double lower_bound = 0.0;
    /// m_k * delta_tight.
    double tight_bound = 0.0;
    double rule_value = 0.0;
    /// [L_k, 1 - sum_{j != k} L_j] from the normalisation pinch, and its
    /// midpoint.
    std::optional<std::pair<double, double>> pinch;
    double closure_value = 0.0;

    /// Set when every remainder vanishes and the probabilities follow
    /// exactly from the lemma1 equalities.
    bool exact = false;
    std::vector<std::pair<WorldLabel, Rational>> exact_probabilities;
};

/// p_n = m_n / M for the state with amplitudes sqrt(m_n / M) on worlds
/// 0..N-1. Requires every m_n >= 1.
DerivationTrace derive_rational(std::span<const std::int64_t> m,
                                std::int64_t resolution);
/// Same, for a given state (quantum or stochastic) checked against
/// sqrt(m_n / M), respectively m_n / M.
DerivationTrace derive_rational(const WorldState &state,
                                std::span<const std::int64_t> m,
                                std::int64_t resolution);

/// merge(k) -> dephase -> branch on a quantum state, bound
/// |v_k|^2 - (N |v_k|^2 + 1) / (M + N) with N = k + 2.
DerivationTrace derive_general(const WorldState &state, WorldLabel k,
                               std::int64_t resolution, bool pinch = true);
/// Unnormalised variant with stride ceil(M X).
DerivationTrace derive_unnormalised(const WorldState &state, WorldLabel k,
                                    std::int64_t resolution,
                                    bool pinch = true);
/// Stochastic variant: merge -> branch, no dephasing.
DerivationTrace derive_stochastic(const WorldState &state, WorldLabel k,
                                  std::int64_t resolution, bool pinch = true);

/// Picks derive_general, derive_unnormalised or derive_stochastic by
/// the state's theory.
DerivationTrace derive(const WorldState &state, WorldLabel k,
                       std::int64_t resolution, bool pinch = true);

/// Shows p_n = p_m for v_n = v_m by swapping through an empty world.
DerivationTrace lemma1_procedure(const WorldState &state, WorldLabel n,
                                 WorldLabel m);
/// Shows p_l >= p_k for |v_l| > |v_k|.
DerivationTrace lemma2_procedure(const WorldState &state, WorldLabel l,
                                 WorldLabel k);

/// Probability carried along a history of discrete transforms by
/// p'_n = sum_m T_nm / (sum_n' T_n'm) p_m.
ProbabilityDistribution
discrete_history_rule(const ProbabilityDistribution &p0,
                      std::span<const LinearTransform> transforms);

} // namespace mwprob
