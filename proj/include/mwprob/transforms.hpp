#pragma once

#include "mwprob/core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mwprob {

struct TransformEntry {
    WorldLabel row = 0;
    WorldLabel col = 0;
    Amplitude value;

    friend bool operator==(const TransformEntry &,
                           const TransformEntry &) = default;
};

/**
 * Sparse linear transformation T_ij = <i|T|j>, stored column-major.
 *
 * With identity_outside set (the default), a column that has no stored
 * entries acts as the identity, which lets infinite-dimensional unitaries
 * and stochastic maps be written down finitely. Without it, such columns
 * map to zero; that form is used for the source-column action of large
 * branching maps.
 */
class LinearTransform {
  public:
    LinearTransform() = default;
    explicit LinearTransform(std::vector<TransformEntry> entries,
                             bool identity_outside = true);

    static LinearTransform identity() { return {}; }

    std::span<const TransformEntry> entries() const { return entries_; }
    /// Stored entries of column j; empty if the column is implicit.
    std::span<const TransformEntry> column(WorldLabel col) const;
    bool has_column(WorldLabel col) const { return !column(col).empty(); }
    /// Matrix element including the implicit identity.
    Amplitude at(WorldLabel row, WorldLabel col) const;
    bool identity_outside() const { return identity_outside_; }

    /// Labels appearing as a row or column of any stored entry.
    std::vector<WorldLabel> acting_support() const;
    std::vector<WorldLabel> stored_columns() const;

    friend bool operator==(const LinearTransform &,
                           const LinearTransform &) = default;

  private:
    std::vector<TransformEntry> entries_;
    bool identity_outside_ = true;
};

/// outer * inner (inner is applied first).
LinearTransform compose(const LinearTransform &outer,
                        const LinearTransform &inner);

/// Disjoint blocks of labels that a transform never couples. Labels not
/// listed are implicit singletons.
struct Partition {
    std::vector<std::vector<WorldLabel>> blocks;

    /// Index of the block holding the label, if it is listed.
    std::optional<std::size_t> block_of(WorldLabel world) const;
    /// True when every block of this partition lies inside one block of
    /// `coarser` (labels absent from `coarser` count as singletons).
    bool refines(const Partition &coarser) const;

    friend bool operator==(const Partition &, const Partition &) = default;
};

ValidationReport validate_transform(TheoryKind theory,
                                    const LinearTransform &transform);

/// v'_i = sum_j T_ij v_j. Contributions that cancel to within rounding of
/// their magnitudes are dropped so the result stays canonically sparse.
/// Throws ClosureError when the result is not an allowed state.
WorldState apply(const LinearTransform &transform, const WorldState &state);

/// Connected components of the graph with an edge i-j whenever T_ij or
/// T_ji is stored. Blocks and their members are sorted.
Partition finest_partition(const LinearTransform &transform);

LinearTransform make_swap(WorldLabel n, WorldLabel m);

/// Swaps n and m through the zero-amplitude world z. Returned in the order
/// they are applied: (z<->m), (n<->m), (n<->z). While applied to a state
/// with v_z = 0, every step exchanges a world with one of zero amplitude.
std::vector<LinearTransform> make_three_swap(WorldLabel n, WorldLabel m,
                                             WorldLabel z);

/// Leaves worlds 0..k alone and folds the tail of the state onto |k+1>.
/// Returns the identity when the state has no support above k.
LinearTransform make_merge(const WorldState &state, WorldLabel k);

/// Diagonal unitary sum_n e^{-i phi_n} |n><n| making amplitudes real and
/// non-negative. Entries equal to one are left implicit.
LinearTransform make_dephase(const WorldState &state);

/// Per-world branching data: M w_n = whole + remainder with w_n = |v_n|^2
/// (quantum kinds) or v_n (stochastic).
struct BranchWorld {
    WorldLabel source = 0;
    std::int64_t whole = 0;  // m_n
    double remainder = 0.0;  // eps_n in [0, 1)
    double phase = 0.0;      // phi_n
    double weight = 0.0;     // w_n
};

struct BranchPlan {
    TheoryKind theory = TheoryKind::Quantum;
    std::uint64_t world_count = 0; // N
    std::int64_t resolution = 0;   // M
    std::int64_t stride = 0;       // M, or ceil(M X) for unnormalised states
    double total_weight = 1.0;     // X
    std::vector<BranchWorld> worlds;

    /// First label of the fan block L_n = {N + n*stride, ...}.
    WorldLabel fan_start(WorldLabel source) const;
    /// Blocks {n} u L_n for every planned source world.
    Partition partition() const;
    /// Number of equal-weight worlds after branching, sum of m_n.
    std::int64_t equal_worlds() const;
    /// Number of smaller remainder worlds, #{n : eps_n > 0}.
    std::int64_t remainder_worlds() const;
};

/// Values of M w within this distance of an integer are taken as exact.
inline constexpr double kPlanSnap = 1e-9;

/**
 * Branching plan for a bounded state at resolution M. `world_count`
 * overrides N (the derivation pipelines use N = k + 2 even when world k+1
 * is empty). Throws for discrete states, M < 1, or a state reaching past N.
 */
BranchPlan plan_branching(const WorldState &state, std::int64_t resolution,
                          std::optional<std::uint64_t> world_count = {});

/// Full branching map: unitary (quantum kinds) or column-stochastic,
/// block-diagonal over plan.partition(). Expects non-negative real
/// amplitudes, i.e. apply make_dephase first.
LinearTransform make_branch(const BranchPlan &plan);

/// Only the source columns T|n> of make_branch, with identity_outside off.
/// Agrees with make_branch on any state supported on the plan's sources.
LinearTransform branch_action(const BranchPlan &plan);

/// Splits world l so that its amplitude afterwards equals v_k; the excess
/// goes to the empty world z.
LinearTransform make_comparator(const WorldState &state, WorldLabel l,
                                WorldLabel k, WorldLabel z);

/// Sparse unitary V on {source} u supp(target) with V|source> = target.
/// `target` must be a unit vector with sorted, distinct labels.
LinearTransform complete_unitary(WorldLabel source,
                                 std::span<const StateEntry> target);

} // namespace mwprob
