#pragma once

#include "mwprob/core.hpp"
#include "mwprob/transforms.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mwprob {

/// P_{i|j}: probability of moving to world i given world j.
class ConditionalDistribution {
  public:
    struct Entry {
        WorldLabel to = 0;   // i
        WorldLabel from = 0; // j
        double p = 0.0;
        friend bool operator==(const Entry &, const Entry &) = default;
    };

    ConditionalDistribution() = default;
    explicit ConditionalDistribution(std::vector<Entry> entries);

    /// Entries sorted by (from, to).
    std::span<const Entry> entries() const { return entries_; }
    double at(WorldLabel to, WorldLabel from) const;

    /// P = T entrywise; meaningful for stochastic transforms.
    static ConditionalDistribution from_transform(const LinearTransform &t);

  private:
    std::vector<Entry> entries_;
};

struct FlowCut {
    /// Source worlds j whose allowed targets cannot absorb their mass.
    std::vector<WorldLabel> columns;
    /// Targets reachable from those columns.
    std::vector<WorldLabel> targets;
    /// sum_{j in cut} p_j - sum_{i in targets} p'_i = 1 - max flow.
    double deficit = 0.0;
};

struct FlowResult {
    bool feasible = false;
    double max_flow = 0.0;
    std::optional<ConditionalDistribution> conditional;
    std::optional<FlowCut> cut;
};

/// Capacities are scaled by this factor and rounded before solving.
inline constexpr double kFlowScale = 1e12;

/**
 * Looks for P_{i|j} with p' = P p and P_{i|j} = 0 wherever T_ij = 0, via
 * max-flow on the bipartite network source -> j (capacity p_j) -> i
 * (allowed edges, unbounded) -> sink (capacity p'_i). When the flow falls
 * short of 1 - tolerance::kFlow, returns the min-cut instead.
 */
FlowResult solve_flow(const LinearTransform &transform,
                      const ProbabilityDistribution &p,
                      const ProbabilityDistribution &p_prime);

/// Checks (a) support inside T's nonzero pattern, (b) column
/// stochasticity on columns with p_j > 0, (c) p' = P p per entry.
ValidationReport verify_flow(const LinearTransform &transform,
                             const ProbabilityDistribution &p,
                             const ProbabilityDistribution &p_prime,
                             const ConditionalDistribution &conditional,
                             double tol = tolerance::kFlow);

/// Solves the flow and checks that no probability leaves a block of
/// finest_partition(T) and that every block's total is conserved.
/// Throws PreconditionError when the instance is infeasible.
ValidationReport implied_partition_conservation(
    const LinearTransform &transform, const ProbabilityDistribution &p,
    const ProbabilityDistribution &p_prime);

namespace detail {

/// FIFO push-relabel with the gap heuristic, on integer capacities.
class PushRelabel {
  public:
    explicit PushRelabel(std::size_t nodes);

    /// Returns the edge index, usable with flow().
    std::size_t add_edge(std::size_t from, std::size_t to,
                         std::int64_t capacity);
    std::int64_t max_flow(std::size_t source, std::size_t sink);
    std::int64_t flow(std::size_t edge) const;
    /// Nodes reachable from the source in the residual graph.
    std::vector<bool> source_side(std::size_t source) const;

  private:
    struct Edge {
        std::size_t to;
        std::size_t reverse;
        std::int64_t capacity;
        std::int64_t flow;
    };

    void push(std::size_t u, Edge &e);
    void relabel(std::size_t u);
    void gap(std::size_t height);

    std::vector<std::vector<Edge>> graph_;
    std::vector<std::pair<std::size_t, std::size_t>> edge_index_;
    std::vector<std::int64_t> excess_;
    std::vector<std::size_t> height_;
    std::vector<std::size_t> count_;
    std::vector<std::size_t> current_;
    std::vector<bool> active_;
    std::vector<std::size_t> queue_;
    std::size_t head_ = 0;
};

} // namespace detail

} // namespace mwprob
