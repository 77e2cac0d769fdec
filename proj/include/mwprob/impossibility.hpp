#pragma once

#include "mwprob/core.hpp"
#include "mwprob/transforms.hpp"

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mwprob {

using Rational = boost::rational<std::int64_t>;

std::string to_string(const Rational &r);

/// sum_i coefficients[i] * x_i = rhs, tagged with the axiom or lemma it
/// came from.
struct LinearConstraint {
    std::vector<Rational> coefficients;
    Rational rhs;
    std::string source;
    std::string text;
};

struct EliminationResult {
    bool feasible = false;
    /// A solution with free variables set to zero, when feasible.
    std::vector<Rational> solution;
    /// Values forced by the system (pivot columns with no free coupling).
    std::vector<std::optional<Rational>> determined;
};

/// Gauss-Jordan elimination over exact rationals.
EliminationResult solve_exact(std::span<const LinearConstraint> constraints,
                              std::size_t variables);

/**
 * Linear constraints that the three axioms impose on the probabilities of
 * a discrete state and its image under a transform: equal-amplitude (lemma1) equalities for
 * worlds with equal copy numbers (before and after), normalisation before,
 * and one conservation row per partition block touching either support.
 */
struct AxiomSystem {
    std::vector<std::string> symbols;
    std::vector<WorldLabel> pre_worlds;
    std::vector<WorldLabel> post_worlds;
    std::vector<LinearConstraint> constraints;
};

AxiomSystem axiom_system(const WorldState &state,
                         const LinearTransform &transform);

struct ImpossibilityCertificate {
    WorldState state;
    LinearTransform transform;
    std::vector<std::string> symbols;
    std::vector<LinearConstraint> constraints;
    bool infeasible = false;

    /// The clashing block sums, e.g. p0 = 1/2 before against p0' = 1/3
    /// after, each forced by the lemma1 equalities plus normalisation on its own side.
    struct Witness {
        std::string pre_symbol;
        Rational pre_value;
        std::string post_symbol;
        Rational post_value;
        std::size_t constraint = 0; // index of the violated conservation row
    } witness;
};

/// Certificate that discrete many-worlds theory admits no rule obeying
/// the axioms: |0> + |1> under T|1> = |1> + |2>.
ImpossibilityCertificate discrete_counterexample();

} // namespace mwprob
