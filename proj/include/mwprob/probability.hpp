#pragma once

#include "mwprob/core.hpp"
#include "mwprob/impossibility.hpp"
#include "mwprob/transforms.hpp"

#include <string_view>
#include <variant>

namespace mwprob {

enum class RuleKind {
    Born,
    NormalizedBorn,
    StochasticIdentity,
    NaiveBranchCount,
    DiscreteProportional,
};

std::string_view to_string(RuleKind kind);
std::optional<RuleKind> parse_rule(std::string_view name);

/// p_n = |v_n|^2 on a normalised quantum state.
ProbabilityDistribution born_rule(const WorldState &state);
/// p_n = |v_n|^2 / sum_m |v_m|^2.
ProbabilityDistribution normalized_born_rule(const WorldState &state);
/// p_n = v_n.
ProbabilityDistribution stochastic_rule(const WorldState &state);
/// Uniform over the worlds with nonzero amplitude, in any theory.
ProbabilityDistribution naive_branch_count(const WorldState &state);
/// p_n = v_n / sum v on a discrete state. Obeys present-state dependence
/// but not conservation under transforms.
ProbabilityDistribution discrete_state_rule(const WorldState &state);

/// A rule as a value; rules only ever see the present state.
class ProbabilityRule {
  public:
    explicit ProbabilityRule(RuleKind kind) : kind_(kind) {}

    RuleKind kind() const { return kind_; }
    std::string_view name() const { return to_string(kind_); }
    ProbabilityDistribution operator()(const WorldState &state) const;

  private:
    RuleKind kind_;
};

struct Impossibility {
    ImpossibilityCertificate certificate;
};

/// The rule each theory's axioms single out, or the certificate that
/// none exists.
std::variant<ProbabilityRule, Impossibility> rule_for(TheoryKind theory);

/// Passes iff every world of zero amplitude has zero probability.
ValidationReport check_axiom2(const WorldState &state,
                              const ProbabilityDistribution &dist);

/// Per-block probability sums before and after T over finest_partition(T).
struct BlockBalance {
    std::vector<WorldLabel> block;
    double before = 0.0;
    double after = 0.0;
};

std::vector<BlockBalance> block_balances(const Partition &partition,
                                         const ProbabilityDistribution &before,
                                         const ProbabilityDistribution &after);

/// Passes iff the rule conserves each block's total probability under T
/// to within tolerance::kAxiom. Throws WrongTheoryError when the rule does
/// not apply to the state's theory.
ValidationReport check_axiom3(const WorldState &state,
                              const LinearTransform &transform,
                              const ProbabilityRule &rule);

} // namespace mwprob
