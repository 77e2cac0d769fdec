#include "mwprob/probability.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace mwprob {

std::string_view to_string(RuleKind kind) {
    switch (kind) {
    case RuleKind::Born:
        return "born";
    case RuleKind::NormalizedBorn:
        return "normalized-born";
    case RuleKind::StochasticIdentity:
        return "stochastic";
    case RuleKind::NaiveBranchCount:
        return "naive";
    case RuleKind::DiscreteProportional:
        return "discrete-proportional";
    }
    return "unknown";
}

std::optional<RuleKind> parse_rule(std::string_view name) {
    for (auto kind : {RuleKind::Born, RuleKind::NormalizedBorn,
                      RuleKind::StochasticIdentity, RuleKind::NaiveBranchCount,
                      RuleKind::DiscreteProportional})
        if (name == to_string(kind))
            return kind;
    return std::nullopt;
}

namespace {

void require(const WorldState &state, TheoryKind theory,
             std::string_view rule) {
    if (state.theory() != theory)
        throw WrongTheoryError(std::string(rule) + " applies to " +
                               std::string(to_string(theory)) +
                               " states, not " +
                               std::string(to_string(state.theory())));
    const auto report = validate_state(state);
    if (!report.valid())
        throw PreconditionError(std::string(rule) + " on an invalid state (" +
                                report.violations.front().rule + ")");
}

bool applies(RuleKind kind, TheoryKind theory) {
    switch (kind) {
    case RuleKind::Born:
        return theory == TheoryKind::Quantum;
    case RuleKind::NormalizedBorn:
        return theory == TheoryKind::UnnormalisedQuantum;
    case RuleKind::StochasticIdentity:
        return theory == TheoryKind::Stochastic;
    case RuleKind::NaiveBranchCount:
        return true;
    case RuleKind::DiscreteProportional:
        return theory == TheoryKind::Discrete;
    }
    return false;
}

} // namespace

ProbabilityDistribution born_rule(const WorldState &state) {
    require(state, TheoryKind::Quantum, "born rule");
    std::vector<ProbabilityDistribution::Entry> out;
    out.reserve(state.size());
    for (const auto &e : state.entries())
        out.push_back({e.world, std::norm(e.amplitude)});
    return ProbabilityDistribution(std::move(out));
}

ProbabilityDistribution normalized_born_rule(const WorldState &state) {
    require(state, TheoryKind::UnnormalisedQuantum, "normalized born rule");
    // Scale by the largest modulus first so that tiny or huge states give
    // the same ratios as their rescaled counterparts.
    double largest = 0.0;
    for (const auto &e : state.entries())
        largest = std::max(largest, std::abs(e.amplitude));
    double total = 0.0;
    std::vector<ProbabilityDistribution::Entry> out;
    out.reserve(state.size());
    for (const auto &e : state.entries()) {
        const double w = std::norm(e.amplitude / largest);
        total += w;
        out.push_back({e.world, w});
    }
    for (auto &e : out)
        e.p /= total;
    return ProbabilityDistribution(std::move(out));
}

ProbabilityDistribution stochastic_rule(const WorldState &state) {
    require(state, TheoryKind::Stochastic, "stochastic rule");
    std::vector<ProbabilityDistribution::Entry> out;
    out.reserve(state.size());
    for (const auto &e : state.entries())
        out.push_back({e.world, e.amplitude.real()});
    return ProbabilityDistribution(std::move(out));
}

ProbabilityDistribution naive_branch_count(const WorldState &state) {
    if (state.empty())
        throw PreconditionError("naive branch counting on an empty state");
    const double each = 1.0 / static_cast<double>(state.size());
    std::vector<ProbabilityDistribution::Entry> out;
    out.reserve(state.size());
    for (const auto &e : state.entries())
        out.push_back({e.world, each});
    return ProbabilityDistribution(std::move(out));
}

ProbabilityDistribution discrete_state_rule(const WorldState &state) {
    require(state, TheoryKind::Discrete, "discrete state rule");
    std::int64_t total = 0;
    for (auto c : state.counts())
        total += c;
    std::vector<ProbabilityDistribution::Entry> out;
    const auto entries = state.entries();
    const auto counts = state.counts();
    for (std::size_t i = 0; i < entries.size(); ++i)
        out.push_back({entries[i].world, static_cast<double>(counts[i]) /
                                             static_cast<double>(total)});
    return ProbabilityDistribution(std::move(out));
}

ProbabilityDistribution ProbabilityRule::operator()(const WorldState &state) const {
    switch (kind_) {
    case RuleKind::Born:
        return born_rule(state);
    case RuleKind::NormalizedBorn:
        return normalized_born_rule(state);
    case RuleKind::StochasticIdentity:
        return stochastic_rule(state);
    case RuleKind::NaiveBranchCount:
        return naive_branch_count(state);
    case RuleKind::DiscreteProportional:
        return discrete_state_rule(state);
    }
    throw Error("unknown rule kind");
}

std::variant<ProbabilityRule, Impossibility> rule_for(TheoryKind theory) {
    switch (theory) {
    case TheoryKind::Quantum:
        return ProbabilityRule(RuleKind::Born);
    case TheoryKind::UnnormalisedQuantum:
        return ProbabilityRule(RuleKind::NormalizedBorn);
    case TheoryKind::Stochastic:
        return ProbabilityRule(RuleKind::StochasticIdentity);
    case TheoryKind::Discrete:
        return Impossibility{discrete_counterexample()};
    }
    throw Error("unknown theory");
}

ValidationReport check_axiom2(const WorldState &state,
                              const ProbabilityDistribution &dist) {
    ValidationReport report;
    for (const auto &e : dist.entries())
        if (e.p != 0.0 && !state.contains(e.world))
            report.add("axiom2:zero-amplitude-has-probability", {e.world},
                       std::abs(e.p));
    return report;
}

std::vector<BlockBalance> block_balances(const Partition &partition,
                                         const ProbabilityDistribution &before,
                                         const ProbabilityDistribution &after) {
    std::vector<BlockBalance> balances;
    std::unordered_map<WorldLabel, std::size_t> index;
    for (const auto &block : partition.blocks) {
        for (auto w : block)
            index.emplace(w, balances.size());
        balances.push_back({block, 0.0, 0.0});
    }
    std::vector<BlockBalance> singletons;
    std::unordered_map<WorldLabel, std::size_t> singleton_index;
    auto slot = [&](WorldLabel w) -> BlockBalance & {
        if (auto it = index.find(w); it != index.end())
            return balances[it->second];
        auto [it, inserted] = singleton_index.emplace(w, singletons.size());
        if (inserted)
            singletons.push_back({{w}, 0.0, 0.0});
        return singletons[it->second];
    };
    for (const auto &e : before.entries())
        slot(e.world).before += e.p;
    for (const auto &e : after.entries())
        slot(e.world).after += e.p;
    std::sort(singletons.begin(), singletons.end(),
              [](const BlockBalance &a, const BlockBalance &b) {
                  return a.block.front() < b.block.front();
              });
    balances.insert(balances.end(), singletons.begin(), singletons.end());
    return balances;
}

ValidationReport check_axiom3(const WorldState &state,
                              const LinearTransform &transform,
                              const ProbabilityRule &rule) {
    if (!applies(rule.kind(), state.theory()))
        throw WrongTheoryError(std::string(rule.name()) +
                               " rule does not apply to " +
                               std::string(to_string(state.theory())) +
                               " states");
    const auto before = rule(state);
    const auto after = rule(apply(transform, state));
    ValidationReport report;
    for (const auto &b :
         block_balances(finest_partition(transform), before, after)) {
        const double gap = std::abs(b.before - b.after);
        if (gap > tolerance::kAxiom)
            report.add("axiom3:block-probability-changed", b.block, gap);
    }
    return report;
}

} // namespace mwprob
