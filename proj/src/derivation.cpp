#include "mwprob/derivation.hpp"

#include "mwprob/probability.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mwprob {

namespace {

/// A branching with more target worlds than this is refused.
constexpr std::int64_t kMaxBranchWorlds = 20'000'000;

std::string p(WorldLabel w) { return "p(" + std::to_string(w) + ")"; }
std::string p_after(WorldLabel w) {
    return "p'(" + std::to_string(w) + ")";
}

std::string join(const std::vector<WorldLabel> &labels) {
    std::string out;
    for (auto w : labels)
        out += (out.empty() ? "" : ",") + std::to_string(w);
    return "{" + out + "}";
}

void record(DerivationTrace &trace, std::string description,
            const WorldState &after, Partition partition, bool validated,
            bool keep) {
    DerivationStep step;
    step.description = std::move(description);
    step.digest = state_digest(after);
    step.partition = std::move(partition);
    if (keep && after.size() <= kSnapshotLimit)
        step.snapshot = after;
    step.validated = validated;
    trace.steps.push_back(std::move(step));
}

void infer(DerivationTrace &trace, std::string by, std::string statement) {
    trace.inferences.push_back({std::move(by), std::move(statement)});
}

void require_valid(const WorldState &state, std::string_view what) {
    const auto report = validate_state(state);
    if (!report.valid())
        throw PreconditionError(std::string(what) + " needs an allowed state (" +
                                report.violations.front().rule + ")");
}

WorldLabel work_world(const WorldState &state,
                      std::initializer_list<WorldLabel> used) {
    WorldLabel z = state.bound();
    for (auto w : used) {
        if (w >= kMaxWorldLabel)
            throw LabelOverflowError("no empty world below 2^63-1");
        z = std::max(z, w + 1);
    }
    if (z > kMaxWorldLabel)
        throw LabelOverflowError("no empty world below 2^63-1");
    return z;
}

bool same_amplitude(Amplitude a, Amplitude b) {
    return std::abs(a - b) <= tolerance::kNorm;
}

bool states_match(const WorldState &a, const WorldState &b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.entries()[i].world != b.entries()[i].world ||
            !same_amplitude(a.entries()[i].amplitude,
                            b.entries()[i].amplitude))
            return false;
    return true;
}

/// Applies the branching of `plan` to `current`, recording the step.
WorldState branch_step(DerivationTrace &trace, const BranchPlan &plan,
                       const WorldState &current, bool keep) {
    const auto worlds = plan.equal_worlds() + plan.remainder_worlds();
    if (worlds > kMaxBranchWorlds)
        throw PreconditionError("branching would create " +
                                std::to_string(worlds) + " worlds");
    auto partition = plan.partition();
    WorldState after = current;
    bool validated = false;
    if (plan.stride <= kMaterializeLimit) {
        const auto branch = make_branch(plan);
        if (finest_partition(branch) != partition)
            throw Error("branching map does not act on its planned blocks");
        validated = validate_transform(plan.theory, branch).valid();
        after = apply(branch, current);
    } else {
        after = apply(branch_action(plan), current);
    }
    record(trace,
           "branch each world n into the fan L_n starting at N + n*" +
               std::to_string(plan.stride),
           after, std::move(partition), validated, keep);
    return after;
}

// The merge leaves round-off of order 1e-16 on the worlds it empties.
WorldState drop_residue(const WorldState &state, WorldLabel last) {
    std::vector<StateEntry> kept;
    for (const auto &e : state.entries())
        if (e.world <= last || std::abs(e.amplitude) > tolerance::kInputZero)
            kept.push_back(e);
    return kept.size() == state.size() ? state
                                       : WorldState(state.theory(), kept);
}

std::string equal_amplitude_text(TheoryKind theory, std::int64_t resolution) {
    return is_quantum_kind(theory)
               ? "1/sqrt(" + std::to_string(resolution) + ")"
               : "1/" + std::to_string(resolution);
}

/// merge(k) -> dephase (quantum kinds) -> branch, and the bound chain.
DerivationTrace run_bound(const WorldState &state, WorldLabel k,
                          std::int64_t resolution, std::string procedure,
                          bool keep) {
    require_valid(state, procedure);
    if (resolution < 1)
        throw PreconditionError("resolution M must be at least 1");
    if (k >= kMaxWorldLabel - 1)
        throw LabelOverflowError("target label leaves no room for k+1");

    const auto theory = state.theory();
    DerivationTrace trace;
    trace.procedure = std::move(procedure);
    trace.theory = theory;
    trace.target = k;
    trace.resolution = resolution;
    trace.world_count = k + 2;

    WorldState current = state;
    {
        const auto merge = make_merge(current, k);
        current = drop_residue(apply(merge, current), k + 1);
        record(trace, "merge the worlds above " + std::to_string(k) +
                          " into world " + std::to_string(k + 1),
               current, finest_partition(merge),
               validate_transform(theory, merge).valid(), keep);
        infer(trace, "axiom3",
              "worlds 0.." + std::to_string(k) +
                  " are singleton blocks of the merge, so " + p(k) +
                  " is unchanged");
    }
    if (is_quantum_kind(theory)) {
        const auto dephase = make_dephase(current);
        current = apply(dephase, current);
        record(trace, "remove the phases", current, finest_partition(dephase),
               validate_transform(theory, dephase).valid(), keep);
        infer(trace, "axiom3",
              "dephasing is diagonal, so every probability is unchanged");
    }

    const auto plan = plan_branching(current, resolution, trace.world_count);
    current = branch_step(trace, plan, current, keep);

    const auto equal = plan.equal_worlds();
    const auto rest = plan.remainder_worlds();
    double weight = 0.0;
    std::int64_t whole = 0;
    for (const auto &w : plan.worlds)
        if (w.source == k) {
            weight = w.weight;
            whole = w.whole;
        }
    const double m = static_cast<double>(resolution);
    const double n = static_cast<double>(trace.world_count);
    const double x = plan.total_weight;

    infer(trace, "lemma1",
          "the " + std::to_string(equal) + " worlds of amplitude " +
              equal_amplitude_text(theory, resolution) +
              " share one probability delta");
    if (rest > 0)
        infer(trace, "lemma2",
              "the " + std::to_string(rest) +
                  " remainder worlds have smaller amplitude, so probability "
                  "at most delta");
    infer(trace, "axiom2", "worlds outside the fans have probability 0");

    if (theory == TheoryKind::UnnormalisedQuantum) {
        trace.delta = 1.0 / (m * x + n);
        trace.lower_bound =
            weight / x - ((n / x) * weight + 1.0) / (m * x + n);
    } else {
        trace.delta = 1.0 / (m + n);
        trace.lower_bound = weight - (n * weight + 1.0) / (m + n);
    }
    trace.delta_tight = 1.0 / static_cast<double>(equal + rest);
    trace.tight_bound = static_cast<double>(whole) * trace.delta_tight;
    infer(trace, "normalization",
          "(" + std::to_string(equal) + " + " + std::to_string(rest) +
              ") delta >= 1, so delta >= " + std::to_string(trace.delta_tight) +
              " >= " + std::to_string(trace.delta));
    infer(trace, "axiom3",
          "block {" + std::to_string(k) + "} u L_" + std::to_string(k) +
              " holds " + std::to_string(whole) + " equal worlds, so " + p(k) +
              " >= " + std::to_string(whole) + " delta >= " +
              std::to_string(trace.lower_bound));

    if (rest == 0 && equal > 0) {
        trace.exact = true;
        for (const auto &w : plan.worlds)
            trace.exact_probabilities.emplace_back(w.source,
                                                   Rational(w.whole, equal));
        infer(trace, "normalization",
              "no remainder worlds, so delta = 1/" + std::to_string(equal) +
                  " and " + p(k) + " = " + std::to_string(whole) + "/" +
                  std::to_string(equal));
    }
    trace.plan = plan;
    return trace;
}

DerivationTrace finish_bound(DerivationTrace trace, const WorldState &state,
                             const ProbabilityRule &rule, bool pinch) {
    const auto k = trace.target;
    trace.rule_value = rule(state).probability(k);
    if (pinch) {
        double lower_k = std::max(0.0, trace.lower_bound);
        double others = 0.0;
        for (const auto &e : state.entries()) {
            if (e.world == k)
                continue;
            const auto sub = run_bound(state, e.world, trace.resolution,
                                       trace.procedure, false);
            others += std::max(0.0, sub.lower_bound);
        }
        const double upper = 1.0 - others;
        // Alone in the support, normalisation fixes p(k) = 1 outright.
        if (state.size() == 1 && state.contains(k))
            lower_k = 1.0;
        trace.pinch = std::make_pair(lower_k, upper);
        trace.closure_value = 0.5 * (lower_k + upper);
        infer(trace, "normalization",
              "the bounds on the other worlds give " + p(k) + " <= " +
                  std::to_string(upper) + ", so " + p(k) + " lies in [" +
                  std::to_string(lower_k) + ", " + std::to_string(upper) +
                  "]");
    }
    trace.conclusion = p(k) + " >= " + std::to_string(trace.lower_bound);
    if (trace.lower_bound > trace.rule_value + tolerance::kAxiom)
        throw Error("derived bound exceeds the rule's value");
    return trace;
}

} // namespace

DerivationTrace derive_rational(std::span<const std::int64_t> m,
                                std::int64_t resolution) {
    if (resolution < 1)
        throw PreconditionError("resolution M must be at least 1");
    std::vector<StateEntry> entries;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] < 1)
            throw PreconditionError("every m_n must be at least 1");
        entries.push_back({i, std::sqrt(static_cast<double>(m[i]) /
                                        static_cast<double>(resolution))});
    }
    return derive_rational(WorldState(TheoryKind::Quantum, std::move(entries)),
                           m, resolution);
}

DerivationTrace derive_rational(const WorldState &state,
                                std::span<const std::int64_t> m,
                                std::int64_t resolution) {
    const auto theory = state.theory();
    if (theory != TheoryKind::Quantum && theory != TheoryKind::Stochastic)
        throw WrongTheoryError("rational derivation needs a quantum or "
                               "stochastic state");
    if (resolution < 1 || m.empty())
        throw PreconditionError("need M >= 1 and at least one world");
    std::int64_t sum = 0;
    for (auto x : m) {
        if (x < 1)
            throw PreconditionError("every m_n must be at least 1");
        sum += x;
    }
    if (sum != resolution)
        throw PreconditionError("sum of m_n is " + std::to_string(sum) +
                                ", not M = " + std::to_string(resolution));
    if (state.size() != m.size() || state.bound() != m.size())
        throw PreconditionError("state must have support exactly 0..N-1");
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double share =
            static_cast<double>(m[i]) / static_cast<double>(resolution);
        const double expected =
            theory == TheoryKind::Quantum ? std::sqrt(share) : share;
        if (!same_amplitude(state.entries()[i].amplitude, expected))
            throw PreconditionError("amplitude of world " + std::to_string(i) +
                                    " does not match m_n/M");
    }
    require_valid(state, "rational derivation");

    DerivationTrace trace;
    trace.procedure = "rational";
    trace.theory = theory;
    trace.resolution = resolution;
    trace.world_count = m.size();

    const auto plan = plan_branching(state, resolution);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (plan.worlds[i].whole != m[i] || plan.worlds[i].remainder != 0.0)
            throw Error("branching plan disagrees with m_n");
    branch_step(trace, plan, state, true);

    infer(trace, "lemma1",
          "all " + std::to_string(resolution) + " worlds have amplitude " +
              equal_amplitude_text(theory, resolution) +
              ", so they share one probability delta");
    infer(trace, "axiom2", "worlds outside the fans have probability 0");
    infer(trace, "normalization",
          std::to_string(resolution) + " delta = 1, so delta = 1/" +
              std::to_string(resolution));
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Rational value(m[i], resolution);
        trace.exact_probabilities.emplace_back(i, value);
        infer(trace, "axiom3",
              "block {" + std::to_string(i) + "} u L_" + std::to_string(i) +
                  " holds " + std::to_string(m[i]) + " worlds, so " + p(i) +
                  " = " + to_string(value));
    }
    trace.exact = true;
    trace.delta = trace.delta_tight = 1.0 / static_cast<double>(resolution);
    trace.plan = plan;
    trace.conclusion = "p(n) = m_n/" + std::to_string(resolution);
    return trace;
}

DerivationTrace derive_general(const WorldState &state, WorldLabel k,
                               std::int64_t resolution, bool pinch) {
    if (state.theory() != TheoryKind::Quantum)
        throw WrongTheoryError("derive_general needs a quantum state");
    return finish_bound(run_bound(state, k, resolution, "general", true),
                        state, ProbabilityRule(RuleKind::Born), pinch);
}

DerivationTrace derive_unnormalised(const WorldState &state, WorldLabel k,
                                    std::int64_t resolution, bool pinch) {
    if (state.theory() != TheoryKind::UnnormalisedQuantum)
        throw WrongTheoryError(
            "derive_unnormalised needs an unnormalised quantum state");
    return finish_bound(run_bound(state, k, resolution, "unnormalised", true),
                        state, ProbabilityRule(RuleKind::NormalizedBorn),
                        pinch);
}

DerivationTrace derive_stochastic(const WorldState &state, WorldLabel k,
                                  std::int64_t resolution, bool pinch) {
    if (state.theory() != TheoryKind::Stochastic)
        throw WrongTheoryError("derive_stochastic needs a stochastic state");
    return finish_bound(run_bound(state, k, resolution, "stochastic", true),
                        state, ProbabilityRule(RuleKind::StochasticIdentity),
                        pinch);
}

DerivationTrace derive(const WorldState &state, WorldLabel k,
                       std::int64_t resolution, bool pinch) {
    switch (state.theory()) {
    case TheoryKind::Quantum:
        return derive_general(state, k, resolution, pinch);
    case TheoryKind::UnnormalisedQuantum:
        return derive_unnormalised(state, k, resolution, pinch);
    case TheoryKind::Stochastic:
        return derive_stochastic(state, k, resolution, pinch);
    case TheoryKind::Discrete:
        break;
    }
    throw WrongTheoryError("discrete theory has no probability rule to derive");
}

DerivationTrace lemma1_procedure(const WorldState &state, WorldLabel n,
                                 WorldLabel m) {
    require_valid(state, "lemma1 procedure");
    if (n == m)
        throw PreconditionError("lemma1 procedure needs two distinct worlds");
    if (!same_amplitude(state.amplitude(n), state.amplitude(m)))
        throw PreconditionError("lemma1 procedure needs equal amplitudes at worlds " +
                                std::to_string(n) + " and " +
                                std::to_string(m));
    const WorldLabel z = work_world(state, {n, m});

    DerivationTrace trace;
    trace.procedure = "lemma1";
    trace.theory = state.theory();
    trace.target = n;

    std::map<WorldLabel, std::string> symbol;
    auto symbol_of = [&](WorldLabel w) {
        auto it = symbol.find(w);
        return it == symbol.end() ? std::string("0") : it->second;
    };
    for (auto w : {n, m})
        if (state.contains(w))
            symbol[w] = p(w);
    infer(trace, "axiom2", p(z) + " = 0 since world " + std::to_string(z) +
                               " is empty");

    WorldState current = state;
    for (const auto &swap : make_three_swap(n, m, z)) {
        auto partition = finest_partition(swap);
        const auto block = partition.blocks.front();
        const WorldLabel a = block[0], b = block[1];
        std::string total;
        for (auto w : {a, b})
            if (symbol_of(w) != "0")
                total += (total.empty() ? "" : " + ") + symbol_of(w);
        if (total.empty())
            total = "0";

        current = apply(swap, current);
        record(trace,
               "swap worlds " + std::to_string(a) + " and " + std::to_string(b),
               current, std::move(partition),
               validate_transform(state.theory(), swap).valid(), true);
        infer(trace, "axiom3",
              "block " + join({a, b}) + ": " + p_after(a) + " + " +
                  p_after(b) + " = " + total);
        for (auto w : {a, b}) {
            if (current.contains(w)) {
                symbol[w] = total;
            } else {
                symbol.erase(w);
                infer(trace, "axiom2", p_after(w) + " = 0");
            }
        }
    }

    if (!states_match(current, state))
        throw Error("three-swap did not restore the state");
    infer(trace, "axiom1",
          "the final state equals the initial one, so " + p(n) + " = " +
              symbol_of(n) + " and " + p(m) + " = " + symbol_of(m));
    trace.conclusion = p(n) + " = " + p(m);
    return trace;
}

DerivationTrace lemma2_procedure(const WorldState &state, WorldLabel l,
                                 WorldLabel k) {
    require_valid(state, "lemma2 procedure");
    if (state.theory() == TheoryKind::Discrete)
        throw WrongTheoryError("lemma2 procedure does not hold in discrete theory");
    if (l == k)
        throw PreconditionError("lemma2 procedure needs two distinct worlds");
    if (!(std::abs(state.amplitude(l)) > std::abs(state.amplitude(k))))
        throw PreconditionError("lemma2 procedure needs |v_l| > |v_k|");

    DerivationTrace trace;
    trace.procedure = "lemma2";
    trace.theory = state.theory();
    trace.target = l;
    trace.conclusion = p(l) + " >= " + p(k);

    if (!state.contains(k)) {
        infer(trace, "axiom2", p(k) + " = 0 <= " + p(l));
        return trace;
    }

    const WorldLabel z = work_world(state, {l, k});
    const auto comparator = make_comparator(state, l, k, z);
    const auto after = apply(comparator, state);
    record(trace,
           "split world " + std::to_string(l) + " so its amplitude equals v_" +
               std::to_string(k) + ", excess to " + std::to_string(z),
           after, finest_partition(comparator),
           validate_transform(state.theory(), comparator).valid(), true);
    infer(trace, "axiom2", p(z) + " = 0");
    infer(trace, "axiom3",
          "block " + join({l, z}) + ": " + p(l) + " = " + p_after(l) + " + " +
              p_after(z));
    infer(trace, "axiom3", "block {" + std::to_string(k) + "}: " + p_after(k) +
                               " = " + p(k));

    auto sub = lemma1_procedure(after, l, k);
    for (auto &s : sub.steps)
        trace.steps.push_back(std::move(s));
    for (auto &i : sub.inferences)
        trace.inferences.push_back({"lemma1/" + i.by, std::move(i.statement)});
    infer(trace, "lemma1", p_after(l) + " = " + p_after(k));
    infer(trace, "chain",
          p(l) + " = " + p_after(l) + " + " + p_after(z) + " = " + p_after(k) +
              " + " + p_after(z) + " = " + p(k) + " + " + p_after(z) +
              " >= " + p(k));
    return trace;
}

ProbabilityDistribution
discrete_history_rule(const ProbabilityDistribution &p0,
                      std::span<const LinearTransform> transforms) {
    const auto report = validate_distribution(p0);
    if (!report.valid())
        throw PreconditionError("initial distribution is not normalised (" +
                                report.violations.front().rule + ")");
    std::map<WorldLabel, double> current;
    for (const auto &e : p0.entries())
        current[e.world] = e.p;

    for (const auto &t : transforms) {
        const auto check = validate_transform(TheoryKind::Discrete, t);
        if (!check.valid())
            throw PreconditionError("not a discrete transform (" +
                                    check.violations.front().rule + ")");
        std::map<WorldLabel, double> next;
        for (const auto &[world, mass] : current) {
            const auto column = t.column(world);
            if (column.empty()) {
                if (!t.identity_outside())
                    throw PreconditionError("column " + std::to_string(world) +
                                            " has zero sum but carries "
                                            "probability");
                next[world] += mass;
                continue;
            }
            double sum = 0.0;
            for (const auto &e : column)
                sum += e.value.real();
            for (const auto &e : column)
                next[e.row] += e.value.real() / sum * mass;
        }
        current = std::move(next);
    }

    std::vector<ProbabilityDistribution::Entry> out;
    for (const auto &[world, mass] : current)
        out.push_back({world, mass});
    return ProbabilityDistribution(std::move(out));
}

} // namespace mwprob
