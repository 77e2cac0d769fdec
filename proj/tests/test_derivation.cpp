#include "mwprob/derivation.hpp"

#include "mwprob/probability.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace mwprob;
using namespace mwprob::testing;
using namespace std::complex_literals;

namespace {

std::vector<Rational> exact(const DerivationTrace &t) {
    std::vector<Rational> out;
    for (const auto &[w, r] : t.exact_probabilities)
        out.push_back(r);
    return out;
}

bool all_validated(const DerivationTrace &t) {
    for (const auto &s : t.steps)
        if (!s.validated)
            return false;
    return true;
}

} // namespace

TEST_CASE("rational derivation") {
    const std::vector<std::int64_t> m{1, 2};
    const auto t = derive_rational(m, 3);
    CHECK(exact(t) == std::vector<Rational>{Rational(1, 3), Rational(2, 3)});
    CHECK(t.exact);
    CHECK(all_validated(t));
    CHECK(t.steps.at(0).partition.blocks ==
          std::vector<std::vector<WorldLabel>>{{0, 2}, {1, 5, 6}});

    CHECK(exact(derive_rational(std::vector<std::int64_t>{1}, 1)) ==
          std::vector<Rational>{Rational(1)});
    CHECK(exact(derive_rational(std::vector<std::int64_t>{1, 1, 2}, 4)) ==
          std::vector<Rational>{Rational(1, 4), Rational(1, 4), Rational(1, 2)});

    const WorldState s(TheoryKind::Stochastic, {{0, 0.25}, {1, 0.75}});
    CHECK(exact(derive_rational(s, std::vector<std::int64_t>{1, 3}, 4)) ==
          std::vector<Rational>{Rational(1, 4), Rational(3, 4)});

    CHECK_THROWS_AS(derive_rational(std::vector<std::int64_t>{1, 2}, 4), PreconditionError);
    CHECK_THROWS_AS(derive_rational(std::vector<std::int64_t>{0, 3}, 3), PreconditionError);
    const WorldState off(TheoryKind::Quantum, {{0, 0.6}, {1, 0.8}});
    CHECK_THROWS_AS(derive_rational(off, std::vector<std::int64_t>{1, 2}, 3),
                    PreconditionError);
}

TEST_CASE("rational derivation agrees with the Born rule") {
    Rng rng(51);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = uniform_int(rng, 1, 8);
        std::vector<std::int64_t> m(static_cast<std::size_t>(n));
        std::int64_t total = 0;
        for (auto &x : m)
            total += x = uniform_int(rng, 1, 300);
        const auto t = derive_rational(m, total);
        std::vector<StateEntry> e;
        for (int i = 0; i < n; ++i)
            e.push_back({static_cast<WorldLabel>(i),
                         std::sqrt(static_cast<double>(m[static_cast<std::size_t>(i)]) /
                                   static_cast<double>(total))});
        const auto born = born_rule(WorldState(TheoryKind::Quantum, e));
        for (const auto &[w, r] : t.exact_probabilities) {
            CHECK(r == Rational(m[w], total));
            CHECK(std::abs(boost::rational_cast<double>(r) - born.probability(w)) <= 1e-15);
        }
    }
}

TEST_CASE("general bound") {
    const WorldState v(TheoryKind::Quantum, {{0, std::sqrt(0.5)}, {1, std::sqrt(0.5)}});
    const auto t = derive_general(v, 0, 100);
    CHECK(t.world_count == 2);
    CHECK(t.lower_bound == doctest::Approx(0.4803921568627451).epsilon(1e-12));
    CHECK(t.lower_bound <= t.rule_value);
    CHECK(t.tight_bound >= t.lower_bound);
    REQUIRE(t.pinch);
    CHECK(t.pinch->first <= 0.5 + 1e-12);
    CHECK(t.pinch->second >= 0.5 - 1e-12);
    CHECK(std::abs(t.closure_value - 0.5) <= 10.0 / 100);
    CHECK(t.steps.size() == 3);
    CHECK(all_validated(t));

    const WorldState one(TheoryKind::Quantum, {{0, 1.0}});
    for (std::int64_t m : {1, 10, 1000}) {
        const auto s = derive_general(one, 0, m);
        CHECK(s.lower_bound == doctest::Approx(1.0 - 3.0 / (m + 2.0)));
        CHECK(s.lower_bound < 1.0);
        CHECK(s.closure_value == doctest::Approx(1.0));
        CHECK(s.pinch->second == 1.0);
    }
    CHECK_THROWS_AS(derive_general(v, 0, 0), PreconditionError);
    CHECK_THROWS_AS(derive_general(v.with_theory(TheoryKind::UnnormalisedQuantum), 0, 10),
                    WrongTheoryError);
}

TEST_CASE("general bound converges from below") {
    Rng rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        const auto v = random_quantum_state(rng, 8);
        const auto k = v.entries()[static_cast<std::size_t>(
                                       uniform_int(rng, 0, static_cast<int>(v.size()) - 1))]
                           .world;
        const double w = std::norm(v.amplitude(k));
        double previous = -1.0;
        for (std::int64_t m : {100, 1000, 10000}) {
            const auto t = derive_general(v, k, m, false);
            const double n = static_cast<double>(k + 2);
            CHECK(w - t.lower_bound <= (n * w + 1.0) / (m + n) + 1e-12);
            CHECK(t.lower_bound >= previous);
            CHECK(t.tight_bound <= w + 1e-9);
            previous = t.lower_bound;
        }
    }
}

TEST_CASE("complex amplitudes and a tail are merged before branching") {
    const WorldState v(TheoryKind::Quantum,
                       {{0, 0.5i}, {2, -0.5}, {6, 0.5}, {9, 0.5i}});
    const auto t = derive_general(v, 2, 1000);
    CHECK(t.world_count == 4);
    CHECK(t.rule_value == doctest::Approx(0.25));
    CHECK(t.lower_bound <= 0.25);
    REQUIRE(t.plan);
    for (const auto &w : t.plan->worlds)
        CHECK(w.source < 4);
    CHECK(t.steps[0].partition.blocks ==
          std::vector<std::vector<WorldLabel>>{{3, 6, 9}});
}

TEST_CASE("unnormalised bound") {
    const WorldState v(TheoryKind::UnnormalisedQuantum, {{0, 1.0}, {1, 2.0}});
    double previous = -1.0;
    for (std::int64_t m : {10, 100, 1000, 10000}) {
        const auto t = derive_unnormalised(v, 1, m);
        CHECK(t.plan->stride == 5 * m);
        const double expect = 0.8 - ((3.0 / 5.0) * 4.0 + 1.0) / (5.0 * m + 3.0);
        CHECK(t.lower_bound == doctest::Approx(expect).epsilon(1e-12));
        CHECK(t.lower_bound >= previous);
        CHECK(t.lower_bound <= 0.8);
        previous = t.lower_bound;
    }
    CHECK(previous > 0.799);

    const WorldState c(TheoryKind::UnnormalisedQuantum, {{0, 7.0}});
    CHECK(derive_unnormalised(c, 0, 50).closure_value == doctest::Approx(1.0));
    const WorldState two(TheoryKind::UnnormalisedQuantum, {{0, 1.0}, {1, 1.0}});
    CHECK(derive_unnormalised(two, 0, 10000).lower_bound ==
          doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("stochastic bound") {
    const WorldState q(TheoryKind::Stochastic, {{0, 0.25}, {1, 0.75}});
    const auto t = derive_stochastic(q, 1, 4);
    CHECK(t.exact);
    CHECK(t.exact_probabilities.at(1).second == Rational(3, 4));
    CHECK(all_validated(t));

    CHECK(derive_stochastic(WorldState(TheoryKind::Stochastic, {{0, 1.0}}), 0, 7)
              .closure_value == doctest::Approx(1.0));

    const WorldState v(TheoryKind::Stochastic, {{0, 0.3}, {1, 0.7}});
    const auto b = derive_stochastic(v, 0, 1000);
    CHECK(b.lower_bound == doctest::Approx(0.29840319361277445).epsilon(1e-12));
    CHECK(std::abs(b.closure_value - 0.3) <= 10.0 / 1000);
}

TEST_CASE("large resolutions use the source columns") {
    const WorldState v(TheoryKind::Quantum, {{0, std::sqrt(0.3)}, {1, std::sqrt(0.7)}});
    const auto t = derive_general(v, 1, 100000, false);
    CHECK_FALSE(t.steps.back().validated);
    CHECK_FALSE(t.steps.back().snapshot);
    CHECK(t.exact);
    CHECK(t.exact_probabilities.at(1).second == Rational(7, 10));
}

TEST_CASE("equal-amplitude procedure") {
    const double h = std::sqrt(0.5);
    const auto t = lemma1_procedure(WorldState(TheoryKind::Quantum, {{0, h}, {1, h}}), 0, 1);
    CHECK(t.conclusion == "p(0) = p(1)");
    CHECK(t.steps.size() == 3);
    CHECK(all_validated(t));
    CHECK(t.inferences.back().by == "axiom1");
    CHECK(t.inferences.back().statement.find("p(0) = p(1)") != std::string::npos);
    for (const auto &s : t.steps)
        CHECK(s.partition.blocks.size() == 1);

    const auto s = lemma1_procedure(WorldState(TheoryKind::Stochastic, {{0, 0.5}, {1, 0.5}}), 0, 1);
    CHECK(all_validated(s));

    const WorldState three(TheoryKind::Quantum, {{0, 0.5}, {1, 0.5}, {2, std::sqrt(0.5)}});
    const auto u = lemma1_procedure(three, 0, 1);
    for (const auto &step : u.steps)
        CHECK_FALSE(step.partition.block_of(2));

    CHECK(all_validated(lemma1_procedure(WorldState::discrete({{0, 2}, {4, 2}, {5, 1}}), 0, 4)));
    CHECK_THROWS_AS(lemma1_procedure(three, 0, 2), PreconditionError);
}

TEST_CASE("comparator procedure") {
    const WorldState q(TheoryKind::Quantum, {{0, std::sqrt(0.2)}, {1, std::sqrt(0.8)}});
    const auto t = lemma2_procedure(q, 1, 0);
    CHECK(t.conclusion == "p(1) >= p(0)");
    CHECK(t.steps.size() == 4);
    CHECK(all_validated(t));

    const WorldState s(TheoryKind::Stochastic, {{0, 0.1}, {1, 0.9}});
    CHECK(all_validated(lemma2_procedure(s, 1, 0)));

    const double h = std::sqrt(0.5);
    CHECK_THROWS_AS(lemma2_procedure(WorldState(TheoryKind::Quantum, {{0, h}, {1, h}}), 0, 1),
                    PreconditionError);
    CHECK(lemma2_procedure(q, 1, 7).steps.empty());
    CHECK_THROWS_AS(lemma2_procedure(WorldState::discrete({{0, 1}, {1, 2}}), 1, 0),
                    WrongTheoryError);
}

TEST_CASE("impossibility certificate") {
    const auto c = discrete_counterexample();
    CHECK(c.infeasible);
    CHECK(c.constraints.size() == 6);
    CHECK(c.witness.pre_symbol == "p0");
    CHECK(c.witness.pre_value == Rational(1, 2));
    CHECK(c.witness.post_symbol == "p0'");
    CHECK(c.witness.post_value == Rational(1, 3));
    CHECK(c.state == WorldState::discrete({{0, 1}, {1, 1}}));

    int dropped = 0;
    for (std::size_t r = 0; r < c.constraints.size(); ++r) {
        if (!c.constraints[r].source.starts_with("axiom3"))
            continue;
        auto rest = c.constraints;
        rest.erase(rest.begin() + static_cast<long>(r));
        CHECK(solve_exact(rest, c.symbols.size()).feasible);
        ++dropped;
    }
    CHECK(dropped == 2);
}

TEST_CASE("exact elimination") {
    std::vector<LinearConstraint> sys(2);
    sys[0].coefficients = {1, 1};
    sys[0].rhs = 1;
    sys[1].coefficients = {1, -1};
    sys[1].rhs = 0;
    const auto r = solve_exact(sys, 2);
    REQUIRE(r.feasible);
    CHECK(r.determined[0] == Rational(1, 2));
    sys[1].coefficients = {2, 2};
    sys[1].rhs = 3;
    CHECK_FALSE(solve_exact(sys, 2).feasible);
}

TEST_CASE("discrete history rule") {
    const LinearTransform split({{1, 1, 1.0}, {2, 1, 1.0}});
    const ProbabilityDistribution half{{0, 0.5}, {1, 0.5}};
    const std::vector<LinearTransform> one{split};
    CHECK(discrete_history_rule(half, one) ==
          ProbabilityDistribution{{0, 0.5}, {1, 0.25}, {2, 0.25}});
    const std::vector<LinearTransform> ids{LinearTransform::identity(),
                                           LinearTransform::identity()};
    CHECK(discrete_history_rule(half, ids) == half);
    const std::vector<LinearTransform> two{split, LinearTransform::identity()};
    CHECK(discrete_history_rule(half, two) == discrete_history_rule(half, one));

    const std::vector<LinearTransform> drop{LinearTransform({{0, 0, 1.0}}, false)};
    CHECK_THROWS_AS(discrete_history_rule(half, drop), PreconditionError);
}

TEST_CASE("pinch midpoint lies within 10/M") {
    Rng rng(59);
    for (int trial = 0; trial < 10; ++trial) {
        const auto v = random_quantum_state(rng, 8);
        for (const auto &e : v.entries()) {
            const auto t = derive_general(v, e.world, 100);
            CHECK(std::abs(t.closure_value - std::norm(e.amplitude)) <= 10.0 / 100);
            CHECK(t.pinch->first <= std::norm(e.amplitude) + 1e-12);
            CHECK(t.pinch->second >= std::norm(e.amplitude) - 1e-12);
        }
    }
}
