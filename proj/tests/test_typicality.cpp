#include "mwprob/typicality.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>

using namespace mwprob;

namespace {

// Sums q^k (1-q)^(n-k) over all 2^n outcome strings in the window.
double brute_typical(int n, double q, double eps) {
    double total = 0.0;
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
        const int k = std::popcount(s);
        if (std::abs(k - n * q) <= n * eps * (1 + 1e-12))
            total += std::pow(q, k) * std::pow(1 - q, n - k);
    }
    return total;
}

double brute_naive(int n, double q, double eps) {
    std::uint64_t hits = 0;
    for (std::uint32_t s = 0; s < (1u << n); ++s)
        if (std::abs(std::popcount(s) - n * q) <= n * eps * (1 + 1e-12))
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(1u << n);
}

} // namespace

TEST_CASE("class weights are the binomial distribution") {
    for (double q : {0.1, 0.5, 0.73}) {
        for (std::int64_t n : {1, 7, 100, 1000}) {
            const auto agg = repeated_experiment(TheoryKind::Quantum, q, n);
            REQUIRE(agg.class_weights.size() == static_cast<std::size_t>(n + 1));
            const boost::math::binomial_distribution<double> b(static_cast<double>(n), q);
            double sum = 0.0;
            for (std::int64_t k = 0; k <= n; ++k) {
                const double w = agg.class_weights[static_cast<std::size_t>(k)];
                CHECK(std::abs(w - boost::math::pdf(b, static_cast<double>(k))) <= 1e-12);
                sum += w;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("large n takes the log-space path") {
    const std::int64_t n = 50000;
    const double q = 0.3;
    const auto agg = repeated_experiment(TheoryKind::Quantum, q, n);
    const boost::math::binomial_distribution<double> b(static_cast<double>(n), q);
    for (std::int64_t k : {14000, 15000, 15100, 16000}) {
        const double want = boost::math::pdf(b, static_cast<double>(k));
        CHECK(agg.class_weights[static_cast<std::size_t>(k)] ==
              doctest::Approx(want).epsilon(1e-9));
    }
    const double window = boost::math::cdf(b, 15500.0) - boost::math::cdf(b, 14499.0);
    CHECK(typical_measure(agg, 0.01) == doctest::Approx(window).epsilon(1e-9));
}

TEST_CASE("enumeration oracle for small n") {
    for (int n = 1; n <= 16; n += 3)
        for (double q : {0.2, 0.5, 0.9})
            for (double eps : {0.05, 0.1, 0.3}) {
                const auto agg = repeated_experiment(TheoryKind::Quantum, q, n);
                CHECK(std::abs(typical_measure(agg, eps) - brute_typical(n, q, eps)) <= 1e-12);
                CHECK(std::abs(naive_count_measure(n, q, eps) - brute_naive(n, q, eps)) <=
                      1e-12);
            }
}

TEST_CASE("theories agree") {
    const auto a = repeated_experiment(TheoryKind::Quantum, 0.4, 60);
    const auto b = repeated_experiment(TheoryKind::Stochastic, 0.4, 60);
    const auto c = repeated_experiment(TheoryKind::UnnormalisedQuantum, 0.4, 60);
    for (std::size_t k = 0; k < a.class_weights.size(); ++k) {
        CHECK(a.class_weights[k] == doctest::Approx(b.class_weights[k]).epsilon(1e-12));
        CHECK(a.class_weights[k] == doctest::Approx(c.class_weights[k]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(repeated_experiment(TheoryKind::Discrete, 0.5, 10), WrongTheoryError);
}

TEST_CASE("typical mass approaches one, the naive count does not") {
    const double q = 0.9;
    const double eps = 0.05;
    double previous = 0.0;
    for (std::int64_t n : {100, 1000, 10000}) {
        const double t = typical_measure(repeated_experiment(TheoryKind::Quantum, q, n), eps);
        CHECK(t >= hoeffding_floor(n, eps) - 1e-12);
        CHECK(t >= previous);
        previous = t;
        CHECK(naive_count_measure(n, q, eps) < 1e-10);
    }
    CHECK(previous > 0.999999);
    CHECK(naive_count_measure(10000, 0.5, 0.05) > 0.999);
}

TEST_CASE("measure is monotone in eps") {
    const auto agg = repeated_experiment(TheoryKind::Quantum, 0.35, 400);
    double previous = 0.0;
    for (double eps = 0.005; eps < 0.7; eps += 0.005) {
        const double t = typical_measure(agg, eps);
        CHECK(t >= previous);
        previous = t;
    }
    CHECK(previous == doctest::Approx(1.0));
}

TEST_CASE("hoeffding floor and preconditions") {
    CHECK(hoeffding_floor(100, 0.1) == doctest::Approx(1 - 2 * std::exp(-2.0)));
    CHECK(hoeffding_floor(1, 0.01) < 0);
    CHECK_THROWS_AS(repeated_experiment(TheoryKind::Quantum, 0.0, 10), PreconditionError);
    CHECK_THROWS_AS(repeated_experiment(TheoryKind::Quantum, 1.0, 10), PreconditionError);
    CHECK_THROWS_AS(repeated_experiment(TheoryKind::Quantum, 0.5, 0), PreconditionError);
    CHECK_THROWS_AS(repeated_experiment(TheoryKind::Quantum, 0.5, kMaxTrials + 1),
                    PreconditionError);
    const auto agg = repeated_experiment(TheoryKind::Quantum, 0.5, 10);
    CHECK_THROWS_AS(typical_measure(agg, 0.0), PreconditionError);
}
