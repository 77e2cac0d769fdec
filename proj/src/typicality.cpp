#include "mwprob/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mwprob {

namespace {

constexpr std::int64_t kRecurrenceLimit = 1000;

std::vector<double> iterated(double q, std::int64_t n) {
    std::vector<double> w{1.0};
    w.reserve(static_cast<std::size_t>(n) + 1);
    for (std::int64_t t = 0; t < n; ++t) {
        w.push_back(0.0);
        for (std::size_t k = w.size() - 1; k > 0; --k)
            w[k] = w[k] * (1.0 - q) + w[k - 1] * q;
        w[0] *= 1.0 - q;
    }
    return w;
}

std::vector<double> log_space(double q, std::int64_t n) {
    const auto size = static_cast<std::size_t>(n) + 1;
    const double dn = static_cast<double>(n);
    auto mode = static_cast<std::int64_t>(std::floor((dn + 1.0) * q));
    mode = std::min(mode, n);
    const double odds = std::log(q) - std::log1p(-q);

    std::vector<double> logs(size);
    const auto km = static_cast<double>(mode);
    logs[static_cast<std::size_t>(mode)] =
        std::lgamma(dn + 1.0) - std::lgamma(km + 1.0) -
        std::lgamma(dn - km + 1.0) + km * std::log(q) +
        (dn - km) * std::log1p(-q);
    for (std::int64_t k = mode; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        logs[i + 1] = logs[i] +
                      std::log((dn - static_cast<double>(k)) /
                               (static_cast<double>(k) + 1.0)) +
                      odds;
    }
    for (std::int64_t k = mode; k > 0; --k) {
        const auto i = static_cast<std::size_t>(k);
        logs[i - 1] = logs[i] -
                      std::log((dn - static_cast<double>(k) + 1.0) /
                               static_cast<double>(k)) -
                      odds;
    }
    std::vector<double> w(size);
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i)
        total += w[i] = std::exp(logs[i]);
    for (auto &x : w)
        x /= total;
    return w;
}

std::vector<double> classes(double q, std::int64_t n) {
    if (!(q > 0.0 && q < 1.0))
        throw PreconditionError("q must lie in (0, 1)");
    if (n < 1 || n > kMaxTrials)
        throw PreconditionError("n must lie in [1, " +
                                std::to_string(kMaxTrials) + "]");
    return n <= kRecurrenceLimit ? iterated(q, n) : log_space(q, n);
}

double window_mass(const std::vector<double> &w, double q, double eps) {
    if (!(eps > 0.0))
        throw PreconditionError("eps must be positive");
    const double n = static_cast<double>(w.size() - 1);
    // Slack keeps boundary classes such as k/n - q = eps exactly.
    const double radius = n * eps * (1.0 + 1e-12);
    double mass = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        if (std::abs(static_cast<double>(k) - n * q) <= radius)
            mass += w[k];
    return mass;
}

} // namespace

AggregatedBranchState repeated_experiment(TheoryKind theory, double q,
                                          std::int64_t n) {
    if (theory == TheoryKind::Discrete)
        throw WrongTheoryError("discrete theory has no branch weights");
    return {theory, n, q, classes(q, n)};
}

double typical_measure(const AggregatedBranchState &agg, double eps) {
    return window_mass(agg.class_weights, agg.q, eps);
}

double naive_count_measure(std::int64_t n, double q, double eps) {
    if (!(q > 0.0 && q < 1.0))
        throw PreconditionError("q must lie in (0, 1)");
    return window_mass(classes(0.5, n), q, eps);
}

double hoeffding_floor(std::int64_t n, double eps) {
    return 1.0 - 2.0 * std::exp(-2.0 * static_cast<double>(n) * eps * eps);
}

} // namespace mwprob
