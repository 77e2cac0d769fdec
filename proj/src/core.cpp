#include "mwprob/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

namespace mwprob {

std::string_view to_string(TheoryKind theory) {
    switch (theory) {
    case TheoryKind::Quantum:
        return "quantum";
    case TheoryKind::UnnormalisedQuantum:
        return "unnormalised";
    case TheoryKind::Stochastic:
        return "stochastic";
    case TheoryKind::Discrete:
        return "discrete";
    }
    return "unknown";
}

std::optional<TheoryKind> parse_theory(std::string_view name) {
    if (name == "quantum")
        return TheoryKind::Quantum;
    if (name == "unnormalised" || name == "unnormalized" ||
        name == "unnormalised-quantum" || name == "unnormalized-quantum")
        return TheoryKind::UnnormalisedQuantum;
    if (name == "stochastic")
        return TheoryKind::Stochastic;
    if (name == "discrete")
        return TheoryKind::Discrete;
    return std::nullopt;
}

WorldLabel checked_label(WorldLabel base, std::uint64_t stride,
                         std::uint64_t index, std::uint64_t offset) {
    unsigned __int128 value = static_cast<unsigned __int128>(stride) * index;
    value += base;
    value += offset;
    if (value > kMaxWorldLabel)
        throw LabelOverflowError("world label exceeds 2^63-1");
    return static_cast<WorldLabel>(value);
}

void ValidationReport::add(std::string rule, std::vector<WorldLabel> labels,
                           double magnitude) {
    violations.push_back({std::move(rule), std::move(labels), magnitude});
}

void ValidationReport::append(const ValidationReport &other) {
    violations.insert(violations.end(), other.violations.begin(),
                      other.violations.end());
}

namespace {

bool finite(Amplitude a) {
    return std::isfinite(a.real()) && std::isfinite(a.imag());
}

void check_sorted_unique(std::span<const StateEntry> entries) {
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i - 1].world == entries[i].world)
            throw PreconditionError("duplicate world label " +
                                    std::to_string(entries[i].world));
    }
}

} // namespace

WorldState::WorldState(TheoryKind theory, std::vector<StateEntry> entries)
    : theory_(theory), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const StateEntry &a, const StateEntry &b) {
                  return a.world < b.world;
              });
    check_sorted_unique(entries_);
    for (const auto &e : entries_) {
        if (e.world > kMaxWorldLabel)
            throw LabelOverflowError("world label exceeds 2^63-1");
        if (!finite(e.amplitude))
            throw PreconditionError("non-finite amplitude at world " +
                                    std::to_string(e.world));
        if (e.amplitude == Amplitude{})
            throw PreconditionError(
                "stored zero amplitude at world " + std::to_string(e.world) +
                " (absent worlds have zero amplitude)");
    }
    if (theory_ == TheoryKind::Discrete) {
        counts_.reserve(entries_.size());
        for (const auto &e : entries_) {
            const double re = e.amplitude.real();
            if (e.amplitude.imag() != 0.0 || re != std::trunc(re) ||
                std::abs(re) > 9007199254740992.0)
                throw PreconditionError(
                    "discrete amplitude at world " + std::to_string(e.world) +
                    " is not an exact integer");
            counts_.push_back(static_cast<std::int64_t>(re));
        }
    }
}

WorldState::WorldState(
    TheoryKind theory,
    std::initializer_list<std::pair<WorldLabel, Amplitude>> entries)
    : WorldState(theory, [&] {
          std::vector<StateEntry> v;
          v.reserve(entries.size());
          for (const auto &[w, a] : entries)
              v.push_back({w, a});
          return v;
      }()) {}

WorldState
WorldState::discrete(std::vector<std::pair<WorldLabel, std::int64_t>> counts) {
    std::sort(counts.begin(), counts.end());
    WorldState s;
    s.theory_ = TheoryKind::Discrete;
    for (const auto &[w, c] : counts) {
        if (w > kMaxWorldLabel)
            throw LabelOverflowError("world label exceeds 2^63-1");
        if (c == 0)
            throw PreconditionError("stored zero count at world " +
                                    std::to_string(w));
        if (!s.entries_.empty() && s.entries_.back().world == w)
            throw PreconditionError("duplicate world label " +
                                    std::to_string(w));
        s.entries_.push_back({w, Amplitude(static_cast<double>(c), 0.0)});
        s.counts_.push_back(c);
    }
    return s;
}

Amplitude WorldState::amplitude(WorldLabel world) const {
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), world,
        [](const StateEntry &e, WorldLabel w) { return e.world < w; });
    if (it == entries_.end() || it->world != world)
        return {};
    return it->amplitude;
}

bool WorldState::contains(WorldLabel world) const {
    return amplitude(world) != Amplitude{};
}

std::int64_t WorldState::count(WorldLabel world) const {
    if (theory_ != TheoryKind::Discrete)
        throw WrongTheoryError("count() is only defined for discrete states");
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), world,
        [](const StateEntry &e, WorldLabel w) { return e.world < w; });
    if (it == entries_.end() || it->world != world)
        return 0;
    return counts_[static_cast<std::size_t>(it - entries_.begin())];
}

WorldLabel WorldState::bound() const {
    return entries_.empty() ? 0 : entries_.back().world + 1;
}

WorldState WorldState::with_theory(TheoryKind theory) const {
    return WorldState(theory, entries_);
}

ProbabilityDistribution::ProbabilityDistribution(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry &a, const Entry &b) { return a.world < b.world; });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!std::isfinite(entries[i].p))
            throw PreconditionError("non-finite probability at world " +
                                    std::to_string(entries[i].world));
        if (i > 0 && entries[i - 1].world == entries[i].world)
            throw PreconditionError("duplicate world label " +
                                    std::to_string(entries[i].world));
    }
    entries_.reserve(entries.size());
    for (const auto &e : entries)
        if (e.p != 0.0)
            entries_.push_back(e);
}

ProbabilityDistribution::ProbabilityDistribution(
    std::initializer_list<std::pair<WorldLabel, double>> entries)
    : ProbabilityDistribution([&] {
          std::vector<Entry> v;
          for (const auto &[w, p] : entries)
              v.push_back({w, p});
          return v;
      }()) {}

double ProbabilityDistribution::probability(WorldLabel world) const {
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), world,
        [](const Entry &e, WorldLabel w) { return e.world < w; });
    return (it == entries_.end() || it->world != world) ? 0.0 : it->p;
}

double ProbabilityDistribution::total() const {
    double sum = 0.0;
    for (const auto &e : entries_)
        sum += e.p;
    return sum;
}

ValidationReport validate_state(const WorldState &state) {
    ValidationReport report;
    const auto entries = state.entries();
    switch (state.theory()) {
    case TheoryKind::Quantum:
    case TheoryKind::UnnormalisedQuantum: {
        double norm = 0.0;
        for (const auto &e : entries)
            norm += std::norm(e.amplitude);
        if (state.theory() == TheoryKind::Quantum) {
            if (std::abs(norm - 1.0) > tolerance::kNorm)
                report.add("normalization", {}, std::abs(norm - 1.0));
        } else if (!(norm > 0.0) || !std::isfinite(norm)) {
            report.add("positive-finite-norm", {}, norm);
        }
        break;
    }
    case TheoryKind::Stochastic: {
        double sum = 0.0;
        for (const auto &e : entries) {
            if (e.amplitude.imag() != 0.0)
                report.add("real-amplitude", {e.world},
                           std::abs(e.amplitude.imag()));
            if (e.amplitude.real() < 0.0)
                report.add("non-negative", {e.world}, -e.amplitude.real());
            sum += e.amplitude.real();
        }
        if (std::abs(sum - 1.0) > tolerance::kNorm)
            report.add("normalization", {}, std::abs(sum - 1.0));
        break;
    }
    case TheoryKind::Discrete: {
        const auto counts = state.counts();
        std::int64_t sum = 0;
        bool overflow = false;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] < 0)
                report.add("non-negative-integer", {entries[i].world},
                           static_cast<double>(-counts[i]));
            else if (__builtin_add_overflow(sum, counts[i], &sum))
                overflow = true;
        }
        if (overflow)
            report.add("finite-sum", {}, std::numeric_limits<double>::infinity());
        if (entries.empty())
            report.add("non-empty", {}, 0.0);
        break;
    }
    }
    return report;
}

ValidationReport validate_distribution(const ProbabilityDistribution &dist) {
    ValidationReport report;
    double sum = 0.0;
    for (const auto &e : dist.entries()) {
        if (e.p < 0.0)
            report.add("non-negative", {e.world}, -e.p);
        else if (e.p > 1.0 + tolerance::kNorm)
            report.add("at-most-one", {e.world}, e.p - 1.0);
        sum += e.p;
    }
    if (std::abs(sum - 1.0) > tolerance::kNorm)
        report.add("normalization", {}, std::abs(sum - 1.0));
    return report;
}

SupportInfo support(const WorldState &state) {
    SupportInfo info;
    info.labels.reserve(state.size());
    for (const auto &e : state.entries())
        info.labels.push_back(e.world);
    info.bound = state.bound();
    return info;
}

double total_weight(const WorldState &state) {
    const auto report = validate_state(state);
    if (!report.valid())
        throw PreconditionError("total_weight of an invalid state (" +
                                report.violations.front().rule + ")");
    double total = 0.0;
    if (is_quantum_kind(state.theory())) {
        for (const auto &e : state.entries())
            total += std::norm(e.amplitude);
    } else if (state.theory() == TheoryKind::Discrete) {
        std::int64_t sum = 0;
        for (auto c : state.counts())
            sum += c;
        total = static_cast<double>(sum);
    } else {
        for (const auto &e : state.entries())
            total += e.amplitude.real();
    }
    return total;
}

std::string state_digest(const WorldState &state) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&hash](std::uint64_t word) {
        for (int i = 0; i < 8; ++i) {
            hash ^= (word >> (8 * i)) & 0xffU;
            hash *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(state.theory()));
    for (const auto &e : state.entries()) {
        mix(e.world);
        mix(std::bit_cast<std::uint64_t>(e.amplitude.real()));
        mix(std::bit_cast<std::uint64_t>(e.amplitude.imag()));
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace mwprob
