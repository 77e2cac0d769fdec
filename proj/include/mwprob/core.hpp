#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mwprob {

/// Label of a world |n>. Labels are capped at 2^63 - 1 so that branching
/// arithmetic can detect overflow instead of wrapping.
using WorldLabel = std::uint64_t;
inline constexpr WorldLabel kMaxWorldLabel =
    static_cast<WorldLabel>(std::numeric_limits<std::int64_t>::max());

using Amplitude = std::complex<double>;

namespace tolerance {
inline constexpr double kNorm = 1e-9;
inline constexpr double kUnitary = 1e-9;
inline constexpr double kAxiom = 1e-8;
inline constexpr double kFlow = 1e-8;
/// Foreign input entries at or below this magnitude are treated as zero.
inline constexpr double kInputZero = 1e-12;
} // namespace tolerance

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation does not hold.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

class WrongTheoryError : public Error {
  public:
    using Error::Error;
};

class LabelOverflowError : public Error {
  public:
    using Error::Error;
};

/// A transform mapped an allowed state outside the theory's state space.
class ClosureError : public Error {
  public:
    using Error::Error;
};

enum class TheoryKind { Quantum, UnnormalisedQuantum, Stochastic, Discrete };

std::string_view to_string(TheoryKind theory);
std::optional<TheoryKind> parse_theory(std::string_view name);

/// Quantum and unnormalised quantum theories share unitary dynamics.
constexpr bool is_quantum_kind(TheoryKind theory) {
    return theory == TheoryKind::Quantum ||
           theory == TheoryKind::UnnormalisedQuantum;
}

/// Checked label arithmetic; throws LabelOverflowError past kMaxWorldLabel.
WorldLabel checked_label(WorldLabel base, std::uint64_t stride,
                         std::uint64_t index, std::uint64_t offset);

struct Violation {
    std::string rule;
    std::vector<WorldLabel> labels;
    double magnitude = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool valid() const { return violations.empty(); }
    void add(std::string rule, std::vector<WorldLabel> labels,
             double magnitude);
    void append(const ValidationReport &other);
};

struct StateEntry {
    WorldLabel world = 0;
    Amplitude amplitude;

    friend bool operator==(const StateEntry &, const StateEntry &) = default;
};

/**
 * A many-worlds state: a sparse vector of amplitudes over world labels,
 * tagged with the theory it belongs to.
 *
 * Entries are kept sorted by label and never hold an exact zero, so a world
 * has zero amplitude exactly when it is absent. Discrete states additionally
 * keep their copy numbers as exact integers; amplitude() mirrors them as
 * doubles for generic code.
 *
 * Construction only enforces representation invariants (no zeros, no
 * duplicates, finite values). Theory-level invariants such as normalisation
 * are checked by validate_state, so invalid states can still be reported on.
 */
class WorldState {
  public:
    WorldState(TheoryKind theory, std::vector<StateEntry> entries);
    WorldState(TheoryKind theory,
               std::initializer_list<std::pair<WorldLabel, Amplitude>> entries);

    static WorldState
    discrete(std::vector<std::pair<WorldLabel, std::int64_t>> counts);

    TheoryKind theory() const { return theory_; }
    std::span<const StateEntry> entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    Amplitude amplitude(WorldLabel world) const;
    bool contains(WorldLabel world) const;

    /// Exact copy number of a world; discrete theory only.
    std::int64_t count(WorldLabel world) const;
    std::span<const std::int64_t> counts() const { return counts_; }

    /// One past the largest supported label (0 for an empty state).
    WorldLabel bound() const;

    /// Same entries reinterpreted under another theory tag.
    WorldState with_theory(TheoryKind theory) const;

    friend bool operator==(const WorldState &, const WorldState &) = default;

  private:
    WorldState() = default;

    TheoryKind theory_ = TheoryKind::Quantum;
    std::vector<StateEntry> entries_;
    std::vector<std::int64_t> counts_;
};

/// Probability distribution over worlds; zero entries are not stored.
class ProbabilityDistribution {
  public:
    struct Entry {
        WorldLabel world = 0;
        double p = 0.0;
        friend bool operator==(const Entry &, const Entry &) = default;
    };

    ProbabilityDistribution() = default;
    explicit ProbabilityDistribution(std::vector<Entry> entries);
    ProbabilityDistribution(
        std::initializer_list<std::pair<WorldLabel, double>> entries);

    std::span<const Entry> entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    double probability(WorldLabel world) const;
    double total() const;

    friend bool operator==(const ProbabilityDistribution &,
                           const ProbabilityDistribution &) = default;

  private:
    std::vector<Entry> entries_;
};

ValidationReport validate_state(const WorldState &state);
ValidationReport validate_distribution(const ProbabilityDistribution &dist);

struct SupportInfo {
    std::vector<WorldLabel> labels;
    bool bounded = true;
    /// Minimal N with v_n = 0 for all n >= N.
    WorldLabel bound = 0;
};

SupportInfo support(const WorldState &state);

/// sum |v_n|^2 for quantum kinds, sum v_n for stochastic and discrete.
/// Throws PreconditionError for an invalid state.
double total_weight(const WorldState &state);

/// 64-bit FNV-1a digest over labels and amplitude bit patterns.
std::string state_digest(const WorldState &state);

} // namespace mwprob
