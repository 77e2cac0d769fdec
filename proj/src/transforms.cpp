#include "mwprob/transforms.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace mwprob {

namespace {

bool by_column(const TransformEntry &a, const TransformEntry &b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
}

struct PairHash {
    std::size_t operator()(const std::pair<WorldLabel, WorldLabel> &p) const {
        return std::hash<WorldLabel>{}(p.first * 0x9e3779b97f4a7c15ULL ^
                                       p.second);
    }
};

/// Sparse accumulator that remembers how large the summed terms were, so
/// that exact cancellations can be told apart from genuine small values.
struct Accumulated {
    WorldLabel world;
    Amplitude value;
    double magnitude;
};

std::vector<StateEntry> merge_accumulated(std::vector<Accumulated> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const Accumulated &a, const Accumulated &b) {
                  return a.world < b.world;
              });
    std::vector<StateEntry> out;
    for (std::size_t i = 0; i < terms.size();) {
        std::size_t j = i;
        Amplitude sum{};
        double magnitude = 0.0;
        for (; j < terms.size() && terms[j].world == terms[i].world; ++j) {
            sum += terms[j].value;
            magnitude += terms[j].magnitude;
        }
        const double noise =
            static_cast<double>(4 + (j - i)) * DBL_EPSILON * magnitude;
        if (sum != Amplitude{} && std::abs(sum) > noise)
            out.push_back({terms[i].world, sum});
        i = j;
    }
    return out;
}

std::int64_t exact_integer(Amplitude value) {
    const double re = value.real();
    if (value.imag() != 0.0 || re != std::trunc(re) ||
        std::abs(re) > 9007199254740992.0)
        throw PreconditionError("discrete transform entry is not an integer");
    return static_cast<std::int64_t>(re);
}

WorldState apply_discrete(const LinearTransform &transform,
                          const WorldState &state) {
    std::vector<std::pair<WorldLabel, std::int64_t>> terms;
    const auto entries = state.entries();
    const auto counts = state.counts();
    for (std::size_t idx = 0; idx < entries.size(); ++idx) {
        const WorldLabel j = entries[idx].world;
        const auto col = transform.column(j);
        if (col.empty()) {
            if (transform.identity_outside())
                terms.emplace_back(j, counts[idx]);
            continue;
        }
        for (const auto &e : col) {
            std::int64_t product = 0;
            if (__builtin_mul_overflow(exact_integer(e.value), counts[idx],
                                       &product))
                throw Error("discrete copy number overflow");
            terms.emplace_back(e.row, product);
        }
    }
    std::sort(terms.begin(), terms.end());
    std::vector<std::pair<WorldLabel, std::int64_t>> merged;
    for (const auto &[w, c] : terms) {
        if (!merged.empty() && merged.back().first == w) {
            if (__builtin_add_overflow(merged.back().second, c,
                                       &merged.back().second))
                throw Error("discrete copy number overflow");
        } else {
            merged.emplace_back(w, c);
        }
    }
    std::erase_if(merged, [](const auto &p) { return p.second == 0; });
    return WorldState::discrete(std::move(merged));
}

/// Unbalanced Haar basis of the orthogonal complement of `u` within the
/// span of its support, emitted as columns assigned to `columns` in order.
void haar_complement(std::span<const StateEntry> u,
                     std::span<const double> prefix, std::size_t lo,
                     std::size_t hi, std::span<const WorldLabel> columns,
                     std::size_t &next, std::vector<TransformEntry> &out) {
    if (hi - lo < 2)
        return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const double left = prefix[mid] - prefix[lo];
    const double right = prefix[hi] - prefix[mid];
    const double total = left + right;
    const double scale_left = std::sqrt(right / (left * total));
    const double scale_right = -std::sqrt(left / (right * total));
    const WorldLabel col = columns[next++];
    for (std::size_t i = lo; i < hi; ++i)
        out.push_back({u[i].world, col,
                       u[i].amplitude * (i < mid ? scale_left : scale_right)});
    haar_complement(u, prefix, lo, mid, columns, next, out);
    haar_complement(u, prefix, mid, hi, columns, next, out);
}

} // namespace

LinearTransform::LinearTransform(std::vector<TransformEntry> entries,
                                 bool identity_outside)
    : entries_(std::move(entries)), identity_outside_(identity_outside) {
    std::sort(entries_.begin(), entries_.end(), by_column);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto &e = entries_[i];
        if (e.row > kMaxWorldLabel || e.col > kMaxWorldLabel)
            throw LabelOverflowError("world label exceeds 2^63-1");
        if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
            throw PreconditionError("non-finite transform entry");
        if (e.value == Amplitude{})
            throw PreconditionError("stored zero transform entry at (" +
                                    std::to_string(e.row) + "," +
                                    std::to_string(e.col) + ")");
        if (i > 0 && entries_[i - 1].row == e.row &&
            entries_[i - 1].col == e.col)
            throw PreconditionError("duplicate transform entry at (" +
                                    std::to_string(e.row) + "," +
                                    std::to_string(e.col) + ")");
    }
}

std::span<const TransformEntry> LinearTransform::column(WorldLabel col) const {
    auto lo = std::lower_bound(
        entries_.begin(), entries_.end(), col,
        [](const TransformEntry &e, WorldLabel c) { return e.col < c; });
    auto hi = lo;
    while (hi != entries_.end() && hi->col == col)
        ++hi;
    return {lo, hi};
}

Amplitude LinearTransform::at(WorldLabel row, WorldLabel col) const {
    const auto c = column(col);
    if (c.empty())
        return (identity_outside_ && row == col) ? Amplitude(1.0) : Amplitude{};
    for (const auto &e : c)
        if (e.row == row)
            return e.value;
    return {};
}

std::vector<WorldLabel> LinearTransform::acting_support() const {
    std::vector<WorldLabel> labels;
    labels.reserve(2 * entries_.size());
    for (const auto &e : entries_) {
        labels.push_back(e.row);
        labels.push_back(e.col);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

std::vector<WorldLabel> LinearTransform::stored_columns() const {
    std::vector<WorldLabel> cols;
    for (const auto &e : entries_)
        if (cols.empty() || cols.back() != e.col)
            cols.push_back(e.col);
    return cols;
}

LinearTransform compose(const LinearTransform &outer,
                        const LinearTransform &inner) {
    std::vector<Accumulated> terms;
    std::vector<TransformEntry> result;
    const bool identity_outside =
        outer.identity_outside() && inner.identity_outside();
    auto flush = [&](WorldLabel col) {
        const auto merged = merge_accumulated(std::move(terms));
        terms.clear();
        // Identity columns of the product need no storage.
        if (identity_outside && merged.size() == 1 &&
            merged.front().world == col &&
            merged.front().amplitude == Amplitude(1.0))
            return;
        for (const auto &e : merged)
            result.push_back({e.world, col, e.amplitude});
    };
    auto push_outer_column = [&](WorldLabel r, Amplitude scale) {
        const auto oc = outer.column(r);
        if (oc.empty()) {
            if (outer.identity_outside())
                terms.push_back({r, scale, std::abs(scale)});
            return;
        }
        for (const auto &o : oc)
            terms.push_back({o.row, o.value * scale, std::abs(o.value * scale)});
    };

    auto columns = inner.stored_columns();
    if (inner.identity_outside()) {
        for (auto c : outer.stored_columns())
            columns.push_back(c);
        std::sort(columns.begin(), columns.end());
        columns.erase(std::unique(columns.begin(), columns.end()),
                      columns.end());
    }
    for (auto col : columns) {
        const auto ic = inner.column(col);
        if (ic.empty()) {
            push_outer_column(col, 1.0);
        } else {
            for (const auto &e : ic)
                push_outer_column(e.row, e.value);
        }
        flush(col);
    }
    return LinearTransform(std::move(result), identity_outside);
}

std::optional<std::size_t> Partition::block_of(WorldLabel world) const {
    for (std::size_t b = 0; b < blocks.size(); ++b)
        if (std::binary_search(blocks[b].begin(), blocks[b].end(), world))
            return b;
    return std::nullopt;
}

bool Partition::refines(const Partition &coarser) const {
    std::unordered_map<WorldLabel, std::size_t> index;
    for (std::size_t b = 0; b < coarser.blocks.size(); ++b)
        for (auto w : coarser.blocks[b])
            index.emplace(w, b);
    for (const auto &block : blocks) {
        if (block.size() < 2)
            continue;
        auto first = index.find(block.front());
        if (first == index.end())
            return false;
        for (auto w : block) {
            auto it = index.find(w);
            if (it == index.end() || it->second != first->second)
                return false;
        }
    }
    return true;
}

ValidationReport validate_transform(TheoryKind theory,
                                    const LinearTransform &transform) {
    ValidationReport report;
    const auto entries = transform.entries();

    if (is_quantum_kind(theory)) {
        if (!transform.identity_outside())
            report.add("identity-outside", {}, 1.0);
        const auto support = transform.acting_support();
        // Columns of the acting subspace, including implicit identities.
        std::vector<TransformEntry> full(entries.begin(), entries.end());
        if (transform.identity_outside())
            for (auto w : support)
                if (!transform.has_column(w))
                    full.push_back({w, w, 1.0});

        auto gram_defect = [&](bool rows_as_groups) {
            // rows_as_groups: pairs of entries sharing a row give T^dag T;
            // pairs sharing a column give T T^dag.
            std::vector<TransformEntry> sorted = full;
            auto key = [&](const TransformEntry &e) {
                return rows_as_groups ? e.row : e.col;
            };
            auto other = [&](const TransformEntry &e) {
                return rows_as_groups ? e.col : e.row;
            };
            std::sort(sorted.begin(), sorted.end(),
                      [&](const TransformEntry &a, const TransformEntry &b) {
                          return key(a) != key(b) ? key(a) < key(b)
                                                  : other(a) < other(b);
                      });
            std::unordered_map<std::pair<WorldLabel, WorldLabel>, Amplitude,
                               PairHash>
                gram;
            for (std::size_t i = 0; i < sorted.size();) {
                std::size_t j = i;
                while (j < sorted.size() && key(sorted[j]) == key(sorted[i]))
                    ++j;
                for (std::size_t a = i; a < j; ++a)
                    for (std::size_t b = a; b < j; ++b) {
                        const Amplitude v =
                            rows_as_groups
                                ? std::conj(sorted[a].value) * sorted[b].value
                                : sorted[a].value * std::conj(sorted[b].value);
                        gram[{other(sorted[a]), other(sorted[b])}] += v;
                    }
                i = j;
            }
            double worst = 0.0;
            std::vector<WorldLabel> where;
            for (const auto &[ab, v] : gram) {
                const double d = std::abs(
                    v - (ab.first == ab.second ? Amplitude(1.0) : Amplitude{}));
                if (d > worst) {
                    worst = d;
                    where = {ab.first, ab.second};
                }
            }
            // Labels of the subspace whose diagonal entry never appeared.
            for (auto w : support)
                if (!gram.contains({w, w}) && 1.0 > worst) {
                    worst = 1.0;
                    where = {w, w};
                }
            return std::make_pair(worst, where);
        };
        if (auto [d, where] = gram_defect(true); d > tolerance::kUnitary)
            report.add("unitary:TdagT", where, d);
        if (auto [d, where] = gram_defect(false); d > tolerance::kUnitary)
            report.add("unitary:TTdag", where, d);
        return report;
    }

    if (!transform.identity_outside())
        report.add("identity-outside", {}, 1.0);
    for (std::size_t i = 0; i < entries.size();) {
        const WorldLabel col = entries[i].col;
        double sum = 0.0;
        long double integer_sum = 0.0L;
        for (; i < entries.size() && entries[i].col == col; ++i) {
            const auto &e = entries[i];
            if (e.value.imag() != 0.0)
                report.add("real-entry", {e.row, e.col},
                           std::abs(e.value.imag()));
            if (e.value.real() < 0.0)
                report.add("non-negative-entry", {e.row, e.col},
                           -e.value.real());
            if (theory == TheoryKind::Discrete &&
                e.value.real() != std::trunc(e.value.real()))
                report.add("integer-entry", {e.row, e.col},
                           std::abs(e.value.real() -
                                    std::round(e.value.real())));
            sum += e.value.real();
            integer_sum += e.value.real();
        }
        if (theory == TheoryKind::Stochastic &&
            std::abs(sum - 1.0) > tolerance::kNorm)
            report.add("column-sum", {col}, std::abs(sum - 1.0));
        if (theory == TheoryKind::Discrete &&
            integer_sum > static_cast<long double>(kMaxWorldLabel))
            report.add("finite-column-sum", {col},
                       static_cast<double>(integer_sum));
    }
    return report;
}

WorldState apply(const LinearTransform &transform, const WorldState &state) {
    if (state.theory() == TheoryKind::Discrete)
        return apply_discrete(transform, state);

    std::vector<Accumulated> terms;
    terms.reserve(state.size());
    for (const auto &s : state.entries()) {
        const auto col = transform.column(s.world);
        if (col.empty()) {
            if (transform.identity_outside())
                terms.push_back({s.world, s.amplitude, std::abs(s.amplitude)});
            continue;
        }
        for (const auto &e : col) {
            const Amplitude v = e.value * s.amplitude;
            terms.push_back({e.row, v, std::abs(v)});
        }
    }
    WorldState result(state.theory(), merge_accumulated(std::move(terms)));

    if (validate_state(state).valid()) {
        const auto report = validate_state(result);
        if (!report.valid())
            throw ClosureError("transform maps an allowed state outside the "
                               "theory (" +
                               report.violations.front().rule + ", " +
                               std::to_string(
                                   report.violations.front().magnitude) +
                               ")");
        if (state.theory() == TheoryKind::UnnormalisedQuantum) {
            double before = 0.0, after = 0.0;
            for (const auto &e : state.entries())
                before += std::norm(e.amplitude);
            for (const auto &e : result.entries())
                after += std::norm(e.amplitude);
            if (std::abs(after - before) > tolerance::kNorm * before)
                throw ClosureError("transform does not preserve the norm");
        }
    }
    return result;
}

Partition finest_partition(const LinearTransform &transform) {
    const auto labels = transform.acting_support();
    std::vector<std::size_t> parent(labels.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto index = [&](WorldLabel w) {
        return static_cast<std::size_t>(
            std::lower_bound(labels.begin(), labels.end(), w) -
            labels.begin());
    };
    for (const auto &e : transform.entries()) {
        auto a = find(index(e.row));
        auto b = find(index(e.col));
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
    // Roots are the smallest index of their component, so blocks come out
    // ordered by their smallest label.
    Partition partition;
    std::vector<std::size_t> block_index(labels.size(), SIZE_MAX);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto root = find(i);
        if (block_index[root] == SIZE_MAX) {
            block_index[root] = partition.blocks.size();
            partition.blocks.emplace_back();
        }
        partition.blocks[block_index[root]].push_back(labels[i]);
    }
    return partition;
}

LinearTransform make_swap(WorldLabel n, WorldLabel m) {
    if (n == m)
        throw PreconditionError("make_swap needs two distinct worlds");
    return LinearTransform({{n, m, 1.0}, {m, n, 1.0}});
}

std::vector<LinearTransform> make_three_swap(WorldLabel n, WorldLabel m,
                                             WorldLabel z) {
    if (n == m || n == z || m == z)
        throw PreconditionError("make_three_swap needs three distinct worlds");
    return {make_swap(z, m), make_swap(n, m), make_swap(n, z)};
}

LinearTransform complete_unitary(WorldLabel source,
                                 std::span<const StateEntry> target) {
    if (target.empty())
        throw PreconditionError("complete_unitary: empty target vector");
    std::vector<double> prefix(target.size() + 1, 0.0);
    for (std::size_t i = 0; i < target.size(); ++i)
        prefix[i + 1] = prefix[i] + std::norm(target[i].amplitude);
    if (std::abs(prefix.back() - 1.0) > tolerance::kUnitary)
        throw PreconditionError("complete_unitary: target is not a unit vector");

    std::vector<TransformEntry> out;
    for (const auto &t : target)
        out.push_back({t.world, source, t.amplitude});

    std::vector<WorldLabel> columns;
    bool source_in_target = false;
    for (const auto &t : target) {
        if (t.world == source)
            source_in_target = true;
        else
            columns.push_back(t.world);
    }
    std::size_t next = 0;
    if (!source_in_target)
        out.push_back({source, columns[next++], 1.0});
    haar_complement(target, prefix, 0, target.size(), columns, next, out);
    return LinearTransform(std::move(out));
}

LinearTransform make_merge(const WorldState &state, WorldLabel k) {
    if (k >= kMaxWorldLabel)
        throw LabelOverflowError("merge target k+1 exceeds 2^63-1");
    const WorldLabel into = k + 1;
    std::vector<StateEntry> tail;
    for (const auto &e : state.entries())
        if (e.world > k)
            tail.push_back(e);
    if (tail.empty())
        return LinearTransform::identity();

    if (is_quantum_kind(state.theory())) {
        double norm = 0.0;
        for (const auto &e : tail)
            norm += std::norm(e.amplitude);
        norm = std::sqrt(norm);
        for (auto &e : tail)
            e.amplitude /= norm;
        const auto v = complete_unitary(into, tail);
        std::vector<TransformEntry> adjoint;
        adjoint.reserve(v.entries().size());
        for (const auto &e : v.entries())
            adjoint.push_back({e.col, e.row, std::conj(e.value)});
        return LinearTransform(std::move(adjoint));
    }

    std::vector<TransformEntry> out;
    for (const auto &e : tail)
        if (e.world != into)
            out.push_back({into, e.world, 1.0});
    return LinearTransform(std::move(out));
}

LinearTransform make_dephase(const WorldState &state) {
    if (!is_quantum_kind(state.theory()))
        throw WrongTheoryError("dephasing needs a quantum-kind state");
    std::vector<TransformEntry> out;
    for (const auto &e : state.entries()) {
        const auto a = e.amplitude;
        if (a.imag() == 0.0 && a.real() > 0.0)
            continue;
        const Amplitude phase = (a.imag() == 0.0)
                                    ? Amplitude(-1.0)
                                    : std::polar(1.0, -std::arg(a));
        out.push_back({e.world, e.world, phase});
    }
    return LinearTransform(std::move(out));
}

WorldLabel BranchPlan::fan_start(WorldLabel source) const {
    return checked_label(world_count, static_cast<std::uint64_t>(stride),
                         source, 0);
}

Partition BranchPlan::partition() const {
    Partition p;
    for (const auto &w : worlds) {
        std::vector<WorldLabel> block{w.source};
        const auto start = fan_start(w.source);
        const auto used = w.whole + (w.remainder > 0.0 ? 1 : 0);
        for (std::int64_t l = 0; l < used; ++l)
            block.push_back(checked_label(start, 1, 0,
                                          static_cast<std::uint64_t>(l)));
        p.blocks.push_back(std::move(block));
    }
    return p;
}

std::int64_t BranchPlan::equal_worlds() const {
    std::int64_t sum = 0;
    for (const auto &w : worlds)
        sum += w.whole;
    return sum;
}

std::int64_t BranchPlan::remainder_worlds() const {
    return std::count_if(worlds.begin(), worlds.end(),
                         [](const BranchWorld &w) { return w.remainder > 0.0; });
}

BranchPlan plan_branching(const WorldState &state, std::int64_t resolution,
                          std::optional<std::uint64_t> world_count) {
    if (state.theory() == TheoryKind::Discrete)
        throw WrongTheoryError("discrete states have no branching plan");
    if (resolution < 1)
        throw PreconditionError("resolution M must be at least 1");

    BranchPlan plan;
    plan.theory = state.theory();
    plan.resolution = resolution;
    plan.world_count = world_count.value_or(state.bound());
    if (state.bound() > plan.world_count)
        throw PreconditionError("state has support beyond N = " +
                                std::to_string(plan.world_count));

    const double m = static_cast<double>(resolution);
    double total = 0.0;
    std::int64_t needed = 0;
    for (const auto &e : state.entries()) {
        BranchWorld w;
        w.source = e.world;
        if (is_quantum_kind(state.theory())) {
            w.weight = std::norm(e.amplitude);
            w.phase = std::arg(e.amplitude);
        } else {
            w.weight = e.amplitude.real();
        }
        const double scaled = m * w.weight;
        const double nearest = std::round(scaled);
        if (std::abs(scaled - nearest) <= kPlanSnap) {
            w.whole = static_cast<std::int64_t>(nearest);
            w.remainder = 0.0;
        } else {
            w.whole = static_cast<std::int64_t>(std::floor(scaled));
            w.remainder = scaled - static_cast<double>(w.whole);
        }
        total += w.weight;
        needed = std::max(needed, w.whole + (w.remainder > 0.0 ? 1 : 0));
        plan.worlds.push_back(w);
    }
    plan.total_weight = total;
    if (state.theory() == TheoryKind::UnnormalisedQuantum) {
        const double scaled = m * total;
        const double nearest = std::round(scaled);
        plan.stride = static_cast<std::int64_t>(
            std::abs(scaled - nearest) <= kPlanSnap ? nearest
                                                    : std::ceil(scaled));
    } else {
        plan.stride = resolution;
    }
    // Only reachable when a normalised state is off by rounding.
    plan.stride = std::max(plan.stride, needed);
    if (!plan.worlds.empty())
        (void)checked_label(plan.world_count,
                            static_cast<std::uint64_t>(plan.stride),
                            plan.worlds.back().source,
                            static_cast<std::uint64_t>(plan.stride));
    return plan;
}

namespace {

std::vector<StateEntry> fan_vector(const BranchPlan &plan,
                                   const BranchWorld &w, bool quantum) {
    const double denom = static_cast<double>(w.whole) + w.remainder;
    const double equal = quantum ? 1.0 / std::sqrt(denom) : 1.0 / denom;
    const double rest =
        quantum ? std::sqrt(w.remainder / denom) : w.remainder / denom;
    const WorldLabel start = plan.fan_start(w.source);
    std::vector<StateEntry> fan;
    fan.reserve(static_cast<std::size_t>(w.whole) + 1);
    for (std::int64_t l = 0; l < w.whole; ++l)
        fan.push_back({start + static_cast<WorldLabel>(l), equal});
    if (w.remainder > 0.0)
        fan.push_back({start + static_cast<WorldLabel>(w.whole), rest});
    return fan;
}

} // namespace

LinearTransform make_branch(const BranchPlan &plan) {
    if (plan.theory == TheoryKind::Discrete)
        throw WrongTheoryError("discrete theory has no branching map");
    const bool quantum = is_quantum_kind(plan.theory);
    std::vector<TransformEntry> out;
    for (const auto &w : plan.worlds) {
        auto fan = fan_vector(plan, w, quantum);
        if (quantum) {
            const auto block = complete_unitary(w.source, fan);
            out.insert(out.end(), block.entries().begin(),
                       block.entries().end());
        } else {
            for (const auto &f : fan)
                out.push_back({f.world, w.source, f.amplitude});
        }
    }
    return LinearTransform(std::move(out));
}

LinearTransform branch_action(const BranchPlan &plan) {
    if (plan.theory == TheoryKind::Discrete)
        throw WrongTheoryError("discrete theory has no branching map");
    const bool quantum = is_quantum_kind(plan.theory);
    std::vector<TransformEntry> out;
    for (const auto &w : plan.worlds)
        for (const auto &f : fan_vector(plan, w, quantum))
            out.push_back({f.world, w.source, f.amplitude});
    return LinearTransform(std::move(out), false);
}

LinearTransform make_comparator(const WorldState &state, WorldLabel l,
                                WorldLabel k, WorldLabel z) {
    if (state.theory() == TheoryKind::Discrete)
        throw WrongTheoryError(
            "larger-amplitude comparison does not hold in discrete theory");
    if (l == k || l == z || k == z)
        throw PreconditionError("comparator needs distinct worlds l, k, z");
    if (state.contains(z))
        throw PreconditionError("comparator work world z must be empty");
    const Amplitude vl = state.amplitude(l);
    const Amplitude vk = state.amplitude(k);
    if (!(std::abs(vl) > std::abs(vk)))
        throw PreconditionError("comparator needs |v_l| > |v_k|");

    std::vector<TransformEntry> out;
    const Amplitude ratio = vk / vl;
    if (is_quantum_kind(state.theory())) {
        const double s = std::sqrt(std::max(0.0, 1.0 - std::norm(ratio)));
        if (ratio != Amplitude{}) {
            out.push_back({l, l, ratio});
            out.push_back({z, z, -std::conj(ratio)});
        }
        out.push_back({z, l, s});
        out.push_back({l, z, s});
    } else {
        const double r = ratio.real();
        if (r != 0.0)
            out.push_back({l, l, r});
        out.push_back({z, l, 1.0 - r});
    }
    return LinearTransform(std::move(out));
}

} // namespace mwprob
