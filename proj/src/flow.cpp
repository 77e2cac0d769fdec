#include "mwprob/flow.hpp"

#include "mwprob/probability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace mwprob {

namespace detail {

PushRelabel::PushRelabel(std::size_t nodes)
    : graph_(nodes), excess_(nodes, 0), height_(nodes, 0),
      count_(2 * nodes + 1, 0), current_(nodes, 0), active_(nodes, false) {}

std::size_t PushRelabel::add_edge(std::size_t from, std::size_t to,
                                  std::int64_t capacity) {
    graph_[from].push_back({to, graph_[to].size(), capacity, 0});
    graph_[to].push_back({from, graph_[from].size() - 1, 0, 0});
    edge_index_.emplace_back(from, graph_[from].size() - 1);
    return edge_index_.size() - 1;
}

std::int64_t PushRelabel::flow(std::size_t edge) const {
    const auto [node, slot] = edge_index_[edge];
    return graph_[node][slot].flow;
}

void PushRelabel::push(std::size_t u, Edge &e) {
    const std::int64_t amount = std::min(excess_[u], e.capacity - e.flow);
    if (amount <= 0 || height_[u] != height_[e.to] + 1)
        return;
    e.flow += amount;
    graph_[e.to][e.reverse].flow -= amount;
    excess_[u] -= amount;
    excess_[e.to] += amount;
    if (!active_[e.to] && excess_[e.to] > 0) {
        active_[e.to] = true;
        queue_.push_back(e.to);
    }
}

void PushRelabel::gap(std::size_t h) {
    const std::size_t n = graph_.size();
    for (std::size_t v = 0; v < n; ++v) {
        if (height_[v] < h || height_[v] >= n)
            continue;
        --count_[height_[v]];
        height_[v] = n + 1;
        ++count_[height_[v]];
        current_[v] = 0;
    }
}

void PushRelabel::relabel(std::size_t u) {
    const std::size_t n = graph_.size();
    const std::size_t old = height_[u];
    std::size_t lowest = 2 * n;
    for (const auto &e : graph_[u])
        if (e.capacity - e.flow > 0)
            lowest = std::min(lowest, height_[e.to] + 1);
    --count_[old];
    height_[u] = lowest;
    ++count_[lowest];
    current_[u] = 0;
    if (count_[old] == 0 && old < n)
        gap(old);
}

std::int64_t PushRelabel::max_flow(std::size_t source, std::size_t sink) {
    const std::size_t n = graph_.size();
    height_[source] = n;
    count_[0] = n - 1;
    count_[n] = 1;
    active_[source] = active_[sink] = true;
    // Saturate the source edges; the height rule does not apply here.
    for (auto &e : graph_[source]) {
        if (e.capacity <= 0)
            continue;
        e.flow = e.capacity;
        graph_[e.to][e.reverse].flow = -e.capacity;
        excess_[e.to] += e.capacity;
        excess_[source] -= e.capacity;
        if (!active_[e.to]) {
            active_[e.to] = true;
            queue_.push_back(e.to);
        }
    }
    while (head_ < queue_.size()) {
        const std::size_t u = queue_[head_++];
        active_[u] = false;
        if (u == source || u == sink)
            continue;
        while (excess_[u] > 0) {
            if (current_[u] == graph_[u].size()) {
                relabel(u);
                if (height_[u] >= 2 * n)
                    break;
                continue;
            }
            auto &e = graph_[u][current_[u]];
            if (e.capacity - e.flow > 0 && height_[u] == height_[e.to] + 1)
                push(u, e);
            else
                ++current_[u];
        }
    }
    return excess_[sink];
}

std::vector<bool> PushRelabel::source_side(std::size_t source) const {
    std::vector<bool> seen(graph_.size(), false);
    std::vector<std::size_t> stack{source};
    seen[source] = true;
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (const auto &e : graph_[u])
            if (e.capacity - e.flow > 0 && !seen[e.to]) {
                seen[e.to] = true;
                stack.push_back(e.to);
            }
    }
    return seen;
}

} // namespace detail

ConditionalDistribution::ConditionalDistribution(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry &a, const Entry &b) {
                  return a.from != b.from ? a.from < b.from : a.to < b.to;
              });
    for (std::size_t i = 1; i < entries_.size(); ++i)
        if (entries_[i].from == entries_[i - 1].from &&
            entries_[i].to == entries_[i - 1].to)
            throw PreconditionError("duplicate conditional entry");
    std::erase_if(entries_, [](const Entry &e) { return e.p == 0.0; });
}

double ConditionalDistribution::at(WorldLabel to, WorldLabel from) const {
    for (const auto &e : entries_)
        if (e.from == from && e.to == to)
            return e.p;
    return 0.0;
}

ConditionalDistribution
ConditionalDistribution::from_transform(const LinearTransform &t) {
    std::vector<Entry> out;
    for (const auto &e : t.entries())
        out.push_back({e.row, e.col, e.value.real()});
    return ConditionalDistribution(std::move(out));
}

namespace {

std::vector<WorldLabel> allowed_targets(const LinearTransform &t,
                                        WorldLabel from) {
    std::vector<WorldLabel> out;
    const auto col = t.column(from);
    if (col.empty()) {
        if (t.identity_outside())
            out.push_back(from);
        return out;
    }
    for (const auto &e : col)
        out.push_back(e.row);
    return out;
}

std::int64_t scaled(double p) {
    return static_cast<std::int64_t>(std::llround(p * kFlowScale));
}

} // namespace

FlowResult solve_flow(const LinearTransform &transform,
                      const ProbabilityDistribution &p,
                      const ProbabilityDistribution &p_prime) {
    for (const auto *dist : {&p, &p_prime}) {
        const auto report = validate_distribution(*dist);
        if (!report.valid())
            throw PreconditionError("solve_flow needs normalised "
                                    "distributions (" +
                                    report.violations.front().rule + ")");
    }

    std::vector<WorldLabel> columns;
    for (const auto &e : p.entries())
        columns.push_back(e.world);
    std::map<WorldLabel, std::size_t> rows;
    std::vector<std::vector<WorldLabel>> targets(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        targets[c] = allowed_targets(transform, columns[c]);
        for (auto i : targets[c])
            rows.emplace(i, 0);
    }
    for (const auto &e : p_prime.entries())
        rows.emplace(e.world, 0);
    std::size_t next = 2 + columns.size();
    for (auto &[label, node] : rows)
        node = next++;

    constexpr std::size_t source = 0, sink = 1;
    constexpr std::int64_t unbounded = std::int64_t{1} << 60;
    detail::PushRelabel network(next);
    std::int64_t supply = 0;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto cap = scaled(p.entries()[c].p);
        supply += cap;
        network.add_edge(source, 2 + c, cap);
    }
    std::vector<std::vector<std::size_t>> middle(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c)
        for (auto i : targets[c])
            middle[c].push_back(
                network.add_edge(2 + c, rows.at(i), unbounded));
    for (const auto &e : p_prime.entries())
        network.add_edge(rows.at(e.world), sink, scaled(e.p));

    const std::int64_t flow = network.max_flow(source, sink);
    FlowResult result;
    result.max_flow = static_cast<double>(flow) / kFlowScale;
    const double shortfall = static_cast<double>(supply - flow) / kFlowScale;

    if (shortfall > tolerance::kFlow) {
        const auto side = network.source_side(source);
        FlowCut cut;
        double mass = 0.0;
        for (std::size_t c = 0; c < columns.size(); ++c)
            if (side[2 + c]) {
                cut.columns.push_back(columns[c]);
                mass += p.entries()[c].p;
            }
        for (const auto &[label, node] : rows)
            if (side[node]) {
                cut.targets.push_back(label);
                mass -= p_prime.probability(label);
            }
        cut.deficit = mass;
        result.cut = std::move(cut);
        return result;
    }

    result.feasible = true;
    std::vector<ConditionalDistribution::Entry> entries;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        std::int64_t out = 0;
        for (auto edge : middle[c])
            out += network.flow(edge);
        const auto &tgt = targets[c];
        if (out == 0) {
            for (auto i : tgt)
                entries.push_back(
                    {i, columns[c], 1.0 / static_cast<double>(tgt.size())});
            continue;
        }
        for (std::size_t k = 0; k < tgt.size(); ++k) {
            const auto f = network.flow(middle[c][k]);
            if (f > 0)
                entries.push_back({tgt[k], columns[c],
                                   static_cast<double>(f) /
                                       static_cast<double>(out)});
        }
    }
    // Columns carrying no probability get the uniform completion.
    for (auto j : transform.stored_columns()) {
        if (p.probability(j) != 0.0)
            continue;
        const auto tgt = allowed_targets(transform, j);
        for (auto i : tgt)
            entries.push_back({i, j, 1.0 / static_cast<double>(tgt.size())});
    }
    result.conditional = ConditionalDistribution(std::move(entries));
    return result;
}

ValidationReport verify_flow(const LinearTransform &transform,
                             const ProbabilityDistribution &p,
                             const ProbabilityDistribution &p_prime,
                             const ConditionalDistribution &conditional,
                             double tol) {
    ValidationReport report;
    std::map<WorldLabel, double> column_sums;
    std::map<WorldLabel, double> pushed;
    for (const auto &e : conditional.entries()) {
        if (transform.at(e.to, e.from) == Amplitude{})
            report.add("support", {e.to, e.from}, e.p);
        if (e.p < 0.0 || e.p > 1.0 + tol)
            report.add("range", {e.to, e.from}, e.p);
        column_sums[e.from] += e.p;
        pushed[e.to] += e.p * p.probability(e.from);
    }
    for (const auto &e : p.entries()) {
        const double sum =
            column_sums.contains(e.world) ? column_sums[e.world] : 0.0;
        if (std::abs(sum - 1.0) > tol)
            report.add("column-stochastic", {e.world}, std::abs(sum - 1.0));
    }
    for (const auto &e : p_prime.entries())
        pushed.try_emplace(e.world, 0.0);
    for (const auto &[world, value] : pushed) {
        const double gap = std::abs(value - p_prime.probability(world));
        if (gap > tol)
            report.add("marginal", {world}, gap);
    }
    return report;
}

ValidationReport implied_partition_conservation(
    const LinearTransform &transform, const ProbabilityDistribution &p,
    const ProbabilityDistribution &p_prime) {
    const auto result = solve_flow(transform, p, p_prime);
    if (!result.feasible)
        throw PreconditionError("no conditional flow exists for this instance");

    const auto partition = finest_partition(transform);
    std::unordered_map<WorldLabel, std::size_t> block;
    for (std::size_t b = 0; b < partition.blocks.size(); ++b)
        for (auto w : partition.blocks[b])
            block.emplace(w, b);
    auto same_block = [&](WorldLabel a, WorldLabel b) {
        if (a == b)
            return true;
        auto ia = block.find(a), ib = block.find(b);
        return ia != block.end() && ib != block.end() &&
               ia->second == ib->second;
    };

    ValidationReport report;
    for (const auto &e : result.conditional->entries())
        if (!same_block(e.to, e.from))
            report.add("flow-leaves-block", {e.to, e.from}, e.p);
    for (const auto &b : block_balances(partition, p, p_prime)) {
        const double gap = std::abs(b.before - b.after);
        if (gap > tolerance::kFlow)
            report.add("block-total-changed", b.block, gap);
    }
    return report;
}

} // namespace mwprob
