#include "mwprob/impossibility.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace mwprob {

std::string to_string(const Rational &r) {
    if (r.denominator() == 1)
        return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

EliminationResult solve_exact(std::span<const LinearConstraint> constraints,
                              std::size_t variables) {
    std::vector<std::vector<Rational>> rows;
    rows.reserve(constraints.size());
    for (const auto &c : constraints) {
        if (c.coefficients.size() != variables)
            throw PreconditionError("constraint width does not match the "
                                    "number of variables");
        auto row = c.coefficients;
        row.push_back(c.rhs);
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> pivot_col;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < variables && rank < rows.size(); ++col) {
        auto pivot = std::find_if(rows.begin() + static_cast<long>(rank),
                                  rows.end(), [col](const auto &r) {
                                      return r[col] != Rational(0);
                                  });
        if (pivot == rows.end())
            continue;
        std::iter_swap(rows.begin() + static_cast<long>(rank), pivot);
        auto &p = rows[rank];
        const Rational lead = p[col];
        for (auto &x : p)
            x /= lead;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][col] == Rational(0))
                continue;
            const Rational factor = rows[r][col];
            for (std::size_t c = col; c <= variables; ++c)
                rows[r][c] -= factor * p[c];
        }
        pivot_col.push_back(col);
        ++rank;
    }

    EliminationResult result;
    for (std::size_t r = rank; r < rows.size(); ++r)
        if (rows[r][variables] != Rational(0))
            return result;

    result.feasible = true;
    result.solution.assign(variables, Rational(0));
    result.determined.assign(variables, std::nullopt);
    for (std::size_t r = 0; r < rank; ++r) {
        const auto col = pivot_col[r];
        result.solution[col] = rows[r][variables];
        bool alone = true;
        for (std::size_t c = 0; c < variables; ++c)
            if (c != col && rows[r][c] != Rational(0))
                alone = false;
        if (alone)
            result.determined[col] = rows[r][variables];
    }
    return result;
}

namespace {

std::string render(const std::vector<Rational> &coefficients,
                   const Rational &rhs,
                   const std::vector<std::string> &symbols) {
    std::string text;
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        const auto &c = coefficients[i];
        if (c == Rational(0))
            continue;
        const bool negative = c < Rational(0);
        if (text.empty())
            text += negative ? "-" : "";
        else
            text += negative ? " - " : " + ";
        const Rational mag = negative ? -c : c;
        if (mag != Rational(1))
            text += to_string(mag) + "*";
        text += symbols[i];
    }
    return text + " = " + to_string(rhs);
}

void lemma1_rows(const WorldState &state, std::size_t offset,
                 std::size_t width, std::string_view side,
                 const std::vector<std::string> &symbols,
                 std::vector<LinearConstraint> &out) {
    std::map<std::int64_t, std::vector<std::size_t>> by_count;
    const auto counts = state.counts();
    for (std::size_t i = 0; i < counts.size(); ++i)
        by_count[counts[i]].push_back(offset + i);
    for (const auto &[count, members] : by_count)
        for (std::size_t i = 1; i < members.size(); ++i) {
            LinearConstraint c;
            c.coefficients.assign(width, Rational(0));
            c.coefficients[members[i - 1]] = 1;
            c.coefficients[members[i]] = -1;
            c.rhs = 0;
            c.source = "lemma1:" + std::string(side);
            c.text = render(c.coefficients, c.rhs, symbols);
            out.push_back(std::move(c));
        }
}

} // namespace

AxiomSystem axiom_system(const WorldState &state,
                         const LinearTransform &transform) {
    if (state.theory() != TheoryKind::Discrete)
        throw WrongTheoryError("axiom_system works on discrete states");
    const WorldState after = apply(transform, state);

    AxiomSystem sys;
    for (const auto &e : state.entries()) {
        sys.pre_worlds.push_back(e.world);
        sys.symbols.push_back("p" + std::to_string(e.world));
    }
    for (const auto &e : after.entries()) {
        sys.post_worlds.push_back(e.world);
        sys.symbols.push_back("p" + std::to_string(e.world) + "'");
    }
    const std::size_t pre = sys.pre_worlds.size();
    const std::size_t width = sys.symbols.size();

    lemma1_rows(state, 0, width, "pre", sys.symbols, sys.constraints);
    {
        LinearConstraint c;
        c.coefficients.assign(width, Rational(0));
        for (std::size_t i = 0; i < pre; ++i)
            c.coefficients[i] = 1;
        c.rhs = 1;
        c.source = "normalization:pre";
        c.text = render(c.coefficients, c.rhs, sys.symbols);
        sys.constraints.push_back(std::move(c));
    }
    lemma1_rows(after, pre, width, "post", sys.symbols, sys.constraints);

    // One conservation row per block of the finest partition, with
    // untouched labels as singleton blocks.
    const auto partition = finest_partition(transform);
    std::unordered_map<WorldLabel, std::size_t> block_index;
    std::vector<std::vector<WorldLabel>> blocks = partition.blocks;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (auto w : blocks[b])
            block_index.emplace(w, b);
    for (auto w : sys.pre_worlds)
        if (block_index.emplace(w, blocks.size()).second)
            blocks.push_back({w});
    for (auto w : sys.post_worlds)
        if (block_index.emplace(w, blocks.size()).second)
            blocks.push_back({w});
    std::sort(blocks.begin(), blocks.end());

    for (const auto &block : blocks) {
        LinearConstraint c;
        c.coefficients.assign(width, Rational(0));
        bool touched = false;
        for (std::size_t i = 0; i < pre; ++i)
            if (std::binary_search(block.begin(), block.end(),
                                   sys.pre_worlds[i])) {
                c.coefficients[i] = 1;
                touched = true;
            }
        for (std::size_t i = 0; i < sys.post_worlds.size(); ++i)
            if (std::binary_search(block.begin(), block.end(),
                                   sys.post_worlds[i])) {
                c.coefficients[pre + i] = -1;
                touched = true;
            }
        if (!touched)
            continue;
        c.rhs = 0;
        std::string name;
        for (auto w : block)
            name += (name.empty() ? "" : ",") + std::to_string(w);
        c.source = "axiom3:block{" + name + "}";
        c.text = render(c.coefficients, c.rhs, sys.symbols);
        sys.constraints.push_back(std::move(c));
    }
    return sys;
}

ImpossibilityCertificate discrete_counterexample() {
    ImpossibilityCertificate cert{
        WorldState::discrete({{0, 1}, {1, 1}}),
        LinearTransform({{1, 1, 1.0}, {2, 1, 1.0}}),
        {},
        {},
        false,
        {}};
    auto sys = axiom_system(cert.state, cert.transform);
    cert.symbols = sys.symbols;
    cert.constraints = sys.constraints;
    const std::size_t width = sys.symbols.size();
    const std::size_t pre = sys.pre_worlds.size();
    cert.infeasible = !solve_exact(cert.constraints, width).feasible;

    // Each side on its own: lemma1 rows plus normalisation. After the transform
    // the normalisation is the sum of all conservation rows added to the
    // normalisation before it.
    std::vector<LinearConstraint> before_rows, after_rows;
    LinearConstraint post_norm;
    post_norm.coefficients.assign(width, Rational(0));
    for (std::size_t i = pre; i < width; ++i)
        post_norm.coefficients[i] = 1;
    post_norm.rhs = 1;
    post_norm.source = "normalization:post (axiom3 rows + normalization:pre)";
    post_norm.text = render(post_norm.coefficients, post_norm.rhs, sys.symbols);
    for (const auto &c : cert.constraints) {
        if (c.source == "lemma1:pre" || c.source == "normalization:pre")
            before_rows.push_back(c);
        else if (c.source == "lemma1:post")
            after_rows.push_back(c);
    }
    after_rows.push_back(post_norm);
    const auto before = solve_exact(before_rows, width);
    const auto after = solve_exact(after_rows, width);

    for (std::size_t r = 0; r < cert.constraints.size(); ++r) {
        const auto &c = cert.constraints[r];
        if (!c.source.starts_with("axiom3"))
            continue;
        Rational lhs(0), rhs(0);
        std::string lhs_name, rhs_name;
        bool known = true;
        for (std::size_t i = 0; i < width; ++i) {
            if (c.coefficients[i] == Rational(0))
                continue;
            const auto &value =
                i < pre ? before.determined[i] : after.determined[i];
            if (!value) {
                known = false;
                break;
            }
            auto &sum = i < pre ? lhs : rhs;
            auto &name = i < pre ? lhs_name : rhs_name;
            sum += *value;
            name += (name.empty() ? "" : "+") + sys.symbols[i];
        }
        if (known && lhs != rhs) {
            cert.witness = {lhs_name, lhs, rhs_name, rhs, r};
            break;
        }
    }
    return cert;
}

} // namespace mwprob
