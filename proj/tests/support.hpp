// Random instance generators and brute-force oracles shared by the tests
// and the acceptance runner.
#pragma once

#include "mwprob/core.hpp"
#include "mwprob/transforms.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

namespace mwprob::testing {

using Rng = std::mt19937_64;
using Dense = Eigen::MatrixXcd;

inline double uniform(Rng &rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng &rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Amplitude random_complex(Rng &rng) {
    std::normal_distribution<double> g;
    return {g(rng), g(rng)};
}

/// Haar-ish dense unitary from the QR of a complex Gaussian matrix.
inline Dense dense_unitary(Rng &rng, int d) {
    Dense g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            g(i, j) = random_complex(rng);
    Eigen::HouseholderQR<Dense> qr(g);
    Dense q = qr.householderQ();
    return q;
}

/// Phased permutation followed by a few Givens rotations, so the zero
/// pattern ranges from a permutation to fully dense.
inline Dense sparse_unitary(Rng &rng, int d) {
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Dense u = Dense::Zero(d, d);
    for (int j = 0; j < d; ++j)
        u(perm[static_cast<std::size_t>(j)], j) =
            std::polar(1.0, uniform(rng, 0.0, 2.0 * M_PI));
    const int rotations = d > 1 ? uniform_int(rng, 0, d) : 0;
    for (int r = 0; r < rotations; ++r) {
        const int a = uniform_int(rng, 0, d - 1);
        int b = uniform_int(rng, 0, d - 2);
        if (b >= a)
            ++b;
        const double theta = uniform(rng, 0.2, 1.3);
        const Amplitude phase = std::polar(1.0, uniform(rng, 0.0, 2.0 * M_PI));
        Dense g = Dense::Identity(d, d);
        g(a, a) = std::cos(theta);
        g(b, b) = std::cos(theta);
        g(a, b) = -std::sin(theta) * std::conj(phase);
        g(b, a) = std::sin(theta) * phase;
        u = g * u;
    }
    return u;
}

/// Stores every nonzero entry; labels are offset + index.
inline LinearTransform to_transform(const Dense &m, WorldLabel offset = 0) {
    std::vector<TransformEntry> entries;
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i)
            if (m(i, j) != Amplitude{})
                entries.push_back({offset + static_cast<WorldLabel>(i),
                                   offset + static_cast<WorldLabel>(j),
                                   m(i, j)});
    return LinearTransform(std::move(entries));
}

/// Normalised quantum state on a random subset of 0..d-1 (never empty).
inline WorldState random_quantum_state(Rng &rng, int d, double keep = 0.7) {
    std::vector<StateEntry> entries;
    while (entries.empty())
        for (int i = 0; i < d; ++i)
            if (uniform(rng) < keep)
                entries.push_back({static_cast<WorldLabel>(i),
                                   random_complex(rng)});
    double norm = 0.0;
    for (const auto &e : entries)
        norm += std::norm(e.amplitude);
    for (auto &e : entries)
        e.amplitude /= std::sqrt(norm);
    return WorldState(TheoryKind::Quantum, std::move(entries));
}

inline WorldState random_stochastic_state(Rng &rng, int d, double keep = 0.7) {
    std::vector<StateEntry> entries;
    while (entries.empty())
        for (int i = 0; i < d; ++i)
            if (uniform(rng) < keep)
                entries.push_back({static_cast<WorldLabel>(i),
                                   uniform(rng, 0.05, 1.0)});
    double sum = 0.0;
    for (const auto &e : entries)
        sum += e.amplitude.real();
    for (auto &e : entries)
        e.amplitude = e.amplitude.real() / sum;
    return WorldState(TheoryKind::Stochastic, std::move(entries));
}

/// Column-stochastic map on 0..d-1 with random sparse columns.
inline LinearTransform random_stochastic_transform(Rng &rng, int d) {
    std::vector<TransformEntry> entries;
    for (int j = 0; j < d; ++j) {
        std::vector<std::pair<int, double>> column;
        while (column.empty())
            for (int i = 0; i < d; ++i)
                if (uniform(rng) < 0.5)
                    column.emplace_back(i, uniform(rng, 0.05, 1.0));
        double sum = 0.0;
        for (const auto &c : column)
            sum += c.second;
        for (const auto &[i, v] : column)
            entries.push_back({static_cast<WorldLabel>(i),
                               static_cast<WorldLabel>(j), v / sum});
    }
    return LinearTransform(std::move(entries));
}

/// Dense vector of a state over labels 0..d-1.
inline Eigen::VectorXcd dense_vector(const WorldState &state, int d) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
    for (const auto &e : state.entries())
        v(static_cast<int>(e.world)) = e.amplitude;
    return v;
}

/**
 * Transport feasibility by vertex enumeration: variables x_ij >= 0 on the
 * allowed pairs, equalities sum_i x_ij = p_j and sum_j x_ij = q_i. A
 * nonempty polyhedron in this form has a basic feasible solution, so it
 * suffices to try every basis of rank(A) columns.
 */
inline bool transport_feasible(const std::vector<std::vector<bool>> &allowed,
                               const std::vector<double> &p,
                               const std::vector<double> &q) {
    const int d = static_cast<int>(p.size());
    std::vector<std::pair<int, int>> vars;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (allowed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                vars.emplace_back(i, j);
    const int n = static_cast<int>(vars.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * d, n);
    Eigen::VectorXd b(2 * d);
    for (int k = 0; k < n; ++k) {
        a(vars[static_cast<std::size_t>(k)].second, k) = 1.0;
        a(d + vars[static_cast<std::size_t>(k)].first, k) = 1.0;
    }
    for (int j = 0; j < d; ++j) {
        b(j) = p[static_cast<std::size_t>(j)];
        b(d + j) = q[static_cast<std::size_t>(j)];
    }
    if (n == 0)
        return b.cwiseAbs().maxCoeff() <= 1e-9;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    const int rank = static_cast<int>(lu.rank());

    std::vector<int> pick(static_cast<std::size_t>(rank));
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        Eigen::MatrixXd sub(2 * d, rank);
        for (int c = 0; c < rank; ++c)
            sub.col(c) = a.col(pick[static_cast<std::size_t>(c)]);
        Eigen::FullPivLU<Eigen::MatrixXd> sub_lu(sub);
        if (sub_lu.rank() == rank) {
            Eigen::VectorXd x = sub.colPivHouseholderQr().solve(b);
            if ((sub * x - b).cwiseAbs().maxCoeff() <= 1e-9 &&
                x.minCoeff() >= -1e-9)
                return true;
        }
        // Next combination of `rank` out of `n`.
        int c = rank - 1;
        while (c >= 0 && pick[static_cast<std::size_t>(c)] == n - rank + c)
            --c;
        if (c < 0)
            return false;
        ++pick[static_cast<std::size_t>(c)];
        for (int r = c + 1; r < rank; ++r)
            pick[static_cast<std::size_t>(r)] =
                pick[static_cast<std::size_t>(r - 1)] + 1;
    }
}

} // namespace mwprob::testing
