#pragma once

// Test-only helpers and independent oracles (naive loops, brute force,
// finite differences). Nothing here calls the code under test for the value
// it is meant to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "fanfold/graph.hpp"
#include "fanfold/random.hpp"
#include "fanfold/sample.hpp"
#include "fanfold/tensor.hpp"

namespace fanfold::testing {

inline Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Tensor t(r, c);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.uniform(-1.0, 1.0);
    return t;
}

// Connected random graph: a random spanning path plus extra edges with prob p.
inline Graph random_graph(std::size_t n, double p, std::size_t feature_dim, Rng& rng) {
    Graph g;
    g.adjacency = Tensor(n, n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        g.adjacency(order[i], order[i + 1]) = 1.0;
        g.adjacency(order[i + 1], order[i]) = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < p) g.adjacency(i, j) = g.adjacency(j, i) = 1.0;
    g.features = random_tensor(n, feature_dim, rng);
    return g;
}

inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
    Tensor out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(std::vector<std::vector<double>> m) {
    const std::size_t n = m.size();
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[pivot][c])) pivot = r;
        if (m[pivot][c] == 0.0) return 0.0;
        if (pivot != c) {
            std::swap(m[pivot], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r][c] / m[c][c];
            for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
        }
    }
    return det;
}

// Central-difference Jacobian of a map R^{r*c} -> R^{r*c} on row-major tensors.
inline std::vector<std::vector<double>> numeric_jacobian(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                                                         double h = 1e-6) {
    const std::size_t m = x.size();
    std::vector<std::vector<double>> jac(m, std::vector<double>(m, 0.0));
    Tensor probe = x;
    for (std::size_t j = 0; j < m; ++j) {
        probe[j] = x[j] + h;
        const Tensor up = f(probe);
        probe[j] = x[j] - h;
        const Tensor down = f(probe);
        probe[j] = x[j];
        for (std::size_t i = 0; i < m; ++i) jac[i][j] = (up[i] - down[i]) / (2.0 * h);
    }
    return jac;
}

// O(P*N) pairwise AUC, exact as a rational count of half-wins.
inline double brute_force_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& flags) {
    std::int64_t half_wins = 0, pairs = 0;
    for (std::size_t a = 0; a < scores.size(); ++a) {
        if (!flags[a]) continue;
        for (std::size_t b = 0; b < scores.size(); ++b) {
            if (flags[b]) continue;
            ++pairs;
            if (scores[a] > scores[b]) half_wins += 2;
            else if (scores[a] == scores[b]) half_wins += 1;
        }
    }
    return static_cast<double>(half_wins) / (2.0 * static_cast<double>(pairs));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double cosine_oracle(const std::vector<double>& u, const std::vector<double>& v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 && nv == 0.0) return 0.0;
    if (nu == 0.0 || nv == 0.0) return 0.5;
    return (1.0 - dot / std::sqrt(nu * nv)) / 2.0;
}

}  // namespace fanfold::testing
