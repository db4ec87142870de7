#include "fanfold/features.hpp"

#include <algorithm>

#include "fanfold/errors.hpp"

namespace fanfold {

StructuralEncoding rw_structural_encoding(const Graph& g, std::size_t steps, bool degree_column) {
    if (steps == 0) throw ContractError("structural encoding needs at least one random-walk step");
    const std::size_t n = g.node_count();
    const auto nbrs = g.neighbors();
    std::vector<double> inv_deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (!nbrs[i].empty()) inv_deg[i] = 1.0 / static_cast<double>(nbrs[i].size());

    StructuralEncoding se;
    se.steps = steps;
    se.matrix = Tensor(n, steps + (degree_column ? 1 : 0));

    // power = M^t, advanced by a sparse right-multiply with M each step
    Tensor power(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : nbrs[i]) power(i, j) = inv_deg[i];

    Tensor next(n, n);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t i = 0; i < n; ++i) se.matrix(i, t) = std::clamp(power(i, i), 0.0, 1.0);
        if (t + 1 == steps) break;
        next.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                const double p = power(i, k);
                if (p == 0.0) continue;
                const double w = p * inv_deg[k];
                for (std::size_t j : nbrs[k]) next(i, j) += w;
            }
        }
        std::swap(power, next);
    }

    if (degree_column) {
        const double denom = static_cast<double>(std::max<std::size_t>(1, n - 1));
        for (std::size_t i = 0; i < n; ++i)
            se.matrix(i, steps) = std::min(1.0, static_cast<double>(nbrs[i].size()) / denom);
    }
    return se;
}

InitFeatures build_init_features(const Graph& g, const StructuralEncoding& se) {
    if (se.matrix.rows() != g.node_count()) {
        throw ContractError("structural encoding has " + std::to_string(se.matrix.rows()) + " rows, graph has " +
                            std::to_string(g.node_count()) + " nodes");
    }
    return {hconcat(g.features, se.matrix), g.feature_dim()};
}

}  // namespace fanfold
