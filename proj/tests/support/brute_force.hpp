#pragma once

#include "demand_frontier/portfolio.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace demand_frontier::testing {

struct ExhaustiveOptimum {
    SelectionVector selection;
    double objective = std::numeric_limits<double>::infinity();
    std::size_t feasible = 0;
};

/// Scans every non-empty subset of up to 20 households.
inline ExhaustiveOptimum exhaustive_optimum(const ObjectiveFn& objective, const Partition& partition,
                                            std::span<const double> point_forecasts, std::size_t cap) {
    const std::size_t n = point_forecasts.size();
    ExhaustiveOptimum best;
    SelectionVector v(n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::size_t members = 0;
        double demand = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = (mask >> i) & 1u ? 1.0 : 0.0;
            members += static_cast<std::size_t>(v[i]);
            demand += v[i] * point_forecasts[i];
        }
        if (members > cap || !partition.contains(demand)) continue;
        ++best.feasible;
        const double f = objective(v);
        if (f < best.objective) {
            best.objective = f;
            best.selection = v;
        }
    }
    return best;
}

}  // namespace demand_frontier::testing
