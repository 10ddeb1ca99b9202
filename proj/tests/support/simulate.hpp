#pragma once

#include "demand_frontier/forecast.hpp"
#include "demand_frontier/rng.hpp"
#include "demand_frontier/sged.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace demand_frontier::testing {

/// Draws an ARMA-GARCH path straight from the model recursions, discarding
/// `burn` leading values.
inline std::vector<double> simulate_arma_garch(const ArmaGarchParams& p, std::size_t n, std::uint64_t seed,
                                               std::size_t burn = 500) {
    const Sged eta(SgedParams{0.0, 1.0, p.shape, p.skew});
    Rng rng = make_rng(seed, 0x51a);
    double persistence = 0.0;
    for (double g : p.garch) persistence += g;
    for (double a : p.arch) persistence += a;
    const double uncond = p.omega / std::max(1e-6, 1.0 - persistence);

    const std::size_t total = n + burn;
    std::vector<double> y(total, 0.0), e(total, 0.0), s2(total, uncond);
    for (std::size_t t = 0; t < total; ++t) {
        double var = p.omega;
        for (std::size_t l = 0; l < p.garch.size(); ++l) var += p.garch[l] * (t > l ? s2[t - l - 1] : uncond);
        for (std::size_t m = 0; m < p.arch.size(); ++m) var += p.arch[m] * (t > m ? e[t - m - 1] * e[t - m - 1] : uncond);
        s2[t] = var;
        e[t] = std::sqrt(var) * eta.standard_sample(rng);
        double mean = p.mean_const;
        for (std::size_t j = 0; j < p.ar.size(); ++j) mean += p.ar[j] * (t > j ? y[t - j - 1] : 0.0);
        for (std::size_t k = 0; k < p.ma.size(); ++k) mean += p.ma[k] * (t > k ? e[t - k - 1] : 0.0);
        y[t] = mean + e[t];
    }
    return {y.begin() + static_cast<std::ptrdiff_t>(burn), y.end()};
}

}  // namespace demand_frontier::testing
