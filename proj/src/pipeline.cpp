#include "demand_frontier/pipeline.hpp"

#include "demand_frontier/error.hpp"

#include <algorithm>

namespace demand_frontier {

ModelKind choose_kind(const CandidateModels& candidates, double threshold, ModelPolicy policy) {
    switch (policy) {
        case ModelPolicy::arma_garch_only:
            if (candidates.arma_garch) return ModelKind::arma_garch;
            return candidates.choose(2.0);
        case ModelPolicy::kde_only:
            if (candidates.kde) return ModelKind::kde;
            return candidates.choose(0.0);
        case ModelPolicy::gated:
            break;
    }
    return candidates.choose(threshold);
}

ModelKind PreparedForecast::kind(double threshold, ModelPolicy policy) const {
    return choose_kind(candidates, threshold, policy);
}

DensityForecast PreparedForecast::at(std::size_t lead, ModelKind kind) const {
    if (lead < 1 || lead > horizon())
        throw InvalidInput("forecast lead " + std::to_string(lead) + " outside 1.." + std::to_string(horizon()));
    const auto& pool = kind == ModelKind::arma_garch ? arma_garch : kde;
    if (pool.size() < lead) throw FitError(std::string("no ") + to_string(kind) + " forecast available");
    return compose_forecast(pool[lead - 1], projection.seasonal[lead - 1], projection.trend[lead - 1]);
}

PreparedForecast prepare_forecast(std::span<const double> train, std::size_t horizon, const PipelineConfig& config,
                                  std::uint64_t seed) {
    if (horizon < 1) throw InvalidInput("pipeline: horizon must be at least 1");
    const DecomposedSeries d = multi_stl(train, config.periods);
    PreparedForecast out;
    out.projection = project_components(d, horizon);

    if (config.policy == ModelPolicy::kde_only) {
        out.candidates.p_value = 0.0;
        try {
            const std::size_t n = d.remainder.size();
            const std::size_t w = config.forecast.kde_window == 0 ? n : std::min(config.forecast.kde_window, n);
            out.candidates.kde = fit_kde(std::span<const double>(d.remainder).subspan(n - w));
        } catch (const Error& e) {
            out.candidates.kde_error = e.what();
        }
    } else {
        out.candidates = fit_candidates(d.remainder, config.forecast, config.selector.gof_bins);
    }

    const std::size_t m = config.forecast.ensemble_size;
    if (out.candidates.arma_garch)
        out.arma_garch = forecast_density(*out.candidates.arma_garch, horizon, m, derive_seed(seed, 1));
    if (out.candidates.kde) out.kde = kde_forecast(*out.candidates.kde, horizon, m, derive_seed(seed, 2));
    if (out.arma_garch.empty() && out.kde.empty())
        throw FitError("pipeline: no model could be fitted: arma-garch: " + out.candidates.arma_garch_error +
                       "; kde: " + out.candidates.kde_error);
    return out;
}

std::vector<DensityForecast> forecast_series(std::span<const double> train, std::span<const std::size_t> lead_times,
                                             const PipelineConfig& config, std::uint64_t seed) {
    detail::require(!lead_times.empty(), "pipeline: no lead times requested");
    const std::size_t horizon = *std::max_element(lead_times.begin(), lead_times.end());
    const PreparedForecast prepared = prepare_forecast(train, horizon, config, seed);
    std::vector<DensityForecast> out;
    out.reserve(lead_times.size());
    for (std::size_t lead : lead_times)
        out.push_back(prepared.at(lead, prepared.kind(config.selector.threshold(lead), config.policy)));
    return out;
}

}  // namespace demand_frontier
