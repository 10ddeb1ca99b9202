#pragma once

#include "demand_frontier/decompose.hpp"
#include "demand_frontier/forecast.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace demand_frontier {

enum class ModelPolicy { gated, arma_garch_only, kde_only };

struct PipelineConfig {
    std::vector<std::size_t> periods{24, 168};
    ModelSelector selector;
    ForecastOptions forecast;
    ModelPolicy policy = ModelPolicy::gated;
};

/// Model used under `policy`; the gated policy applies `threshold` to the p-value.
[[nodiscard]] ModelKind choose_kind(const CandidateModels& candidates, double threshold, ModelPolicy policy);

/// Decomposition, projection and both candidate models for one training
/// series. Forecasts for any lead and threshold can be read off without refitting.
struct PreparedForecast {
    ComponentProjection projection;
    CandidateModels candidates;
    std::vector<DensityForecast> arma_garch;  ///< remainder ensembles, leads 1..horizon
    std::vector<DensityForecast> kde;

    [[nodiscard]] std::size_t horizon() const noexcept { return projection.seasonal.size(); }
    [[nodiscard]] ModelKind kind(double threshold, ModelPolicy policy = ModelPolicy::gated) const;
    /// Composed forecast (seasonal + trend + remainder ensemble) at `lead`.
    [[nodiscard]] DensityForecast at(std::size_t lead, ModelKind kind) const;
};

[[nodiscard]] PreparedForecast prepare_forecast(std::span<const double> train, std::size_t horizon,
                                                const PipelineConfig& config, std::uint64_t seed);

/// One composed forecast per requested lead time, using the selector's
/// threshold for each lead.
[[nodiscard]] std::vector<DensityForecast> forecast_series(std::span<const double> train,
                                                           std::span<const std::size_t> lead_times,
                                                           const PipelineConfig& config, std::uint64_t seed);

}  // namespace demand_frontier
