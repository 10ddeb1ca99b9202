#pragma once

#include "demand_frontier/forecast.hpp"

#include <span>

namespace demand_frontier {

/// Empirical CRPS of an ensemble: mean|X - y| - mean|X - X'| / 2. The pairwise
/// term is evaluated on the sorted sample in O(M log M).
[[nodiscard]] double crps_ensemble(std::span<const double> ensemble, double observation);
[[nodiscard]] double crps_ensemble(const DensityForecast& forecast, double observation);

/// Closed-form CRPS of a normal predictive distribution.
[[nodiscard]] double crps_gaussian(double mu, double sigma, double observation);

[[nodiscard]] double mae(std::span<const double> forecasts, std::span<const double> observations);

enum class PointForecast { mean, median };

[[nodiscard]] double point_forecast(const DensityForecast& forecast, PointForecast kind = PointForecast::mean);

}  // namespace demand_frontier
