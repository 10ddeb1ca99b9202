#include "demand_frontier/score.hpp"

#include "demand_frontier/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace demand_frontier {

double crps_ensemble(std::span<const double> ensemble, double observation) {
    if (ensemble.empty()) throw InvalidInput("crps: ensemble is empty");
    if (!std::isfinite(observation)) throw InvalidInput("crps: observation is not finite");
    std::vector<double> x(ensemble.begin(), ensemble.end());
    std::sort(x.begin(), x.end());
    const auto m = static_cast<double>(x.size());
    double abs_err = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw InvalidInput("crps: ensemble contains non-finite values");
        abs_err += std::abs(x[i] - observation);
        spread += (2.0 * static_cast<double>(i + 1) - m - 1.0) * x[i];
    }
    // sum_i sum_j |x_i - x_j| = 2 sum_i (2i - M - 1) x_(i)
    const double score = abs_err / m - spread / (m * m);
    return std::max(score, 0.0);
}

double crps_ensemble(const DensityForecast& forecast, double observation) {
    return crps_ensemble(forecast.ensemble, observation);
}

double crps_gaussian(double mu, double sigma, double observation) {
    if (!(sigma > 0.0)) throw InvalidInput("crps_gaussian: sigma must be positive");
    const double z = (observation - mu) / sigma;
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    return sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::sqrt(std::numbers::pi));
}

double mae(std::span<const double> forecasts, std::span<const double> observations) {
    if (forecasts.size() != observations.size())
        throw InvalidInput("mae: " + std::to_string(forecasts.size()) + " forecasts for " +
                           std::to_string(observations.size()) + " observations");
    if (forecasts.empty()) throw InvalidInput("mae: no observations");
    double acc = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) acc += std::abs(forecasts[i] - observations[i]);
    return acc / static_cast<double>(forecasts.size());
}

double point_forecast(const DensityForecast& forecast, PointForecast kind) {
    return kind == PointForecast::median ? forecast.median() : forecast.mean();
}

}  // namespace demand_frontier
