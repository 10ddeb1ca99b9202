#include "demand_frontier/forecast.hpp"

#include "demand_frontier/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace demand_frontier {

namespace {

double type7_quantile(std::vector<double> sorted_copy, double level) {
    std::sort(sorted_copy.begin(), sorted_copy.end());
    const double h = (static_cast<double>(sorted_copy.size()) - 1.0) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted_copy.size() - 1);
    return sorted_copy[lo] + (h - static_cast<double>(lo)) * (sorted_copy[hi] - sorted_copy[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> window) {
    const std::size_t w = window.size();
    if (w < 2) throw InvalidInput("kde: need at least two observations");
    for (double v : window)
        if (!std::isfinite(v)) throw InvalidInput("kde: window contains non-finite values");
    const double mean = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(w);
    double ss = 0.0;
    for (double v : window) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(w - 1));
    std::vector<double> copy(window.begin(), window.end());
    const double iqr = type7_quantile(copy, 0.75) - type7_quantile(copy, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) throw FitError("kde: window is constant, bandwidth would be zero");
    return 0.9 * spread * std::pow(static_cast<double>(w), -0.2);
}

KdeModel fit_kde(std::span<const double> window) {
    KdeModel model;
    model.bandwidth = silverman_bandwidth(window);
    model.observations.assign(window.begin(), window.end());
    return model;
}

double KdeModel::density(double y) const {
    const double h = bandwidth;
    double acc = 0.0;
    for (double x : observations) {
        const double u = (y - x) / h;
        acc += std::exp(-0.5 * u * u);
    }
    return acc / (static_cast<double>(observations.size()) * h * std::sqrt(2.0 * std::numbers::pi));
}

double KdeModel::mean() const {
    return std::accumulate(observations.begin(), observations.end(), 0.0) / static_cast<double>(observations.size());
}

std::vector<DensityForecast> kde_forecast(const KdeModel& model, std::size_t horizon, std::size_t samples,
                                          std::uint64_t seed) {
    if (horizon < 1) throw InvalidInput("kde_forecast: horizon must be at least 1");
    detail::require(samples >= 1, "kde_forecast: need at least one sample");
    detail::require(!model.observations.empty() && model.bandwidth > 0.0, "kde_forecast: model is not fitted");
    Rng rng = make_rng(seed, 0x6bdeULL);
    std::normal_distribution<double> kernel(0.0, model.bandwidth);
    DensityForecast base;
    base.ensemble.resize(samples);
    const auto n = static_cast<double>(model.observations.size());
    for (auto& v : base.ensemble) {
        const auto idx = std::min(static_cast<std::size_t>(uniform01(rng) * n), model.observations.size() - 1);
        v = model.observations[idx] + kernel(rng);
    }
    std::vector<DensityForecast> out(horizon, base);
    for (std::size_t h = 0; h < horizon; ++h) out[h].lead_time = h + 1;
    return out;
}

}  // namespace demand_frontier
