#include "demand_frontier/forecast.hpp"

#include "demand_frontier/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

namespace demand_frontier {

double DensityForecast::mean() const {
    detail::require(!ensemble.empty(), "density forecast is empty");
    return std::accumulate(ensemble.begin(), ensemble.end(), 0.0) / static_cast<double>(ensemble.size());
}

double DensityForecast::median() const { return quantile(0.5); }

double DensityForecast::quantile(double level) const {
    const double levels[] = {level};
    return quantiles(levels).front();
}

std::vector<double> DensityForecast::quantiles(std::span<const double> levels) const {
    detail::require(!ensemble.empty(), "density forecast is empty");
    std::vector<double> sorted(ensemble);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(levels.size());
    for (double level : levels) {
        detail::require(level >= 0.0 && level <= 1.0, "quantile level must lie in [0, 1]");
        const double h = (static_cast<double>(sorted.size()) - 1.0) * level;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        out.push_back(sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
    }
    return out;
}

double gof_pvalue_from_pit(std::span<const double> pit, int bins) {
    detail::require(bins >= 2, "goodness of fit: need at least two bins");
    const auto b = static_cast<std::size_t>(bins);
    if (pit.size() < 5 * b)
        throw InvalidInput("goodness of fit: need at least " + std::to_string(5 * b) + " residuals for " +
                           std::to_string(bins) + " bins, got " + std::to_string(pit.size()));
    std::vector<double> counts(b, 0.0);
    for (double u : pit) {
        const auto k = std::min(static_cast<std::size_t>(std::clamp(u, 0.0, 1.0) * static_cast<double>(b)), b - 1);
        counts[k] += 1.0;
    }
    const double expected = static_cast<double>(pit.size()) / static_cast<double>(b);
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    return boost::math::gamma_q(0.5 * static_cast<double>(b - 1), 0.5 * stat);
}

double gof_pvalue(const ArmaGarchParams& params, std::span<const double> series, int bins) {
    const FilterResult fr = filter(params, series);
    const Sged dist({0.0, 1.0, params.shape, params.skew});
    std::vector<double> pit;
    pit.reserve(fr.standardized.size());
    for (double z : fr.standardized) pit.push_back(dist.standard_cdf(z));
    return gof_pvalue_from_pit(pit, bins);
}

const char* to_string(ModelKind kind) noexcept {
    return kind == ModelKind::arma_garch ? "arma_garch" : "kde";
}

double ModelSelector::threshold(std::size_t lead_time) const {
    const auto it = thresholds.find(lead_time);
    return it == thresholds.end() ? default_threshold : it->second;
}

void ModelSelector::validate() const {
    detail::require(gof_bins >= 2, "model selector: gof_bins must be at least 2");
    detail::require(default_threshold >= 0.0 && default_threshold <= 1.0,
                    "model selector: thresholds must lie in [0, 1]");
    for (const auto& [lead, delta] : thresholds) {
        detail::require(lead >= 1, "model selector: lead times start at 1");
        detail::require(delta >= 0.0 && delta <= 1.0, "model selector: thresholds must lie in [0, 1]");
    }
}

ModelKind CandidateModels::choose(double threshold) const {
    if (arma_garch && std::isfinite(p_value) && decide_model(p_value, threshold) == ModelKind::arma_garch)
        return ModelKind::arma_garch;
    if (kde) return ModelKind::kde;
    if (arma_garch) return ModelKind::arma_garch;
    throw FitError("no forecast model could be fitted: arma-garch: " + arma_garch_error + "; kde: " + kde_error);
}

CandidateModels fit_candidates(std::span<const double> series, const ForecastOptions& options, int gof_bins) {
    CandidateModels out;
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    try {
        out.orders = select_arma_order(series, options.max_p, options.max_q);
        ArmaGarchModel model = fit_arma_garch(series, out.orders.p, out.orders.q, options.fit);
        out.p_value = options.p_value_override ? options.p_value_override(model, series)
                                               : gof_pvalue(model.params, series, gof_bins);
        out.arma_garch = std::move(model);
    } catch (const Error& e) {
        out.arma_garch_error = e.what();
        out.arma_garch.reset();
        out.p_value = std::numeric_limits<double>::quiet_NaN();
    }
    try {
        const std::size_t w = options.kde_window == 0 ? series.size() : std::min(options.kde_window, series.size());
        out.kde = fit_kde(series.subspan(series.size() - w));
    } catch (const Error& e) {
        out.kde_error = e.what();
    }
    return out;
}

SelectedModel select_model(std::span<const double> series, const ModelSelector& selector, std::size_t lead_time,
                           const ForecastOptions& options) {
    selector.validate();
    CandidateModels cands = fit_candidates(series, options, selector.gof_bins);
    SelectedModel out;
    out.kind = cands.choose(selector.threshold(lead_time));
    out.p_value = cands.p_value;
    out.arma_garch = std::move(cands.arma_garch);
    out.kde = std::move(cands.kde);
    return out;
}

DensityForecast compose_forecast(const DensityForecast& remainder, double seasonal, double trend) {
    DensityForecast out = remainder;
    for (auto& v : out.ensemble) v += seasonal + trend;
    return out;
}

std::vector<DensityForecast> compose_forecast(std::span<const DensityForecast> remainder,
                                              std::span<const double> seasonal, std::span<const double> trend) {
    detail::require(seasonal.size() >= remainder.size() && trend.size() >= remainder.size(),
                    "compose_forecast: component projections are shorter than the forecast");
    std::vector<DensityForecast> out;
    out.reserve(remainder.size());
    for (std::size_t h = 0; h < remainder.size(); ++h) {
        const std::size_t idx = remainder[h].lead_time - 1;
        detail::require(idx < seasonal.size(), "compose_forecast: lead time beyond projection");
        out.push_back(compose_forecast(remainder[h], seasonal[idx], trend[idx]));
    }
    return out;
}

}  // namespace demand_frontier
