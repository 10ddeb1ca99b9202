#include "demand_frontier/portfolio.hpp"

#include "demand_frontier/error.hpp"
#include "demand_frontier/parallel.hpp"
#include "demand_frontier/score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace demand_frontier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sd_of(std::span<const double> x) {
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double rsd(std::span<const double> component, double level) {
    if (!(std::abs(level) > 1e-12)) throw InvalidInput("relative standard deviation: mean level is zero");
    return sd_of(component) / std::abs(level);
}

}  // namespace

void validate_selection(std::span<const double> v, std::size_t n, SelectionMode mode) {
    if (v.size() != n)
        throw InvalidInput("selection has " + std::to_string(v.size()) + " weights for " + std::to_string(n) +
                           " households");
    bool any = false;
    for (double w : v) {
        if (mode == SelectionMode::binary && w != 0.0 && w != 1.0)
            throw InvalidInput("binary selection weights must be 0 or 1");
        if (!(w >= 0.0 && w <= 1.0)) throw InvalidInput("selection weights must lie in [0, 1]");
        any = any || w > 0.0;
    }
    if (!any) throw InvalidInput("selection is empty");
}

double objective_sr(const Panel& panel, std::span<const double> v, RsdDenominator denominator,
                    std::span<const std::size_t> periods) {
    const std::vector<double> agg = aggregate(panel, v, AggregateMode::sum);
    const DecomposedSeries d = multi_stl(agg, periods);
    const double level = denominator == RsdDenominator::demand_mean ? mean_of(agg) : mean_of(d.remainder);
    return rsd(d.remainder, level);
}

double ss_weight(double r, std::size_t lead_time, bool exponent) {
    detail::require(r >= 0.0 && r <= 1.0, "seasonal similarity weight must lie in [0, 1]");
    return exponent ? std::pow(r, static_cast<double>(lead_time)) : r;
}

SsObjective::SsObjective(const Panel& panel, RsdDenominator denominator, std::span<const std::size_t> periods,
                         int jobs) {
    const std::size_t n = panel.households();
    rsd_st_.assign(n, kInf);
    rsd_r_.assign(n, kInf);
    parallel_for(n, jobs, [&](std::size_t i) {
        const auto y = panel.household(i);
        const DecomposedSeries d = multi_stl(y, periods);
        std::vector<double> st(d.size());
        for (std::size_t t = 0; t < st.size(); ++t) st[t] = d.seasonal[t] + d.trend[t];
        const double level = mean_of(y);
        if (!(level > 0.0)) return;  // an all-zero household is never attractive
        rsd_st_[i] = rsd(st, level);
        rsd_r_[i] = denominator == RsdDenominator::demand_mean ? rsd(d.remainder, level)
                                                               : rsd(d.remainder, mean_of(d.remainder));
    });
}

double SsObjective::operator()(std::span<const double> v, double r) const {
    detail::require(v.size() == rsd_st_.size(), "seasonal similarity: selection length mismatch");
    double wsum = 0.0, st = 0.0, rem = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] <= 0.0) continue;
        wsum += v[i];
        st += v[i] * rsd_st_[i];
        rem += v[i] * rsd_r_[i];
    }
    if (!(wsum > 0.0)) throw InvalidInput("seasonal similarity: empty selection");
    return r * st / wsum + (1.0 - r) * rem / wsum;
}

double objective_ss(const Panel& panel, std::span<const double> v, double r, RsdDenominator denominator) {
    return SsObjective(panel, denominator)(v, r);
}

void FvConfig::validate() const {
    detail::require(validation_fraction > 0.0 && validation_fraction < 1.0,
                    "fv: validation_fraction must lie in (0, 1)");
    detail::require(origin_stride >= 1, "fv: origin_stride must be positive");
    detail::require(!lead_times.empty(), "fv: no lead times");
    for (std::size_t h : lead_times) detail::require(h >= 1, "fv: lead times start at 1");
}

FvObjective::FvObjective(Panel in_sample, FvConfig config) : panel_(std::move(in_sample)), config_(std::move(config)) {
    config_.validate();
    const std::size_t s = panel_.hours();
    split_ = static_cast<std::size_t>(std::llround((1.0 - config_.validation_fraction) * static_cast<double>(s)));
    const std::size_t max_lead = *std::max_element(config_.lead_times.begin(), config_.lead_times.end());
    if (split_ + max_lead > s) throw InvalidInput("fv: validation span is shorter than the longest lead time");
}

std::size_t FvObjective::cache_size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::size_t FvObjective::failures() const {
    std::lock_guard lock(mutex_);
    return failures_;
}

std::vector<double> FvObjective::evaluate(std::span<const double> v) const {
    std::vector<double> key(v.begin(), v.end());
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    std::vector<double> result;
    try {
        result = compute(v);
    } catch (const Error&) {
        result.assign(config_.lead_times.size(), kInf);
    }
    std::lock_guard lock(mutex_);
    if (!std::isfinite(result.front())) ++failures_;
    cache_.emplace(std::move(key), result);
    return result;
}

double FvObjective::operator()(std::span<const double> v, std::size_t lead_time) const {
    const auto& leads = config_.lead_times;
    const auto it = std::find(leads.begin(), leads.end(), lead_time);
    if (it == leads.end()) throw InvalidInput("fv: lead time " + std::to_string(lead_time) + " is not configured");
    return evaluate(v)[static_cast<std::size_t>(it - leads.begin())];
}

std::vector<double> FvObjective::compute(std::span<const double> v) const {
    const std::vector<double> agg = aggregate(panel_, v, AggregateMode::sum);
    const auto& leads = config_.lead_times;
    const std::size_t nl = leads.size();
    const std::size_t max_lead = *std::max_element(leads.begin(), leads.end());
    const std::size_t len_b = agg.size() - split_;
    std::vector<double> sums(nl, 0.0);
    std::size_t origins = 0;

    if (config_.forecaster) {
        for (std::size_t o = 0; o + max_lead <= len_b; o += config_.origin_stride, ++origins) {
            const auto history = std::span<const double>(agg).first(split_ + o);
            for (std::size_t j = 0; j < nl; ++j)
                sums[j] += crps_ensemble(config_.forecaster(history, leads[j]), agg[split_ + o + leads[j] - 1]);
        }
    } else {
        const PipelineConfig& pc = config_.pipeline;
        const auto ya = std::span<const double>(agg).first(split_);
        const DecomposedSeries d = multi_stl(ya, pc.periods);
        const ComponentProjection proj = project_components(d, len_b);

        CandidateModels cands;
        if (pc.policy == ModelPolicy::kde_only) {
            cands.kde = fit_kde(d.remainder);
        } else {
            cands = fit_candidates(d.remainder, pc.forecast, pc.selector.gof_bins);
        }
        std::vector<ModelKind> kinds;
        for (std::size_t h : leads) kinds.push_back(choose_kind(cands, pc.selector.threshold(h), pc.policy));
        const bool need_arma = std::find(kinds.begin(), kinds.end(), ModelKind::arma_garch) != kinds.end();
        std::vector<DensityForecast> kde_fc;
        if (cands.kde) kde_fc = kde_forecast(*cands.kde, 1, pc.forecast.ensemble_size, derive_seed(config_.seed, 2));

        std::vector<double> rem_b(len_b);
        for (std::size_t t = 0; t < len_b; ++t) rem_b[t] = agg[split_ + t] - proj.seasonal[t] - proj.trend[t];

        std::optional<ArmaGarchState> state;
        if (need_arma) state = cands.arma_garch->state;
        std::size_t rolled = 0;
        for (std::size_t o = 0; o + max_lead <= len_b; o += config_.origin_stride, ++origins) {
            std::vector<DensityForecast> arma_fc;
            if (need_arma) {
                *state = advance(cands.arma_garch->params, std::move(*state),
                                 std::span<const double>(rem_b).subspan(rolled, o - rolled));
                rolled = o;
                arma_fc = forecast_density(cands.arma_garch->params, *state, max_lead, pc.forecast.ensemble_size,
                                           derive_seed(config_.seed, 1, o));
            }
            for (std::size_t j = 0; j < nl; ++j) {
                const std::size_t t = o + leads[j] - 1;
                const DensityForecast& base = kinds[j] == ModelKind::arma_garch ? arma_fc[leads[j] - 1] : kde_fc.front();
                sums[j] += crps_ensemble(compose_forecast(base, proj.seasonal[t], proj.trend[t]), agg[split_ + t]);
            }
        }
    }
    if (origins == 0) throw InvalidInput("fv: no forecast origin fits in the validation span");
    for (auto& s : sums) s /= static_cast<double>(origins);
    return sums;
}

double objective_fv(const Panel& in_sample, std::span<const double> v, const FvConfig& config,
                    std::size_t lead_time) {
    return FvObjective(in_sample, config)(v, lead_time);
}

}  // namespace demand_frontier
