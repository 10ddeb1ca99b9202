#include "demand_frontier/tuning.hpp"

#include "demand_frontier/error.hpp"
#include "demand_frontier/parallel.hpp"
#include "demand_frontier/score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace demand_frontier {

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 100.0);
    return grid;
}

ThresholdTuning tune_threshold(const Panel& panel, const std::vector<std::vector<double>>& aggregations,
                               std::span<const std::size_t> lead_times, std::span<const double> grid,
                               const WindowPlan& plan, const PipelineConfig& config, std::uint64_t seed, int jobs) {
    if (grid.empty()) throw InvalidInput("tune_threshold: threshold grid is empty");
    if (lead_times.empty()) throw InvalidInput("tune_threshold: no lead times");
    if (aggregations.empty() || plan.windows.empty()) throw InvalidInput("tune_threshold: validation set is empty");
    for (double d : grid) detail::require(d >= 0.0 && d <= 1.0, "tune_threshold: thresholds must lie in [0, 1]");
    const std::size_t horizon = *std::max_element(lead_times.begin(), lead_times.end());
    for (const Window& w : plan.windows)
        detail::require(w.train_end + horizon <= panel.hours(), "tune_threshold: window escapes the panel");

    const std::size_t na = aggregations.size(), nw = plan.windows.size(), nl = lead_times.size();
    struct Outcome {
        bool ok = false;
        double p_value = 0.0;
        bool has_arma = false, has_kde = false;
        std::vector<double> crps_arma, crps_kde;
    };
    std::vector<Outcome> outcomes(na * nw);
    std::vector<std::vector<double>> series(na);
    for (std::size_t a = 0; a < na; ++a) series[a] = aggregate(panel, aggregations[a], AggregateMode::sum);

    parallel_for(na * nw, jobs, [&](std::size_t idx) {
        const std::size_t a = idx / nw, k = idx % nw;
        const Window& w = plan.windows[k];
        Outcome& o = outcomes[idx];
        try {
            const auto train = std::span<const double>(series[a]).subspan(w.train_start, w.train_end - w.train_start);
            const PreparedForecast pf = prepare_forecast(train, horizon, config, derive_seed(seed, a, k));
            o.p_value = pf.candidates.p_value;
            o.has_arma = !pf.arma_garch.empty();
            o.has_kde = !pf.kde.empty();
            for (std::size_t j = 0; j < nl; ++j) {
                const double y = series[a][w.train_end + lead_times[j] - 1];
                o.crps_arma.push_back(o.has_arma ? crps_ensemble(pf.at(lead_times[j], ModelKind::arma_garch), y) : 0.0);
                o.crps_kde.push_back(o.has_kde ? crps_ensemble(pf.at(lead_times[j], ModelKind::kde), y) : 0.0);
            }
            o.ok = true;
        } catch (const Error&) {
            o.ok = false;
        }
    });

    ThresholdTuning out;
    out.grid.assign(grid.begin(), grid.end());
    std::size_t ok = 0;
    for (const auto& o : outcomes) (o.ok ? ok : out.failures) += 1;
    if (ok == 0) throw FitError("tune_threshold: every validation window failed");
    out.evaluations = ok;

    for (std::size_t j = 0; j < nl; ++j) {
        std::vector<double> means(grid.size(), 0.0);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            double sum = 0.0;
            for (const auto& o : outcomes) {
                if (!o.ok) continue;
                const bool use_arma = o.has_arma && (!o.has_kde || (std::isfinite(o.p_value) && o.p_value >= grid[g]));
                sum += use_arma ? o.crps_arma[j] : o.crps_kde[j];
            }
            means[g] = sum / static_cast<double>(ok);
        }
        std::size_t best = 0;
        for (std::size_t g = 1; g < grid.size(); ++g) {
            const bool better = means[g] < means[best] - 1e-15 ||
                                (std::abs(means[g] - means[best]) <= 1e-15 && grid[g] < grid[best]);
            if (better) best = g;
        }
        out.thresholds[lead_times[j]] = grid[best];
        out.mean_crps[lead_times[j]] = std::move(means);
    }
    return out;
}

}  // namespace demand_frontier
