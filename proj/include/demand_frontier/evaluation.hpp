#pragma once

#include "demand_frontier/data.hpp"
#include "demand_frontier/pipeline.hpp"
#include "demand_frontier/score.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace demand_frontier {

/// Forecasts for `lead_times` (in that order) from a training series.
using WindowForecaster = std::function<std::vector<DensityForecast>(
    std::span<const double> train, std::span<const std::size_t> lead_times, std::size_t window_index)>;

struct EvaluationConfig {
    std::string approach = "pipeline";
    std::size_t partition = 0;
    std::vector<std::size_t> lead_times{4, 12, 24};
    PipelineConfig pipeline;
    PointForecast point = PointForecast::mean;
    std::uint64_t seed = 1;
    int jobs = 1;
};

struct ReportCell {
    std::string approach;
    std::size_t lead_time = 0;
    std::size_t partition = 0;
    double crps_kw = 0.0;
    double mae_kw = 0.0;
    double crps_sd = 0.0;  ///< across windows
    std::size_t windows = 0;
    std::size_t failures = 0;
};

struct WindowFailure {
    std::size_t window = 0;
    std::string message;
};

struct EvaluationReport {
    std::vector<ReportCell> cells;
    std::vector<WindowFailure> failures;

    void append(const EvaluationReport& other);
};

/// Rolls the forecaster over every window of `plan` and averages CRPS and MAE
/// per lead time. Failed windows are recorded, not fatal. Without a
/// forecaster the full pipeline from `config.pipeline` is used.
[[nodiscard]] EvaluationReport evaluate_windows(std::span<const double> series, const WindowPlan& plan,
                                                const EvaluationConfig& config, const WindowForecaster& forecaster = {});
[[nodiscard]] EvaluationReport evaluate_windows(const Panel& panel, std::span<const double> weights,
                                                const WindowPlan& plan, const EvaluationConfig& config);

void write_report_csv(const EvaluationReport& report, std::ostream& out);
void write_report_json(const EvaluationReport& report, std::ostream& out);

}  // namespace demand_frontier
