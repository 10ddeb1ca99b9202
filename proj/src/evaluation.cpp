#include "demand_frontier/evaluation.hpp"

#include "demand_frontier/error.hpp"
#include "demand_frontier/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include <fmt/format.h>
#include "json.hpp"

namespace demand_frontier {

void EvaluationReport::append(const EvaluationReport& other) {
    cells.insert(cells.end(), other.cells.begin(), other.cells.end());
    failures.insert(failures.end(), other.failures.begin(), other.failures.end());
}

EvaluationReport evaluate_windows(std::span<const double> series, const WindowPlan& plan,
                                  const EvaluationConfig& config, const WindowForecaster& forecaster) {
    detail::require(!config.lead_times.empty(), "evaluation: no lead times requested");
    for (std::size_t lead : config.lead_times)
        detail::require(lead >= 1 && lead <= plan.horizon,
                        "evaluation: lead time " + std::to_string(lead) + " exceeds the window horizon");
    for (const Window& w : plan.windows)
        detail::require(w.test_end <= series.size() && w.train_start < w.train_end && w.train_end < w.test_end,
                        "evaluation: window escapes the series");

    const std::size_t nw = plan.windows.size();
    const std::size_t nl = config.lead_times.size();
    const std::size_t horizon = *std::max_element(config.lead_times.begin(), config.lead_times.end());

    // the first window's fit seeds the optimiser in every later window
    PipelineConfig warm = config.pipeline;
    std::optional<PreparedForecast> first;
    WindowForecaster run = forecaster;
    if (!run) {
        if (nw > 0 && config.pipeline.policy != ModelPolicy::kde_only) {
            const Window& w = plan.windows.front();
            try {
                first = prepare_forecast(series.subspan(w.train_start, w.train_end - w.train_start), horizon,
                                         config.pipeline, derive_seed(config.seed, 0));
                if (first->candidates.arma_garch) warm.forecast.fit.warm_start = first->candidates.arma_garch->params;
            } catch (const Error&) {
            }
        }
        run = [&](std::span<const double> train, std::span<const std::size_t> leads, std::size_t index) {
            std::vector<DensityForecast> out;
            if (index == 0 && first) {
                for (std::size_t lead : leads)
                    out.push_back(first->at(lead, first->kind(config.pipeline.selector.threshold(lead),
                                                              config.pipeline.policy)));
                return out;
            }
            return forecast_series(train, leads, warm, derive_seed(config.seed, index));
        };
    }

    std::vector<double> crps(nw * nl, 0.0), abs_err(nw * nl, 0.0);
    std::vector<std::string> errors(nw);
    parallel_for(nw, config.jobs, [&](std::size_t k) {
        const Window& w = plan.windows[k];
        try {
            const auto train = series.subspan(w.train_start, w.train_end - w.train_start);
            const std::vector<DensityForecast> fc = run(train, config.lead_times, k);
            if (fc.size() != nl) throw Error("forecaster returned the wrong number of lead times");
            for (std::size_t j = 0; j < nl; ++j) {
                const double y = series[w.train_end + config.lead_times[j] - 1];
                crps[k * nl + j] = crps_ensemble(fc[j], y);
                abs_err[k * nl + j] = std::abs(point_forecast(fc[j], config.point) - y);
            }
        } catch (const std::exception& e) {
            errors[k] = e.what();
            if (errors[k].empty()) errors[k] = "unknown failure";
        }
    });

    EvaluationReport report;
    std::size_t ok = 0;
    for (std::size_t k = 0; k < nw; ++k) {
        if (errors[k].empty())
            ++ok;
        else
            report.failures.push_back({k, errors[k]});
    }
    for (std::size_t j = 0; j < nl; ++j) {
        ReportCell cell;
        cell.approach = config.approach;
        cell.partition = config.partition;
        cell.lead_time = config.lead_times[j];
        cell.windows = ok;
        cell.failures = nw - ok;
        double sum = 0.0, sum_sq = 0.0, sum_abs = 0.0;
        for (std::size_t k = 0; k < nw; ++k) {
            if (!errors[k].empty()) continue;
            sum += crps[k * nl + j];
            sum_sq += crps[k * nl + j] * crps[k * nl + j];
            sum_abs += abs_err[k * nl + j];
        }
        if (ok > 0) {
            const auto n = static_cast<double>(ok);
            cell.crps_kw = sum / n;
            cell.mae_kw = sum_abs / n;
            cell.crps_sd = ok > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0))) : 0.0;
        }
        report.cells.push_back(cell);
    }
    return report;
}

EvaluationReport evaluate_windows(const Panel& panel, std::span<const double> weights, const WindowPlan& plan,
                                  const EvaluationConfig& config) {
    const std::vector<double> series = aggregate(panel, weights, AggregateMode::sum);
    return evaluate_windows(series, plan, config);
}

void write_report_csv(const EvaluationReport& report, std::ostream& out) {
    out << "approach,lead_time_h,partition_k,crps_kw,mae_kw,windows\n";
    for (const auto& c : report.cells) {
        if (c.windows == 0) {
            out << fmt::format("{},{},{},,,0\n", c.approach, c.lead_time, c.partition);
            continue;
        }
        out << fmt::format("{},{},{},{:.9g},{:.9g},{}\n", c.approach, c.lead_time, c.partition, c.crps_kw, c.mae_kw,
                           c.windows);
    }
}

void write_report_json(const EvaluationReport& report, std::ostream& out) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
        nlohmann::ordered_json j;
        j["approach"] = c.approach;
        j["lead_time_h"] = c.lead_time;
        j["partition_k"] = c.partition;
        if (c.windows > 0) {
            j["crps_kw"] = c.crps_kw;
            j["mae_kw"] = c.mae_kw;
            j["crps_x100"] = c.crps_kw * 100.0;
            j["mae_x100"] = c.mae_kw * 100.0;
            j["crps_sd_kw"] = c.crps_sd;
        } else {
            j["crps_kw"] = nullptr;
            j["mae_kw"] = nullptr;
        }
        j["windows"] = c.windows;
        j["failures"] = c.failures;
        cells.push_back(std::move(j));
    }
    nlohmann::ordered_json doc;
    doc["cells"] = std::move(cells);
    out << doc.dump(2) << '\n';
}

}  // namespace demand_frontier
