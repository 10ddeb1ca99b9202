#pragma once

#include "demand_frontier/config.hpp"
#include "demand_frontier/portfolio.hpp"
#include "demand_frontier/tuning.hpp"

#include <optional>
#include <string>
#include <vector>

namespace demand_frontier {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

struct LoadedPanel {
    Panel panel;
    double missing_fraction = 0.0;  ///< before imputation
};

/// Reads the CSV source or synthesizes the population, then imputes.
[[nodiscard]] LoadedPanel load_panel(const RunConfig& config);

struct RunResult {
    Frontier frontier;
    std::optional<ThresholdTuning> thresholds;
    std::optional<SsTuning> ss_weights;
    std::map<std::size_t, double> applied_thresholds;
    std::map<std::size_t, double> applied_ss_weights;
    HouseholdForecasts point_forecasts;
    std::vector<ApproachSummary> summary;
    std::size_t out_of_sample_windows = 0;
    std::size_t tuning_windows = 0;
};

/// The whole experiment without any file output.
[[nodiscard]] RunResult run_experiment(const Panel& panel, const RunConfig& config);

/// Relative CRPS improvement (percent) of `approach` over random, all leads
/// (lead 0) or one lead; nullopt when either is missing.
[[nodiscard]] std::optional<double> improvement_over_random(const std::vector<ApproachSummary>& summary,
                                                            const std::string& approach, std::size_t lead = 0);

struct AggStudyRow {
    std::size_t group_size = 0;
    std::size_t lead_time = 0;
    double mean_crps_kw = 0.0;
    std::size_t groups = 0;
    std::size_t windows = 0;
};

/// Mean CRPS of averaged random groups of each size, per lead time.
[[nodiscard]] std::vector<AggStudyRow> aggregation_study(const Panel& panel, const RunConfig& config);

/// Writes the synthetic population (with its missing markers) as ingestion CSV.
int cmd_synth(const RunConfig& config, const std::string& out_path);
/// Writes frontier.csv/json, report.csv/json, summary.csv and diagnostics.json
/// under config.output_dir. Returns 0, or 2 when some cells failed.
int cmd_run(const RunConfig& config);
/// Writes aggstudy.csv under config.output_dir.
int cmd_aggstudy(const RunConfig& config);

void write_aggstudy_csv(const std::vector<AggStudyRow>& rows, std::ostream& out);

/// Parses every known artifact present in `dir` and re-serialises the CSV
/// files; returns the problems found (empty when all files conform).
[[nodiscard]] std::vector<std::string> check_output_schema(const std::string& dir);

}  // namespace demand_frontier
