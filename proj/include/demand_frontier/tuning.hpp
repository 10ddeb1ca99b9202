#pragma once

#include "demand_frontier/data.hpp"
#include "demand_frontier/pipeline.hpp"

#include <map>
#include <vector>

namespace demand_frontier {

/// 0.00, 0.01, ..., 0.20
[[nodiscard]] std::vector<double> default_threshold_grid();

struct ThresholdTuning {
    std::map<std::size_t, double> thresholds;  ///< lead time -> delta
    /// mean validation CRPS, indexed [lead][grid position]
    std::map<std::size_t, std::vector<double>> mean_crps;
    std::vector<double> grid;
    std::size_t evaluations = 0;
    std::size_t failures = 0;
};

/// Picks, per lead time, the threshold with the smallest mean CRPS over all
/// aggregations (weight vectors over `panel`) and validation windows. Ties go
/// to the smaller threshold. Each window is fitted once and every grid value
/// is applied to the same fitted pair of models.
[[nodiscard]] ThresholdTuning tune_threshold(const Panel& panel, const std::vector<std::vector<double>>& aggregations,
                                             std::span<const std::size_t> lead_times, std::span<const double> grid,
                                             const WindowPlan& plan, const PipelineConfig& config,
                                             std::uint64_t seed, int jobs = 1);

}  // namespace demand_frontier
