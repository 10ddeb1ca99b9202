#pragma once

#include "demand_frontier/data.hpp"
#include "demand_frontier/evaluation.hpp"
#include "demand_frontier/pipeline.hpp"
#include "demand_frontier/rng.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace demand_frontier {

/// Household inclusion weights: 0/1 in binary mode, [0, 1] when relaxed.
using SelectionVector = std::vector<double>;

enum class SelectionMode { binary, relaxed };

/// Throws InvalidInput unless every weight is valid for `mode` and one is positive.
void validate_selection(std::span<const double> v, std::size_t n, SelectionMode mode);

// ---- objectives ----------------------------------------------------------------

/// Denominator of the relative standard deviation of a remainder.
enum class RsdDenominator {
    demand_mean,     ///< mean of the demand the remainder was taken from
    remainder_mean,  ///< |mean| of the remainder itself
};

/// std(R) / mean(Y . v) of the summed selection's STL remainder.
[[nodiscard]] double objective_sr(const Panel& panel, std::span<const double> v,
                                  RsdDenominator denominator = RsdDenominator::demand_mean,
                                  std::span<const std::size_t> periods = default_periods());

/// Weight on the seasonal+trend term at a lead time. With `exponent` the
/// configured r is raised to the lead time.
[[nodiscard]] double ss_weight(double r, std::size_t lead_time, bool exponent);

/// Per-household seasonal similarity. Each household is decomposed once; the
/// objective is r * mean RSD(S + T) + (1 - r) * mean RSD(R) over the
/// selection (weighted mean when relaxed).
class SsObjective {
public:
    SsObjective(const Panel& panel, RsdDenominator denominator = RsdDenominator::demand_mean,
                std::span<const std::size_t> periods = default_periods(), int jobs = 1);

    [[nodiscard]] double operator()(std::span<const double> v, double r) const;
    [[nodiscard]] const std::vector<double>& rsd_seasonal_trend() const noexcept { return rsd_st_; }
    [[nodiscard]] const std::vector<double>& rsd_remainder() const noexcept { return rsd_r_; }

private:
    std::vector<double> rsd_st_;
    std::vector<double> rsd_r_;
};

[[nodiscard]] double objective_ss(const Panel& panel, std::span<const double> v, double r,
                                  RsdDenominator denominator = RsdDenominator::demand_mean);

/// Forecast for one lead time from the aggregate history up to an origin.
using FvForecaster = std::function<DensityForecast(std::span<const double> history, std::size_t lead_time)>;

struct FvConfig {
    double validation_fraction = 0.5;  ///< tail of the in-sample span scored (Y_b)
    std::size_t origin_stride = 13;
    std::vector<std::size_t> lead_times{4, 12, 24};
    PipelineConfig pipeline;
    std::uint64_t seed = 1;
    /// Start each FV search from greedy selections ranked by single-household
    /// validation CRPS squared per kW.
    bool household_seeding = true;
    /// Replaces the fitted pipeline; called once per origin and lead.
    FvForecaster forecaster;

    void validate() const;
};

/// Validation CRPS of the summed selection: models are fitted once on Y_a,
/// the ARMA-GARCH state is rolled through Y_b without refitting, and CRPS is
/// averaged over forecast origins in Y_b. Results for all lead times are
/// cached per selection; failures yield +inf.
class FvObjective {
public:
    FvObjective(Panel in_sample, FvConfig config);

    /// Mean CRPS per configured lead time (same order as config.lead_times).
    [[nodiscard]] std::vector<double> evaluate(std::span<const double> v) const;
    [[nodiscard]] double operator()(std::span<const double> v, std::size_t lead_time) const;
    [[nodiscard]] const FvConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::size_t cache_size() const;
    [[nodiscard]] std::size_t failures() const;

private:
    std::vector<double> compute(std::span<const double> v) const;

    Panel panel_;
    FvConfig config_;
    std::size_t split_ = 0;
    mutable std::mutex mutex_;
    mutable std::map<std::vector<double>, std::vector<double>> cache_;
    mutable std::size_t failures_ = 0;
};

[[nodiscard]] double objective_fv(const Panel& in_sample, std::span<const double> v, const FvConfig& config,
                                  std::size_t lead_time);

// ---- partitions and the genetic algorithm ---------------------------------------

struct Partition {
    std::size_t index = 0;
    std::size_t lead_time = 0;
    double lower = 0.0;
    double upper = 0.0;

    /// Strict bounds: lower < demand < upper.
    [[nodiscard]] bool contains(double demand) const noexcept { return demand > lower && demand < upper; }
    [[nodiscard]] double violation(double demand) const noexcept;
};

/// K equal-width bands tiling [0, total].
[[nodiscard]] std::vector<Partition> partition_demand_range(double total, std::size_t k, std::size_t lead_time);

/// Sum of the `cap` largest point forecasts: the most demand any admissible
/// selection can reach.
[[nodiscard]] double demand_ceiling(std::span<const double> point_forecasts, std::size_t cap);

[[nodiscard]] double expected_demand(std::span<const double> point_forecasts, std::span<const double> v);

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct GaConfig {
    std::size_t population = 50;
    int max_generations = 100;
    int stall_generations = 10;
    double crossover_probability = 0.9;
    double mutation_probability = -1.0;  ///< per gene; negative means 1/N
    std::size_t tournament_size = 3;
    std::size_t elites = 1;
    double penalty_coefficient = 10.0;  ///< multiplies the objective scale estimate
    std::size_t cardinality_cap = 100;
    double blend_alpha = 0.5;       ///< relaxed mode: BLX-alpha crossover
    double mutation_sigma = 0.15;   ///< relaxed mode: Gaussian gene mutation
    std::uint64_t seed = 1;
    int jobs = 1;

    void validate() const;
};

struct GaResult {
    SelectionVector selection;
    double objective = 0.0;
    double expected_demand = 0.0;
    int generations = 0;
    std::size_t evaluations = 0;
    std::vector<double> history;  ///< best penalised fitness after each generation
};

/// Random selection whose expected demand lies strictly inside the partition
/// and has at most `cap` members, or nullopt when none was found.
[[nodiscard]] std::optional<SelectionVector> sample_feasible(std::span<const double> point_forecasts,
                                                             const Partition& partition, std::size_t cap, Rng& rng,
                                                             int attempts = 64);

/// Binary GA minimising the objective under the partition constraint (penalty)
/// and the cardinality cap (repair). Returns the best feasible individual
/// evaluated; throws InfeasibleError when none was feasible.
[[nodiscard]] GaResult ga_optimize(const ObjectiveFn& objective, const Partition& partition,
                                   std::span<const double> point_forecasts, const GaConfig& config,
                                   const std::vector<SelectionVector>& seeds = {});

/// Greedy selections that add households in ascending `cost` order until the
/// expected demand reaches each of `fill_levels` (fractions of the partition
/// width above its lower bound). Households with non-finite cost or
/// non-positive forecast are skipped; targets that cannot be met are dropped.
[[nodiscard]] std::vector<SelectionVector> greedy_selections(std::span<const double> cost,
                                                             std::span<const double> point_forecasts,
                                                             const Partition& partition, std::size_t cap,
                                                             std::span<const double> fill_levels);

/// Real-coded GA on [0, 1] weights. `warm_start` individuals (e.g. a binary
/// optimum) are placed in the initial population.
[[nodiscard]] GaResult ga_optimize_relaxed(const ObjectiveFn& objective, const Partition& partition,
                                           std::span<const double> point_forecasts, const GaConfig& config,
                                           const std::vector<SelectionVector>& warm_start = {});

// ---- frontier ----------------------------------------------------------------------

struct HouseholdForecasts {
    std::map<std::size_t, std::vector<double>> by_lead;  ///< lead -> N point forecasts
    std::vector<std::string> fallbacks;                  ///< households that used seasonal naive
};

/// Point forecasts for every household at `origin` from the trailing
/// `train_length` hours. A failed household falls back to its value one week
/// before the target hour.
[[nodiscard]] HouseholdForecasts household_point_forecasts(const Panel& panel, std::size_t origin,
                                                           std::size_t train_length,
                                                           std::span<const std::size_t> lead_times,
                                                           const PipelineConfig& config, std::uint64_t seed,
                                                           int jobs = 1);

struct SsTuning {
    std::map<std::size_t, double> weights;  ///< lead -> r
    std::map<std::size_t, std::vector<double>> mean_crps;
    std::vector<double> grid;
};

[[nodiscard]] std::vector<double> default_ss_grid();

enum class PartitionRange {
    capacity,  ///< [0, sum of the cap largest point forecasts]
    total,     ///< [0, sum of all point forecasts]
};

struct FrontierConfig {
    std::vector<std::string> approaches{"random", "fv", "sr", "ss"};
    std::vector<std::size_t> lead_times{4, 12, 24};
    std::size_t partitions = 10;
    PartitionRange range = PartitionRange::capacity;
    std::size_t in_sample_hours = 2016;  ///< selection span [0, S); out-of-sample tests follow S
    WindowPlan plan;                     ///< out-of-sample windows; test ranges lie after S
    PipelineConfig pipeline;             ///< out-of-sample forecasting and point forecasts
    GaConfig ga;
    GaConfig fv_ga;                      ///< cheaper settings for the FV objective
    FvConfig fv;
    RsdDenominator rsd_denominator = RsdDenominator::demand_mean;
    bool ss_weight_exponent = false;
    std::map<std::size_t, double> ss_weights;  ///< lead -> r
    std::size_t random_samples = 10;            ///< per partition and lead time
    PointForecast point = PointForecast::mean;
    std::uint64_t seed = 42;
    int jobs = 1;
};

struct FrontierPoint {
    std::string approach;
    std::size_t lead_time = 0;
    std::size_t partition = 0;
    std::size_t sample = 0;  ///< random baseline draw index, 0 otherwise
    double expected_demand = 0.0;
    double crps_kw = 0.0;
    double mae_kw = 0.0;
    double objective = 0.0;  ///< in-sample objective value (NaN for random)
    std::size_t windows = 0;
    SelectionVector selection;
};

struct CellFailure {
    std::string approach;
    std::size_t lead_time = 0;
    std::size_t partition = 0;
    std::string message;
};

struct Frontier {
    std::vector<FrontierPoint> points;
    std::vector<CellFailure> failures;
    std::vector<Partition> partitions;  ///< all (lead, k) bands
    EvaluationReport report;            ///< one averaged cell per (approach, lead, partition)
};

/// Runs every approach at every (lead time, partition) and scores the chosen
/// portfolios out-of-sample. Cell failures are recorded and do not abort.
[[nodiscard]] Frontier build_frontier(const Panel& panel, const HouseholdForecasts& point_forecasts,
                                      const FrontierConfig& config);

/// Picks r per lead time by running the SS-driven GA for every r in `grid` and
/// scoring the chosen portfolios on in-sample validation windows.
[[nodiscard]] SsTuning tune_ss_weight(const Panel& in_sample, const HouseholdForecasts& point_forecasts,
                                      std::span<const double> grid, const WindowPlan& validation_plan,
                                      const FrontierConfig& config);

/// Mean CRPS per approach over all cells, and per lead time.
struct ApproachSummary {
    std::string approach;
    std::size_t lead_time = 0;  ///< 0 for the all-lead mean
    double mean_crps_kw = 0.0;
    double mean_mae_kw = 0.0;
    std::size_t cells = 0;
};
[[nodiscard]] std::vector<ApproachSummary> summarize(const Frontier& frontier);

[[nodiscard]] std::string selection_bitmap(std::span<const double> v);

void write_frontier_csv(const Frontier& frontier, std::ostream& out);
void write_frontier_json(const Frontier& frontier, const std::vector<std::string>& household_ids, std::ostream& out);

}  // namespace demand_frontier
