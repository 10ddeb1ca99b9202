#pragma once

#include "demand_frontier/data.hpp"
#include "demand_frontier/portfolio.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace demand_frontier {

inline constexpr int kConfigSchemaVersion = 1;

struct DataSource {
    std::optional<std::string> csv_path;
    Resolution resolution = Resolution::hourly;
    SyntheticPopulationConfig synthetic;
};

struct TuningConfig {
    bool tune_threshold = true;
    bool tune_ss_weight = true;
    std::size_t train_length = 1344;  ///< validation windows inside the in-sample span
    std::vector<std::size_t> group_sizes{1, 10, 50, 100};
    std::size_t groups_per_size = 2;
    std::vector<double> threshold_grid;  ///< empty means 0.00..0.20
    std::vector<double> ss_grid{0.0, 0.2, 0.5, 0.8, 1.0};
    double default_threshold = 0.05;
    double default_ss_weight = 0.5;
};

struct AggStudyConfig {
    std::vector<std::size_t> group_sizes{1, 10, 25, 50, 100, 200};
    std::size_t groups = 10;
    ModelPolicy policy = ModelPolicy::kde_only;
};

struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    DataSource data;
    std::size_t in_sample_hours = 2016;
    std::size_t train_length = 2016;
    std::size_t horizon = 72;
    std::size_t stride = 97;
    std::vector<std::size_t> lead_times{4, 12, 24};
    std::size_t partitions = 10;
    PartitionRange partition_range = PartitionRange::capacity;
    std::vector<std::string> approaches{"random", "fv", "sr", "ss"};
    std::size_t random_samples = 10;
    GaConfig ga;
    GaConfig fv_ga;
    FvConfig fv;
    PipelineConfig pipeline;
    RsdDenominator rsd_denominator = RsdDenominator::demand_mean;
    bool ss_weight_exponent = false;
    PointForecast point = PointForecast::mean;
    TuningConfig tuning;
    AggStudyConfig aggstudy;
    std::uint64_t seed = 42;
    int jobs = 1;
    std::string output_dir = "out";

    RunConfig();
    /// Throws InvalidInput describing the first violated constraint.
    void validate() const;
};

/// Parses a JSON config document. Unknown keys and a missing or unsupported
/// schema_version are errors.
[[nodiscard]] RunConfig parse_run_config(const std::string& json_text);
[[nodiscard]] RunConfig load_run_config(const std::string& path);
/// Fully resolved config as JSON (every default spelled out).
[[nodiscard]] std::string dump_run_config(const RunConfig& config);

}  // namespace demand_frontier
