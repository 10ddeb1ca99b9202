#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace demand_frontier {

enum class Resolution { hourly, half_hourly };
enum class AggregateMode { sum, average };

/// One smart-meter reading. `timestamp` is seconds since the Unix epoch (UTC).
struct MeterReading {
    std::int64_t timestamp = 0;
    std::string household_id;
    std::optional<double> demand;
};

/**
 * Hourly demand for N households over T consecutive hours.
 *
 * Values are stored household-major so each household's series is a
 * contiguous span. Missing values are NaN and only appear before imputation.
 */
class Panel {
public:
    Panel() = default;
    /// `values` holds N columns of length T back to back; `first_hour` is in
    /// hours since the Unix epoch.
    Panel(std::int64_t first_hour, std::vector<std::string> household_ids, std::size_t n_hours,
          std::vector<double> values);

    [[nodiscard]] std::size_t hours() const noexcept { return n_hours_; }
    [[nodiscard]] std::size_t households() const noexcept { return ids_.size(); }
    [[nodiscard]] std::int64_t first_hour() const noexcept { return first_hour_; }
    [[nodiscard]] std::int64_t hour_at(std::size_t t) const noexcept {
        return first_hour_ + static_cast<std::int64_t>(t);
    }
    [[nodiscard]] const std::vector<std::string>& household_ids() const noexcept { return ids_; }

    [[nodiscard]] std::span<const double> household(std::size_t i) const;
    [[nodiscard]] std::span<double> household(std::size_t i);
    [[nodiscard]] double at(std::size_t t, std::size_t i) const { return values_[i * n_hours_ + t]; }
    [[nodiscard]] const std::vector<double>& raw() const noexcept { return values_; }

    [[nodiscard]] std::size_t missing_count() const noexcept;
    [[nodiscard]] double missing_fraction() const noexcept;

    /// Hours [begin, end) of every household.
    [[nodiscard]] Panel slice_hours(std::size_t begin, std::size_t end) const;
    [[nodiscard]] Panel select_households(std::span<const std::size_t> columns) const;
    [[nodiscard]] Panel scaled(double factor) const;

    friend bool operator==(const Panel&, const Panel&) = default;

private:
    std::int64_t first_hour_ = 0;
    std::vector<std::string> ids_;
    std::size_t n_hours_ = 0;
    std::vector<double> values_;
};

/// Half-open index ranges: training [train_start, train_end), test [train_end, test_end).
struct Window {
    std::size_t train_start = 0;
    std::size_t train_end = 0;
    std::size_t test_end = 0;

    [[nodiscard]] std::size_t origin() const noexcept { return train_end; }
    friend bool operator==(const Window&, const Window&) = default;
};

struct WindowPlan {
    std::size_t train_length = 2016;
    std::size_t horizon = 72;
    std::size_t stride = 97;
    std::vector<Window> windows;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Parameters for the synthetic household population. Amplitudes and noise
/// scales are relative to each household's base load.
struct SyntheticPopulationConfig {
    std::size_t n_households = 200;
    std::size_t n_hours = 4368;
    std::uint64_t seed = 42;
    std::int64_t first_hour = 368184;  // 2012-01-02T00:00:00Z, a Monday

    Range base_load{0.15, 1.2};          // kW
    Range daily_amplitude{0.2, 0.8};     // fraction of base
    Range weekly_amplitude{0.0, 0.3};    // fraction of base
    Range trend_slope{-4e-5, 4e-5};      // kW per hour
    Range noise_scale{0.05, 0.6};        // unconditional noise sd as a fraction of base
    Range garch_persistence{0.80, 0.97}; // garch + arch coefficient
    Range arch_share{0.05, 0.35};        // arch coefficient / persistence
    double missing_rate = 0.0;

    void validate() const;
};

[[nodiscard]] bool is_prime(std::size_t n) noexcept;

/// Builds an hourly grid from a reading stream. Slots with no reading are NaN.
[[nodiscard]] Panel ingest(std::span<const MeterReading> readings, Resolution resolution);

/// Fills each missing value with the same hour-of-week from the closest
/// earlier week, then the closest later week.
[[nodiscard]] Panel impute_missing(const Panel& panel);

[[nodiscard]] WindowPlan make_windows(std::size_t n_hours, std::size_t train_length, std::size_t horizon,
                                      std::size_t stride, std::size_t first_train_start = 0);
[[nodiscard]] WindowPlan make_windows(const Panel& panel, std::size_t train_length, std::size_t horizon,
                                      std::size_t stride);

/// Weighted sum of household columns per hour; `average` divides by the weight total.
[[nodiscard]] std::vector<double> aggregate(const Panel& panel, std::span<const double> weights,
                                            AggregateMode mode);

[[nodiscard]] Panel synthesize_population(const SyntheticPopulationConfig& config);

// ---- CSV (timestamp,household_id,kwh) --------------------------------------

[[nodiscard]] std::int64_t parse_iso8601_utc(std::string_view text);
[[nodiscard]] std::string format_iso8601_utc(std::int64_t seconds);

[[nodiscard]] std::vector<MeterReading> read_readings_csv(std::istream& in);
[[nodiscard]] std::vector<MeterReading> read_readings_csv(const std::string& path);
void write_panel_csv(const Panel& panel, std::ostream& out);
void write_panel_csv(const Panel& panel, const std::string& path);

}  // namespace demand_frontier
