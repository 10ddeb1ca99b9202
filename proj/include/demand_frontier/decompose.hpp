#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace demand_frontier {

/**
 * Locally weighted polynomial regression evaluated at every `xs[i]`.
 *
 * Each fit uses the ceil(span_fraction * n) nearest neighbours with tricube
 * distance weights, multiplied by `robustness_weights` when non-empty.
 * Throws InvalidInput when a neighbourhood has fewer than degree + 1 points
 * with positive weight.
 */
[[nodiscard]] std::vector<double> loess(std::span<const double> xs, std::span<const double> ys, double span_fraction,
                                        int degree, std::span<const double> robustness_weights = {});

/// Parameters of one STL pass. Spans are in points and must be odd and >= 3.
struct StlConfig {
    std::size_t period = 24;
    std::size_t seasonal_span = 25;
    std::size_t trend_span = 39;
    std::size_t lowpass_span = 25;
    int seasonal_degree = 0;
    int trend_degree = 1;
    int lowpass_degree = 1;
    int inner_iterations = 2;
    int outer_iterations = 1;

    /// Defaults for a period: seasonal span period+1 (made odd), trend span the
    /// next odd integer >= 1.5 * period / (1 - 1.5 / seasonal_span), low-pass
    /// span the next odd integer >= period.
    [[nodiscard]] static StlConfig for_period(std::size_t period);
    [[nodiscard]] static StlConfig for_period(std::size_t period, std::size_t seasonal_span);

    void validate() const;
};

/// Additive split series = seasonal + trend + remainder.
struct DecomposedSeries {
    std::vector<double> seasonal;
    std::vector<double> trend;
    std::vector<double> remainder;
    std::vector<std::size_t> periods;
    /// Length of the combined seasonal cycle (least common multiple of periods).
    std::size_t cycle = 0;
    /// Robustness weights of the final pass (all 1 when no outer iterations ran).
    std::vector<double> robustness_weights;

    [[nodiscard]] std::size_t size() const noexcept { return seasonal.size(); }
};

[[nodiscard]] DecomposedSeries stl(std::span<const double> series, const StlConfig& config);

/// Daily and weekly cycles of hourly data.
inline std::span<const std::size_t> default_periods() noexcept {
    static constexpr std::size_t periods[] = {24, 168};
    return periods;
}

/// Sequential multi-seasonal STL: one pass per period, shortest period first,
/// each on the series with the previously extracted seasonals removed.
[[nodiscard]] DecomposedSeries multi_stl(std::span<const double> series,
                                         std::span<const std::size_t> periods = default_periods());

struct ComponentProjection {
    std::vector<double> seasonal;
    std::vector<double> trend;
};

/// Repeats the last full combined seasonal cycle and holds the last trend value.
[[nodiscard]] ComponentProjection project_components(const DecomposedSeries& decomposition, std::size_t horizon);

}  // namespace demand_frontier
