#include "demand_frontier/data.hpp"

#include "demand_frontier/error.hpp"
#include "demand_frontier/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

namespace demand_frontier {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kWeek = 168;
}  // namespace

Panel::Panel(std::int64_t first_hour, std::vector<std::string> household_ids, std::size_t n_hours,
             std::vector<double> values)
    : first_hour_(first_hour), ids_(std::move(household_ids)), n_hours_(n_hours), values_(std::move(values)) {
    detail::require(values_.size() == ids_.size() * n_hours_, "panel: value count does not match T x N");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_)
        if (!seen.insert(id).second) throw InvalidInput("panel: duplicate household id '" + id + "'");
    for (double v : values_)
        if (!std::isnan(v) && (!std::isfinite(v) || v < 0.0))
            throw InvalidInput("panel: demand values must be finite and non-negative");
}

std::span<const double> Panel::household(std::size_t i) const {
    if (i >= ids_.size()) throw InvalidInput("panel: household index out of range");
    return {values_.data() + i * n_hours_, n_hours_};
}

std::span<double> Panel::household(std::size_t i) {
    if (i >= ids_.size()) throw InvalidInput("panel: household index out of range");
    return {values_.data() + i * n_hours_, n_hours_};
}

std::size_t Panel::missing_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return std::isnan(v); }));
}

double Panel::missing_fraction() const noexcept {
    return values_.empty() ? 0.0 : static_cast<double>(missing_count()) / static_cast<double>(values_.size());
}

Panel Panel::slice_hours(std::size_t begin, std::size_t end) const {
    detail::require(begin <= end && end <= n_hours_, "panel: hour slice out of range");
    const std::size_t len = end - begin;
    std::vector<double> out;
    out.reserve(len * ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        auto col = household(i);
        out.insert(out.end(), col.begin() + static_cast<std::ptrdiff_t>(begin),
                   col.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return Panel(hour_at(begin), ids_, len, std::move(out));
}

Panel Panel::select_households(std::span<const std::size_t> columns) const {
    std::vector<std::string> ids;
    std::vector<double> out;
    out.reserve(columns.size() * n_hours_);
    for (std::size_t c : columns) {
        auto col = household(c);
        ids.push_back(ids_[c]);
        out.insert(out.end(), col.begin(), col.end());
    }
    return Panel(first_hour_, std::move(ids), n_hours_, std::move(out));
}

Panel Panel::scaled(double factor) const {
    detail::require(factor >= 0.0 && std::isfinite(factor), "panel: scale factor must be non-negative");
    std::vector<double> out = values_;
    for (double& v : out) v *= factor;
    return Panel(first_hour_, ids_, n_hours_, std::move(out));
}

bool is_prime(std::size_t n) noexcept {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::size_t d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

Panel ingest(std::span<const MeterReading> readings, Resolution resolution) {
    detail::require(!readings.empty(), "ingest: empty reading stream");

    struct Last {
        std::int64_t ts;
        std::optional<double> value;
    };
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> index;
    std::unordered_map<std::string, Last> last;
    // (household, hour) -> accumulated value; half-hourly slots need both halves
    std::map<std::pair<std::size_t, std::int64_t>, std::pair<double, int>> cells;
    std::int64_t min_hour = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_hour = std::numeric_limits<std::int64_t>::min();

    for (const auto& r : readings) {
        if (r.demand && (!std::isfinite(*r.demand) || *r.demand < 0.0))
            throw InvalidInput("ingest: household '" + r.household_id + "' has a negative or non-finite reading at " +
                               format_iso8601_utc(r.timestamp));
        auto [it, inserted] = index.try_emplace(r.household_id, ids.size());
        if (inserted) ids.push_back(r.household_id);

        if (auto l = last.find(r.household_id); l != last.end()) {
            if (l->second.ts == r.timestamp) {
                auto show = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string("missing"); };
                throw InvalidInput("ingest: duplicate reading for household '" + r.household_id + "' at " +
                                   format_iso8601_utc(r.timestamp) + " (values " + show(l->second.value) + " and " +
                                   show(r.demand) + ")");
            }
            if (r.timestamp < l->second.ts)
                throw InvalidInput("ingest: timestamps for household '" + r.household_id +
                                   "' are not increasing at " + format_iso8601_utc(r.timestamp));
        }
        last[r.household_id] = Last{r.timestamp, r.demand};

        const std::int64_t step = resolution == Resolution::hourly ? 3600 : 1800;
        if (r.timestamp % step != 0)
            throw InvalidInput("ingest: timestamp " + format_iso8601_utc(r.timestamp) +
                               " is not aligned to the declared resolution");
        const std::int64_t hour = r.timestamp >= 0 ? r.timestamp / 3600 : -((-r.timestamp + 3599) / 3600);
        min_hour = std::min(min_hour, hour);
        max_hour = std::max(max_hour, hour);

        auto& cell = cells[{it->second, hour}];
        if (!r.demand || std::isnan(cell.first)) {
            cell.first = kNaN;
        } else {
            cell.first += *r.demand;
        }
        cell.second += 1;
    }

    const auto n_hours = static_cast<std::size_t>(max_hour - min_hour + 1);
    std::vector<double> values(ids.size() * n_hours, kNaN);
    const int parts = resolution == Resolution::hourly ? 1 : 2;
    for (const auto& [key, cell] : cells) {
        const auto t = static_cast<std::size_t>(key.second - min_hour);
        values[key.first * n_hours + t] = cell.second == parts ? cell.first : kNaN;
    }
    return Panel(min_hour, std::move(ids), n_hours, std::move(values));
}

Panel impute_missing(const Panel& panel) {
    const std::size_t T = panel.hours();
    std::vector<double> out = panel.raw();
    for (std::size_t i = 0; i < panel.households(); ++i) {
        auto src = panel.household(i);
        double* dst = out.data() + i * T;
        if (std::all_of(src.begin(), src.end(), [](double v) { return std::isnan(v); }))
            throw InvalidInput("impute_missing: household '" + panel.household_ids()[i] + "' has no observed values");
        for (std::size_t t = 0; t < T; ++t) {
            if (!std::isnan(src[t])) continue;
            double fill = kNaN;
            for (std::size_t back = kWeek; back <= t; back += kWeek)
                if (!std::isnan(src[t - back])) {
                    fill = src[t - back];
                    break;
                }
            if (std::isnan(fill))
                for (std::size_t fwd = t + kWeek; fwd < T; fwd += kWeek)
                    if (!std::isnan(src[fwd])) {
                        fill = src[fwd];
                        break;
                    }
            // no observation at this hour-of-week at all: nearest observed hour
            for (std::size_t d = 1; std::isnan(fill) && d < T; ++d) {
                if (d <= t && !std::isnan(src[t - d])) fill = src[t - d];
                else if (t + d < T && !std::isnan(src[t + d])) fill = src[t + d];
            }
            dst[t] = fill;
        }
    }
    return Panel(panel.first_hour(), panel.household_ids(), T, std::move(out));
}

WindowPlan make_windows(std::size_t n_hours, std::size_t train_length, std::size_t horizon, std::size_t stride,
                        std::size_t first_train_start) {
    if (!is_prime(stride)) throw InvalidInput("make_windows: stride " + std::to_string(stride) + " is not prime");
    detail::require(train_length > 0 && horizon > 0, "make_windows: train length and horizon must be positive");
    const std::size_t need = first_train_start + train_length + horizon;
    if (n_hours < need)
        throw InvalidInput("make_windows: panel has " + std::to_string(n_hours) + " hours but at least " +
                           std::to_string(need) + " are required");
    WindowPlan plan{train_length, horizon, stride, {}};
    for (std::size_t start = first_train_start; start + train_length + horizon <= n_hours; start += stride)
        plan.windows.push_back({start, start + train_length, start + train_length + horizon});
    return plan;
}

WindowPlan make_windows(const Panel& panel, std::size_t train_length, std::size_t horizon, std::size_t stride) {
    return make_windows(panel.hours(), train_length, horizon, stride, 0);
}

std::vector<double> aggregate(const Panel& panel, std::span<const double> weights, AggregateMode mode) {
    if (weights.size() != panel.households())
        throw InvalidInput("aggregate: selection has " + std::to_string(weights.size()) + " entries for " +
                           std::to_string(panel.households()) + " households");
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw InvalidInput("aggregate: weights must be finite and non-negative");
        total += w;
    }
    if (total <= 0.0) throw InvalidInput("aggregate: selection has no nonzero weight");

    std::vector<double> out(panel.hours(), 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        auto col = panel.household(i);
        for (std::size_t t = 0; t < out.size(); ++t) out[t] += weights[i] * col[t];
    }
    if (mode == AggregateMode::average)
        for (double& v : out) v /= total;
    return out;
}

void SyntheticPopulationConfig::validate() const {
    detail::require(n_households > 0, "synthetic config: n_households must be positive");
    detail::require(n_hours > 0, "synthetic config: n_hours must be positive");
    auto check = [](const Range& r, const char* name, double lo, double hi) {
        if (!(r.lo <= r.hi) || r.lo < lo || r.hi > hi)
            throw InvalidInput(std::string("synthetic config: invalid range for ") + name);
    };
    const double inf = std::numeric_limits<double>::infinity();
    check(base_load, "base_load", 0.0, inf);
    check(daily_amplitude, "daily_amplitude", 0.0, inf);
    check(weekly_amplitude, "weekly_amplitude", 0.0, inf);
    check(trend_slope, "trend_slope", -inf, inf);
    check(noise_scale, "noise_scale", 0.0, inf);
    check(garch_persistence, "garch_persistence", 0.0, 0.999);
    check(arch_share, "arch_share", 0.0, 1.0);
    detail::require(missing_rate >= 0.0 && missing_rate <= 1.0, "synthetic config: missing_rate must lie in [0, 1]");
}

Panel synthesize_population(const SyntheticPopulationConfig& config) {
    config.validate();
    const std::size_t T = config.n_hours;
    const std::size_t N = config.n_households;
    std::vector<double> values(T * N);
    std::vector<std::string> ids;
    ids.reserve(N);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    for (std::size_t i = 0; i < N; ++i) {
        ids.push_back("H" + std::to_string(1000 + i));
        Rng rng = make_rng(config.seed, i);
        auto draw = [&rng](const Range& r) { return r.lo + (r.hi - r.lo) * uniform01(rng); };

        const double base = draw(config.base_load);
        const double daily = draw(config.daily_amplitude) * base;
        const double weekly = draw(config.weekly_amplitude) * base;
        const double slope = draw(config.trend_slope);
        const double noise_sd = draw(config.noise_scale) * base;
        const double persistence = draw(config.garch_persistence);
        const double arch = persistence * draw(config.arch_share);
        const double garch = persistence - arch;
        const double omega = noise_sd * noise_sd * (1.0 - persistence);
        const double phase_day = two_pi * uniform01(rng);
        const double phase_half = two_pi * uniform01(rng);
        const double phase_week = two_pi * uniform01(rng);

        std::normal_distribution<double> normal(0.0, 1.0);
        double var = noise_sd * noise_sd;
        double eps = 0.0;
        double* col = values.data() + i * T;
        for (std::size_t t = 0; t < T; ++t) {
            const double th = static_cast<double>(t);
            const double seasonal = daily * (std::sin(two_pi * th / 24.0 + phase_day) +
                                             0.5 * std::sin(2.0 * two_pi * th / 24.0 + phase_half)) /
                                        1.5 +
                                    weekly * std::sin(two_pi * th / 168.0 + phase_week);
            double noise = 0.0;
            if (noise_sd > 0.0) {
                var = omega + garch * var + arch * eps * eps;
                eps = std::sqrt(var) * normal(rng);
                noise = eps;
            }
            col[t] = std::max(0.0, base + seasonal + slope * th + noise);
        }
        if (config.missing_rate > 0.0) {
            Rng miss(derive_seed(config.seed, i, 1));
            for (std::size_t t = 0; t < T; ++t)
                if (uniform01(miss) < config.missing_rate) col[t] = kNaN;
        }
    }
    return Panel(config.first_hour, std::move(ids), T, std::move(values));
}

}  // namespace demand_frontier
