#include "demand_frontier/portfolio.hpp"

#include "demand_frontier/error.hpp"
#include "demand_frontier/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

namespace demand_frontier {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_relaxed(const std::string& approach) { return approach.ends_with("_relaxed"); }

std::string base_objective(const std::string& approach) {
    return is_relaxed(approach) ? approach.substr(0, approach.size() - 8) : approach;
}

void check_approach(const std::string& approach) {
    static const std::set<std::string> known{"random", "fv", "sr", "ss", "fv_relaxed", "sr_relaxed", "ss_relaxed"};
    if (!known.contains(approach)) throw InvalidInput("unknown approach '" + approach + "'");
}

std::uint64_t approach_stream(const std::string& approach) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : approach) h = (h ^ c) * 1099511628211ULL;
    return h;
}

/// Memoised out-of-sample evaluation: one pipeline run per distinct selection
/// covers every lead time.
class PortfolioEvaluator {
public:
    PortfolioEvaluator(const Panel& panel, const WindowPlan& plan, EvaluationConfig config)
        : panel_(panel), plan_(plan), config_(std::move(config)) {}

    const EvaluationReport& operator()(const SelectionVector& v) {
        auto it = cache_.find(v);
        if (it != cache_.end()) return it->second;
        const std::vector<double> series = aggregate(panel_, v, AggregateMode::sum);
        return cache_.emplace(v, evaluate_windows(series, plan_, config_)).first->second;
    }

    std::size_t size() const noexcept { return cache_.size(); }

private:
    const Panel& panel_;
    const WindowPlan& plan_;
    EvaluationConfig config_;
    std::map<SelectionVector, EvaluationReport> cache_;
};

const ReportCell* cell_for(const EvaluationReport& report, std::size_t lead) {
    for (const auto& c : report.cells)
        if (c.lead_time == lead) return &c;
    return nullptr;
}

/// Memoised lead-independent objective shared by every GA run.
class MemoObjective {
public:
    explicit MemoObjective(std::function<double(std::span<const double>)> fn) : fn_(std::move(fn)) {}

    double operator()(std::span<const double> v) const {
        SelectionVector key(v.begin(), v.end());
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        const double value = fn_(v);
        std::lock_guard lock(mutex_);
        cache_.emplace(std::move(key), value);
        return value;
    }

private:
    std::function<double(std::span<const double>)> fn_;
    mutable std::mutex mutex_;
    mutable std::map<SelectionVector, double> cache_;
};

double partition_total(const HouseholdForecasts& pf, const FrontierConfig& config, std::size_t lead) {
    const auto it = pf.by_lead.find(lead);
    if (it == pf.by_lead.end()) throw InvalidInput("no household point forecasts for lead " + std::to_string(lead));
    const auto& yhat = it->second;
    return config.range == PartitionRange::capacity ? demand_ceiling(yhat, config.ga.cardinality_cap)
                                                    : std::accumulate(yhat.begin(), yhat.end(), 0.0);
}

}  // namespace

HouseholdForecasts household_point_forecasts(const Panel& panel, std::size_t origin, std::size_t train_length,
                                             std::span<const std::size_t> lead_times, const PipelineConfig& config,
                                             std::uint64_t seed, int jobs) {
    detail::require(!lead_times.empty(), "point forecasts: no lead times");
    detail::require(train_length >= 2 * 168, "point forecasts: need at least two weeks of history");
    detail::require(origin >= train_length && origin <= panel.hours(), "point forecasts: origin outside the panel");
    const std::size_t n = panel.households();
    const std::size_t nl = lead_times.size();
    std::vector<double> values(n * nl, 0.0);
    std::vector<std::string> errors(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        const auto series = panel.household(i);
        try {
            const auto fc = forecast_series(series.subspan(origin - train_length, train_length), lead_times, config,
                                            derive_seed(seed, i));
            for (std::size_t j = 0; j < nl; ++j) values[i * nl + j] = fc[j].mean();
        } catch (const Error& e) {
            errors[i] = e.what();
            for (std::size_t j = 0; j < nl; ++j) values[i * nl + j] = series[origin + lead_times[j] - 1 - 168];
        }
    });
    HouseholdForecasts out;
    for (std::size_t j = 0; j < nl; ++j) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = values[i * nl + j];
        out.by_lead[lead_times[j]] = std::move(col);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i].empty()) continue;
        spdlog::warn("household {}: point forecast fell back to seasonal naive: {}", panel.household_ids()[i],
                     errors[i]);
        out.fallbacks.push_back(panel.household_ids()[i]);
    }
    return out;
}

std::vector<double> default_ss_grid() { return {0.0, 0.2, 0.5, 0.8, 1.0}; }

Frontier build_frontier(const Panel& panel, const HouseholdForecasts& point_forecasts, const FrontierConfig& config) {
    detail::require(config.partitions >= 1, "frontier: K must be at least 1");
    detail::require(!config.lead_times.empty(), "frontier: no lead times");
    for (const auto& a : config.approaches) check_approach(a);
    const std::size_t s = config.in_sample_hours;
    detail::require(s >= 2 * 168 && s <= panel.hours(), "frontier: invalid in-sample span");
    for (const Window& w : config.plan.windows)
        detail::require(w.train_end >= s && w.test_end <= panel.hours(),
                        "frontier: out-of-sample windows must test after the in-sample span");
    detail::require(!config.plan.windows.empty(), "frontier: no out-of-sample windows");

    const Panel in_sample = panel.slice_hours(0, s);
    Frontier frontier;

    EvaluationConfig eval;
    eval.lead_times = config.lead_times;
    eval.pipeline = config.pipeline;
    eval.point = config.point;
    eval.seed = derive_seed(config.seed, 0xe7a1ULL);
    eval.jobs = config.jobs;
    PortfolioEvaluator evaluator(panel, config.plan, eval);

    const auto wants = [&](const char* base) {
        return std::any_of(config.approaches.begin(), config.approaches.end(),
                           [&](const std::string& a) { return a != "random" && base_objective(a) == base; });
    };
    std::optional<MemoObjective> sr;
    std::optional<SsObjective> ss;
    std::optional<FvObjective> fv;
    if (wants("sr"))
        sr.emplace([&in_sample, &config](std::span<const double> v) {
            return objective_sr(in_sample, v, config.rsd_denominator, config.pipeline.periods);
        });
    if (wants("ss")) ss.emplace(in_sample, config.rsd_denominator, config.pipeline.periods, config.jobs);
    if (wants("fv")) {
        FvConfig fc = config.fv;
        fc.lead_times = config.lead_times;
        fv.emplace(in_sample, fc);
    }

    // single-household FV scores, squared and per kW of point forecast
    std::map<std::size_t, std::vector<double>> fv_cost;
    if (fv && config.fv.household_seeding) {
        const std::size_t n = in_sample.households();
        std::vector<std::vector<double>> single(n);
        parallel_for(n, config.jobs, [&](std::size_t i) {
            SelectionVector e(n, 0.0);
            e[i] = 1.0;
            single[i] = fv->evaluate(e);
        });
        for (std::size_t j = 0; j < config.lead_times.size(); ++j) {
            const std::size_t h = config.lead_times[j];
            const auto& yhat = point_forecasts.by_lead.at(h);
            std::vector<double> cost(n, kInf);
            for (std::size_t i = 0; i < n; ++i)
                if (yhat[i] > 0.0 && std::isfinite(single[i][j])) cost[i] = single[i][j] * single[i][j] / yhat[i];
            fv_cost[h] = std::move(cost);
        }
    }
    const auto seeds_for = [&](const std::string& base, std::size_t h, const Partition& part) {
        static constexpr double levels[] = {0.25, 0.5, 0.75};
        if (base != "fv" || !fv_cost.contains(h)) return std::vector<SelectionVector>{};
        return greedy_selections(fv_cost.at(h), point_forecasts.by_lead.at(h), part, config.ga.cardinality_cap,
                                 levels);
    };

    std::map<std::size_t, std::vector<Partition>> partitions;
    for (std::size_t h : config.lead_times) {
        partitions[h] = partition_demand_range(partition_total(point_forecasts, config, h),
                                               config.partitions, h);
        frontier.partitions.insert(frontier.partitions.end(), partitions[h].begin(), partitions[h].end());
    }

    // binary optimum per (objective, lead, k), reused as the relaxed warm start
    std::map<std::tuple<std::string, std::size_t, std::size_t>, SelectionVector> binary_best;

    const auto objective_for = [&](const std::string& base, std::size_t h) -> ObjectiveFn {
        if (base == "sr") return [&](std::span<const double> v) { return (*sr)(v); };
        if (base == "ss") {
            const auto it = config.ss_weights.find(h);
            const double r = ss_weight(it == config.ss_weights.end() ? 0.5 : it->second, h, config.ss_weight_exponent);
            return [&, r](std::span<const double> v) { return (*ss)(v, r); };
        }
        return [&, h](std::span<const double> v) { return (*fv)(v, h); };
    };

    for (const std::string& approach : config.approaches) {
        const std::string base = base_objective(approach);
        for (std::size_t h : config.lead_times) {
            const auto& yhat = point_forecasts.by_lead.at(h);
            for (const Partition& part : partitions[h]) {
                const std::uint64_t cell_seed = derive_seed(config.seed, approach_stream(approach), h * 1000 + part.index);
                ReportCell summary{approach, h, part.index};
                try {
                    if (approach == "random") {
                        Rng rng(cell_seed);
                        double crps = 0.0, abs_err = 0.0;
                        std::size_t draws = 0, windows = std::numeric_limits<std::size_t>::max();
                        for (std::size_t r = 0; r < config.random_samples; ++r) {
                            auto v = sample_feasible(yhat, part, config.ga.cardinality_cap, rng, 256);
                            if (!v) continue;
                            const ReportCell* c = cell_for(evaluator(*v), h);
                            if (!c || c->windows == 0) continue;
                            frontier.points.push_back({approach, h, part.index, r, expected_demand(yhat, *v), c->crps_kw,
                                                       c->mae_kw, kNaN, c->windows, *v});
                            crps += c->crps_kw;
                            abs_err += c->mae_kw;
                            windows = std::min(windows, c->windows);
                            ++draws;
                        }
                        if (draws == 0) throw InfeasibleError("no feasible random portfolio could be sampled and scored");
                        summary.crps_kw = crps / static_cast<double>(draws);
                        summary.mae_kw = abs_err / static_cast<double>(draws);
                        summary.windows = windows;
                        frontier.report.cells.push_back(summary);
                        continue;
                    }

                    const ObjectiveFn objective = objective_for(base, h);
                    GaConfig ga = base == "fv" ? config.fv_ga : config.ga;
                    ga.seed = cell_seed;
                    ga.jobs = config.jobs;
                    GaResult result;
                    const auto key = std::make_tuple(base, h, part.index);
                    if (is_relaxed(approach)) {
                        std::vector<SelectionVector> warm;
                        if (auto it = binary_best.find(key); it != binary_best.end()) {
                            warm.push_back(it->second);
                        } else {
                            GaConfig seed_ga = ga;
                            seed_ga.seed = derive_seed(config.seed, approach_stream(base), h * 1000 + part.index);
                            warm.push_back(ga_optimize(objective, part, yhat, seed_ga, seeds_for(base, h, part)).selection);
                        }
                        result = ga_optimize_relaxed(objective, part, yhat, ga, warm);
                    } else {
                        result = ga_optimize(objective, part, yhat, ga, seeds_for(base, h, part));
                        binary_best[key] = result.selection;
                    }
                    const EvaluationReport& rep = evaluator(result.selection);
                    const ReportCell* c = cell_for(rep, h);
                    if (!c || c->windows == 0)
                        throw FitError("every out-of-sample window failed" +
                                       (rep.failures.empty() ? std::string() : ": " + rep.failures.front().message));
                    frontier.points.push_back({approach, h, part.index, 0, result.expected_demand, c->crps_kw, c->mae_kw,
                                               result.objective, c->windows, result.selection});
                    summary.crps_kw = c->crps_kw;
                    summary.mae_kw = c->mae_kw;
                    summary.crps_sd = c->crps_sd;
                    summary.windows = c->windows;
                    summary.failures = c->failures;
                    frontier.report.cells.push_back(summary);
                    spdlog::info("{} h={} k={}: objective {:.6g}, {} members, {} generations, out-of-sample CRPS {:.6g} kW",
                                 approach, h, part.index, result.objective,
                                 std::count_if(result.selection.begin(), result.selection.end(),
                                               [](double w) { return w > 0.0; }),
                                 result.generations, c->crps_kw);
                } catch (const Error& e) {
                    spdlog::error("{} h={} k={}: {}", approach, h, part.index, e.what());
                    frontier.failures.push_back({approach, h, part.index, e.what()});
                }
            }
        }
    }
    return frontier;
}

SsTuning tune_ss_weight(const Panel& in_sample, const HouseholdForecasts& point_forecasts,
                        std::span<const double> grid, const WindowPlan& validation_plan, const FrontierConfig& config) {
    if (grid.empty()) throw InvalidInput("tune_ss_weight: empty weight grid");
    if (validation_plan.windows.empty()) throw InvalidInput("tune_ss_weight: no validation windows");
    for (double r : grid) detail::require(r >= 0.0 && r <= 1.0, "tune_ss_weight: weights must lie in [0, 1]");
    const std::size_t fit_end = validation_plan.windows.front().train_end;
    const SsObjective ss(in_sample.slice_hours(0, fit_end), config.rsd_denominator, config.pipeline.periods,
                         config.jobs);

    EvaluationConfig eval;
    eval.lead_times = config.lead_times;
    eval.pipeline = config.pipeline;
    eval.point = config.point;
    eval.seed = derive_seed(config.seed, 0x55ULL);
    eval.jobs = config.jobs;
    PortfolioEvaluator evaluator(in_sample, validation_plan, eval);

    SsTuning out;
    out.grid.assign(grid.begin(), grid.end());
    for (std::size_t h : config.lead_times) {
        const auto& yhat = point_forecasts.by_lead.at(h);
        const auto parts = partition_demand_range(partition_total(point_forecasts, config, h),
                                                  config.partitions, h);
        std::vector<double> means;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double r = ss_weight(grid[g], h, config.ss_weight_exponent);
            double sum = 0.0;
            std::size_t cells = 0;
            for (const Partition& part : parts) {
                GaConfig ga = config.ga;
                ga.seed = derive_seed(config.seed, 0x55ULL, h * 1000 + part.index);
                ga.jobs = config.jobs;
                try {
                    const GaResult res = ga_optimize([&](std::span<const double> v) { return ss(v, r); }, part, yhat, ga);
                    const ReportCell* c = cell_for(evaluator(res.selection), h);
                    if (!c || c->windows == 0) continue;
                    sum += c->crps_kw;
                    ++cells;
                } catch (const Error& e) {
                    spdlog::warn("ss tuning r={} h={} k={}: {}", grid[g], h, part.index, e.what());
                }
            }
            means.push_back(cells > 0 ? sum / static_cast<double>(cells) : std::numeric_limits<double>::infinity());
        }
        std::size_t best = 0;
        for (std::size_t g = 1; g < grid.size(); ++g)
            if (means[g] < means[best]) best = g;
        if (!std::isfinite(means[best])) throw FitError("tune_ss_weight: every cell failed at lead " + std::to_string(h));
        out.weights[h] = grid[best];
        out.mean_crps[h] = std::move(means);
    }
    return out;
}

std::vector<ApproachSummary> summarize(const Frontier& frontier) {
    // only (lead, partition) cells that every approach produced are compared
    std::set<std::string> approaches;
    std::map<std::pair<std::size_t, std::size_t>, std::set<std::string>> present;
    for (const auto& c : frontier.report.cells) {
        approaches.insert(c.approach);
        if (c.windows > 0) present[{c.lead_time, c.partition}].insert(c.approach);
    }
    std::map<std::pair<std::string, std::size_t>, ApproachSummary> acc;
    for (const auto& c : frontier.report.cells) {
        if (c.windows == 0 || present[{c.lead_time, c.partition}].size() != approaches.size()) continue;
        for (std::size_t lead : {std::size_t{0}, c.lead_time}) {
            auto& s = acc[{c.approach, lead}];
            s.approach = c.approach;
            s.lead_time = lead;
            s.mean_crps_kw += c.crps_kw;
            s.mean_mae_kw += c.mae_kw;
            ++s.cells;
        }
    }
    std::vector<ApproachSummary> out;
    for (auto& [key, s] : acc) {
        s.mean_crps_kw /= static_cast<double>(s.cells);
        s.mean_mae_kw /= static_cast<double>(s.cells);
        out.push_back(s);
    }
    return out;
}

std::string selection_bitmap(std::span<const double> v) {
    std::string bits(v.size(), '0');
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] > 0.0) bits[i] = '1';
    return bits;
}

void write_frontier_csv(const Frontier& frontier, std::ostream& out) {
    out << "approach,lead_time_h,partition_k,expected_demand_kw,crps_kw,mae_kw,selection_bitmap\n";
    for (const auto& p : frontier.points)
        out << fmt::format("{},{},{},{:.9g},{:.9g},{:.9g},{}\n", p.approach, p.lead_time, p.partition,
                           p.expected_demand, p.crps_kw, p.mae_kw, selection_bitmap(p.selection));
}

void write_frontier_json(const Frontier& frontier, const std::vector<std::string>& household_ids, std::ostream& out) {
    using json = nlohmann::ordered_json;
    json points = json::array();
    for (const auto& p : frontier.points) {
        json j;
        j["approach"] = p.approach;
        j["lead_time_h"] = p.lead_time;
        j["partition_k"] = p.partition;
        j["sample"] = p.sample;
        j["expected_demand_kw"] = p.expected_demand;
        j["crps_kw"] = p.crps_kw;
        j["mae_kw"] = p.mae_kw;
        j["objective"] = std::isfinite(p.objective) ? json(p.objective) : json(nullptr);
        j["windows"] = p.windows;
        const bool binary = std::all_of(p.selection.begin(), p.selection.end(),
                                        [](double w) { return w == 0.0 || w == 1.0; });
        if (binary) {
            json ids = json::array();
            for (std::size_t i = 0; i < p.selection.size(); ++i)
                if (p.selection[i] > 0.0) ids.push_back(household_ids.at(i));
            j["selection"] = std::move(ids);
        } else {
            json weights = json::object();
            for (std::size_t i = 0; i < p.selection.size(); ++i)
                if (p.selection[i] > 0.0) weights[household_ids.at(i)] = p.selection[i];
            j["selection"] = std::move(weights);
        }
        points.push_back(std::move(j));
    }
    json parts = json::array();
    for (const auto& p : frontier.partitions)
        parts.push_back({{"lead_time_h", p.lead_time}, {"partition_k", p.index}, {"lower_kw", p.lower}, {"upper_kw", p.upper}});
    json failures = json::array();
    for (const auto& f : frontier.failures)
        failures.push_back(
            {{"approach", f.approach}, {"lead_time_h", f.lead_time}, {"partition_k", f.partition}, {"message", f.message}});
    json doc;
    doc["points"] = std::move(points);
    doc["partitions"] = std::move(parts);
    doc["failures"] = std::move(failures);
    out << doc.dump(2) << '\n';
}

}  // namespace demand_frontier
