#include "demand_frontier/commands.hpp"

#include "demand_frontier/error.hpp"
#include "demand_frontier/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

namespace demand_frontier {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::vector<double> random_group(std::size_t n, std::size_t size, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < size; ++i) w[idx[i]] = 1.0;
    return w;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_size(const std::string& s, std::size_t& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

enum class Field { text, size, real, optional_real, bits };

/// Parses a CSV file against a column spec and re-emits it; reports header,
/// arity, type and round-trip mismatches.
void check_csv(const fs::path& path, const std::string& header, const std::vector<Field>& fields,
               std::vector<std::string>& problems) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream raw;
    raw << in.rdbuf();
    const std::string text = raw.str();
    std::istringstream lines(text);
    std::string line;
    std::string rebuilt;
    if (!std::getline(lines, line) || line != header) {
        problems.push_back(path.filename().string() + ": header must be '" + header + "'");
        return;
    }
    rebuilt += line + '\n';
    std::size_t row = 1;
    while (std::getline(lines, line)) {
        ++row;
        const auto cols = split_csv(line);
        if (cols.size() != fields.size()) {
            problems.push_back(fmt::format("{}:{}: expected {} columns, got {}", path.filename().string(), row,
                                           fields.size(), cols.size()));
            continue;
        }
        std::vector<std::string> out;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::string& v = cols[c];
            bool ok = true;
            std::string emitted = v;
            switch (fields[c]) {
                case Field::text: ok = !v.empty(); break;
                case Field::size: {
                    std::size_t x = 0;
                    ok = parse_size(v, x);
                    emitted = std::to_string(x);
                    break;
                }
                case Field::optional_real:
                    if (v.empty()) break;
                    [[fallthrough]];
                case Field::real: {
                    double x = 0.0;
                    ok = parse_double(v, x) && std::isfinite(x);
                    emitted = fmt::format("{:.9g}", x);
                    break;
                }
                case Field::bits: ok = !v.empty() && v.find_first_not_of("01") == std::string::npos; break;
            }
            if (!ok) problems.push_back(fmt::format("{}:{}: column {} has invalid value '{}'", path.filename().string(), row, c + 1, v));
            out.push_back(emitted);
        }
        for (std::size_t c = 0; c < out.size(); ++c) rebuilt += (c ? "," : "") + out[c];
        rebuilt += '\n';
    }
    if (rebuilt != text) problems.push_back(path.filename().string() + ": does not round-trip through its schema");
}

void check_json(const fs::path& path, const std::vector<std::string>& required, std::vector<std::string>& problems) {
    std::ifstream in(path, std::ios::binary);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        problems.push_back(path.filename().string() + ": " + e.what());
        return;
    }
    for (const auto& key : required)
        if (!doc.contains(key)) problems.push_back(path.filename().string() + ": missing key '" + key + "'");
    std::ifstream again(path, std::ios::binary);
    std::ostringstream raw;
    raw << again.rdbuf();
    if (doc.dump(2) + '\n' != raw.str())
        problems.push_back(path.filename().string() + ": does not round-trip through the JSON parser");
}

json summary_json(const std::vector<ApproachSummary>& summary) {
    json out = json::array();
    for (const auto& s : summary) {
        json j{{"approach", s.approach},
               {"lead_time_h", s.lead_time},
               {"mean_crps_kw", s.mean_crps_kw},
               {"mean_mae_kw", s.mean_mae_kw},
               {"mean_crps_x100", s.mean_crps_kw * 100.0},
               {"cells", s.cells}};
        const auto imp = improvement_over_random(summary, s.approach, s.lead_time);
        j["improvement_vs_random_pct"] = imp && s.approach != "random" ? json(*imp) : json(nullptr);
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace

LoadedPanel load_panel(const RunConfig& config) {
    Panel raw;
    if (config.data.csv_path) {
        spdlog::info("reading readings from {}", *config.data.csv_path);
        const auto readings = read_readings_csv(*config.data.csv_path);
        raw = ingest(readings, config.data.resolution);
    } else {
        raw = synthesize_population(config.data.synthetic);
    }
    LoadedPanel out;
    out.missing_fraction = raw.missing_fraction();
    out.panel = raw.missing_count() > 0 ? impute_missing(raw) : std::move(raw);
    spdlog::info("panel: {} households x {} hours, {:.2f}% missing before imputation", out.panel.households(),
                 out.panel.hours(), 100.0 * out.missing_fraction);
    return out;
}

std::optional<double> improvement_over_random(const std::vector<ApproachSummary>& summary, const std::string& approach,
                                              std::size_t lead) {
    const ApproachSummary* a = nullptr;
    const ApproachSummary* r = nullptr;
    for (const auto& s : summary) {
        if (s.lead_time != lead) continue;
        if (s.approach == approach) a = &s;
        if (s.approach == "random") r = &s;
    }
    if (!a || !r || !(r->mean_crps_kw > 0.0)) return std::nullopt;
    return 100.0 * (1.0 - a->mean_crps_kw / r->mean_crps_kw);
}

RunResult run_experiment(const Panel& panel, const RunConfig& config) {
    config.validate();
    const std::size_t t_total = panel.hours(), n = panel.households(), s = config.in_sample_hours;
    if (s + config.horizon > t_total)
        throw InvalidInput(fmt::format("panel has {} hours; the in-sample span ({}) plus one horizon ({}) does not fit",
                                       t_total, s, config.horizon));
    RunResult result;
    const WindowPlan oos = make_windows(t_total, config.train_length, config.horizon, config.stride, s - config.train_length);
    const bool uses_ss = std::any_of(config.approaches.begin(), config.approaches.end(),
                                     [](const std::string& a) { return a == "ss" || a == "ss_relaxed"; });
    const bool tune_ss = uses_ss && config.tuning.tune_ss_weight;
    WindowPlan tuning_plan;
    if (config.tuning.tune_threshold || tune_ss)
        tuning_plan = make_windows(s, config.tuning.train_length, config.horizon, config.stride);
    result.out_of_sample_windows = oos.windows.size();
    result.tuning_windows = tuning_plan.windows.size();
    spdlog::info("{} out-of-sample windows, {} tuning windows", oos.windows.size(), tuning_plan.windows.size());
    const Panel in_sample = panel.slice_hours(0, s);

    PipelineConfig pipeline = config.pipeline;
    FvConfig fv = config.fv;
    fv.lead_times = config.lead_times;
    fv.seed = derive_seed(config.seed, 0xf5ULL);
    for (std::size_t h : config.lead_times) result.applied_thresholds[h] = config.tuning.default_threshold;
    if (config.tuning.tune_threshold) {
        Rng rng = make_rng(config.seed, 0x7417ULL);
        std::vector<std::vector<double>> groups;
        for (std::size_t size : config.tuning.group_sizes)
            for (std::size_t g = 0; g < config.tuning.groups_per_size; ++g)
                groups.push_back(random_group(n, std::min(size, n), rng));
        result.thresholds = tune_threshold(in_sample, groups, config.lead_times, config.tuning.threshold_grid,
                                           tuning_plan, pipeline, derive_seed(config.seed, 0x7418ULL), config.jobs);
        result.applied_thresholds = result.thresholds->thresholds;
        for (const auto& [h, d] : result.applied_thresholds) spdlog::info("threshold for lead {} h: {:.2f}", h, d);
    }
    pipeline.selector.thresholds = result.applied_thresholds;
    pipeline.selector.default_threshold = config.tuning.default_threshold;
    fv.pipeline.selector.thresholds = result.applied_thresholds;
    fv.pipeline.selector.default_threshold = config.tuning.default_threshold;

    spdlog::info("household point forecasts at hour {}", s);
    result.point_forecasts = household_point_forecasts(panel, s, config.train_length, config.lead_times, pipeline,
                                                       derive_seed(config.seed, 0x9f0ULL), config.jobs);

    FrontierConfig fc;
    fc.approaches = config.approaches;
    fc.lead_times = config.lead_times;
    fc.partitions = config.partitions;
    fc.range = config.partition_range;
    fc.in_sample_hours = s;
    fc.plan = oos;
    fc.pipeline = pipeline;
    fc.ga = config.ga;
    fc.fv_ga = config.fv_ga;
    fc.fv_ga.cardinality_cap = config.ga.cardinality_cap;
    fc.fv = fv;
    fc.rsd_denominator = config.rsd_denominator;
    fc.ss_weight_exponent = config.ss_weight_exponent;
    fc.random_samples = config.random_samples;
    fc.point = config.point;
    fc.seed = config.seed;
    fc.jobs = config.jobs;
    for (std::size_t h : config.lead_times) result.applied_ss_weights[h] = config.tuning.default_ss_weight;
    if (tune_ss) {
        spdlog::info("tuning seasonal similarity weights");
        result.ss_weights = tune_ss_weight(in_sample, result.point_forecasts, config.tuning.ss_grid, tuning_plan, fc);
        result.applied_ss_weights = result.ss_weights->weights;
        for (const auto& [h, r] : result.applied_ss_weights) spdlog::info("ss weight for lead {} h: {:.1f}", h, r);
    }
    fc.ss_weights = result.applied_ss_weights;

    result.frontier = build_frontier(panel, result.point_forecasts, fc);
    result.summary = summarize(result.frontier);
    for (const auto& sm : result.summary)
        if (sm.lead_time == 0) spdlog::info("{}: mean CRPS {:.4f} kW over {} cells", sm.approach, sm.mean_crps_kw, sm.cells);
    return result;
}

std::vector<AggStudyRow> aggregation_study(const Panel& panel, const RunConfig& config) {
    config.validate();
    const std::size_t n = panel.households();
    for (std::size_t g : config.aggstudy.group_sizes)
        if (g < 1 || g > n)
            throw InvalidInput(fmt::format("aggstudy: group size {} needs {} households, panel has {}", g, g, n));
    const WindowPlan plan = make_windows(panel.hours(), config.train_length, config.horizon, config.stride);
    EvaluationConfig eval;
    eval.approach = "aggstudy";
    eval.lead_times = config.lead_times;
    eval.pipeline = config.pipeline;
    eval.pipeline.policy = config.aggstudy.policy;
    eval.point = config.point;
    eval.jobs = config.jobs;

    std::vector<AggStudyRow> rows;
    for (std::size_t size : config.aggstudy.group_sizes) {
        // every group of the full population is the same group
        const std::size_t groups = size == n ? 1 : config.aggstudy.groups;
        std::vector<double> sums(config.lead_times.size(), 0.0);
        std::vector<std::size_t> counts(config.lead_times.size(), 0);
        std::size_t windows = 0;
        for (std::size_t g = 0; g < groups; ++g) {
            Rng rng = make_rng(config.seed, derive_seed(size, g));
            const std::vector<double> w = random_group(n, size, rng);
            const std::vector<double> series = aggregate(panel, w, AggregateMode::average);
            eval.seed = derive_seed(config.seed, size, g);
            const EvaluationReport rep = evaluate_windows(series, plan, eval);
            for (std::size_t j = 0; j < rep.cells.size(); ++j) {
                if (rep.cells[j].windows == 0) continue;
                sums[j] += rep.cells[j].crps_kw;
                ++counts[j];
            }
            windows += rep.cells.front().windows;
        }
        for (std::size_t j = 0; j < config.lead_times.size(); ++j) {
            if (counts[j] == 0) throw FitError(fmt::format("aggstudy: every window failed for group size {}", size));
            rows.push_back({size, config.lead_times[j], sums[j] / static_cast<double>(counts[j]), counts[j], windows});
        }
        spdlog::info("aggstudy: group size {} done", size);
    }
    return rows;
}

void write_aggstudy_csv(const std::vector<AggStudyRow>& rows, std::ostream& out) {
    out << "group_size,lead_time_h,mean_crps_kw,groups,windows\n";
    for (const auto& r : rows)
        out << fmt::format("{},{},{:.9g},{},{}\n", r.group_size, r.lead_time, r.mean_crps_kw, r.groups, r.windows);
}

int cmd_synth(const RunConfig& config, const std::string& out_path) {
    config.data.synthetic.validate();
    const Panel panel = synthesize_population(config.data.synthetic);
    const fs::path path(out_path);
    if (path.has_parent_path()) ensure_dir(path.parent_path().string());
    write_panel_csv(panel, out_path);
    spdlog::info("wrote {} households x {} hours to {}", panel.households(), panel.hours(), out_path);
    return kExitSuccess;
}

int cmd_run(const RunConfig& config) {
    ensure_dir(config.output_dir);
    const LoadedPanel loaded = load_panel(config);
    const RunResult result = run_experiment(loaded.panel, config);
    const fs::path dir(config.output_dir);
    {
        auto out = open_output(dir / "frontier.csv");
        write_frontier_csv(result.frontier, out);
    }
    {
        auto out = open_output(dir / "frontier.json");
        write_frontier_json(result.frontier, loaded.panel.household_ids(), out);
    }
    {
        auto out = open_output(dir / "report.csv");
        write_report_csv(result.frontier.report, out);
    }
    {
        auto out = open_output(dir / "report.json");
        write_report_json(result.frontier.report, out);
    }
    {
        auto out = open_output(dir / "summary.csv");
        out << "approach,lead_time_h,mean_crps_kw,mean_mae_kw,cells\n";
        for (const auto& s : result.summary)
            out << fmt::format("{},{},{:.9g},{:.9g},{}\n", s.approach, s.lead_time, s.mean_crps_kw, s.mean_mae_kw,
                               s.cells);
    }
    {
        json diag;
        json cfg = json::parse(dump_run_config(config));
        cfg.erase("jobs");
        cfg.erase("output_dir");
        diag["config"] = std::move(cfg);
        diag["panel"] = {{"households", loaded.panel.households()},
                         {"hours", loaded.panel.hours()},
                         {"missing_fraction_before_imputation", loaded.missing_fraction}};
        diag["windows"] = {{"out_of_sample", result.out_of_sample_windows}, {"tuning", result.tuning_windows}};
        json thresholds = json::array();
        for (const auto& [h, d] : result.applied_thresholds) {
            json j{{"lead_time_h", h}, {"threshold", d}};
            if (result.thresholds) j["mean_crps_by_threshold"] = result.thresholds->mean_crps.at(h);
            thresholds.push_back(std::move(j));
        }
        diag["thresholds"] = std::move(thresholds);
        json weights = json::array();
        for (const auto& [h, r] : result.applied_ss_weights) {
            json j{{"lead_time_h", h}, {"r", r}};
            if (result.ss_weights) j["mean_crps_by_r"] = result.ss_weights->mean_crps.at(h);
            weights.push_back(std::move(j));
        }
        diag["ss_weights"] = std::move(weights);
        diag["point_forecast_fallbacks"] = result.point_forecasts.fallbacks;
        json failures = json::array();
        for (const auto& f : result.frontier.failures)
            failures.push_back({{"approach", f.approach},
                                {"lead_time_h", f.lead_time},
                                {"partition_k", f.partition},
                                {"message", f.message}});
        diag["cell_failures"] = std::move(failures);
        diag["summary"] = summary_json(result.summary);
        auto out = open_output(dir / "diagnostics.json");
        out << diag.dump(2) << '\n';
    }
    spdlog::info("artifacts written to {}", config.output_dir);
    if (!result.frontier.failures.empty()) {
        spdlog::warn("{} cells failed; see diagnostics.json", result.frontier.failures.size());
        return kExitPartial;
    }
    return kExitSuccess;
}

int cmd_aggstudy(const RunConfig& config) {
    ensure_dir(config.output_dir);
    const LoadedPanel loaded = load_panel(config);
    const auto rows = aggregation_study(loaded.panel, config);
    auto out = open_output(fs::path(config.output_dir) / "aggstudy.csv");
    write_aggstudy_csv(rows, out);
    return kExitSuccess;
}

std::vector<std::string> check_output_schema(const std::string& dir) {
    std::vector<std::string> problems;
    const fs::path base(dir);
    if (!fs::is_directory(base)) return {"'" + dir + "' is not a directory"};
    std::size_t found = 0;
    const auto present = [&](const char* name) {
        const bool ok = fs::exists(base / name);
        found += ok ? 1 : 0;
        return ok;
    };
    if (present("frontier.csv"))
        check_csv(base / "frontier.csv", "approach,lead_time_h,partition_k,expected_demand_kw,crps_kw,mae_kw,selection_bitmap",
                  {Field::text, Field::size, Field::size, Field::real, Field::real, Field::real, Field::bits}, problems);
    if (present("report.csv"))
        check_csv(base / "report.csv", "approach,lead_time_h,partition_k,crps_kw,mae_kw,windows",
                  {Field::text, Field::size, Field::size, Field::optional_real, Field::optional_real, Field::size},
                  problems);
    if (present("summary.csv"))
        check_csv(base / "summary.csv", "approach,lead_time_h,mean_crps_kw,mean_mae_kw,cells",
                  {Field::text, Field::size, Field::real, Field::real, Field::size}, problems);
    if (present("aggstudy.csv"))
        check_csv(base / "aggstudy.csv", "group_size,lead_time_h,mean_crps_kw,groups,windows",
                  {Field::size, Field::size, Field::real, Field::size, Field::size}, problems);
    if (present("frontier.json")) check_json(base / "frontier.json", {"points", "partitions", "failures"}, problems);
    if (present("report.json")) check_json(base / "report.json", {"cells"}, problems);
    if (present("diagnostics.json"))
        check_json(base / "diagnostics.json", {"config", "panel", "thresholds", "summary"}, problems);
    if (found == 0) problems.push_back("no known artifacts in '" + dir + "'");
    return problems;
}

}  // namespace demand_frontier
