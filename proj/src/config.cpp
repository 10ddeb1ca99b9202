#include "demand_frontier/config.hpp"

#include "demand_frontier/error.hpp"
#include "demand_frontier/tuning.hpp"

#include <fstream>
#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"

namespace demand_frontier {

namespace {

using json = nlohmann::ordered_json;

/// Reads typed members of a JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw InvalidInput(path_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw InvalidInput(path_ + "." + key + ": " + e.what());
        }
    }

    [[nodiscard]] const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    [[nodiscard]] std::string path(const char* key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.contains(key)) throw InvalidInput(path_ + ": unknown key '" + key + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class E>
E parse_enum(const std::string& text, std::initializer_list<std::pair<const char*, E>> options, const std::string& where) {
    std::string allowed;
    for (const auto& [name, value] : options) {
        if (text == name) return value;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw InvalidInput(where + ": '" + text + "' is not one of " + allowed);
}

void read_range(ObjectReader& r, const char* key, Range& range) {
    if (const json* j = r.child(key)) {
        if (!j->is_array() || j->size() != 2 || !(*j)[0].is_number() || !(*j)[1].is_number())
            throw InvalidInput(r.path(key) + ": expected [lo, hi]");
        range = {(*j)[0].get<double>(), (*j)[1].get<double>()};
    }
}

void read_synthetic(const json& j, const std::string& path, SyntheticPopulationConfig& c) {
    ObjectReader r(j, path);
    r.get("n_households", c.n_households);
    r.get("n_hours", c.n_hours);
    r.get("seed", c.seed);
    r.get("first_hour", c.first_hour);
    read_range(r, "base_load", c.base_load);
    read_range(r, "daily_amplitude", c.daily_amplitude);
    read_range(r, "weekly_amplitude", c.weekly_amplitude);
    read_range(r, "trend_slope", c.trend_slope);
    read_range(r, "noise_scale", c.noise_scale);
    read_range(r, "garch_persistence", c.garch_persistence);
    read_range(r, "arch_share", c.arch_share);
    r.get("missing_rate", c.missing_rate);
    r.finish();
}

void read_ga(const json& j, const std::string& path, GaConfig& c) {
    ObjectReader r(j, path);
    r.get("population", c.population);
    r.get("max_generations", c.max_generations);
    r.get("stall_generations", c.stall_generations);
    r.get("crossover_probability", c.crossover_probability);
    r.get("mutation_probability", c.mutation_probability);
    r.get("tournament_size", c.tournament_size);
    r.get("elites", c.elites);
    r.get("penalty_coefficient", c.penalty_coefficient);
    r.get("cardinality_cap", c.cardinality_cap);
    r.get("blend_alpha", c.blend_alpha);
    r.get("mutation_sigma", c.mutation_sigma);
    r.finish();
}

void read_forecast(const json& j, const std::string& path, PipelineConfig& c) {
    ObjectReader r(j, path);
    r.get("max_p", c.forecast.max_p);
    r.get("max_q", c.forecast.max_q);
    r.get("garch_order", c.forecast.fit.garch_order);
    r.get("arch_order", c.forecast.fit.arch_order);
    r.get("max_iterations", c.forecast.fit.optimizer.max_iterations);
    r.get("restarts", c.forecast.fit.restarts);
    r.get("ensemble_size", c.forecast.ensemble_size);
    r.get("kde_window", c.forecast.kde_window);
    r.get("gof_bins", c.selector.gof_bins);
    if (const json* p = r.child("policy"))
        c.policy = parse_enum<ModelPolicy>(
            p->get<std::string>(),
            {{"gated", ModelPolicy::gated}, {"arma_garch", ModelPolicy::arma_garch_only}, {"kde", ModelPolicy::kde_only}},
            r.path("policy"));
    r.finish();
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

json ga_json(const GaConfig& c) {
    return {{"population", c.population},
            {"max_generations", c.max_generations},
            {"stall_generations", c.stall_generations},
            {"crossover_probability", c.crossover_probability},
            {"mutation_probability", c.mutation_probability},
            {"tournament_size", c.tournament_size},
            {"elites", c.elites},
            {"penalty_coefficient", c.penalty_coefficient},
            {"cardinality_cap", c.cardinality_cap},
            {"blend_alpha", c.blend_alpha},
            {"mutation_sigma", c.mutation_sigma}};
}

const char* policy_name(ModelPolicy p) {
    switch (p) {
        case ModelPolicy::arma_garch_only: return "arma_garch";
        case ModelPolicy::kde_only: return "kde";
        case ModelPolicy::gated: break;
    }
    return "gated";
}

json forecast_json(const PipelineConfig& c) {
    return {{"max_p", c.forecast.max_p},
            {"max_q", c.forecast.max_q},
            {"garch_order", c.forecast.fit.garch_order},
            {"arch_order", c.forecast.fit.arch_order},
            {"max_iterations", c.forecast.fit.optimizer.max_iterations},
            {"restarts", c.forecast.fit.restarts},
            {"ensemble_size", c.forecast.ensemble_size},
            {"kde_window", c.forecast.kde_window},
            {"gof_bins", c.selector.gof_bins},
            {"policy", policy_name(c.policy)}};
}

}  // namespace

RunConfig::RunConfig() {
    fv_ga.population = 16;
    fv_ga.max_generations = 25;
    fv_ga.stall_generations = 5;
    fv.pipeline.forecast.ensemble_size = 250;
    fv.pipeline.forecast.max_p = 2;
    fv.pipeline.forecast.max_q = 2;
    tuning.threshold_grid = default_threshold_grid();
}

void RunConfig::validate() const {
    if (schema_version != kConfigSchemaVersion)
        throw InvalidInput("config: unsupported schema_version " + std::to_string(schema_version));
    if (!data.csv_path) data.synthetic.validate();
    detail::require(train_length >= 2 * 168, "config: train_length must cover two weeks (336 h)");
    detail::require(in_sample_hours >= train_length, "config: in_sample_hours must be at least train_length");
    detail::require(horizon >= 1, "config: horizon must be positive");
    detail::require(is_prime(stride), "config: stride " + std::to_string(stride) + " is not prime");
    detail::require(!lead_times.empty(), "config: lead_times is empty");
    for (std::size_t h : lead_times)
        detail::require(h >= 1 && h <= horizon,
                        "config: lead time " + std::to_string(h) + " must lie in 1..horizon (" + std::to_string(horizon) + ")");
    detail::require(partitions >= 1, "config: partitions must be at least 1");
    detail::require(!approaches.empty(), "config: approaches is empty");
    static const std::set<std::string> known{"random", "fv", "sr", "ss", "fv_relaxed", "sr_relaxed", "ss_relaxed"};
    for (const auto& a : approaches) detail::require(known.contains(a), "config: unknown approach '" + a + "'");
    ga.validate();
    fv_ga.validate();
    fv.validate();
    pipeline.selector.validate();
    detail::require(pipeline.forecast.ensemble_size >= 1 && fv.pipeline.forecast.ensemble_size >= 1,
                    "config: ensemble_size must be positive");
    const bool tunes = tuning.tune_threshold ||
                       (tuning.tune_ss_weight && std::any_of(approaches.begin(), approaches.end(), [](const std::string& a) {
                            return a == "ss" || a == "ss_relaxed";
                        }));
    if (tunes)
        detail::require(tuning.train_length >= 2 * 168 && tuning.train_length + horizon <= in_sample_hours,
                        "config: tuning.train_length must fit inside the in-sample span");
    detail::require(!tuning.threshold_grid.empty(), "config: tuning.threshold_grid is empty");
    for (double d : tuning.threshold_grid)
        detail::require(d >= 0.0 && d <= 1.0, "config: thresholds must lie in [0, 1]");
    detail::require(!tuning.ss_grid.empty(), "config: tuning.ss_grid is empty");
    for (double r : tuning.ss_grid) detail::require(r >= 0.0 && r <= 1.0, "config: ss weights must lie in [0, 1]");
    for (std::size_t g : tuning.group_sizes) detail::require(g >= 1, "config: tuning group sizes must be positive");
    detail::require(!aggstudy.group_sizes.empty() && aggstudy.groups >= 1, "config: aggstudy needs sizes and groups");
    detail::require(jobs >= 1, "config: jobs must be at least 1");
    detail::require(!output_dir.empty(), "config: output_dir is empty");
}

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("config: malformed JSON: ") + e.what());
    }
    RunConfig c;
    ObjectReader r(doc, "config");
    if (!doc.contains("schema_version")) throw InvalidInput("config: schema_version is required");
    r.get("schema_version", c.schema_version);
    if (c.schema_version != kConfigSchemaVersion)
        throw InvalidInput("config: unsupported schema_version " + std::to_string(c.schema_version));

    if (const json* d = r.child("data")) {
        ObjectReader dr(*d, "config.data");
        std::string csv;
        dr.get("csv", csv);
        if (!csv.empty()) c.data.csv_path = csv;
        if (const json* res = dr.child("resolution"))
            c.data.resolution = parse_enum<Resolution>(
                res->get<std::string>(), {{"hourly", Resolution::hourly}, {"half_hourly", Resolution::half_hourly}},
                "config.data.resolution");
        if (const json* s = dr.child("synthetic")) read_synthetic(*s, "config.data.synthetic", c.data.synthetic);
        dr.finish();
    }
    r.get("in_sample_hours", c.in_sample_hours);
    r.get("train_length", c.train_length);
    r.get("horizon", c.horizon);
    r.get("stride", c.stride);
    r.get("lead_times", c.lead_times);
    r.get("partitions", c.partitions);
    if (const json* p = r.child("partition_range"))
        c.partition_range = parse_enum<PartitionRange>(
            p->get<std::string>(), {{"capacity", PartitionRange::capacity}, {"total", PartitionRange::total}},
            "config.partition_range");
    r.get("approaches", c.approaches);
    r.get("random_samples", c.random_samples);
    if (const json* g = r.child("ga")) read_ga(*g, "config.ga", c.ga);
    if (const json* f = r.child("forecast")) read_forecast(*f, "config.forecast", c.pipeline);
    if (const json* f = r.child("fv")) {
        ObjectReader fr(*f, "config.fv");
        fr.get("validation_fraction", c.fv.validation_fraction);
        fr.get("origin_stride", c.fv.origin_stride);
        fr.get("household_seeding", c.fv.household_seeding);
        if (const json* g = fr.child("ga")) read_ga(*g, "config.fv.ga", c.fv_ga);
        if (const json* fc = fr.child("forecast")) read_forecast(*fc, "config.fv.forecast", c.fv.pipeline);
        fr.finish();
    }
    if (const json* d = r.child("rsd_denominator"))
        c.rsd_denominator = parse_enum<RsdDenominator>(
            d->get<std::string>(),
            {{"demand_mean", RsdDenominator::demand_mean}, {"remainder_mean", RsdDenominator::remainder_mean}},
            "config.rsd_denominator");
    r.get("ss_weight_exponent", c.ss_weight_exponent);
    if (const json* p = r.child("point_forecast"))
        c.point = parse_enum<PointForecast>(p->get<std::string>(),
                                            {{"mean", PointForecast::mean}, {"median", PointForecast::median}},
                                            "config.point_forecast");
    if (const json* t = r.child("tuning")) {
        ObjectReader tr(*t, "config.tuning");
        tr.get("tune_threshold", c.tuning.tune_threshold);
        tr.get("tune_ss_weight", c.tuning.tune_ss_weight);
        tr.get("train_length", c.tuning.train_length);
        tr.get("group_sizes", c.tuning.group_sizes);
        tr.get("groups_per_size", c.tuning.groups_per_size);
        tr.get("threshold_grid", c.tuning.threshold_grid);
        tr.get("ss_grid", c.tuning.ss_grid);
        tr.get("default_threshold", c.tuning.default_threshold);
        tr.get("default_ss_weight", c.tuning.default_ss_weight);
        tr.finish();
    }
    if (const json* a = r.child("aggstudy")) {
        ObjectReader ar(*a, "config.aggstudy");
        ar.get("group_sizes", c.aggstudy.group_sizes);
        ar.get("groups", c.aggstudy.groups);
        if (const json* p = ar.child("policy"))
            c.aggstudy.policy = parse_enum<ModelPolicy>(
                p->get<std::string>(),
                {{"gated", ModelPolicy::gated}, {"arma_garch", ModelPolicy::arma_garch_only}, {"kde", ModelPolicy::kde_only}},
                "config.aggstudy.policy");
        ar.finish();
    }
    r.get("seed", c.seed);
    r.get("jobs", c.jobs);
    r.get("output_dir", c.output_dir);
    r.finish();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string dump_run_config(const RunConfig& c) {
    const auto& s = c.data.synthetic;
    json data;
    if (c.data.csv_path) data["csv"] = *c.data.csv_path;
    data["resolution"] = c.data.resolution == Resolution::hourly ? "hourly" : "half_hourly";
    data["synthetic"] = {{"n_households", s.n_households},
                         {"n_hours", s.n_hours},
                         {"seed", s.seed},
                         {"first_hour", s.first_hour},
                         {"base_load", range_json(s.base_load)},
                         {"daily_amplitude", range_json(s.daily_amplitude)},
                         {"weekly_amplitude", range_json(s.weekly_amplitude)},
                         {"trend_slope", range_json(s.trend_slope)},
                         {"noise_scale", range_json(s.noise_scale)},
                         {"garch_persistence", range_json(s.garch_persistence)},
                         {"arch_share", range_json(s.arch_share)},
                         {"missing_rate", s.missing_rate}};
    json doc;
    doc["schema_version"] = c.schema_version;
    doc["data"] = std::move(data);
    doc["in_sample_hours"] = c.in_sample_hours;
    doc["train_length"] = c.train_length;
    doc["horizon"] = c.horizon;
    doc["stride"] = c.stride;
    doc["lead_times"] = c.lead_times;
    doc["partitions"] = c.partitions;
    doc["partition_range"] = c.partition_range == PartitionRange::capacity ? "capacity" : "total";
    doc["approaches"] = c.approaches;
    doc["random_samples"] = c.random_samples;
    doc["ga"] = ga_json(c.ga);
    doc["forecast"] = forecast_json(c.pipeline);
    doc["fv"] = {{"validation_fraction", c.fv.validation_fraction},
                 {"origin_stride", c.fv.origin_stride},
                 {"household_seeding", c.fv.household_seeding},
                 {"ga", ga_json(c.fv_ga)},
                 {"forecast", forecast_json(c.fv.pipeline)}};
    doc["rsd_denominator"] = c.rsd_denominator == RsdDenominator::demand_mean ? "demand_mean" : "remainder_mean";
    doc["ss_weight_exponent"] = c.ss_weight_exponent;
    doc["point_forecast"] = c.point == PointForecast::mean ? "mean" : "median";
    doc["tuning"] = {{"tune_threshold", c.tuning.tune_threshold},
                     {"tune_ss_weight", c.tuning.tune_ss_weight},
                     {"train_length", c.tuning.train_length},
                     {"group_sizes", c.tuning.group_sizes},
                     {"groups_per_size", c.tuning.groups_per_size},
                     {"threshold_grid", c.tuning.threshold_grid},
                     {"ss_grid", c.tuning.ss_grid},
                     {"default_threshold", c.tuning.default_threshold},
                     {"default_ss_weight", c.tuning.default_ss_weight}};
    doc["aggstudy"] = {{"group_sizes", c.aggstudy.group_sizes},
                       {"groups", c.aggstudy.groups},
                       {"policy", policy_name(c.aggstudy.policy)}};
    doc["seed"] = c.seed;
    doc["jobs"] = c.jobs;
    doc["output_dir"] = c.output_dir;
    return doc.dump(2);
}

}  // namespace demand_frontier
