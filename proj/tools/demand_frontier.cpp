#include "demand_frontier/commands.hpp"
#include "demand_frontier/error.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

namespace df = demand_frontier;

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("demand-frontier");
    logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("DEMAND_FRONTIER_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"
        if (level == spdlog::level::off && std::string(env) != "off")
            spdlog::warn("unknown DEMAND_FRONTIER_LOG level '{}', keeping info", env);
        else
            spdlog::set_level(level);
    }
}

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out;
};

df::RunConfig resolve(const Options& opt) {
    df::RunConfig config = opt.config_path.empty() ? df::RunConfig{} : df::load_run_config(opt.config_path);
    if (opt.seed) config.seed = *opt.seed;
    if (opt.jobs) config.jobs = *opt.jobs;
    if (opt.out) config.output_dir = *opt.out;
    config.validate();
    return config;
}

void add_common(CLI::App* cmd, Options& opt, const char* out_help) {
    cmd->add_option("--config", opt.config_path, "JSON run config")->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "override the config seed");
    cmd->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::Range(1, 1024));
    cmd->add_option("--out", opt.out, out_help);
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Demand portfolio construction from probabilistic household forecasts"};
    app.require_subcommand(1);

    Options synth_opt, run_opt, agg_opt, check_opt;
    auto* synth = app.add_subcommand("synth", "write a synthetic household panel as ingestion CSV");
    add_common(synth, synth_opt, "output CSV path (default <output_dir>/panel.csv)");
    auto* run = app.add_subcommand("run", "tune, build the portfolio frontier and evaluate it out of sample");
    add_common(run, run_opt, "output directory");
    auto* agg = app.add_subcommand("aggstudy", "forecast accuracy of random groups by group size");
    add_common(agg, agg_opt, "output directory");
    auto* check = app.add_subcommand("validate-config", "parse and validate a config, printing the resolved form");
    add_common(check, check_opt, "output directory");
    check->get_option("--config")->required();
    std::string schema_dir;
    auto* schema = app.add_subcommand("check-schema", "verify that the artifacts in a directory match their schema");
    schema->add_option("dir", schema_dir, "artifact directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? df::kExitSuccess : df::kExitFatal;
    }

    try {
        if (synth->parsed()) {
            df::RunConfig config = resolve(synth_opt);
            if (synth_opt.seed) config.data.synthetic.seed = *synth_opt.seed;
            const std::string path = synth_opt.out ? *synth_opt.out : config.output_dir + "/panel.csv";
            return df::cmd_synth(config, path);
        }
        if (run->parsed()) return df::cmd_run(resolve(run_opt));
        if (agg->parsed()) return df::cmd_aggstudy(resolve(agg_opt));
        if (check->parsed()) {
            std::cout << df::dump_run_config(resolve(check_opt)) << '\n';
            return df::kExitSuccess;
        }
        if (schema->parsed()) {
            const auto problems = df::check_output_schema(schema_dir);
            for (const auto& p : problems) spdlog::error("{}", p);
            if (problems.empty()) spdlog::info("all artifacts in {} conform", schema_dir);
            return problems.empty() ? df::kExitSuccess : df::kExitFatal;
        }
    } catch (const df::Error& e) {
        spdlog::error("{}", e.what());
        return df::kExitFatal;
    } catch (const std::exception& e) {
        spdlog::critical("unexpected failure: {}", e.what());
        return df::kExitFatal;
    }
    return df::kExitFatal;
}
