#include "doctest.h"

#include "demand_frontier/commands.hpp"
#include "demand_frontier/config.hpp"
#include "demand_frontier/error.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace demand_frontier;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(DF_TEST_SCRATCH) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DF_CLI_PATH) + " " + args + " 2>/dev/null >/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// small enough to finish in seconds
const char* kTinyRun = R"({
  "schema_version": 1,
  "data": {"synthetic": {"n_households": 12, "n_hours": 1512}},
  "in_sample_hours": 1008, "train_length": 672, "horizon": 24, "stride": 97,
  "lead_times": [4], "partitions": 2, "random_samples": 2,
  "approaches": ["random", "sr", "ss"],
  "ga": {"population": 12, "max_generations": 6, "cardinality_cap": 6},
  "forecast": {"max_p": 1, "max_q": 1, "ensemble_size": 100},
  "tuning": {"tune_threshold": false, "tune_ss_weight": false}
})";

}  // namespace

TEST_CASE("config defaults round-trip through JSON") {
    const RunConfig a = parse_run_config(R"({"schema_version": 1})");
    const std::string dumped = dump_run_config(a);
    const RunConfig b = parse_run_config(dumped);
    CHECK(dump_run_config(b) == dumped);
    CHECK(a.lead_times == std::vector<std::size_t>{4, 12, 24});
    CHECK(a.partitions == 10);
    CHECK(a.seed == 42);
}

TEST_CASE("config parsing rejects unknown keys, bad versions and bad values") {
    CHECK_THROWS_AS((void)parse_run_config(R"({})"), InvalidInput);
    CHECK_THROWS_AS((void)parse_run_config(R"({"schema_version": 2})"), InvalidInput);
    CHECK_THROWS_AS((void)parse_run_config(R"({"schema_version": 1, "partitons": 3})"), InvalidInput);
    CHECK_THROWS_AS((void)parse_run_config(R"({"schema_version": 1, "ga": {"populaton": 3}})"), InvalidInput);
    CHECK_THROWS_AS((void)parse_run_config(R"({"schema_version": 1, "lead_times": [100]})"), InvalidInput);
    CHECK_THROWS_AS((void)parse_run_config(R"({"schema_version": 1, "approaches": ["magic"]})"), InvalidInput);
    CHECK_THROWS_AS((void)parse_run_config(R"({"schema_version": 1, "stride": 96})"), InvalidInput);
    CHECK_THROWS_AS((void)parse_run_config("not json"), InvalidInput);
}

TEST_CASE("synth writes the ingestion schema deterministically") {
    const auto dir = scratch("synth");
    RunConfig c;
    c.data.synthetic.n_households = 100;
    c.data.synthetic.n_hours = 4320;
    CHECK(cmd_synth(c, (dir / "a.csv").string()) == kExitSuccess);
    CHECK(cmd_synth(c, (dir / "b.csv").string()) == kExitSuccess);
    const std::string a = slurp(dir / "a.csv");
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(std::count(a.begin(), a.end(), '\n') == 432001);
    c.data.synthetic.seed = 7;
    CHECK(cmd_synth(c, (dir / "c.csv").string()) == kExitSuccess);
    CHECK(slurp(dir / "c.csv") != a);
}

TEST_CASE("the command line reports success, fatal errors and partial failures") {
    const auto dir = scratch("exit_codes");
    spit(dir / "tiny.json", kTinyRun);
    spit(dir / "broken.json", R"({"schema_version": 1, "unknown": true})");
    // every partition above what two households can supply fails
    std::string partial = kTinyRun;
    partial.replace(partial.find("\"cardinality_cap\": 6"), 20, "\"cardinality_cap\": 1");
    partial.replace(partial.find("\"approaches\": [\"random\", \"sr\", \"ss\"]"), 36, "\"approaches\": [\"sr\"]   ");
    partial.replace(partial.find("\"tuning\""), 8, "\"partition_range\": \"total\", \"tuning\"");
    spit(dir / "partial.json", partial);

    CHECK(run_cli("validate-config --config " + (dir / "tiny.json").string()) == kExitSuccess);
    CHECK(run_cli("validate-config --config " + (dir / "broken.json").string()) == kExitFatal);
    CHECK(run_cli("validate-config --config " + (dir / "missing.json").string()) == kExitFatal);
    CHECK(run_cli("no-such-command") == kExitFatal);

    CHECK(run_cli("run --config " + (dir / "tiny.json").string() + " --out " + (dir / "ok").string()) == kExitSuccess);
    for (const char* f : {"frontier.csv", "frontier.json", "report.csv", "report.json", "summary.csv", "diagnostics.json"})
        CHECK(fs::exists(dir / "ok" / f));
    CHECK(run_cli("check-schema " + (dir / "ok").string()) == kExitSuccess);

    CHECK(run_cli("run --config " + (dir / "partial.json").string() + " --out " + (dir / "partial").string()) ==
          kExitPartial);
    CHECK(slurp(dir / "partial" / "diagnostics.json").find("cell_failures") != std::string::npos);

    CHECK(run_cli("run --config " + (dir / "broken.json").string() + " --out " + (dir / "bad").string()) == kExitFatal);
}

TEST_CASE("runs are byte-identical under the same seed and any job count") {
    const auto dir = scratch("determinism");
    spit(dir / "tiny.json", kTinyRun);
    const std::string cfg = (dir / "tiny.json").string();
    REQUIRE(run_cli("run --config " + cfg + " --out " + (dir / "a").string()) == kExitSuccess);
    REQUIRE(run_cli("run --config " + cfg + " --jobs 3 --out " + (dir / "b").string()) == kExitSuccess);
    REQUIRE(run_cli("run --config " + cfg + " --seed 9 --out " + (dir / "c").string()) == kExitSuccess);
    for (const char* f : {"frontier.csv", "frontier.json", "report.csv", "summary.csv", "diagnostics.json"})
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK(slurp(dir / "a" / "frontier.csv") != slurp(dir / "c" / "frontier.csv"));
}

TEST_CASE("schema check flags corrupted artifacts") {
    const auto dir = scratch("schema");
    spit(dir / "report.csv", "approach,lead_time_h,partition_k,crps_kw,mae_kw,windows\nfv,4,0,0.5,0.25,3\n");
    CHECK(check_output_schema(dir.string()).empty());
    spit(dir / "report.csv", "approach,lead_time_h,partition_k,crps_kw,mae_kw,windows\nfv,4,0,abc,0.25,3\n");
    CHECK(!check_output_schema(dir.string()).empty());
    spit(dir / "report.csv", "approach,lead_time_h,partition_k,crps_kw,mae_kw,windows\nfv,4,0,0.50,0.25,3\n");
    CHECK(!check_output_schema(dir.string()).empty());
    spit(dir / "report.csv", "approach,lead,partition_k,crps_kw,mae_kw,windows\n");
    CHECK(!check_output_schema(dir.string()).empty());
    fs::remove(dir / "report.csv");
    CHECK(!check_output_schema(dir.string()).empty());
}

TEST_CASE("aggregation study emits one row per size and lead") {
    RunConfig c;
    c.data.synthetic.n_households = 20;
    c.data.synthetic.n_hours = 168 * 5;
    c.train_length = 504;
    c.horizon = 24;
    c.lead_times = {4, 24};
    c.aggstudy.group_sizes = {1, 20};
    c.aggstudy.groups = 3;
    const Panel p = load_panel(c).panel;
    const auto rows = aggregation_study(p, c);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].groups == 3);
    CHECK(rows[2].groups == 1);
    CHECK(rows[2].mean_crps_kw < rows[0].mean_crps_kw);
    const auto again = aggregation_study(p, c);
    CHECK(again[1].mean_crps_kw == rows[1].mean_crps_kw);
    c.aggstudy.group_sizes = {21};
    CHECK_THROWS_AS((void)aggregation_study(p, c), InvalidInput);
}
