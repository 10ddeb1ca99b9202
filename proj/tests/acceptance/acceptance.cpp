#include "demand_frontier/commands.hpp"
#include "demand_frontier/decompose.hpp"
#include "demand_frontier/error.hpp"
#include "demand_frontier/forecast.hpp"
#include "demand_frontier/portfolio.hpp"
#include "demand_frontier/score.hpp"
#include "demand_frontier/sged.hpp"
#include "demand_frontier/tuning.hpp"

#include "../support/brute_force.hpp"
#include "../support/simulate.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace df = demand_frontier;
namespace fs = std::filesystem;

namespace {

// ---- tolerances ---------------------------------------------------------------
constexpr double kCrpsRelTol = 0.01;
constexpr std::size_t kCrpsSamples = 100000;
constexpr double kStlIdentityTol = 1e-9;
constexpr double kToneAmplitudeRelTol = 0.05;
constexpr double kGarchMedianAbsTol = 0.05;
constexpr double kSgedGaussianTol = 1e-8;
constexpr double kSgedMassTol = 1e-4;
constexpr int kGaMatchesRequired = 18;
constexpr double kAggReductionRequired = 0.40;
constexpr double kImprovementRequired = 30.0;  // percent
constexpr double kRunBudgetSeconds = 3600.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---- 1 --------------------------------------------------------------------------
Outcome crps_estimator() {
    const auto t0 = Clock::now();
    df::Rng rng = df::make_rng(2024, 1);
    std::uniform_real_distribution<double> mu_d(-5.0, 5.0), sigma_d(0.1, 3.0);
    std::normal_distribution<double> z;
    double worst = 0.0;
    std::vector<double> ens(kCrpsSamples);
    for (int k = 0; k < 10; ++k) {
        const double mu = mu_d(rng), sigma = sigma_d(rng);
        const double y = mu + sigma * 2.0 * (z(rng));
        for (auto& v : ens) v = mu + sigma * z(rng);
        const double exact = df::crps_gaussian(mu, sigma, y);
        worst = std::max(worst, std::abs(df::crps_ensemble(ens, y) - exact) / exact);
    }
    const double secs = seconds_since(t0);
    return {worst < kCrpsRelTol && secs < 10.0,
            fmt::format("max relative error {:.4f}% (limit {:.0f}%), {:.1f}s", 100 * worst, 100 * kCrpsRelTol, secs)};
}

// ---- 2 --------------------------------------------------------------------------
double tone_amplitude(std::span<const double> x, double period) {
    double c = 0.0, s = 0.0;
    const double w = 2.0 * std::numbers::pi / period;
    for (std::size_t t = 0; t < x.size(); ++t) {
        c += x[t] * std::cos(w * static_cast<double>(t));
        s += x[t] * std::sin(w * static_cast<double>(t));
    }
    return 2.0 * std::hypot(c, s) / static_cast<double>(x.size());
}

Outcome stl_identity_and_recovery() {
    const auto t0 = Clock::now();
    df::Rng rng = df::make_rng(2024, 2);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> weeks(3, 8);
    double worst_identity = 0.0;
    for (int k = 0; k < 50; ++k) {
        std::vector<double> y(static_cast<std::size_t>(168 * weeks(rng)));
        double level = 0.0;
        for (auto& v : y) v = (level += 0.1 * z(rng)) + z(rng);
        const auto d = df::multi_stl(y);
        for (std::size_t t = 0; t < y.size(); ++t)
            worst_identity = std::max(worst_identity, std::abs(d.seasonal[t] + d.trend[t] + d.remainder[t] - y[t]));
    }
    std::vector<double> y(168 * 8);
    const double daily = 1.5, weekly = 0.8;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double tt = static_cast<double>(t);
        y[t] = 3.0 + 0.002 * tt + daily * std::sin(2 * std::numbers::pi * tt / 24.0) +
               weekly * std::sin(2 * std::numbers::pi * tt / 168.0 + 1.0) + 0.05 * z(rng);
    }
    const auto d = df::multi_stl(y);
    const double err_d = std::abs(tone_amplitude(d.seasonal, 24.0) - daily) / daily;
    const double err_w = std::abs(tone_amplitude(d.seasonal, 168.0) - weekly) / weekly;
    const double secs = seconds_since(t0);
    return {worst_identity < kStlIdentityTol && err_d < kToneAmplitudeRelTol && err_w < kToneAmplitudeRelTol &&
                secs < 30.0,
            fmt::format("identity max |S+T+R-Y| {:.2e}; amplitude error daily {:.2f}%, weekly {:.2f}%; {:.1f}s",
                        worst_identity, 100 * err_d, 100 * err_w, secs)};
}

// ---- 3 --------------------------------------------------------------------------
Outcome garch_recovery() {
    const auto t0 = Clock::now();
    df::ArmaGarchParams truth;
    truth.omega = 0.05;
    truth.garch = {0.90};
    truth.arch = {0.05};
    std::vector<double> e_omega, e_garch, e_arch;
    int failed = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto y = df::testing::simulate_arma_garch(truth, 5000, seed);
        try {
            const auto m = df::fit_arma_garch(y, 0, 0);
            e_omega.push_back(std::abs(m.params.omega - truth.omega));
            e_garch.push_back(std::abs(m.params.garch[0] - truth.garch[0]));
            e_arch.push_back(std::abs(m.params.arch[0] - truth.arch[0]));
        } catch (const df::Error&) {
            ++failed;
        }
    }
    if (e_omega.empty()) return {false, "no fit converged"};
    const double mo = median(e_omega), mg = median(e_garch), ma = median(e_arch);
    const double secs = seconds_since(t0);
    return {mo < kGarchMedianAbsTol && mg < kGarchMedianAbsTol && ma < kGarchMedianAbsTol && failed == 0 &&
                secs < 120.0,
            fmt::format("median |error| omega {:.4f}, garch {:.4f}, arch {:.4f} (limit {}); {} failed fits; {:.1f}s",
                        mo, mg, ma, kGarchMedianAbsTol, failed, secs)};
}

// ---- 4 --------------------------------------------------------------------------
Outcome sged_sanity() {
    const df::Sged normal(df::SgedParams{0.0, 1.0, 2.0, 1.0});
    double worst_pdf = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double x = -5.0 + 10.0 * i / 49.0;
        const double phi = std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi);
        worst_pdf = std::max(worst_pdf, std::abs(normal.density(x) - phi));
    }
    df::Rng rng = df::make_rng(2024, 4);
    std::uniform_real_distribution<double> loc(-3, 3), scale(0.2, 4), shape(0.7, 5), skew(0.3, 3);
    double worst_mass = 0.0;
    for (int k = 0; k < 10; ++k) {
        const df::Sged d(df::SgedParams{loc(rng), scale(rng), shape(rng), skew(rng)});
        const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double x) { return d.density(x); }, -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), 15, 1e-12);
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    }
    return {worst_pdf < kSgedGaussianTol && worst_mass < kSgedMassTol,
            fmt::format("max |pdf - normal| {:.2e} over 50 probes; max |mass - 1| {:.2e} over 10 parameter sets",
                        worst_pdf, worst_mass)};
}

// ---- 5 --------------------------------------------------------------------------
Outcome selection_gate() {
    df::ArmaGarchParams truth;
    truth.omega = 0.1;
    truth.garch = {0.7};
    truth.arch = {0.1};
    const auto y = df::testing::simulate_arma_garch(truth, 1000, 5);
    df::ForecastOptions opt;
    opt.max_p = 1;
    opt.max_q = 0;
    const auto grid = df::default_threshold_grid();
    int checks = 0, wrong = 0;
    double stub = 0.0;
    opt.p_value_override = [&stub](const df::ArmaGarchModel&, std::span<const double>) { return stub; };
    auto cands = df::fit_candidates(y, opt);
    for (double p : {0.0, 0.005, 0.01, 0.049, 0.05, 0.051, 0.1, 0.15, 0.1999, 0.2, 0.5, 1.0}) {
        stub = p;
        cands = df::fit_candidates(y, opt);
        for (double delta : grid) {
            ++checks;
            const auto expected = p >= delta ? df::ModelKind::arma_garch : df::ModelKind::kde;
            if (cands.choose(delta) != expected) ++wrong;
            df::ModelSelector sel;
            sel.default_threshold = delta;
            if (df::select_model(y, sel, 4, opt).kind != expected) ++wrong;
        }
    }
    return {wrong == 0 && grid.size() == 21 && grid.front() == 0.0 && std::abs(grid.back() - 0.2) < 1e-12,
            fmt::format("{} gate decisions over {} thresholds, {} wrong", 2 * checks, grid.size(), wrong)};
}

// ---- 6 --------------------------------------------------------------------------
struct Instance {
    df::Panel panel;
    std::vector<double> forecasts;
    df::Partition partition;
};

Instance make_instance(std::uint64_t seed, std::size_t n) {
    df::SyntheticPopulationConfig c;
    c.n_households = n;
    c.n_hours = 672;
    c.seed = seed;
    Instance inst{df::synthesize_population(c), {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = inst.panel.household(i);
        inst.forecasts.push_back(std::accumulate(y.end() - 168, y.end(), 0.0) / 168.0);
    }
    const auto parts = df::partition_demand_range(df::demand_ceiling(inst.forecasts, n), 5, 4);
    inst.partition = parts[1 + seed % 3];
    return inst;
}

/// Objective table over all subsets, so the GA and the exhaustive scan share
/// exactly the same values.
df::ObjectiveFn tabulated(const df::ObjectiveFn& f, std::size_t n) {
    auto table = std::make_shared<std::map<std::uint32_t, double>>();
    return [f, n, table](std::span<const double> v) {
        std::uint32_t mask = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (v[i] > 0) mask |= 1u << i;
        if (auto it = table->find(mask); it != table->end()) return it->second;
        const double value = f(v);
        table->emplace(mask, value);
        return value;
    };
}

Outcome ga_vs_brute_force() {
    const auto t0 = Clock::now();
    int match_sr = 0, match_ss = 0, infeasible = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const std::size_t n = 10 + seed % 3;
        const Instance inst = make_instance(seed, n);
        const df::SsObjective ss(inst.panel);
        const auto sr = tabulated([&](std::span<const double> v) { return df::objective_sr(inst.panel, v); }, n);
        const df::ObjectiveFn ssf = [&](std::span<const double> v) { return ss(v, 0.5); };
        df::GaConfig cfg;
        cfg.seed = seed;
        cfg.cardinality_cap = n;
        for (int which = 0; which < 2; ++which) {
            const df::ObjectiveFn& f = which == 0 ? sr : ssf;
            const auto exact = df::testing::exhaustive_optimum(f, inst.partition, inst.forecasts, n);
            const auto ga = df::ga_optimize(f, inst.partition, inst.forecasts, cfg);
            if (!inst.partition.contains(ga.expected_demand)) ++infeasible;
            const bool same = std::abs(ga.objective - exact.objective) <= 1e-12 * std::abs(exact.objective);
            (which == 0 ? match_sr : match_ss) += same ? 1 : 0;
        }
    }
    const double secs = seconds_since(t0);
    return {match_sr >= kGaMatchesRequired && match_ss >= kGaMatchesRequired && infeasible == 0 && secs < 300.0,
            fmt::format("optimum matched SR {}/20, SS {}/20 (need {}); {} infeasible outputs; {:.1f}s", match_sr,
                        match_ss, kGaMatchesRequired, infeasible, secs)};
}

// ---- 7 --------------------------------------------------------------------------
Outcome relaxation_dominance() {
    const auto t0 = Clock::now();
    int dominated = 0;
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Instance inst = make_instance(100 + seed, 16);
        const df::ObjectiveFn sr = [&](std::span<const double> v) { return df::objective_sr(inst.panel, v); };
        df::GaConfig cfg;
        cfg.seed = seed;
        cfg.population = 30;
        cfg.max_generations = 40;
        const auto bin = df::ga_optimize(sr, inst.partition, inst.forecasts, cfg);
        const auto rel = df::ga_optimize_relaxed(sr, inst.partition, inst.forecasts, cfg, {bin.selection});
        if (rel.objective <= bin.objective && inst.partition.contains(rel.expected_demand)) ++dominated;
        worst_gap = std::max(worst_gap, rel.objective - bin.objective);
    }
    return {dominated == 10,
            fmt::format("relaxed <= binary on {}/10 instances (largest relaxed - binary {:.3e}); {:.1f}s", dominated,
                        worst_gap, seconds_since(t0))};
}

// ---- 8 --------------------------------------------------------------------------
df::RunConfig reference_config() { return df::load_run_config(DF_REFERENCE_CONFIG); }

Outcome aggregation_direction() {
    const auto t0 = Clock::now();
    df::RunConfig c = reference_config();
    c.aggstudy.group_sizes = {1, 100};
    const auto panel = df::load_panel(c).panel;
    const auto rows = df::aggregation_study(panel, c);
    double one = 0, hundred = 0;
    for (const auto& r : rows) {
        if (r.lead_time != 4) continue;
        (r.group_size == 1 ? one : hundred) = r.mean_crps_kw;
    }
    const double reduction = 1.0 - hundred / one;
    const double secs = seconds_since(t0);
    return {reduction >= kAggReductionRequired && secs < 600.0,
            fmt::format("4h mean CRPS size 1 {:.4f} kW, size 100 {:.4f} kW: {:.1f}% lower (need {:.0f}%); {:.1f}s",
                        one, hundred, 100 * reduction, 100 * kAggReductionRequired, secs)};
}

// ---- 9 and 10 ---------------------------------------------------------------------
std::map<std::pair<std::string, std::size_t>, double> read_summary(const fs::path& p) {
    std::map<std::pair<std::string, std::size_t>, double> out;
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::stringstream s(line);
        std::string approach, lead, crps;
        std::getline(s, approach, ',');
        std::getline(s, lead, ',');
        std::getline(s, crps, ',');
        out[{approach, std::stoul(lead)}] = std::stod(crps);
    }
    return out;
}

Outcome frontier_ordering(const fs::path& dir, double& run_seconds) {
    df::RunConfig c = reference_config();
    c.output_dir = dir.string();
    const auto t0 = Clock::now();
    const int code = df::cmd_run(c);
    run_seconds = seconds_since(t0);
    const auto s = read_summary(dir / "summary.csv");
    auto get = [&](const std::string& a, std::size_t h) {
        const auto it = s.find({a, h});
        return it == s.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    };
    const double fv = get("fv", 0), sr = get("sr", 0), ss = get("ss", 0), rnd = get("random", 0);
    bool ok = code == df::kExitSuccess && fv <= sr && fv <= ss && run_seconds < kRunBudgetSeconds;
    std::string per_lead;
    for (std::size_t h : c.lead_times) {
        for (const char* a : {"fv", "sr", "ss"}) {
            const double imp = 100.0 * (1.0 - get(a, h) / get("random", h));
            ok = ok && imp >= kImprovementRequired;
            per_lead += fmt::format(" {}@{}h {:.1f}%", a, h, imp);
        }
    }
    return {ok, fmt::format("exit {}; mean CRPS fv {:.4f}, sr {:.4f}, ss {:.4f}, random {:.4f} kW; improvement over "
                            "random:{} (need {:.0f}%); {:.1f} min",
                            code, fv, sr, ss, rnd, per_lead, kImprovementRequired, run_seconds / 60.0)};
}

Outcome determinism(const fs::path& first, const fs::path& second) {
    df::RunConfig c = reference_config();
    c.output_dir = second.string();
    const int code = df::cmd_run(c);
    std::vector<std::string> differing;
    for (const char* f : {"frontier.csv", "frontier.json", "report.csv", "report.json", "summary.csv", "diagnostics.json"}) {
        const std::string a = slurp(first / f), b = slurp(second / f);
        if (a.empty() || a != b) differing.push_back(f);
    }
    std::string list;
    for (const auto& d : differing) list += " " + d;
    return {code == df::kExitSuccess && differing.empty(),
            differing.empty() ? "frontier, report, summary and diagnostics files byte-identical across two runs"
                              : "differing or missing:" + list};
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::warn);
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int k) { return selected.empty() || selected.count(k) > 0; };

    const fs::path scratch = fs::path(DF_TEST_SCRATCH) / "acceptance";
    int failures = 0;
    auto report = [&](int k, const char* name, const std::function<Outcome()>& fn) {
        if (!wanted(k)) return;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::cout << fmt::format("[{}] criterion {:>2}: {} -- {}", o.pass ? "PASS" : "FAIL", k, name, o.detail)
                  << std::endl;
        failures += o.pass ? 0 : 1;
    };

    report(1, "CRPS estimator vs closed form", crps_estimator);
    report(2, "STL identity and tone recovery", stl_identity_and_recovery);
    report(3, "GARCH(1,1) parameter recovery", garch_recovery);
    report(4, "SGED sanity", sged_sanity);
    report(5, "model-selection gate", selection_gate);
    report(6, "GA vs exhaustive search", ga_vs_brute_force);
    report(7, "relaxation dominance", relaxation_dominance);
    report(8, "aggregation study direction", aggregation_direction);
    double run_seconds = 0.0;
    report(9, "end-to-end frontier ordering", [&] {
        fs::remove_all(scratch / "run_a");
        return frontier_ordering(scratch / "run_a", run_seconds);
    });
    report(10, "determinism of the reference run", [&] {
        if (!fs::exists(scratch / "run_a" / "frontier.csv")) {
            fs::remove_all(scratch / "run_a");
            double ignored = 0.0;
            (void)frontier_ordering(scratch / "run_a", ignored);
        }
        fs::remove_all(scratch / "run_b");
        return determinism(scratch / "run_a", scratch / "run_b");
    });
    std::cout << (failures == 0 ? "all selected criteria passed" : fmt::format("{} criteria failed", failures))
              << std::endl;
    return failures == 0 ? 0 : 1;
}
