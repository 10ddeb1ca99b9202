#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "demand_frontier/commands.hpp"
#include "demand_frontier/error.hpp"
#include "demand_frontier/score.hpp"

#include <sstream>

namespace py = pybind11;
namespace df = demand_frontier;

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

std::span<const double> as_span(const Array& a) {
    if (a.ndim() != 1) throw py::value_error("expected a one-dimensional array");
    return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

// (hours x households) matrix <-> household-major Panel
df::Panel to_panel(const Array& demand, std::vector<std::string> ids, std::int64_t first_hour) {
    if (demand.ndim() != 2) throw py::value_error("demand must be a (hours, households) matrix");
    const auto t = static_cast<std::size_t>(demand.shape(0));
    const auto n = static_cast<std::size_t>(demand.shape(1));
    if (ids.empty())
        for (std::size_t i = 0; i < n; ++i) ids.push_back("H" + std::to_string(i));
    if (ids.size() != n) throw py::value_error("one id per household column is required");
    std::vector<double> values(t * n);
    const auto m = demand.unchecked<2>();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t h = 0; h < t; ++h) values[i * t + h] = m(h, i);
    return df::Panel(first_hour, std::move(ids), t, std::move(values));
}

Array from_panel(const df::Panel& panel) {
    const std::size_t t = panel.hours(), n = panel.households();
    Array out({static_cast<py::ssize_t>(t), static_cast<py::ssize_t>(n)});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t h = 0; h < t; ++h) m(h, i) = panel.at(h, i);
    return out;
}

df::ModelPolicy parse_policy(const std::string& s) {
    if (s == "gated") return df::ModelPolicy::gated;
    if (s == "arma_garch") return df::ModelPolicy::arma_garch_only;
    if (s == "kde") return df::ModelPolicy::kde_only;
    throw py::value_error("policy must be 'gated', 'arma_garch' or 'kde'");
}

py::dict params_dict(const df::ArmaGarchParams& p) {
    py::dict d;
    d["mean_const"] = p.mean_const;
    d["ar"] = p.ar;
    d["ma"] = p.ma;
    d["omega"] = p.omega;
    d["garch"] = p.garch;
    d["arch"] = p.arch;
    d["shape"] = p.shape;
    d["skew"] = p.skew;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Household demand forecasting and portfolio construction";

    // translators run newest first, so the base class goes in first
    auto base = py::register_exception<df::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<df::InvalidInput>(m, "InvalidInput", base.ptr());
    py::register_exception<df::FitError>(m, "FitError", base.ptr());
    py::register_exception<df::InfeasibleError>(m, "InfeasibleError", base.ptr());

    m.def(
        "synthesize",
        [](std::size_t n_households, std::size_t n_hours, std::uint64_t seed, double missing_rate) {
            df::SyntheticPopulationConfig c;
            c.n_households = n_households;
            c.n_hours = n_hours;
            c.seed = seed;
            c.missing_rate = missing_rate;
            const df::Panel panel = df::synthesize_population(c);
            return py::make_tuple(panel.household_ids(), from_panel(panel));
        },
        py::arg("n_households") = 200, py::arg("n_hours") = 4368, py::arg("seed") = 42,
        py::arg("missing_rate") = 0.0,
        "Synthetic population as (household ids, demand matrix of shape (hours, households)); NaN marks missing.");

    m.def(
        "impute",
        [](const Array& demand) { return from_panel(df::impute_missing(to_panel(demand, {}, 0))); },
        py::arg("demand"), "Fill NaN readings from the same hour of the nearest week.");

    m.def(
        "decompose",
        [](const Array& series, std::vector<std::size_t> periods) {
            const auto d = df::multi_stl(as_span(series), periods);
            py::dict out;
            out["seasonal"] = to_array(d.seasonal);
            out["trend"] = to_array(d.trend);
            out["remainder"] = to_array(d.remainder);
            return out;
        },
        py::arg("series"), py::arg("periods") = std::vector<std::size_t>{24, 168});

    m.def(
        "fit_arma_garch",
        [](const Array& series, int p, int q) {
            const auto model = df::fit_arma_garch(as_span(series), p, q);
            py::dict out = params_dict(model.params);
            out["log_likelihood"] = model.log_likelihood;
            out["bic"] = model.bic;
            out["gof_pvalue"] = df::gof_pvalue(model.params, as_span(series));
            return out;
        },
        py::arg("series"), py::arg("p") = 1, py::arg("q") = 0,
        "Maximum-likelihood ARMA(p,q)-GARCH(1,1) fit with skewed GED innovations.");

    m.def(
        "forecast",
        [](const Array& train, std::vector<std::size_t> lead_times, std::uint64_t seed, double threshold,
           const std::string& policy, std::size_t ensemble_size) {
            df::PipelineConfig config;
            config.selector.default_threshold = threshold;
            config.policy = parse_policy(policy);
            config.forecast.ensemble_size = ensemble_size;
            const auto forecasts = df::forecast_series(as_span(train), lead_times, config, seed);
            py::list out;
            for (const auto& f : forecasts) out.append(to_array(f.ensemble));
            return out;
        },
        py::arg("train"), py::arg("lead_times"), py::arg("seed") = 1, py::arg("threshold") = 0.05,
        py::arg("policy") = "gated", py::arg("ensemble_size") = 1000,
        "Ensemble density forecasts, one array per requested lead time.");

    m.def(
        "crps", [](const Array& ensemble, double y) { return df::crps_ensemble(as_span(ensemble), y); },
        py::arg("ensemble"), py::arg("observation"));
    m.def(
        "mae", [](const Array& forecasts, const Array& obs) { return df::mae(as_span(forecasts), as_span(obs)); },
        py::arg("forecasts"), py::arg("observations"));

    m.def(
        "objective_sr",
        [](const Array& demand, const Array& selection) {
            return df::objective_sr(to_panel(demand, {}, 0), as_span(selection));
        },
        py::arg("demand"), py::arg("selection"));
    m.def(
        "objective_ss",
        [](const Array& demand, const Array& selection, double r) {
            return df::objective_ss(to_panel(demand, {}, 0), as_span(selection), r);
        },
        py::arg("demand"), py::arg("selection"), py::arg("r") = 0.5);

    m.def(
        "resolve_config", [](const std::string& text) { return df::dump_run_config(df::parse_run_config(text)); },
        py::arg("config_json"), "Validate a JSON run config and return it with every default spelled out.");

    m.def(
        "run",
        [](const std::string& config_json) {
            const df::RunConfig config = df::parse_run_config(config_json);
            df::RunResult result;
            {
                py::gil_scoped_release release;
                const auto loaded = df::load_panel(config);
                result = df::run_experiment(loaded.panel, config);
            }
            std::ostringstream frontier;
            df::write_frontier_csv(result.frontier, frontier);
            py::list summary;
            for (const auto& s : result.summary) {
                py::dict d;
                d["approach"] = s.approach;
                d["lead_time_h"] = s.lead_time;
                d["mean_crps_kw"] = s.mean_crps_kw;
                d["mean_mae_kw"] = s.mean_mae_kw;
                d["cells"] = s.cells;
                summary.append(d);
            }
            py::dict out;
            out["summary"] = summary;
            out["frontier_csv"] = frontier.str();
            out["failures"] = result.frontier.failures.size();
            return out;
        },
        py::arg("config_json"), "Run the whole experiment in memory; returns the summary and frontier table.");

    m.attr("__version__") = "0.1.0";
}
