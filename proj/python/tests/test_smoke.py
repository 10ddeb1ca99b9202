import json

import numpy as np
import pytest

import demand_frontier as dfr


def test_synthesize_shape_and_determinism():
    ids, demand = dfr.synthesize(n_households=4, n_hours=336, seed=3)
    assert len(ids) == 4
    assert demand.shape == (336, 4)
    _, again = dfr.synthesize(n_households=4, n_hours=336, seed=3)
    np.testing.assert_array_equal(demand, again)
    assert (demand >= 0).all()


def test_impute_fills_missing_readings():
    _, demand = dfr.synthesize(n_households=3, n_hours=504, seed=1, missing_rate=0.05)
    assert np.isnan(demand).any()
    filled = dfr.impute(demand)
    assert not np.isnan(filled).any()
    observed = ~np.isnan(demand)
    np.testing.assert_array_equal(filled[observed], demand[observed])


def test_decompose_is_additive():
    _, demand = dfr.synthesize(n_households=1, n_hours=504, seed=2)
    y = demand[:, 0]
    parts = dfr.decompose(y)
    np.testing.assert_allclose(parts["seasonal"] + parts["trend"] + parts["remainder"], y, atol=1e-9)


def test_crps_matches_pairwise_definition():
    rng = np.random.default_rng(0)
    x = rng.normal(size=50)
    y = 0.3
    pairwise = np.abs(x - y).mean() - 0.5 * np.abs(x[:, None] - x[None, :]).mean()
    assert dfr.crps(x, y) == pytest.approx(pairwise, rel=1e-12)
    assert dfr.mae(np.array([1.0, 2.0]), np.array([2.0, 2.0])) == pytest.approx(0.5)


def test_forecast_returns_one_ensemble_per_lead():
    _, demand = dfr.synthesize(n_households=5, n_hours=672, seed=4)
    series = demand.sum(axis=1)
    out = dfr.forecast(series, [4, 24], seed=1, policy="kde", ensemble_size=200)
    assert [len(e) for e in out] == [200, 200]
    with pytest.raises(ValueError):
        dfr.forecast(series, [4], policy="nonsense")


def test_arma_garch_fit_reports_parameters():
    rng = np.random.default_rng(5)
    y = rng.standard_t(df=6, size=1500) * 0.5
    fit = dfr.fit_arma_garch(y, p=1, q=0)
    assert set(["ar", "ma", "omega", "garch", "arch", "shape", "skew", "bic"]) <= set(fit)
    assert fit["garch"][0] + fit["arch"][0] < 1.0


def test_objectives_and_errors():
    _, demand = dfr.synthesize(n_households=6, n_hours=504, seed=6)
    sel = np.array([1, 0, 1, 1, 0, 0], dtype=float)
    assert dfr.objective_sr(demand, sel) > 0
    assert dfr.objective_ss(demand, sel, 0.5) > 0
    with pytest.raises(dfr.InvalidInput):
        dfr.objective_ss(demand, np.zeros(6), 0.5)
    assert issubclass(dfr.InvalidInput, dfr.Error)


def test_config_resolution_and_tiny_run():
    with pytest.raises(dfr.InvalidInput):
        dfr.resolve_config('{"schema_version": 1, "nope": 1}')
    cfg = {
        "schema_version": 1,
        "data": {"synthetic": {"n_households": 10, "n_hours": 1512}},
        "in_sample_hours": 1008,
        "train_length": 672,
        "horizon": 24,
        "lead_times": [4],
        "partitions": 2,
        "random_samples": 2,
        "approaches": ["random", "sr"],
        "ga": {"population": 10, "max_generations": 4, "cardinality_cap": 5},
        "forecast": {"max_p": 1, "max_q": 1, "ensemble_size": 100},
        "tuning": {"tune_threshold": False, "tune_ss_weight": False},
    }
    resolved = json.loads(dfr.resolve_config(json.dumps(cfg)))
    assert resolved["partitions"] == 2
    result = dfr.run(json.dumps(cfg))
    assert result["failures"] == 0
    approaches = {row["approach"] for row in result["summary"]}
    assert approaches == {"random", "sr"}
    assert result["frontier_csv"].startswith("approach,lead_time_h")
