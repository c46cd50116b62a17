import numpy as np
import pytest

from factorcast import (ELECTRICITY_CONFIG, TRAFFIC_CONFIG, ExperimentConfig,
                        SeriesMatrix, gen_synthetic, iter_slices, mae, run_experiment,
                        run_sweep)
from factorcast.data import StoredRecord
from factorcast.forecaster import ForecastRecord


def record(t, abs_error, n_obs, x_hat=None):
    if x_hat is None:
        x_hat = np.zeros(2)
    return ForecastRecord(t=t, x_hat=x_hat, observed_indices=np.arange(n_obs),
                          abs_error_sum=abs_error, n_observed=n_obs)


class TestMae:
    def test_single_step(self):
        # forecasts (1, 2) against truth (2, 2): total abs error 1 over 2 entries
        assert mae([record(1, 1.0, 2)], 1.0) == pytest.approx(0.5)

    def test_perfect_forecasts(self):
        assert mae([record(t, 0.0, 3) for t in range(1, 5)], 7.0) == 0.0

    def test_hand_aggregate_with_scale(self):
        records = [record(1, 1.0, 2), record(2, 3.0, 2)]
        assert mae(records, 10.0) == pytest.approx(10.0)

    def test_masked_steps_contribute_nothing(self):
        records = [record(1, 2.0, 4), record(2, 0.0, 0), record(3, 2.0, 4)]
        assert mae(records, 1.0) == pytest.approx(0.5)

    def test_chunking_invariance(self, rng):
        records = [record(t, float(abs(rng.normal())), int(rng.integers(1, 6)))
                   for t in range(1, 200)]
        whole = mae(records, 1.0)
        # aggregating piecewise must agree with the one-shot aggregate
        err = sum(r.abs_error_sum for r in records[:70]) + sum(
            r.abs_error_sum for r in records[70:])
        n = sum(r.n_observed for r in records)
        assert whole == pytest.approx(err / n, abs=1e-12)

    def test_accepts_stored_records(self):
        stored = [StoredRecord(t=1, n_observed=2, abs_error_sum=1.0, forecast_checksum=0.0)]
        assert mae(stored, 2.0) == pytest.approx(1.0)

    def test_no_observations_rejected(self):
        with pytest.raises(ValueError, match="undefined"):
            mae([record(1, 0.0, 0)], 1.0)


@pytest.fixture(scope="module")
def tiny_series():
    return gen_synthetic(8, 2, 2, np.array([0.6, 0.2]), (0.001, 0.05, 0.01), 120, seed=21)


class TestRunExperiment:
    def test_single_replicate_zero_std(self, tiny_series):
        config = ExperimentConfig(method="base", n_replicates=1, base_seed=0,
                                  mask_kind="unstructured",
                                  mask_params={"nnz_fraction": 0.7})
        summary = run_experiment(tiny_series, config)
        assert len(summary.maes) == 1
        assert summary.mean_mae == summary.maes[0]
        assert summary.std_mae == 0.0

    def test_identical_seeds_identical_maes(self, tiny_series):
        config = ExperimentConfig(method="ft",
                                  params={"n_factors": 2, "ar_order": 4, "max_ite": 5},
                                  mask_kind="unstructured",
                                  mask_params={"nnz_fraction": 0.6},
                                  n_replicates=2, base_seed=5)
        a = run_experiment(tiny_series, config)
        b = run_experiment(tiny_series, config)
        assert a.maes == b.maes

    def test_replicates_differ(self, tiny_series):
        config = ExperimentConfig(method="fp",
                                  params={"n_factors": 2, "ar_order": 4, "max_ite": 5},
                                  mask_kind="unstructured",
                                  mask_params={"nnz_fraction": 0.6},
                                  n_replicates=3, base_seed=5)
        summary = run_experiment(tiny_series, config)
        assert len(set(summary.maes)) > 1
        assert summary.std_mae > 0

    def test_base_is_exact_on_zero_constant_stream(self):
        series = SeriesMatrix(values=np.zeros((5, 40)))
        config = ExperimentConfig(method="base", mask_kind="full", n_replicates=1)
        assert run_experiment(series, config).mean_mae == 0.0

    def test_base_on_constant_stream_only_misses_cold_start(self):
        # every column equals the previous one, fully observed: only the very
        # first forecast (zero, before any data) contributes error
        levels = np.linspace(0.1, 0.9, 5)
        series = SeriesMatrix(values=np.tile(levels[:, None], (1, 40)))
        config = ExperimentConfig(method="base", mask_kind="full", n_replicates=1)
        summary = run_experiment(series, config)
        assert summary.mean_mae == pytest.approx(np.sum(levels) / (5 * 40), abs=1e-12)

    def test_scale_applied(self, tiny_series):
        unit = SeriesMatrix(values=tiny_series.values.copy(), scale=1.0)
        scaled = SeriesMatrix(values=tiny_series.values.copy(), scale=11.0)
        config = ExperimentConfig(method="base", mask_kind="full", n_replicates=1)
        assert (run_experiment(scaled, config).mean_mae
                == pytest.approx(11.0 * run_experiment(unit, config).mean_mae))


class TestRunSweep:
    def test_single_value_matches_run_experiment(self, tiny_series):
        config = ExperimentConfig(method="ft",
                                  params={"n_factors": 2, "ar_order": 4, "max_ite": 5},
                                  n_replicates=2, base_seed=3)
        rows = run_sweep(tiny_series, config, "nnz", [0.5], ["ft"])
        cell = ExperimentConfig(method="ft", params=config.params,
                                mask_kind="unstructured",
                                mask_params={"nnz_fraction": 0.5},
                                n_replicates=2, base_seed=3)
        summary = run_experiment(tiny_series, cell)
        assert rows[0].mean_mae == pytest.approx(summary.mean_mae)
        assert rows[0].std_mae == pytest.approx(summary.std_mae)

    def test_row_count_and_order(self, tiny_series):
        config = ExperimentConfig(method="ft",
                                  params={"n_factors": 2, "ar_order": 3, "max_ite": 3},
                                  n_replicates=1, base_seed=0)
        values = [round(0.1 * k, 1) for k in range(1, 11)]
        rows = run_sweep(tiny_series, config, "nnz", values, ["base", "zt"])
        assert len(rows) == 20
        keys = [(r.value, r.method) for r in rows]
        assert keys == sorted(keys)

    def test_rank_axis(self, tiny_series):
        config = ExperimentConfig(method="ft",
                                  params={"n_factors": 2, "ar_order": 3, "max_ite": 3},
                                  mask_kind="unstructured",
                                  mask_params={"nnz_fraction": 0.8},
                                  n_replicates=1, base_seed=0)
        rows = run_sweep(tiny_series, config, "d", [1, 2, 3], ["zt"])
        assert [r.value for r in rows] == [1.0, 2.0, 3.0]

    def test_departure_axis_defaults_arrival(self, tiny_series):
        config = ExperimentConfig(method="base", n_replicates=1, base_seed=0)
        rows = run_sweep(tiny_series, config, "departure_rate", [5e-1], ["base"])
        assert rows[0].value == pytest.approx(0.5)

    def test_unknown_axis_rejected(self, tiny_series):
        config = ExperimentConfig(method="base")
        with pytest.raises(ValueError, match="axis"):
            run_sweep(tiny_series, config, "noise", [0.1], ["base"])


class TestBenchmarkConfigs:
    def test_electricity_snapshot(self):
        assert ELECTRICITY_CONFIG == {
            "n_factors": 5, "ar_order": 24, "prior_scale": 1.0,
            "rho_u": 1.0, "rho_v": 1e-4, "eps": 5e-2, "max_ite": 15,
        }

    def test_traffic_snapshot(self):
        assert TRAFFIC_CONFIG == {
            "n_factors": 20, "ar_order": 24, "prior_scale": 1.0,
            "rho_u": 1e-1, "rho_v": 1e-4, "eps": 5e-2, "max_ite": 15,
        }
