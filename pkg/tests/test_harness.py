"""Config-driven drivers: method names, tables, sweeps, validation, CSV."""

from __future__ import annotations

import csv

import numpy as np
import pytest

from grdsa.harness import (
    TableRow,
    aggregate_rows,
    build_cubic_config,
    build_newton_config,
    config_fingerprint,
    failed_warnings,
    has_errors,
    make_noise,
    make_objective,
    make_perturbation,
    method_spec,
    run_bias_sweep,
    run_table,
    validate_config,
    write_bias_sweep_csv,
    write_crzon_csv,
    write_newton_csv,
    write_summary_csv,
    write_table_csv,
)
from grdsa.newton import RunRecord, run_newton


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


QUAD_CONFIG = {
    "objective": "quadratic",
    "quadratic": {"diag": [2.0, 4.0]},
    "dim": 2,
}


class TestMethodSpec:
    @pytest.mark.parametrize(
        "name,algorithm,k,family",
        [
            ("GSF-2", "gradient_only", 1, "gaussian"),
            ("GSF-5", "gradient_only", 4, "gaussian"),
            ("GR-3", "gradient_only", 2, "uniform"),
            ("G2SF-3", "newton", 1, "gaussian"),
            ("G2SF-9", "newton", 4, "gaussian"),
            ("G2R-5", "newton", 2, "uniform"),
        ],
    )
    def test_recognized_names(self, name, algorithm, k, family):
        spec = method_spec(name)
        assert (spec.name, spec.algorithm, spec.k, spec.family) == (
            name,
            algorithm,
            k,
            family,
        )

    @pytest.mark.parametrize(
        "name",
        ["G2SF-4", "G2SF-2", "G2SF-1", "GSF-1", "GSF-0", "XSF-3", "gsf-5", "GSF", "G2R-0"],
    )
    def test_rejected_names(self, name):
        with pytest.raises(ValueError):
            method_spec(name)


class TestFingerprint:
    def test_key_order_independent(self):
        assert config_fingerprint({"a": 1, "b": [2, 3]}) == config_fingerprint(
            {"b": [2, 3], "a": 1}
        )

    def test_value_sensitive(self):
        assert config_fingerprint({"a": 1}) != config_fingerprint({"a": 2})

    def test_format(self):
        fp = config_fingerprint({"a": 1})
        assert len(fp) == 16
        int(fp, 16)


class TestBuilders:
    def test_objectives(self):
        assert make_objective({}).name == "rastrigin"
        assert make_objective({"dim": 7}).dim == 7
        quad = make_objective(QUAD_CONFIG)
        assert np.allclose(quad.hessian(np.zeros(2)), np.diag([2.0, 4.0]))
        full = make_objective(
            {
                "objective": "quadratic",
                "dim": 2,
                "quadratic": {"matrix": [[2.0, 1.0], [1.0, 3.0]], "b": [1.0, 0.0]},
            }
        )
        assert np.allclose(full.hessian(np.zeros(2)), [[2.0, 1.0], [1.0, 3.0]])
        assert make_objective({"objective": "saddle"}).name == "saddle_quartic"
        assert make_objective({"objective": "quartic", "dim": 3}).dim == 3
        assert make_objective({"objective": "exp_sin"}).name == "exp_sin"
        with pytest.raises(ValueError):
            make_objective({"objective": "rosenbrock"})

    def test_noise(self):
        assert make_noise({}) is None
        assert make_noise({"noise": {"sigma": 0.0}}) is None
        assert make_noise({"noise": {"sigma": 0.25}}).sigma == 0.25

    def test_perturbation(self):
        assert make_perturbation({}).family == "gaussian"
        spec = make_perturbation({"perturb": {"family": "uniform", "eta": 2.0}})
        assert spec.family == "uniform" and spec.eta == 2.0
        with pytest.raises(ValueError):
            make_perturbation({"perturb": {"family": "levy"}})

    def test_newton_config(self):
        cfg = build_newton_config(
            dict(
                QUAD_CONFIG,
                budget=90,
                estimator={"k": 2, "reuse": False, "paper_literal_scaling": True},
                schedules={"a0": 0.5},
                box={"lower": -2.0, "upper": 2.0},
                theta0=[1.0, -1.0],
                record_stride=4,
            ),
            seed=17,
        )
        assert cfg.budget == 90
        assert cfg.k == 2 and not cfg.reuse and cfg.paper_literal_scaling
        assert cfg.schedules.a0 == 0.5
        assert (cfg.box.lower, cfg.box.upper) == (-2.0, 2.0)
        assert np.array_equal(cfg.theta0, [1.0, -1.0])
        assert cfg.seed == 17
        assert cfg.record_stride == 4

    def test_newton_config_requires_budget(self):
        with pytest.raises(KeyError):
            build_newton_config(dict(QUAD_CONFIG))

    def test_cubic_config_direct(self):
        cfg = build_cubic_config(
            {
                "objective": "saddle",
                "crzon": {"N": 12, "m": 50, "b": 80, "k": 2, "delta": 0.2, "alpha": 3.0},
            },
            seed=4,
        )
        assert (cfg.n_steps, cfg.m, cfg.b, cfg.k) == (12, 50, 80, 2)
        assert cfg.delta == 0.2 and cfg.alpha == 3.0 and cfg.seed == 4

    def test_cubic_config_defaults(self):
        cfg = build_cubic_config({"objective": "saddle"})
        assert (cfg.n_steps, cfg.m, cfg.b, cfg.delta) == (30, 200, 400, 0.1)

    def test_cubic_config_from_epsilon(self):
        cfg = build_cubic_config(
            {"objective": "saddle", "crzon": {"epsilon": 0.25, "k": 1}}
        )
        assert cfg.epsilon == 0.25
        assert (cfg.n_steps, cfg.m, cfg.b) == (8, 256, 1024)


class TestRunTable:
    def test_grid_and_accounting(self):
        config = dict(
            QUAD_CONFIG, methods=["G2SF-3", "GSF-2"], budgets=[60], seeds=2
        )
        result = run_table(config)
        assert len(result.rows) == 4
        assert all(row.status == "ok" for row in result.rows)
        by_method = {row.method: row for row in result.rows if row.seed == 0}
        assert by_method["G2SF-3"].iterations == 20
        assert by_method["G2SF-3"].evals_used == 60
        assert by_method["GSF-2"].iterations == 30
        assert by_method["GSF-2"].evals_used == 60
        assert len(result.cells) == 2
        fp = config_fingerprint(config)
        assert all(row.fingerprint == fp for row in result.rows)

    def test_failed_cell_does_not_abort_sweep(self):
        config = dict(QUAD_CONFIG, methods=["G2SF-3"], budgets=[2, 60], seeds=1)
        result = run_table(config)
        statuses = {row.budget: row.status for row in result.rows}
        assert statuses == {2: "error", 60: "ok"}
        failed = next(r for r in result.rows if r.status == "error")
        assert failed.message.startswith("BudgetTooSmall:")
        assert failed.final_parameter_error is None
        cell = next(c for c in result.cells if c.budget == 2)
        assert cell.n_ok == 0 and np.isnan(cell.mean_error)

    def test_seed_base(self):
        config = dict(
            QUAD_CONFIG, methods=["GSF-2"], budgets=[20], seeds=2, seed_base=40
        )
        seeds = [row.seed for row in run_table(config).rows]
        assert seeds == [40, 41]


class TestAggregateRows:
    @staticmethod
    def row(method="M", dim=2, budget=10, seed=0, error=0.5, status="ok"):
        return TableRow(
            fingerprint="f",
            method=method,
            dim=dim,
            budget=budget,
            seed=seed,
            k=1,
            iterations=3,
            final_parameter_error=error,
            evals_used=9,
            status=status,
            message="",
            wall_time_s=0.0,
        )

    def test_mean_and_sample_sd(self):
        cells = aggregate_rows([self.row(error=0.2), self.row(error=0.4, seed=1)])
        assert len(cells) == 1
        assert cells[0].n_ok == 2
        assert cells[0].mean_error == pytest.approx(0.3)
        assert cells[0].sd_error == pytest.approx(np.std([0.2, 0.4], ddof=1))
        assert cells[0].mean_evals == 9.0

    def test_single_run_sd_zero(self):
        cells = aggregate_rows([self.row()])
        assert cells[0].sd_error == 0.0

    def test_error_rows_excluded(self):
        cells = aggregate_rows(
            [self.row(error=0.2), self.row(error=None, status="error", seed=1)]
        )
        assert cells[0].n_ok == 1
        assert cells[0].mean_error == pytest.approx(0.2)

    def test_all_failed_gives_nan(self):
        cells = aggregate_rows([self.row(error=None, status="error")])
        assert cells[0].n_ok == 0
        assert np.isnan(cells[0].mean_error) and np.isnan(cells[0].sd_error)
        assert np.isnan(cells[0].mean_evals)

    def test_keys_kept_separate(self):
        cells = aggregate_rows(
            [self.row(method="A"), self.row(method="B", error=1.0)]
        )
        assert {c.method for c in cells} == {"A", "B"}


class TestRunBiasSweep:
    def test_gradient_slope(self):
        result = run_bias_sweep(
            {
                "objective": "quartic",
                "dim": 2,
                "estimator_kind": "gradient",
                "k": 2,
                "theta": [0.9, -1.1],
                "samples": 4000,
                "seed": 3,
            }
        )
        assert result.estimator == "gradient"
        assert (result.k1, result.k2) == (2, 2)
        assert result.mode == "residual"
        assert result.deltas == [0.4, 0.2, 0.1, 0.05]
        assert 1.7 < result.slope < 2.4

    def test_hessian_defaults_and_unequal_orders(self):
        result = run_bias_sweep(
            {
                "objective": "quartic",
                "dim": 2,
                "k": 1,
                "k2": 3,
                "theta": [0.9, -1.1],
                "samples": 4000,
            }
        )
        assert result.estimator == "hessian"
        assert (result.k1, result.k2) == (1, 3)
        assert result.slope < 1.5

    def test_mean_bias_mode(self):
        result = run_bias_sweep(
            {
                "objective": "quartic",
                "dim": 2,
                "k": 1,
                "mode": "mean_bias",
                "theta": [0.9, -1.1],
                "samples": 20000,
                "seed": 1,
            }
        )
        assert result.mode == "mean_bias"
        assert result.slope > 1.6

    def test_deltas_override(self):
        result = run_bias_sweep(
            {
                "objective": "quartic",
                "dim": 2,
                "estimator_kind": "gradient",
                "k": 1,
                "theta": [0.9, -1.1],
                "deltas": [0.2, 0.1],
                "samples": 500,
            }
        )
        assert result.deltas == [0.2, 0.1]
        assert len(result.deviations) == 2

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            run_bias_sweep({"estimator_kind": "jacobian"})


class TestValidateConfig:
    def test_default_config_passes_with_one_warning(self):
        findings = validate_config({})
        assert len(findings) == 10
        assert not has_errors(findings)
        warned = failed_warnings(findings)
        assert [f.check for f in warned] == ["schedules.b_delta_square_summable"]

    def test_budget_feasibility(self):
        findings = validate_config({"budget": 2})
        finding = next(f for f in findings if f.check == "budget.covers_one_iteration")
        assert not finding.ok
        assert has_errors(findings)
        ok = validate_config({"budget": 3})
        assert not has_errors(ok)

    def test_no_reuse_raises_cost(self):
        findings = validate_config({"budget": 4, "estimator": {"reuse": False}})
        finding = next(f for f in findings if f.check == "budget.covers_one_iteration")
        assert not finding.ok

    def test_unsupported_order(self):
        findings = validate_config({"budget": 1000, "estimator": {"k": 20}})
        assert not next(
            f for f in findings if f.check == "estimator.order_supported"
        ).ok
        # the budget check is skipped when the order itself is invalid
        assert not any(f.check == "budget.covers_one_iteration" for f in findings)

    def test_crzon_order_also_checked(self):
        findings = validate_config({"crzon": {"k": 0}})
        assert not next(
            f for f in findings if f.check == "estimator.order_supported"
        ).ok

    def test_empty_box(self):
        findings = validate_config({"box": {"lower": 2.0, "upper": -2.0}})
        assert not next(f for f in findings if f.check == "box.nonempty").ok

    def test_unknown_family(self):
        findings = validate_config({"perturb": {"family": "levy"}})
        assert not next(f for f in findings if f.check == "perturb.family_known").ok

    def test_negative_sigma(self):
        findings = validate_config({"noise": {"sigma": -0.5}})
        assert not next(f for f in findings if f.check == "noise.sigma_nonnegative").ok

    def test_schedule_findings_prefixed(self):
        findings = validate_config({"schedules": {"a0": -1.0}})
        assert any(
            f.check == "schedules.positive_parameters" and not f.ok for f in findings
        )
        assert has_errors(findings)


class TestCsvWriters:
    def test_newton_csv(self, tmp_path):
        cfg_kwargs = dict(budget=60, k=1)
        records = [
            run_newton(build_newton_config(dict(QUAD_CONFIG, **cfg_kwargs), seed=s))
            for s in (0, 1)
        ]
        path = tmp_path / "runs.csv"
        write_newton_csv(str(path), records)
        rows = read_csv(path)
        assert rows[0] == [
            "seed",
            "k",
            "budget",
            "iterations",
            "final_parameter_error",
            "evals_used",
        ]
        assert len(rows) == 3
        assert rows[1][0] == "0" and rows[2][0] == "1"
        assert rows[1][3] == "20" and rows[1][5] == "60"
        assert float(rows[1][4]) == records[0].final_parameter_error

    def test_newton_csv_blank_for_missing_error(self, tmp_path):
        record = RunRecord(
            algorithm="newton",
            seed=0,
            k=1,
            dim=2,
            budget=9,
            iterations=3,
            evals_used=9,
            theta_init=np.zeros(2),
            theta_final=np.zeros(2),
            final_parameter_error=None,
            trajectory=np.zeros((1, 2)),
            wall_time_s=0.0,
        )
        path = tmp_path / "runs.csv"
        write_newton_csv(str(path), [record])
        assert read_csv(path)[1][4] == ""

    def test_table_csv_deterministic_up_to_wall_time(self, tmp_path):
        config = dict(QUAD_CONFIG, methods=["G2SF-3"], budgets=[60], seeds=2)
        paths = []
        for name in ("a.csv", "b.csv"):
            path = tmp_path / name
            write_table_csv(str(path), run_table(config))
            paths.append(path)
        first, second = (read_csv(p) for p in paths)
        assert first[0][-1] == "wall_time_s"
        stripped = [[row[:-1] for row in table] for table in (first, second)]
        assert stripped[0] == stripped[1]

    def test_summary_csv(self, tmp_path):
        config = dict(QUAD_CONFIG, methods=["G2SF-3"], budgets=[60], seeds=2)
        path = tmp_path / "summary.csv"
        write_summary_csv(str(path), run_table(config))
        rows = read_csv(path)
        assert rows[0] == [
            "method",
            "dim",
            "budget",
            "n_ok",
            "mean_error",
            "sd_error",
            "mean_evals",
        ]
        assert rows[1][:4] == ["G2SF-3", "2", "60", "2"]
        assert rows[1][6] == "60.0"

    def test_crzon_csv(self, tmp_path):
        from grdsa.cubic import run_crzon

        cfg = build_cubic_config(
            {
                "objective": "saddle",
                "theta0": [0.01, 0.01],
                "crzon": {"N": 2, "m": 4, "b": 4, "k": 1, "delta": 0.1},
            }
        )
        path = tmp_path / "crzon.csv"
        write_crzon_csv(str(path), [run_crzon(cfg)])
        rows = read_csv(path)
        assert rows[0] == [
            "seed",
            "k",
            "epsilon",
            "N",
            "m",
            "b",
            "delta",
            "evals_used",
            "grad_norm_at_R",
            "lambda_min_at_R",
        ]
        assert rows[1][2] == ""  # epsilon not set
        assert rows[1][7] == str(2 * (4 * 2 + 4 * 3))

    def test_bias_sweep_csv(self, tmp_path):
        result = run_bias_sweep(
            {
                "objective": "quartic",
                "dim": 2,
                "estimator_kind": "gradient",
                "k": 1,
                "theta": [0.9, -1.1],
                "samples": 500,
            }
        )
        path = tmp_path / "sweep.csv"
        write_bias_sweep_csv(str(path), result)
        rows = read_csv(path)
        assert rows[0] == ["estimator", "k1", "k2", "mode", "delta", "deviation", "slope"]
        assert len(rows) == 5
        assert {row[6] for row in rows[1:]} == {repr(result.slope)}
