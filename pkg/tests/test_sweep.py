"""Tests for parameter sweeps."""

import csv

import numpy as np
import pytest

from mvmc import mvmc_solver
from mvmc.data import generate_synthetic
from mvmc.errors import ParameterError
from mvmc.models import MvmccConfig, MvmcConfig, SweepAxis, SweepRun, SyntheticSpec
from mvmc.sweep import SUMMARY_CSV, expand_grid, parse_axes, run_sweep, sweep_exit_code


def _small():
    return generate_synthetic(SyntheticSpec(
        n=12, m=2, view_dims=[3, 3], num_labelings=2, clusters_per_labeling=[2, 2], seed=1,
    ))


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_axes_casts_integer_keys():
    axes = parse_axes(["h=2..3:lin", "lambda1=0.1,1"], MvmcConfig)
    assert axes[0] == SweepAxis("h", [2, 3])
    assert isinstance(axes[0].values[0], int)
    assert axes[1].values == [0.1, 1.0]


def test_parse_axes_rejects_bad_keys():
    with pytest.raises(ParameterError):
        parse_axes(["gamma=1,2"], MvmcConfig)
    with pytest.raises(ParameterError):
        parse_axes(["threads=1,2"], MvmcConfig)
    with pytest.raises(ParameterError):
        parse_axes(["lambda1=1,2", "lambda1=3"], MvmcConfig)
    with pytest.raises(ParameterError):
        parse_axes(["seed=0.5,1"], MvmcConfig)
    # h is not a co-clustering parameter
    with pytest.raises(ParameterError):
        parse_axes(["h=2,3"], MvmccConfig)


def test_expand_grid_last_axis_fastest():
    grid = expand_grid([SweepAxis("lambda1", [1.0, 2.0]), SweepAxis("seed", [0, 1, 2])])
    assert len(grid) == 6
    assert grid[0] == {"lambda1": 1.0, "seed": 0}
    assert grid[1] == {"lambda1": 1.0, "seed": 1}
    assert grid[3] == {"lambda1": 2.0, "seed": 0}


def test_run_sweep_writes_runs_and_summary(tmp_path):
    cfg = MvmcConfig(max_outer_iters=3, epsilon_knn=3)
    axes = parse_axes(["lambda1=1e-1..1e1"], MvmcConfig)
    runs, summary = run_sweep("mvmc", _small(), cfg, axes, tmp_path)

    assert len(runs) == 3
    for i, run in enumerate(runs):
        assert run.status in ("ok", "not_converged")
        assert (tmp_path / f"run_{i:03d}" / "labels_1.csv").exists()
        assert (tmp_path / f"run_{i:03d}" / "run_manifest.json").exists()
    rows = _read(summary)
    assert summary.endswith(SUMMARY_CSV)
    assert [float(r["lambda1"]) for r in rows] == pytest.approx([0.1, 1.0, 10.0])
    assert list(rows[0])[:2] == ["run", "lambda1"]
    assert rows[0]["lambda2"] == "100.0"
    assert rows[0]["nmi"] != ""


def test_sweep_over_h_trims_cluster_counts(tmp_path):
    cfg = MvmcConfig(h=2, r=[2, 2], max_outer_iters=2, epsilon_knn=3)
    runs, summary = run_sweep("mvmc", _small(), cfg, parse_axes(["h=1,3"], MvmcConfig), tmp_path)
    assert all(r.status in ("ok", "not_converged") for r in runs)
    assert (tmp_path / "run_001" / "labels_2.csv").exists()
    assert not (tmp_path / "run_000" / "labels_1.csv").exists()
    assert [r["h"] for r in _read(summary)] == ["1", "3"]


def test_sweep_records_divergence(tmp_path, monkeypatch):
    def broken(M, pair):
        return type(pair)(B=pair.B * np.nan, R=pair.R)

    monkeypatch.setattr(mvmc_solver, "semi_nmf_update", broken)
    cfg = MvmcConfig(max_outer_iters=3, epsilon_knn=3)
    runs, summary = run_sweep(
        "mvmc", _small(), cfg, parse_axes(["lambda1=1"], MvmcConfig), tmp_path
    )
    assert runs[0].status == "diverged"
    assert (tmp_path / "run_000" / "trace.csv").exists()
    assert _read(summary)[0]["sc"] == ""
    assert sweep_exit_code(runs) == 4


def test_sweep_mvmcc(tmp_path):
    cfg = MvmccConfig(r=2, c=2, max_outer_iters=2, epsilon_knn=3)
    runs, summary = run_sweep(
        "mvmcc", _small(), cfg, parse_axes(["lambda2=1,10"], MvmccConfig), tmp_path
    )
    assert len(runs) == 2
    assert (tmp_path / "run_000" / "columns_1.csv").exists()
    assert [r["h"] for r in _read(summary)] == ["2", "2"]


def test_unknown_command(tmp_path):
    with pytest.raises(ParameterError):
        run_sweep("kmeans", _small(), MvmcConfig(), [], tmp_path)


def test_sweep_exit_code():
    def run(status):
        return SweepRun(index=0, params={}, out_dir="", status=status)

    assert sweep_exit_code([run("ok"), run("ok")]) == 0
    assert sweep_exit_code([run("ok"), run("not_converged")]) == 3
    assert sweep_exit_code([run("failed"), run("not_converged")]) == 3
    assert sweep_exit_code([run("diverged"), run("failed")]) == 4
    assert sweep_exit_code([]) == 0
