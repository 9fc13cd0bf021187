"""Tests for run output writers."""

import csv

import numpy as np
import pytest

from mvmc.dataio.writer import (
    RUN_LOG,
    config_hash,
    report_rows,
    save_logs,
    write_labels,
    write_trace,
)
from mvmc.errors import IngestionError
from mvmc.metrics import build_report
from mvmc.models import MultiViewDataset, MvmcConfig, TraceRow


def test_config_hash_ignores_key_order():
    a = {"lambda1": 1.0, "r": [2, 3], "seed": 0}
    b = {"seed": 0, "r": [2, 3], "lambda1": 1.0}
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({**a, "seed": 1})


def test_config_hash_stable_for_config_dict():
    cfg = MvmcConfig(h=3, r=4)
    assert config_hash(cfg.to_dict()) == config_hash(MvmcConfig(h=3, r=[4, 4, 4]).to_dict())


def test_report_rows_flatten_every_entry():
    rng = np.random.default_rng(0)
    ds = MultiViewDataset(views=(rng.normal(size=(2, 8)),))
    labs = [np.array([0, 0, 0, 0, 1, 1, 1, 1]), np.array([0, 1] * 4)]
    rows = report_rows(build_report(ds, labs, truths=[labs[0]]))
    kinds = [r["kind"] for r in rows]
    assert kinds.count("quality") == 4
    assert kinds.count("diversity") == 2
    assert {r["metric"] for r in rows if r["kind"] == "average"} == {"sc", "di", "nmi", "jc"}
    assert kinds.count("truth") == 2


def test_save_logs(tmp_path):
    assert save_logs(tmp_path, []) is None
    path = save_logs(tmp_path, [{"level": "warn", "message": "x"}, {"level": "info", "message": "y"}])
    assert path.endswith(RUN_LOG)
    assert (tmp_path / RUN_LOG).read_text() == "[WARN] x\n[INFO] y\n"


def test_write_trace_columns(tmp_path):
    trace = [TraceRow(iteration=1, fit=1.0, hsic=0.5, smooth=0.25, penalty=0.0,
                      total=1.75, feasibility=0.1, mu=0.01)]
    with open(write_trace(tmp_path, trace), newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["iter", "fit", "hsic", "smooth", "penalty", "feasibility", "mu", "total"]
    assert float(rows[0]["total"]) == pytest.approx(1.75)


def test_write_into_file_path_fails(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(IngestionError):
        write_labels(blocker / "labels.csv", np.array([0, 1]))
