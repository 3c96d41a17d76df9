import csv
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from rlsurv import dataset as D
from rlsurv.errors import SchemaError
from rlsurv.experiment import ExperimentConfig, plan
from rlsurv.metrics import ConfusionMatrix, EvalReport
from rlsurv.report import (COLUMNS, comparison_csv, emit_report, read_comparison_csv,
                           report_from_predictions, summary_markdown)


def fake_reports(devices=("device1",), algos=("ddqn", "dqn", "ann"), fracs=(0.2, 0.5, 0.8),
                 seeds=(0, 1)):
    out = []
    for d in devices:
        for a in algos:
            for f in fracs:
                for s in seeds:
                    tp = 3 + s
                    out.append(EvalReport(a, d, f, s, ConfusionMatrix(tp, 1, 2, 100), 1.25 + s))
    return out


def test_single_report_writes_every_artifact(tmp_path):
    rep = fake_reports(algos=("dqn",), fracs=(0.2,), seeds=(0,))
    emit_report(rep, tmp_path)
    rows = list(csv.reader(open(tmp_path / "comparison.csv")))
    assert rows[0] == list(COLUMNS)
    assert len(rows) == 2
    assert "RL - DQN" in (tmp_path / "summary.md").read_text()
    for svg in ("f1_bars.svg", "time_vs_f1.svg"):
        assert ET.parse(tmp_path / svg).getroot().tag.endswith("svg")
    conf = list((tmp_path / "confusion").glob("*.csv"))
    assert len(conf) == 1
    assert list(csv.reader(open(conf[0])))


def test_row_count_and_round_trip(tmp_path):
    reps = fake_reports()
    emit_report(reps, tmp_path)
    assert len((tmp_path / "comparison.csv").read_text().splitlines()) == len(reps) + 1
    back = read_comparison_csv(tmp_path / "comparison.csv")
    assert [r.cm for r in back] == [r.cm for r in reps]
    assert [r.key for r in back] == [r.key for r in reps]


def test_emit_is_byte_deterministic(tmp_path):
    reps = fake_reports(devices=("device1", "device2"))
    emit_report(reps, tmp_path / "a")
    emit_report(reps, tmp_path / "b")
    for f in (tmp_path / "a").rglob("*"):
        if f.is_file():
            assert f.read_bytes() == (tmp_path / "b" / f.relative_to(tmp_path / "a")).read_bytes()


def test_four_algorithm_grid_has_table_shape():
    reps = fake_reports(algos=("ddqn", "dqn", "ann", "lightgbm"))
    md = summary_markdown(reps)
    grid = md.split("## device1: F1 - Score")[1].split("##")[0]
    table = [line for line in grid.splitlines() if line.startswith("|")]
    assert table[0] == "| Test Data Size | 20 % | 50 % | 80 % |"
    names = [line.split("|")[1].strip() for line in table[2:]]
    assert names == ["RL - DDQN", "RL - DQN", "DL - ANN", "lightgbm"]
    assert all(line.count("|") == 5 for line in table)


def test_three_device_grids():
    md = summary_markdown(fake_reports(devices=("device1", "device2", "device3")))
    assert md.count(": F1 - Score") == 3
    assert md.count("| RL - DDQN |") == 6  # F1 and timing grid per device


def test_default_experiment_covers_three_devices():
    cfg = ExperimentConfig()
    runs = plan(cfg)
    assert len(runs) == 3 * 3 * 3 * 5
    assert {r.device for r in runs} == {"device1", "device2", "device3"}


def test_summary_mean_and_spread():
    md = summary_markdown(fake_reports(algos=("ann",), fracs=(0.5,)))
    # f1 for tp=3 and tp=4 with fp=1, fn=2
    f1s = [2 * 3 / (6 + 3), 2 * 4 / (8 + 3)]
    assert f"{np.mean(f1s):.4f} ± {np.std(f1s, ddof=1):.4f} (n=2)" in md


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_report(fake_reports(), blocker / "out")


def test_comparison_csv_formats():
    text = comparison_csv(fake_reports(algos=("dqn",), fracs=(0.8,), seeds=(0,)))
    row = text.splitlines()[1].split(",")
    assert row[:8] == ["dqn", "device1", "0.8", "0", "3", "1", "2", "100"]
    assert row[-1] == "1.250"


def test_read_rejects_missing_columns(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("algorithm,device\nx,y\n")
    with pytest.raises(SchemaError, match="tp"):
        read_comparison_csv(p)


# -- external predictions ---------------------------------------------------

def small_split():
    ds = D.Dataset(np.arange(400.0).reshape(100, 4), [0] * 90 + [1] * 10, "toy")
    return D.split(ds, 0.2, seed=0)


def test_predictions_join_on_row_index(tmp_path):
    parts = small_split()
    p = tmp_path / "pred.csv"
    truth = parts.test.labels
    with open(p, "w") as fh:
        fh.write("row_index,pred\n")
        for i in range(100):  # predictions for every row; only test rows count
            fh.write(f"{i},{int(i >= 90)}\n")
    rep = report_from_predictions(p, parts, "lightgbm", "toy", 0.2, 0)
    assert rep.cm == ConfusionMatrix(tp=int(truth.sum()), tn=int((truth == 0).sum()))
    assert rep.f1 == 1.0


def test_predictions_missing_test_row(tmp_path):
    parts = small_split()
    p = tmp_path / "pred.csv"
    p.write_text("row_index,pred\n" + "".join(f"{i},0\n" for i in parts.test_index[1:]))
    with pytest.raises(SchemaError):
        report_from_predictions(p, parts, "lightgbm", "toy", 0.2, 0)
