"""
Comparison artifacts: CSV, markdown grids, SVG charts, confusion matrices.

Everything written here is a pure function of the reports passed in, so two
calls with equal inputs produce byte-identical files. The SVGs are written
by hand rather than through a plotting library for that reason.
"""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .dataset import Split
from .errors import InvalidArgument, ParseError, SchemaError
from .metrics import ConfusionMatrix, EvalReport, evaluate

COLUMNS = ("algorithm", "device", "test_fraction", "seed", "tp", "fp", "fn", "tn",
           "precision", "recall", "f1", "train_seconds")

LABELS = {"ddqn": "RL - DDQN", "dqn": "RL - DQN", "ann": "DL - ANN"}
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _label(algorithm: str) -> str:
    return LABELS.get(algorithm, algorithm)


def _algo_order(reports):
    known = [a for a in LABELS if any(r.algorithm == a for r in reports)]
    extra = sorted({r.algorithm for r in reports} - set(LABELS))
    return known + extra


def _ordered(values):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def _fraction_label(f: float) -> str:
    return f"{f * 100:g} %"


# -- comparison.csv ---------------------------------------------------------

def comparison_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in reports:
        writer.writerow([r.algorithm, r.device, repr(r.test_fraction), r.seed,
                         r.cm.tp, r.cm.fp, r.cm.fn, r.cm.tn,
                         f"{r.precision:.6f}", f"{r.recall:.6f}", f"{r.f1:.6f}",
                         f"{r.train_seconds:.3f}"])
    return buf.getvalue()


def read_comparison_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                cm = ConfusionMatrix(int(row["tp"]), int(row["fp"]), int(row["fn"]), int(row["tn"]))
                out.append(EvalReport(row["algorithm"], row["device"], float(row["test_fraction"]),
                                      int(row["seed"]), cm, float(row["train_seconds"])))
            except ValueError:
                raise ParseError(f"{path}: row {lineno} is malformed") from None
    return out


# -- summary.md -------------------------------------------------------------

def _stats(values):
    arr = np.asarray(values, dtype=np.float64)
    return arr.mean(), (arr.std(ddof=1) if len(arr) > 1 else 0.0), len(arr)


def summary_markdown(reports) -> str:
    lines = ["# Algorithm comparison", "",
             "F1 is the binary score with FAILURE (label 1) as the positive class.",
             "Cells show the mean over seeds, ± the sample standard deviation, and the seed count.",
             ""]
    for device in _ordered(r.device for r in reports):
        dev = [r for r in reports if r.device == device]
        fractions = sorted({r.test_fraction for r in dev})
        for title, metric, fmt in (("F1 - Score", lambda r: r.f1, "{:.4f} ± {:.4f} (n={})"),
                                   ("Training time [s]", lambda r: r.train_seconds,
                                    "{:.1f} ± {:.1f} (n={})")):
            lines.append(f"## {device}: {title}")
            lines.append("")
            lines.append("| Test Data Size | " + " | ".join(_fraction_label(f) for f in fractions) + " |")
            lines.append("|---|" + "---|" * len(fractions))
            for algo in _algo_order(dev):
                cells = []
                for f in fractions:
                    vals = [metric(r) for r in dev if r.algorithm == algo and r.test_fraction == f]
                    cells.append(fmt.format(*_stats(vals)) if vals else "-")
                lines.append(f"| {_label(algo)} | " + " | ".join(cells) + " |")
            lines.append("")
    return "\n".join(lines)


# -- SVG charts -------------------------------------------------------------

def _svg(width, height, body) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n'
            + "\n".join(body) + "\n</svg>\n")


def _legend(algos, x, y):
    out = []
    for i, algo in enumerate(algos):
        yy = y + 16 * i
        out.append(f'<rect x="{x}" y="{yy}" width="10" height="10" fill="{PALETTE[i % len(PALETTE)]}"/>')
        out.append(f'<text x="{x + 14}" y="{yy + 9}">{escape(_label(algo))}</text>')
    return out


def f1_bars_svg(reports) -> str:
    """Grouped bars of mean F1, one group per (device, test fraction)."""
    algos = _algo_order(reports)
    groups = [(d, f) for d in _ordered(r.device for r in reports)
              for f in sorted({r.test_fraction for r in reports if r.device == d})]
    bar, gap, top, plot_h, left = 14, 18, 20, 220, 40
    group_w = bar * len(algos) + gap
    width = left + group_w * len(groups) + 140
    height = top + plot_h + 50
    base = top + plot_h
    body = [f'<line x1="{left}" y1="{base}" x2="{left + group_w * len(groups)}" y2="{base}" stroke="black"/>',
            f'<line x1="{left}" y1="{top}" x2="{left}" y2="{base}" stroke="black"/>']
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = base - tick * plot_h
        body.append(f'<text x="{left - 4}" y="{y + 4:.1f}" text-anchor="end">{tick:.2f}</text>')
    for g, (device, frac) in enumerate(groups):
        x0 = left + gap / 2 + g * group_w
        for i, algo in enumerate(algos):
            vals = [r.f1 for r in reports
                    if (r.device, r.test_fraction, r.algorithm) == (device, frac, algo)]
            if not vals:
                continue
            h = float(np.mean(vals)) * plot_h
            body.append(f'<rect x="{x0 + i * bar:.1f}" y="{base - h:.2f}" width="{bar - 2}" '
                        f'height="{h:.2f}" fill="{PALETTE[i % len(PALETTE)]}"/>')
        body.append(f'<text x="{x0 + bar * len(algos) / 2:.1f}" y="{base + 14}" text-anchor="middle">'
                    f'{escape(_fraction_label(frac))}</text>')
        body.append(f'<text x="{x0 + bar * len(algos) / 2:.1f}" y="{base + 28}" text-anchor="middle">'
                    f'{escape(device)}</text>')
    body.append(f'<text x="{left}" y="{top - 6}">mean test F1 (FAILURE positive)</text>')
    body += _legend(algos, left + group_w * len(groups) + 16, top)
    return _svg(width, height, body)


def time_vs_f1_svg(reports) -> str:
    """Mean training time against mean F1, one point per (device, algorithm, fraction)."""
    algos = _algo_order(reports)
    points = []
    for key in _ordered((r.device, r.algorithm, r.test_fraction) for r in reports):
        rs = [r for r in reports if (r.device, r.algorithm, r.test_fraction) == key]
        points.append((key[1], float(np.mean([r.train_seconds for r in rs])),
                       float(np.mean([r.f1 for r in rs])), key[2]))
    left, top, w, h = 50, 20, 360, 240
    t_max = max([p[1] for p in points] + [1e-9]) * 1.05
    body = [f'<line x1="{left}" y1="{top + h}" x2="{left + w}" y2="{top + h}" stroke="black"/>',
            f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + h}" stroke="black"/>',
            f'<text x="{left + w / 2}" y="{top + h + 32}" text-anchor="middle">mean training time [s]</text>',
            f'<text x="{left}" y="{top - 6}">mean test F1</text>']
    for tick in (0.0, 0.5, 1.0):
        y = top + h - tick * h
        body.append(f'<text x="{left - 4}" y="{y + 4:.1f}" text-anchor="end">{tick:.1f}</text>')
    for tick in (0.0, 0.5, 1.0):
        x = left + tick * w
        body.append(f'<text x="{x:.1f}" y="{top + h + 14}" text-anchor="middle">{tick * t_max:.1f}</text>')
    for algo, secs, score, frac in points:
        color = PALETTE[algos.index(algo) % len(PALETTE)]
        x = left + secs / t_max * w
        y = top + h - score * h
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{color}"/>')
        body.append(f'<text x="{x + 6:.2f}" y="{y - 4:.2f}" font-size="9">{escape(_fraction_label(frac))}</text>')
    body += _legend(algos, left + w + 16, top)
    return _svg(left + w + 140, top + h + 45, body)


def confusion_csv(cm: ConfusionMatrix) -> str:
    return f"label\\pred,0,1\n0,{cm.tn},{cm.fp}\n1,{cm.fn},{cm.tp}\n"


def _run_stem(r: EvalReport) -> str:
    return f"{r.device}_{r.algorithm}_{r.test_fraction:g}_{r.seed}".replace("/", "-")


def emit_report(reports, out_dir) -> dict:
    """Write every artifact under ``out_dir``; returns ``{name: path}``."""
    reports = list(reports)
    if not reports:
        raise InvalidArgument("emit_report needs at least one report")
    out = Path(out_dir)
    try:
        (out / "confusion").mkdir(parents=True, exist_ok=True)
        files = {
            "comparison.csv": comparison_csv(reports),
            "summary.md": summary_markdown(reports),
            "f1_bars.svg": f1_bars_svg(reports),
            "time_vs_f1.svg": time_vs_f1_svg(reports),
        }
        for r in reports:
            files[f"confusion/{_run_stem(r)}.csv"] = confusion_csv(r.cm)
        paths = {}
        for name, text in files.items():
            p = out / name
            with open(p, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            paths[name] = p
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return paths


# -- external predictions ---------------------------------------------------

def read_predictions(path) -> dict:
    """``row_index,pred`` CSV as ``{row_index: pred}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for col in ("row_index", "pred"):
            if col not in (reader.fieldnames or []):
                raise SchemaError(f"{path}: missing column {col!r}")
        preds = {}
        for lineno, row in enumerate(reader, start=2):
            try:
                idx, pred = int(row["row_index"]), int(float(row["pred"]))
            except ValueError:
                raise ParseError(f"{path}: row {lineno} is not numeric") from None
            if pred not in (0, 1):
                raise SchemaError(f"{path}: row {lineno} pred {pred} is not 0 or 1")
            preds[idx] = pred
    return preds


def report_from_predictions(path, parts: Split, algorithm: str, device: str,
                            test_fraction: float, seed: int,
                            train_seconds: float = 0.0) -> EvalReport:
    """Score externally produced predictions on a split's test rows.

    ``row_index`` refers to rows of the full dataset; entries for rows outside
    the test split are ignored, every test row needs a prediction.
    """
    preds = read_predictions(path)
    missing = [int(i) for i in parts.test_index if int(i) not in preds]
    if missing:
        raise SchemaError(f"{path}: no prediction for {len(missing)} test rows "
                          f"(first: row_index {missing[0]})")
    p = np.array([preds[int(i)] for i in parts.test_index], dtype=np.int64)
    return evaluate(algorithm, device, test_fraction, seed, p, parts.test.labels, train_seconds)
