"""
A small comparison grid and its report
======================================

The full protocol trains every algorithm on every device, split ratio and
seed (135 runs by default). This script runs a reduced grid on Device-1 and
writes the same artifacts the ``rlsurv compare`` command produces:
comparison.csv, summary.md, two SVG charts and per-run confusion matrices.
"""

import sys
from pathlib import Path

from rlsurv.experiment import ExperimentConfig, mean_f1, run_experiment
from rlsurv.report import emit_report

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-report")

# Shorter training than the desk default keeps this under a few minutes.
cfg = ExperimentConfig(devices=["device1"], algorithms=["ddqn", "dqn", "ann"],
                       test_fractions=[0.2, 0.5, 0.8], seeds=[0, 1],
                       agent={"total_steps": 20_000}, ann={"epochs": 40})

reports = run_experiment(cfg, progress=lambda r: print(
    f"{r.algorithm:>4} test={r.test_fraction:.1f} seed={r.seed}  F1={r.f1:.3f}"))
emit_report(reports, out)

###############################################################################
# Seed-mean F1, laid out like the published comparison table.

print(f"{'':>6}" + "".join(f"{f:>8.0%}" for f in cfg.test_fractions))
for algo in cfg.algorithms:
    print(f"{algo:>6}" + "".join(f"{mean_f1(reports, 'device1', algo, f):8.3f}"
                                 for f in cfg.test_fractions))

print((out / "summary.md").read_text())
print("artifacts:", sorted(p.name for p in out.iterdir()))
