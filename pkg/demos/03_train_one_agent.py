"""
Training a Double-DQN classifier on Device-1
============================================

One full desk-scale run: 60,000 agent steps on the 20 % training share of
Device-1, validation F1 every 2,000 steps, and the best checkpoint scored
on the held-out test rows. Takes roughly half a minute on one CPU core.
"""

import numpy as np

from rlsurv import dataset
from rlsurv.agents import AgentConfig, train
from rlsurv.baseline import AnnConfig, predict_ann, train_ann
from rlsurv.metrics import confusion, f1, precision, recall

ds = dataset.generate(dataset.preset("device1"))
parts = dataset.split(ds, test_fraction=0.2, seed=0)

# Fit the scaler on the training rows, then apply it everywhere.
scaler = dataset.fit_scaler(parts.train)
train_set, val_set, test_set = (dataset.apply_scaler(scaler, p) for p in parts)

cfg = AgentConfig(algorithm="ddqn", total_steps=60_000, seed=0)
result = train(cfg, train_set, val_set)
print(f"trained for {cfg.total_steps} steps in {result.train_seconds:.1f}s")

###############################################################################
# Validation curve
# ----------------
# Epsilon decays linearly from 1.0 to 0.5 over the first half, so half of
# the late actions are still random; the greedy policy is what gets scored.

for step, val_f1, loss in result.curve[::3]:
    print(f"step {step:6d}  val F1 {val_f1:.3f}  mean loss {loss:8.3f}")
print(f"best checkpoint: step {result.best_step}, val F1 {result.best_val_f1:.3f}")

###############################################################################
# Test scores
# -----------

preds = result.agent.predict(test_set.features)
cm = confusion(preds, test_set.labels)
print(f"DDQN  tp={cm.tp} fp={cm.fp} fn={cm.fn} tn={cm.tn}  "
      f"precision={precision(cm):.3f} recall={recall(cm):.3f} F1={f1(cm):.3f}")

# What the Q-network learned: the gap Q(FAILURE) - Q(NORMAL) is about -2 on
# normal rows and in the hundreds around failures.
gap = np.diff(result.agent.q_values(test_set.features), axis=1)[:, 0]
print("median gap on normal rows :", np.round(np.median(gap[test_set.labels == 0]), 2))
print("median gap on failure rows:", np.round(np.median(gap[test_set.labels == 1]), 2))

# The supervised baseline on the same split, same topology.
ann = train_ann(AnnConfig(seed=0), train_set, val_set)
cm = confusion(predict_ann(ann.net, test_set.features), test_set.labels)
print(f"ANN   tp={cm.tp} fp={cm.fp} fn={cm.fn} tn={cm.tn}  F1={f1(cm):.3f} "
      f"({ann.n_updates} updates, {ann.train_seconds:.1f}s)")
