import numpy as np
import pytest
from hypothesis import given, strategies as st

from rlsurv.dataset import Dataset
from rlsurv.errors import InvalidArgument
from rlsurv.metrics import (ConfusionMatrix, confusion, evaluate, f1, f1_score, n_flags,
                            precision, range_table, recall)


def tally(preds, labels):
    tp = fp = fn = tn = 0
    for p, y in zip(preds, labels):
        if p == 1 and y == 1:
            tp += 1
        elif p == 1:
            fp += 1
        elif y == 1:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def oracle_f1(tp, fp, fn):
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return 2 * p * r / (p + r) if p + r else 0.0


def test_agrees_with_per_row_tally():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 60))
        rate = rng.uniform(0, 1)
        preds = (rng.uniform(size=n) < rng.uniform(0, 1)).astype(int)
        labels = (rng.uniform(size=n) < rate).astype(int)
        tp, fp, fn, tn = tally(preds, labels)
        cm = confusion(preds, labels)
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (tp, fp, fn, tn)
        assert f1(cm) == pytest.approx(oracle_f1(tp, fp, fn), abs=1e-12)


def test_two_thirds():
    cm = ConfusionMatrix(tp=2, fp=1, fn=1)
    assert precision(cm) == recall(cm) == f1(cm) == pytest.approx(2 / 3)


def test_degenerate_is_zero():
    assert f1(ConfusionMatrix(tp=0, fp=0, fn=5)) == 0.0
    assert f1(ConfusionMatrix(tn=10)) == 0.0
    assert precision(ConfusionMatrix(fn=3)) == 0.0


def test_reference_cell_value():
    assert round(f1(ConfusionMatrix(tp=6, fp=1, fn=1, tn=992)), 4) == 0.8571


def test_perfect_score_iff_no_errors():
    assert f1_score([1, 0, 1], [1, 0, 1]) == 1.0
    assert f1_score([1, 1, 1], [1, 0, 1]) < 1.0


@given(st.lists(st.tuples(st.sampled_from([0, 1]), st.sampled_from([0, 1])), min_size=1, max_size=50),
       st.randoms(use_true_random=False))
def test_permutation_invariance(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    p, y = zip(*pairs)
    ps, ys = zip(*shuffled)
    assert confusion(p, y) == confusion(ps, ys)
    assert 0.0 <= f1_score(p, y) <= 1.0


def test_confusion_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        confusion([0, 1], [0])
    with pytest.raises(InvalidArgument):
        confusion([2], [0])


def test_eval_report_fields():
    rep = evaluate("dqn", "device1", 0.2, 3, [1, 1, 0, 0], [1, 0, 1, 0], train_seconds=1.5)
    assert rep.cm == ConfusionMatrix(1, 1, 1, 1)
    assert rep.f1 == pytest.approx(0.5)
    assert rep.key == ("device1", "dqn", 0.2, 3)


def test_range_table_flags_published_volt_row():
    # training envelope 121.989..225.1894, test envelope 119.059..237.9385
    train = Dataset([[121.989, 1, 1, 1], [225.1894, 2, 2, 2]], [0, 1])
    test = Dataset([[119.059, 1, 1, 1], [237.9385, 2, 2, 2]], [0, 1])
    table = range_table(train, test)
    volt = table[0]
    assert volt.feature == "volt"
    assert volt.min_outside and volt.max_outside
    assert n_flags(table) == 2  # the other features share the same envelope


def test_range_table_equal_bounds_are_inside():
    ds = Dataset([[1, 2, 3, 4], [5, 6, 7, 8]], [0, 1])
    assert n_flags(range_table(ds, ds)) == 0


def test_range_table_empty():
    ds = Dataset([[1, 2, 3, 4]], [0])
    with pytest.raises(InvalidArgument):
        range_table(ds, Dataset(np.zeros((0, 4)), []))
