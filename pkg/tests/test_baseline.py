import numpy as np
import pytest
from hypothesis import given, strategies as st

from rlsurv import nn
from rlsurv.baseline import AnnConfig, predict_ann, softmax_xent_loss_and_grad, train_ann
from rlsurv.dataset import Dataset
from rlsurv.errors import InvalidArgument

from test_agents import two_clusters


def test_uniform_logits_give_ln2():
    loss, grad = softmax_xent_loss_and_grad([[0.0, 0.0]], [0])
    assert loss == pytest.approx(np.log(2))
    assert grad.tolist() == [[-0.5, 0.5]]


def test_extreme_logits_are_stable():
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        loss, grad = softmax_xent_loss_and_grad([[1000.0, -1000.0]], [0])
        assert loss == pytest.approx(0.0, abs=1e-12)
        assert np.isfinite(grad).all()
        loss, _ = softmax_xent_loss_and_grad([[1000.0, -1000.0]], [1])
        assert loss == pytest.approx(2000.0)


@pytest.mark.parametrize("weights", [(1.0, 1.0), (0.5, 99.0)])
def test_gradient_matches_finite_differences(weights):
    rng = np.random.default_rng(2)
    z = rng.normal(scale=3.0, size=(5, 2))
    y = rng.integers(0, 2, 5)
    _, grad = softmax_xent_loss_and_grad(z, y, weights)
    h = 1e-6
    num = np.zeros_like(z)
    for i in range(5):
        for j in range(2):
            e = np.zeros_like(z)
            e[i, j] = h
            num[i, j] = (softmax_xent_loss_and_grad(z + e, y, weights)[0]
                         - softmax_xent_loss_and_grad(z - e, y, weights)[0]) / (2 * h)
    np.testing.assert_allclose(grad, num, rtol=1e-5, atol=1e-10)


def test_loss_shape_mismatch():
    with pytest.raises(InvalidArgument):
        softmax_xent_loss_and_grad([[0.0, 0.0]], [0, 1])


def test_epochs_must_be_positive():
    with pytest.raises(InvalidArgument):
        AnnConfig(epochs=0)


def test_one_epoch_update_count():
    data = two_clusters(70)
    res = train_ann(AnnConfig(epochs=1, batch_size=32, layer_sizes=(4, 8, 2)), data)
    assert res.n_updates == 3  # ceil(70 / 32)


def test_single_class_rejected():
    with pytest.raises(InvalidArgument):
        train_ann(AnnConfig(epochs=1), Dataset(np.zeros((4, 4)), [1, 1, 1, 1]))


def test_seeded_repeat_is_identical():
    data = two_clusters(60)
    cfg = AnnConfig(epochs=3, layer_sizes=(4, 8, 2), seed=4)
    a, b = train_ann(cfg, data, data), train_ann(cfg, data, data)
    assert np.array_equal(a.net.params, b.net.params)
    assert a.curve == b.curve


def test_learns_separable_toy():
    data = two_clusters()
    res = train_ann(AnnConfig(epochs=50, seed=0), data)
    assert np.mean(predict_ann(res.net, data.features) == data.labels) >= 0.95
    assert res.curve[-1][2] < res.curve[0][2]


def test_best_epoch_is_best_validation():
    data = two_clusters()
    res = train_ann(AnnConfig(epochs=10, layer_sizes=(4, 8, 2), seed=1), data, data)
    scores = [f for _, f, _ in res.curve]
    assert res.best_val_f1 == max(scores)
    # ties resolve to the latest epoch
    assert res.best_epoch == max(e for e, f, _ in res.curve if f == max(scores))


def test_balanced_weighting_runs():
    data = two_clusters()
    res = train_ann(AnnConfig(epochs=2, class_weighting="balanced", layer_sizes=(4, 8, 2)), data)
    assert res.n_updates == 14


def test_predict_strict_argmax_and_ties():
    net = nn.Mlp([4, 2], np.zeros(nn.n_params([4, 2])))
    assert predict_ann(net, np.ones((3, 4))).tolist() == [0, 0, 0]
    net.biases[0][...] = [0.3, 0.31]
    assert predict_ann(net, np.ones(4)).tolist() == [1]


@given(st.floats(-1e3, 1e3))
def test_prediction_shift_invariant(c):
    net = nn.init_mlp([4, 8, 2], seed=3)
    x = np.random.default_rng(0).normal(size=(30, 4))
    before = predict_ann(net, x)
    net.biases[-1][...] += c
    assert np.array_equal(predict_ann(net, x), before)


def test_batch_equals_rows():
    net = nn.init_mlp([4, 8, 2], seed=3)
    x = np.random.default_rng(1).normal(size=(10, 4))
    assert predict_ann(net, x).tolist() == [int(predict_ann(net, r)[0]) for r in x]
