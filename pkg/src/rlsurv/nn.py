"""
Dense ReLU networks written directly against numpy.

All parameters of a network live in one contiguous float64 buffer; the
per-layer weight matrices and bias vectors are views into it. That keeps the
optimizer update and the target-network copy to a single vectorized
operation each, which matters when a training run takes tens of thousands of
small steps on one CPU core.

Layer ``k`` maps ``layer_sizes[k]`` inputs to ``layer_sizes[k+1]`` outputs
with ``weights[k]`` of shape ``(out, in)``. Hidden layers use ReLU, the last
layer is linear so it can emit raw Q-values or logits.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, NumericFailure

CHECKPOINT_FORMAT = "rlsurv-mlp"
CHECKPOINT_VERSION = 1
_FLUSH_BELOW = 1e-200


def _layer_views(flat: np.ndarray, layer_sizes: Sequence[int]):
    weights, biases = [], []
    offset = 0
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        w = flat[offset:offset + n_out * n_in].reshape(n_out, n_in)
        offset += n_out * n_in
        b = flat[offset:offset + n_out]
        offset += n_out
        weights.append(w)
        biases.append(b)
    return weights, biases


def n_params(layer_sizes: Sequence[int]) -> int:
    return sum(o * i + o for i, o in zip(layer_sizes[:-1], layer_sizes[1:]))


@dataclass(eq=False)
class Mlp:
    """Feed-forward network; ``params`` owns the storage, the rest are views."""

    layer_sizes: tuple
    params: np.ndarray
    weights: list = field(init=False, repr=False)
    biases: list = field(init=False, repr=False)

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        _check_sizes(self.layer_sizes)
        self.params = np.ascontiguousarray(self.params, dtype=np.float64)
        if self.params.shape != (n_params(self.layer_sizes),):
            raise InvalidArgument(
                f"parameter buffer has shape {self.params.shape}, "
                f"expected ({n_params(self.layer_sizes)},)")
        self.weights, self.biases = _layer_views(self.params, self.layer_sizes)

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def copy(self) -> "Mlp":
        return Mlp(self.layer_sizes, self.params.copy())


@dataclass(eq=False)
class GradientSet:
    """Gradients laid out exactly like the parameters of the producing net."""

    layer_sizes: tuple
    flat: np.ndarray
    weights: list = field(init=False, repr=False)
    biases: list = field(init=False, repr=False)

    def __post_init__(self):
        self.weights, self.biases = _layer_views(self.flat, self.layer_sizes)


@dataclass(eq=False)
class OptimizerState:
    kind: str = "adam"
    learning_rate: float = 0.0025
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    first_moment: np.ndarray | None = None
    second_moment: np.ndarray | None = None
    step_count: int = 0

    def __post_init__(self):
        if self.kind not in ("adam", "sgd"):
            raise InvalidArgument(f"unknown optimizer kind {self.kind!r}")
        if not self.learning_rate > 0:
            raise InvalidArgument("learning_rate must be positive")


def _check_sizes(layer_sizes):
    if len(layer_sizes) < 2:
        raise InvalidArgument("layer_sizes needs at least an input and an output size")
    if any(n < 1 for n in layer_sizes):
        raise InvalidArgument(f"layer sizes must be positive, got {list(layer_sizes)}")


def init_mlp(layer_sizes: Sequence[int], seed: int) -> Mlp:
    """He-uniform weights (bound ``sqrt(6 / fan_in)``), zero biases."""
    layer_sizes = tuple(int(n) for n in layer_sizes)
    _check_sizes(layer_sizes)
    rng = np.random.default_rng(seed)
    net = Mlp(layer_sizes, np.zeros(n_params(layer_sizes)))
    for w in net.weights:
        bound = np.sqrt(6.0 / w.shape[1])
        w[...] = rng.uniform(-bound, bound, size=w.shape)
    return net


def init_optimizer(net: Mlp, kind: str = "adam", learning_rate: float = 0.0025,
                   **kwargs) -> OptimizerState:
    opt = OptimizerState(kind=kind, learning_rate=learning_rate, **kwargs)
    if kind == "adam":
        opt.first_moment = np.zeros_like(net.params)
        opt.second_moment = np.zeros_like(net.params)
    return opt


def _as_batch(net: Mlp, states) -> np.ndarray:
    x = np.asarray(states, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.n_inputs:
        raise InvalidArgument(
            f"states must have shape (B, {net.n_inputs}), got {x.shape}")
    if not np.isfinite(x).all():
        raise InvalidArgument("states contain NaN or Inf")
    return x


def forward_trace(net: Mlp, x: np.ndarray) -> list:
    """Activations of every layer, input first and raw outputs last.

    No validation; callers that accept user data go through :func:`forward`.
    """
    acts = [x]
    last = len(net.weights) - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = acts[-1] @ w.T
        z += b
        if k < last:
            np.maximum(z, 0.0, out=z)
        acts.append(z)
    return acts


def forward(net: Mlp, states) -> np.ndarray:
    """Raw output values, shape ``(B, layer_sizes[-1])``."""
    return forward_trace(net, _as_batch(net, states))[-1]


def backward(net: Mlp, states, output_grads, trace: list | None = None) -> GradientSet:
    """Gradient of ``sum(output_grads * forward(net, states))`` w.r.t. parameters.

    ``trace`` may be passed from :func:`forward_trace` on the same states to
    skip the recomputation. The ReLU subgradient at exactly zero is zero.
    """
    if trace is None:
        trace = forward_trace(net, _as_batch(net, states))
    g = np.asarray(output_grads, dtype=np.float64)
    if g.shape != trace[-1].shape:
        raise InvalidArgument(
            f"output_grads shape {g.shape} does not match outputs {trace[-1].shape}")

    grads = GradientSet(net.layer_sizes, np.empty_like(net.params))
    delta = g
    for k in range(len(net.weights) - 1, -1, -1):
        a_in = trace[k]
        np.matmul(delta.T, a_in, out=grads.weights[k])
        np.sum(delta, axis=0, out=grads.biases[k])
        if k > 0:
            delta = delta @ net.weights[k]
            # trace[k] is post-ReLU, so zero exactly where the unit was inactive
            delta *= trace[k] > 0.0
    return grads


def optimizer_step(net: Mlp, grads: GradientSet, opt: OptimizerState):
    """Apply one Adam (bias-corrected) or SGD update in place; returns ``(net, opt)``."""
    if grads.flat.shape != net.params.shape:
        raise InvalidArgument("gradient layout does not match the network")
    g = grads.flat
    t = opt.step_count + 1
    if opt.kind == "sgd":
        updated = net.params - opt.learning_rate * g
    else:
        m, v = opt.first_moment, opt.second_moment
        if m is None or m.shape != g.shape:
            m = opt.first_moment = np.zeros_like(g)
            v = opt.second_moment = np.zeros_like(g)
        scratch = np.multiply(g, 1.0 - opt.beta1)
        m *= opt.beta1
        m += scratch
        # moments of dead units decay into subnormal floats, which are ~30x
        # slower to process; their contribution is far below resolution anyway
        np.abs(m, out=scratch)
        m[scratch < _FLUSH_BELOW] = 0.0
        np.multiply(g, g, out=scratch)
        scratch *= 1.0 - opt.beta2
        v *= opt.beta2
        v += scratch
        # lr * m_hat / (sqrt(v_hat) + eps) with both bias corrections folded
        # into a scalar step size and a rescaled eps
        c1 = 1.0 - opt.beta1 ** t
        root_c2 = np.sqrt(1.0 - opt.beta2 ** t)
        np.sqrt(v, out=scratch)
        scratch += opt.eps * root_c2
        np.divide(m, scratch, out=scratch)
        scratch *= -opt.learning_rate * root_c2 / c1
        updated = scratch
        updated += net.params
    if not np.isfinite(updated).all():
        raise NumericFailure(f"non-finite parameters after optimizer step {t}")
    net.params[...] = updated
    opt.step_count = t
    return net, opt


def copy_weights(src: Mlp, dst: Mlp) -> Mlp:
    if src.layer_sizes != dst.layer_sizes:
        raise InvalidArgument(
            f"topology mismatch: {src.layer_sizes} vs {dst.layer_sizes}")
    dst.params[...] = src.params
    return dst


def _diff(predicted, target):
    p = np.asarray(predicted, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1:
        raise InvalidArgument(f"shape mismatch: {p.shape} vs {t.shape}")
    return p - t


def huber_loss_and_grad(predicted, target, delta: float = 1.0):
    """Mean Huber loss and its gradient w.r.t. ``predicted``."""
    d = _diff(predicted, target)
    a = np.abs(d)
    quad = a <= delta
    per = np.where(quad, 0.5 * d * d, delta * (a - 0.5 * delta))
    grad = np.where(quad, d, delta * np.sign(d)) / d.size
    return float(per.mean()), grad


def mse_loss_and_grad(predicted, target):
    d = _diff(predicted, target)
    return float(np.mean(d * d)), 2.0 * d / d.size


# -- checkpoints ------------------------------------------------------------

def mlp_to_dict(net: Mlp, optimizer: str = "adam") -> dict:
    """JSON-ready document; floats are stored as shortest round-trip strings."""
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "layer_sizes": list(net.layer_sizes),
        "optimizer": optimizer,
        "weights": [[[repr(float(v)) for v in row] for row in w] for w in net.weights],
        "biases": [[repr(float(v)) for v in b] for b in net.biases],
    }


def mlp_from_dict(doc: dict) -> Mlp:
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise InvalidArgument(f"not a {CHECKPOINT_FORMAT} document")
    net = Mlp(doc["layer_sizes"], np.zeros(n_params(doc["layer_sizes"])))
    for w, rows in zip(net.weights, doc["weights"]):
        arr = np.array([[float(v) for v in row] for row in rows], dtype=np.float64)
        if arr.shape != w.shape:
            raise InvalidArgument(f"weight block has shape {arr.shape}, expected {w.shape}")
        w[...] = arr
    for b, vals in zip(net.biases, doc["biases"]):
        arr = np.array([float(v) for v in vals], dtype=np.float64)
        if arr.shape != b.shape:
            raise InvalidArgument(f"bias block has shape {arr.shape}, expected {b.shape}")
        b[...] = arr
    return net


def save_mlp(net: Mlp, path, optimizer: str = "adam") -> None:
    Path(path).write_text(json.dumps(mlp_to_dict(net, optimizer)))


def load_mlp(path) -> Mlp:
    return mlp_from_dict(json.loads(Path(path).read_text()))
