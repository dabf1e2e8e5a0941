"""Time-conditioned MLP with hand-written backprop, Adam, and JSON checkpoints.

Inputs are batched as ``(batch, dim)``. The time scalar is appended to the
input, optionally expanded with a small sinusoidal embedding.
"""

from __future__ import annotations

import dataclasses
import json
import os

import numpy as np

from .datagen import PRNG_ID, make_rng
from .errors import CorruptCheckpoint, InvalidShape, ShapeMismatch, VersionMismatch

CHECKPOINT_VERSION = 1
N_FREQ = 4
ACTIVATIONS = ("silu",)
TIME_EMBEDDINGS = ("none", "sinusoidal")


def time_features(t, embedding: str = "none") -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))[:, None]
    if embedding == "none":
        return t
    k = 2.0 * np.pi * np.arange(1, N_FREQ + 1)
    return np.concatenate([t, np.sin(k * t), np.cos(k * t)], axis=1)


def n_time_features(embedding: str) -> int:
    return 1 if embedding == "none" else 1 + 2 * N_FREQ


def mlp_sizes(data_dim: int, depth: int, width: int, embedding: str = "none") -> list[int]:
    """Layer sizes for ``depth`` hidden layers of ``width`` units."""
    return [data_dim + n_time_features(embedding)] + [width] * depth + [data_dim]


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def silu(z):
    return z * _sigmoid(z)


def silu_grad(z):
    s = _sigmoid(z)
    return s * (1.0 + z * (1.0 - s))


@dataclasses.dataclass
class MlpParams:
    weights: list  # each (out, in)
    biases: list  # each (out,)
    activation: str = "silu"
    time_embedding: str = "none"

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def data_dim(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                         self.activation, self.time_embedding)

    def check(self):
        sizes = self.layer_sizes
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i + 1], sizes[i]) or b.shape != (sizes[i + 1],):
                raise InvalidShape(f"layer {i} has weight {w.shape} and bias {b.shape}")
        if sizes[0] != self.data_dim + n_time_features(self.time_embedding):
            raise InvalidShape("input size must equal output size plus time features")


def init(layer_sizes, seed, activation="silu", time_embedding="none") -> MlpParams:
    """He-normal weights, zero biases."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise InvalidShape(f"need at least two positive layer sizes, got {layer_sizes}")
    if activation not in ACTIVATIONS:
        raise InvalidShape(f"unknown activation {activation!r}")
    if time_embedding not in TIME_EMBEDDINGS:
        raise InvalidShape(f"unknown time embedding {time_embedding!r}")
    rng = make_rng(seed)
    weights = [rng.standard_normal((o, i)) * np.sqrt(2.0 / i) for i, o in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(o) for o in sizes[1:]]
    p = MlpParams(weights, biases, activation, time_embedding)
    if sizes[0] != sizes[-1] + n_time_features(time_embedding):
        raise InvalidShape("input size must equal output size plus time features")
    return p


def _inputs(p: MlpParams, t, x):
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != p.data_dim:
        raise ShapeMismatch(f"expected inputs of dimension {p.data_dim}, got {x.shape[1]}")
    tf = time_features(t, p.time_embedding)
    if len(tf) == 1 and len(x) > 1:
        tf = np.broadcast_to(tf, (len(x), tf.shape[1]))
    elif len(tf) != len(x):
        raise ShapeMismatch("time and input batch sizes differ")
    return np.concatenate([x, tf], axis=1), squeeze


def _forward_cache(p: MlpParams, h):
    acts = [h]
    pre = []
    last = len(p.weights) - 1
    for i, (w, b) in enumerate(zip(p.weights, p.biases)):
        z = h @ w.T + b
        pre.append(z)
        h = z if i == last else silu(z)
        acts.append(h)
    return acts, pre


def forward(p: MlpParams, t, x) -> np.ndarray:
    h, squeeze = _inputs(p, t, x)
    out = _forward_cache(p, h)[0][-1]
    return out[0] if squeeze else out


def backward(p: MlpParams, t, x, target):
    """Mean squared error over batch and output coordinates, and its exact gradient.

    Returns ``(loss, grad_weights, grad_biases)``.
    """
    h, _ = _inputs(p, t, x)
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    if target.shape != (h.shape[0], p.data_dim):
        raise ShapeMismatch(f"target shape {target.shape} does not match batch")
    if h.shape[0] == 0:
        raise ShapeMismatch("empty batch")
    acts, pre = _forward_cache(p, h)
    resid = acts[-1] - target
    loss = float(np.mean(resid * resid))
    delta = 2.0 * resid / resid.size
    gw = [None] * len(p.weights)
    gb = [None] * len(p.weights)
    for i in range(len(p.weights) - 1, -1, -1):
        gw[i] = delta.T @ acts[i]
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ p.weights[i]) * silu_grad(pre[i - 1])
    return loss, gw, gb


@dataclasses.dataclass
class AdamState:
    m_w: list
    m_b: list
    v_w: list
    v_b: list
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr: float = 1e-3

    @classmethod
    def zeros_like(cls, p: MlpParams, **hyper) -> "AdamState":
        z = lambda arrs: [np.zeros_like(a) for a in arrs]  # noqa: E731
        return cls(z(p.weights), z(p.biases), z(p.weights), z(p.biases), **hyper)

    def copy(self) -> "AdamState":
        c = lambda arrs: [a.copy() for a in arrs]  # noqa: E731
        return dataclasses.replace(self, m_w=c(self.m_w), m_b=c(self.m_b), v_w=c(self.v_w), v_b=c(self.v_b))


def adam_step(p: MlpParams, s: AdamState, grad_w, grad_b):
    """In-place Adam update with bias correction. Returns ``(p, s)``."""
    if len(grad_w) != len(p.weights) or len(grad_b) != len(p.biases):
        raise ShapeMismatch("gradient layer count differs from parameters")
    s.step += 1
    c1 = 1.0 - s.beta1**s.step
    c2 = 1.0 - s.beta2**s.step
    groups = ((p.weights, s.m_w, s.v_w, grad_w), (p.biases, s.m_b, s.v_b, grad_b))
    for params, ms, vs, gs in groups:
        for theta, m, v, g in zip(params, ms, vs, gs):
            if g.shape != theta.shape:
                raise ShapeMismatch(f"gradient shape {g.shape} != parameter shape {theta.shape}")
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * g * g
            theta -= s.lr * (m / c1) / (np.sqrt(v / c2) + s.eps)
    return p, s


# checkpoints


@dataclasses.dataclass
class Checkpoint:
    params: MlpParams
    adam: AdamState
    config: dict
    loss_curve: list = dataclasses.field(default_factory=list)


def _nested(arrs):
    return [a.tolist() for a in arrs]


def checkpoint_to_dict(ckpt: Checkpoint) -> dict:
    p, s, cfg = ckpt.params, ckpt.adam, ckpt.config
    return {
        "version": CHECKPOINT_VERSION,
        "space": cfg.get("space"),
        "variant": cfg.get("variant"),
        "layer_sizes": p.layer_sizes,
        "activation": p.activation,
        "time_embedding": p.time_embedding,
        "seed": cfg.get("seed"),
        "prng_id": PRNG_ID,
        "adam": {"beta1": s.beta1, "beta2": s.beta2, "eps": s.eps, "lr": s.lr, "step": s.step},
        "weights": _nested(p.weights),
        "biases": _nested(p.biases),
        "moments": {
            "first": {"weights": _nested(s.m_w), "biases": _nested(s.m_b)},
            "second": {"weights": _nested(s.v_w), "biases": _nested(s.v_b)},
        },
        "config": cfg,
        "loss_curve": [float(v) for v in ckpt.loss_curve],
    }


def checkpoint_from_dict(d) -> Checkpoint:
    if not isinstance(d, dict) or "version" not in d:
        raise CorruptCheckpoint("missing version field")
    if d["version"] != CHECKPOINT_VERSION:
        raise VersionMismatch(f"checkpoint version {d['version']} != {CHECKPOINT_VERSION}")
    try:
        arr = lambda xs: [np.asarray(x, dtype=np.float64) for x in xs]  # noqa: E731
        p = MlpParams(arr(d["weights"]), arr(d["biases"]), d["activation"], d["time_embedding"])
        p.check()
        if p.layer_sizes != list(d["layer_sizes"]):
            raise CorruptCheckpoint("layer_sizes disagree with stored weights")
        mo = d["moments"]
        a = d["adam"]
        s = AdamState(arr(mo["first"]["weights"]), arr(mo["first"]["biases"]),
                      arr(mo["second"]["weights"]), arr(mo["second"]["biases"]),
                      int(a["step"]), float(a["beta1"]), float(a["beta2"]), float(a["eps"]), float(a["lr"]))
        for ms, ps in ((s.m_w, p.weights), (s.v_w, p.weights), (s.m_b, p.biases), (s.v_b, p.biases)):
            if [m.shape for m in ms] != [q.shape for q in ps]:
                raise CorruptCheckpoint("moment buffers are not congruent with parameters")
        return Checkpoint(p, s, dict(d.get("config") or {}), list(d.get("loss_curve") or []))
    except (KeyError, TypeError, ValueError, InvalidShape) as exc:
        raise CorruptCheckpoint(str(exc)) from exc


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as f:
        json.dump(checkpoint_to_dict(ckpt), f)
    os.replace(tmp, path)


def load_checkpoint(path) -> Checkpoint:
    with open(path) as f:
        text = f.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptCheckpoint(f"{path}: {exc}") from exc
    return checkpoint_from_dict(d)
