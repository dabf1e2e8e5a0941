"""Conditional flow matching on a chosen representation of the lifted data.

The three variants differ only in the representation handed to the network:
flattened group matrices (``ambient``), flattened algebra matrices
(``algmatrix``) or algebra coordinates (``coords``). Noise is always drawn in
algebra coordinates and mapped into the representation, so every variant
transports the same noise distribution.
"""

from __future__ import annotations

import dataclasses
import logging
import time

import numpy as np

from . import net
from .datagen import (
    CheckerboardSpec,
    Representation,
    coords_to_rep,
    derive_seed,
    lift,
    make_rng,
    rep_dim,
    sample_checkerboard,
    sample_noise_coords,
    unlift,
)
from .errors import DivergedTraining, InvalidSpec, LengthMismatch, NonFiniteState
from .homspace import get_space

log = logging.getLogger(__name__)

LR_SCHEDULES = ("constant", "cosine")
PAPER_SCALE = {"depth": 5, "width": 512}

# stream tags for derive_seed
_INIT, _DATA, _NOISE, _PATH, _SAMPLE = range(5)


@dataclasses.dataclass
class TrainConfig:
    space: str = "H2"
    variant: str = "coords"
    checkerboard: CheckerboardSpec | None = None
    noise_sigma: float = 1.0
    layer_sizes: list | None = None
    depth: int = 3
    width: int = 128
    activation: str = "silu"
    time_embedding: str = "none"
    lr: float = 2e-2
    lr_schedule: str = "cosine"
    batch_size: int = 512
    total_steps: int = 4000
    seed: int = 0

    def __post_init__(self):
        self.space = get_space(self.space).name
        self.variant = Representation.parse(self.variant).value
        if self.checkerboard is None:
            self.checkerboard = CheckerboardSpec.default(self.space)
        elif isinstance(self.checkerboard, dict):
            self.checkerboard = CheckerboardSpec.from_dict({"space": self.space, **self.checkerboard})
        if self.layer_sizes is None:
            self.layer_sizes = net.mlp_sizes(self.data_dim, self.depth, self.width, self.time_embedding)
        self.layer_sizes = [int(s) for s in self.layer_sizes]
        self.validate()

    @property
    def data_dim(self) -> int:
        return rep_dim(self.space, self.variant)

    def validate(self):
        if self.checkerboard.space != self.space:
            raise InvalidSpec("checkerboard space differs from config space")
        need_in = self.data_dim + net.n_time_features(self.time_embedding)
        if self.layer_sizes[0] != need_in or self.layer_sizes[-1] != self.data_dim:
            raise InvalidSpec(
                f"{self.space}/{self.variant} needs layer sizes [{need_in}, ..., {self.data_dim}], "
                f"got {self.layer_sizes}"
            )
        if self.noise_sigma <= 0 or self.lr <= 0:
            raise InvalidSpec("noise_sigma and lr must be positive")
        if self.batch_size < 1 or self.total_steps < 0:
            raise InvalidSpec("batch_size must be >= 1 and total_steps >= 0")
        if self.lr_schedule not in LR_SCHEDULES:
            raise InvalidSpec(f"lr_schedule must be one of {LR_SCHEDULES}")
        if self.activation not in net.ACTIVATIONS or self.time_embedding not in net.TIME_EMBEDDINGS:
            raise InvalidSpec("unknown activation or time embedding")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["checkerboard"] = self.checkerboard.to_dict()
        return d

    @classmethod
    def from_dict(cls, d) -> "TrainConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidSpec(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


@dataclasses.dataclass
class PathBatch:
    """Points on straight paths ``x_t = (1 - t) x0 + t x1`` with velocity ``x1 - x0``."""

    t: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    xt: np.ndarray
    target: np.ndarray


def make_batch(x0, x1, seed) -> PathBatch:
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    if x0.shape != x1.shape:
        raise LengthMismatch(f"noise {x0.shape} and data {x1.shape} differ")
    rng = make_rng(seed)
    t = rng.random(len(x0))
    x1 = x1[rng.permutation(len(x1))]
    xt = (1.0 - t)[:, None] * x0 + t[:, None] * x1
    return PathBatch(t, x0, x1, xt, x1 - x0)


def noise(cfg: TrainConfig, n: int, seed) -> np.ndarray:
    space = get_space(cfg.space)
    coords = sample_noise_coords(space.group.dim, cfg.noise_sigma, n, seed)
    return coords_to_rep(coords, space, cfg.variant)


def train(cfg: TrainConfig, progress_every: int = 0) -> net.Checkpoint:
    params = net.init(cfg.layer_sizes, derive_seed(cfg.seed, _INIT), cfg.activation, cfg.time_embedding)
    state = net.AdamState.zeros_like(params, lr=cfg.lr)
    data_rng = make_rng(derive_seed(cfg.seed, _DATA))
    noise_rng = make_rng(derive_seed(cfg.seed, _NOISE))
    path_rng = make_rng(derive_seed(cfg.seed, _PATH))
    losses = []
    t0 = time.perf_counter()
    for step in range(cfg.total_steps):
        state.lr = learning_rate(cfg, step)
        pts = sample_checkerboard(cfg.checkerboard, cfg.batch_size, data_rng)
        x1 = lift(pts, cfg.space, cfg.variant)
        x0 = noise(cfg, cfg.batch_size, noise_rng)
        b = make_batch(x0, x1, path_rng)
        loss, gw, gb = net.backward(params, b.t, b.xt, b.target)
        if not np.isfinite(loss):
            raise DivergedTraining(f"non-finite loss at step {step}")
        net.adam_step(params, state, gw, gb)
        losses.append(loss)
        if progress_every and (step + 1) % progress_every == 0:
            log.info("step %d loss %.5f (%.1fs)", step + 1, loss, time.perf_counter() - t0)
    return net.Checkpoint(params, state, cfg.to_dict(), losses)


def learning_rate(cfg: TrainConfig, step: int) -> float:
    if cfg.lr_schedule == "constant":
        return cfg.lr
    return 0.5 * cfg.lr * (1.0 + np.cos(np.pi * step / max(cfg.total_steps, 1)))


def config_of(ckpt: net.Checkpoint) -> TrainConfig:
    return TrainConfig.from_dict(ckpt.config)


def midpoint_integrate(field, x0, steps: int) -> np.ndarray:
    """Explicit midpoint rule on ``[0, 1]``; ``field(t, x)`` may be batched."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x = np.array(x0, dtype=np.float64)
    h = 1.0 / steps
    for k in range(steps):
        t = k * h
        x_mid = x + 0.5 * h * field(t, x)
        x = x + h * field(t + 0.5 * h, x_mid)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"non-finite state at step {k}")
    return x


@dataclasses.dataclass
class SampleResult:
    points: np.ndarray
    rejected: int
    space: str
    variant: str


def sample(ckpt: net.Checkpoint, n: int, steps: int = 100, seed=0, raw: bool = False) -> SampleResult:
    cfg = config_of(ckpt)
    x0 = noise(cfg, n, derive_seed(seed, _SAMPLE))
    params = ckpt.params
    x1 = midpoint_integrate(lambda t, x: net.forward(params, t, x), x0, steps)
    pts, rejected = unlift(x1, cfg.space, cfg.variant, raw=raw)
    return SampleResult(pts, rejected, cfg.space, cfg.variant)
