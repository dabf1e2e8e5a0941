"""Two-sample discrepancies and checkerboard occupancy on the quotient spaces."""

from __future__ import annotations

import dataclasses

import numpy as np

from .datagen import CheckerboardSpec, make_rng
from .errors import InvalidSpec, SpaceMismatch

MAX_N = 20_000
_CHUNK = 1024


def hyperbolic_distance(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    d2 = np.sum((p - q) ** 2, axis=-1)
    return np.arccosh(1.0 + d2 / (2.0 * p[..., 1] * q[..., 1]))


def spherical_distance(p, q) -> np.ndarray:
    """Great-circle distance, via ``2 atan2(|p - q|, |p + q|)`` to stay exact at ``p = q``."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    a = np.sqrt(np.sum((p - q) ** 2, axis=-1))
    b = np.sqrt(np.sum((p + q) ** 2, axis=-1))
    return 2.0 * np.arctan2(a, b)


def euclidean_distance(p, q) -> np.ndarray:
    return np.sqrt(np.sum((np.asarray(p) - np.asarray(q)) ** 2, axis=-1))


def space_of(points) -> str:
    points = np.asarray(points)
    if points.ndim != 2 or points.shape[1] not in (2, 3):
        raise SpaceMismatch(f"cannot infer space from shape {points.shape}")
    return "H2" if points.shape[1] == 2 else "S2"


def _ground(space, mode):
    if mode == "chart":
        return euclidean_distance
    if mode == "intrinsic":
        return hyperbolic_distance if space == "H2" else spherical_distance
    raise InvalidSpec(f"unknown distance mode {mode!r}")


def _check_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sa, sb = space_of(a), space_of(b)
    if sa != sb:
        raise SpaceMismatch(f"samples live on different spaces ({sa} vs {sb})")
    return a, b, sa


def _subsample(x, cap, rng):
    if len(x) <= cap:
        return x
    return x[np.sort(rng.choice(len(x), cap, replace=False))]


def mean_pairwise(a, b, dist) -> float:
    """Mean of ``dist(a_i, b_j)`` over all pairs, accumulated chunk by chunk in a fixed order."""
    total = 0.0
    for i in range(0, len(a), _CHUNK):
        total += float(np.sum(dist(a[i:i + _CHUNK, None, :], b[None, :, :])))
    return total / (len(a) * len(b))


def energy_distance(a, b, mode: str = "intrinsic", seed: int = 0, max_n: int = MAX_N) -> float:
    """``2 E d(X, Y) - E d(X, X') - E d(Y, Y')`` between the two empirical measures.

    Within-sample means include the zero diagonal, so the value is the energy
    distance of the empirical distributions: nonnegative and exactly 0 when
    ``a`` and ``b`` are the same multiset.
    """
    a, b, space = _check_pair(a, b)
    if len(a) < 1 or len(b) < 1:
        raise InvalidSpec("energy distance needs non-empty samples")
    rng = make_rng(seed)
    a = _subsample(a, max_n, rng)
    b = _subsample(b, max_n, rng)
    dist = _ground(space, mode)
    cross = mean_pairwise(a, b, dist)
    val = 2.0 * cross - mean_pairwise(a, a, dist) - mean_pairwise(b, b, dist)
    return max(val, 0.0)


def _directions(dim, n_proj, rng):
    u = rng.standard_normal((n_proj, dim))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def wasserstein_1d(x, y) -> float:
    """Exact 2-Wasserstein distance between equal-size 1D samples."""
    return float(np.sqrt(np.mean((np.sort(x) - np.sort(y)) ** 2)))


def sliced_wasserstein(a, b, n_proj: int = 256, seed: int = 0) -> float:
    """Mean over random unit directions of the 1D W2 distance between projections.

    H2 points are projected in the ``(x, y)`` chart, S2 points in ambient R^3.
    """
    a, b, _ = _check_pair(a, b)
    if n_proj < 1:
        raise InvalidSpec("n_proj must be >= 1")
    rng = make_rng(seed)
    m = min(len(a), len(b))
    a = _subsample(a, m, rng)
    b = _subsample(b, m, rng)
    u = _directions(a.shape[1], n_proj, rng)
    pa = np.sort(a @ u.T, axis=0)
    pb = np.sort(b @ u.T, axis=0)
    return float(np.mean(np.sqrt(np.mean((pa - pb) ** 2, axis=0))))


@dataclasses.dataclass
class Occupancy:
    counts: np.ndarray  # (n_u, n_v) samples per cell inside the domain
    leakage: float  # fraction in unpopulated cells or outside the domain
    n: int


def cell_occupancy(samples, spec: CheckerboardSpec) -> Occupancy:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or len(samples) == 0:
        raise InvalidSpec("occupancy needs a non-empty (n, d) sample array")
    if space_of(samples) != spec.space:
        raise InvalidSpec(f"samples are not on {spec.space}")
    i, j, inside = spec.cell_index(samples)
    counts = np.zeros((spec.n_u, spec.n_v), dtype=np.int64)
    np.add.at(counts, (i[inside], j[inside]), 1)
    good = int(counts[spec.populated()].sum())
    return Occupancy(counts, 1.0 - good / len(samples), len(samples))


@dataclasses.dataclass
class MetricReport:
    metric: str
    value: float
    n_a: int
    n_b: int
    mode: str
    seed: int
    space: str

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def evaluate(a, b, metric: str = "energy", mode: str = "intrinsic", seed: int = 0,
             n_proj: int = 256) -> MetricReport:
    a, b, space = _check_pair(a, b)
    if metric == "energy":
        value = energy_distance(a, b, mode=mode, seed=seed)
    elif metric == "swd":
        value = sliced_wasserstein(a, b, n_proj=n_proj, seed=seed)
        mode = "chart"
    else:
        raise InvalidSpec(f"unknown metric {metric!r}")
    return MetricReport(metric, value, len(a), len(b), mode, seed, space)
