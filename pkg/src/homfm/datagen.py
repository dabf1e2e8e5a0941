"""Checkerboard targets, algebra-coordinate noise, and the lift/unlift pipeline.

All randomness goes through :func:`make_rng`, a numpy ``Generator`` backed by
PCG64. The algorithm id :data:`PRNG_ID` is written into every artifact.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .errors import InvalidSpec
from .homspace import get_space

PRNG_ID = "numpy.PCG64"
POLE_CAP = 1e-3


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if seed is None or int(seed) < 0 or int(seed) >= 2**64:
        raise InvalidSpec(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(seed: int, *path: int) -> np.random.SeedSequence:
    """Independent child stream identified by ``path`` (e.g. a purpose tag and an index)."""
    return np.random.SeedSequence([int(seed), *map(int, path)])


class Representation(str, enum.Enum):
    AMBIENT = "ambient"
    ALG_MATRIX = "algmatrix"
    ALG_COORDS = "coords"

    @classmethod
    def parse(cls, value) -> "Representation":
        if isinstance(value, cls):
            return value
        aliases = {"ambient": cls.AMBIENT, "algmatrix": cls.ALG_MATRIX, "matrix": cls.ALG_MATRIX,
                   "coords": cls.ALG_COORDS, "algcoords": cls.ALG_COORDS}
        key = str(value).lower()
        if key not in aliases:
            raise InvalidSpec(f"unknown representation {value!r}")
        return aliases[key]


def rep_dim(space, rep) -> int:
    space = get_space(space)
    rep = Representation.parse(rep)
    if rep is Representation.ALG_COORDS:
        return space.group.dim
    return space.group.ambient_dim


@dataclasses.dataclass(frozen=True)
class CheckerboardSpec:
    """Grid of ``n_u x n_v`` cells; cells with ``(i + j) % 2 == parity`` carry mass.

    For H2 the grid is over ``(x, y)``; for S2 over ``(longitude, z)``, which
    makes every cell area-uniform on the sphere.
    """

    space: str = "H2"
    n_u: int = 4
    n_v: int = 4
    u_range: tuple = (-2.0, 2.0)
    v_range: tuple = (0.2, 4.2)
    parity: int = 0

    def __post_init__(self):
        object.__setattr__(self, "space", get_space(self.space).name)
        object.__setattr__(self, "u_range", tuple(float(v) for v in self.u_range))
        object.__setattr__(self, "v_range", tuple(float(v) for v in self.v_range))
        self.validate()

    def validate(self):
        if int(self.n_u) < 1 or int(self.n_v) < 1:
            raise InvalidSpec("grid counts must be positive")
        if self.parity not in (0, 1):
            raise InvalidSpec("parity must be 0 or 1")
        (u0, u1), (v0, v1) = self.u_range, self.v_range
        if not (u0 < u1 and v0 < v1):
            raise InvalidSpec("ranges must be increasing")
        if self.space == "H2" and v0 <= 0:
            raise InvalidSpec("H2 checkerboard needs y0 > 0")
        if self.space == "S2":
            if u0 < -math.pi or u1 > math.pi:
                raise InvalidSpec("longitude range must lie in [-pi, pi]")
            if v0 < -1.0 or v1 > 1.0 - POLE_CAP:
                raise InvalidSpec(f"z range must lie in [-1, {1.0 - POLE_CAP}]")
        if self.n_u * self.n_v == 1 and self.parity == 1:
            raise InvalidSpec("no populated cells")

    @classmethod
    def default(cls, space) -> "CheckerboardSpec":
        if get_space(space).name == "H2":
            return cls("H2", 4, 4, (-2.0, 2.0), (0.2, 4.2), 0)
        return cls("S2", 8, 4, (-math.pi, math.pi), (-1.0, 0.995), 0)

    @classmethod
    def from_dict(cls, d) -> "CheckerboardSpec":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - fields
        if unknown:
            raise InvalidSpec(f"unknown checkerboard fields: {sorted(unknown)}")
        if "space" not in d:
            raise InvalidSpec("checkerboard spec needs a space")
        base = dataclasses.asdict(cls.default(d["space"]))
        base.update(d)
        return cls(**base)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["u_range"] = list(self.u_range)
        d["v_range"] = list(self.v_range)
        return d

    def populated(self) -> np.ndarray:
        i, j = np.meshgrid(np.arange(self.n_u), np.arange(self.n_v), indexing="ij")
        return (i + j) % 2 == self.parity

    def chart(self, points) -> np.ndarray:
        """Grid coordinates ``(u, v)`` of quotient points."""
        points = np.asarray(points, dtype=np.float64)
        if self.space == "H2":
            return points[..., :2]
        lon = np.arctan2(points[..., 1], points[..., 0])
        return np.stack([lon, points[..., 2]], axis=-1)

    def cell_index(self, points):
        """Return ``(i, j, inside)`` cell indices for each point."""
        uv = self.chart(points)
        (u0, u1), (v0, v1) = self.u_range, self.v_range
        fu = (uv[..., 0] - u0) / (u1 - u0) * self.n_u
        fv = (uv[..., 1] - v0) / (v1 - v0) * self.n_v
        inside = (fu >= 0) & (fu <= self.n_u) & (fv >= 0) & (fv <= self.n_v)
        i = np.clip(np.floor(fu), 0, self.n_u - 1).astype(np.int64)
        j = np.clip(np.floor(fv), 0, self.n_v - 1).astype(np.int64)
        return i, j, inside


def _from_chart(spec: CheckerboardSpec, u, v) -> np.ndarray:
    if spec.space == "H2":
        return np.stack([u, v], axis=-1)
    r = np.sqrt(np.clip(1.0 - v * v, 0.0, None))
    return np.stack([r * np.cos(u), r * np.sin(u), v], axis=-1)


def sample_checkerboard(spec: CheckerboardSpec, n: int, seed) -> np.ndarray:
    if n < 1:
        raise InvalidSpec("n must be >= 1")
    rng = make_rng(seed)
    cells = np.argwhere(spec.populated())
    pick = cells[rng.integers(0, len(cells), size=n)]
    (u0, u1), (v0, v1) = spec.u_range, spec.v_range
    du, dv = (u1 - u0) / spec.n_u, (v1 - v0) / spec.n_v
    offs = rng.random((n, 2))
    u = u0 + (pick[:, 0] + offs[:, 0]) * du
    v = v0 + (pick[:, 1] + offs[:, 1]) * dv
    return _from_chart(spec, u, v)


def sample_uniform_domain(spec: CheckerboardSpec, n: int, seed) -> np.ndarray:
    """Uniform over the whole grid domain, both colours."""
    rng = make_rng(seed)
    (u0, u1), (v0, v1) = spec.u_range, spec.v_range
    u = rng.uniform(u0, u1, n)
    v = rng.uniform(v0, v1, n)
    return _from_chart(spec, u, v)


def sample_noise_coords(dim: int, sigma: float, n: int, seed) -> np.ndarray:
    if sigma <= 0:
        raise InvalidSpec("sigma must be positive")
    if n < 1:
        raise InvalidSpec("n must be >= 1")
    return sigma * make_rng(seed).standard_normal((n, dim))


def coords_to_rep(coords, space, rep) -> np.ndarray:
    """Map algebra coordinates into a representation; used to share noise across variants."""
    space = get_space(space)
    rep = Representation.parse(rep)
    coords = np.asarray(coords, dtype=np.float64)
    if rep is Representation.ALG_COORDS:
        return coords.copy()
    x = space.group.decode(coords)
    if rep is Representation.ALG_MATRIX:
        return x.reshape(len(coords), -1)
    return space.group.exp(x).reshape(len(coords), -1)


def lift(points, space, rep) -> np.ndarray:
    space = get_space(space)
    rep = Representation.parse(rep)
    points = space.check(points)
    g = space.section(points)
    n = len(points)
    if rep is Representation.AMBIENT:
        return g.reshape(n, -1)
    x = space.group.log(g)
    if rep is Representation.ALG_MATRIX:
        return x.reshape(n, -1)
    return space.group.encode(x)


def unlift(vectors, space, rep, raw: bool = False):
    """Map representation vectors back to the quotient.

    Returns ``(points, rejected)``. Only the ambient representation can reject:
    samples whose matrix cannot be pulled back onto the group are dropped.
    With ``raw=True`` ambient matrices skip the group projection and the
    quotient map is applied directly (Moebius image / normalised third column).
    """
    space = get_space(space)
    rep = Representation.parse(rep)
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2 or v.shape[1] != rep_dim(space, rep):
        raise InvalidSpec(f"expected vectors of shape (n, {rep_dim(space, rep)}), got {v.shape}")
    grp = space.group
    if rep is Representation.ALG_COORDS:
        return space.project(grp.exp(grp.decode(v))), 0
    m = v.reshape(len(v), grp.n, grp.n)
    if rep is Representation.ALG_MATRIX:
        return space.project(grp.exp(grp.project_algebra(m))), 0
    if raw:
        p, ok = space.raw_project(m)
    else:
        g, ok = grp.to_group(m)
        p = space.project(g)
    return p[ok], int(np.count_nonzero(~ok))


__all__ = [
    "PRNG_ID", "CheckerboardSpec", "Representation", "make_rng", "derive_seed", "rep_dim",
    "sample_checkerboard", "sample_uniform_domain", "sample_noise_coords", "coords_to_rep",
    "lift", "unlift",
]
