"""Homogeneous spaces H = SL(2)/SO(2) and S^2 = SO(3)/SO(2).

Points of the upper half-plane are arrays ``(..., 2)`` holding ``(x, y)`` with
``y > 0``; sphere points are unit vectors ``(..., 3)``.
"""

from __future__ import annotations

import numpy as np

from . import liealg, matcore
from .errors import DegenerateDenominator, InvalidPoint, InvalidSpec, NonProjectable, NorthPoleExcluded

NORTH_POLE_TOL = 1e-8
STEREO_TOL = 1e-10
SOUTH_POLE_TOL = 1e-12
E3 = np.array([0.0, 0.0, 1.0])


def _points(p, dim):
    p = np.asarray(p, dtype=np.float64)
    if p.shape[-1] != dim:
        raise InvalidPoint(f"expected points of dimension {dim}, got shape {p.shape}")
    return p


def check_h2(p) -> np.ndarray:
    p = _points(p, 2)
    if not np.all(np.isfinite(p)) or np.any(p[..., 1] <= 0):
        raise InvalidPoint("upper half-plane points need finite coordinates and y > 0")
    return p


def check_s2(p, tol=STEREO_TOL) -> np.ndarray:
    p = _points(p, 3)
    if np.any(np.abs(matcore.norm(p) - 1.0) > tol):
        raise InvalidPoint("sphere points must have unit norm")
    return p


# upper half-plane


def mobius_act(g, p) -> np.ndarray:
    """``z -> (a z + b) / (c z + d)`` on ``z = x + iy``."""
    g = np.asarray(g, dtype=np.float64)
    p = check_h2(p)
    z = p[..., 0] + 1j * p[..., 1]
    den = g[..., 1, 0] * z + g[..., 1, 1]
    if np.any(np.abs(den) < 1e-14):
        raise DegenerateDenominator("|cz + d| < 1e-14")
    w = (g[..., 0, 0] * z + g[..., 0, 1]) / den
    return np.stack([w.real, w.imag], axis=-1)


def section_h2(p) -> np.ndarray:
    """Global section ``(x, y) -> [[sqrt y, x / sqrt y], [0, 1 / sqrt y]]``."""
    p = check_h2(p)
    x, y = p[..., 0], p[..., 1]
    r = np.sqrt(y)
    zero = np.zeros_like(x)
    return np.stack([np.stack([r, x / r], -1), np.stack([zero, 1.0 / r], -1)], axis=-2)


def project_sl2_to_h2(g) -> np.ndarray:
    """``g . i``; closed form avoids complex arithmetic."""
    g = np.asarray(g, dtype=np.float64)
    a, b, c, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
    den = c * c + d * d
    x = (a * c + b * d) / den
    y = (a * d - b * c) / den
    return np.stack([x, y], axis=-1)


def normalize_det_sl2(a) -> np.ndarray:
    """Rescale a 2x2 matrix with positive determinant onto SL(2)."""
    g, ok = liealg.SL2.to_group(np.asarray(a, dtype=np.float64))
    if not np.all(ok):
        raise NonProjectable("det <= 1e-10")
    return g


def so2_block(angle, n=2) -> np.ndarray:
    """Stabiliser rotations: SO(2) in SL(2) (n=2) or the z-axis rotations in SO(3) (n=3)."""
    angle = np.asarray(angle, dtype=np.float64)
    c, s = np.cos(angle), np.sin(angle)
    if n == 2:
        return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], axis=-2)
    z, o = np.zeros_like(c), np.ones_like(c)
    return np.stack(
        [np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], axis=-2
    )


# sphere


def section_s2(p) -> np.ndarray:
    """Rodrigues rotation taking ``e3`` to ``p`` about ``e3 x p``.

    The south pole (axis undefined) maps to the rotation by pi about ``e1``.
    """
    p = check_s2(p, tol=1e-9)
    p = p / matcore.norm(p)[..., None]
    if np.any(p[..., 2] > 1.0 - NORTH_POLE_TOL):
        raise NorthPoleExcluded("section is undefined at the north pole")
    k = np.cross(E3, p)
    sin_t = matcore.norm(k)
    theta = np.arctan2(sin_t, p[..., 2])
    south = sin_t < SOUTH_POLE_TOL
    axis = np.where(south[..., None], np.array([1.0, 0.0, 0.0]), k / np.where(south, 1.0, sin_t)[..., None])
    K = liealg.hat(axis)
    return (
        np.eye(3)
        + np.sin(theta)[..., None, None] * K
        + (1.0 - np.cos(theta))[..., None, None] * (K @ K)
    )


def project_so3_to_s2(g) -> np.ndarray:
    return np.asarray(g, dtype=np.float64)[..., :, 2].copy()


def stereo(p) -> np.ndarray:
    """Stereographic projection from the north pole."""
    p = _points(p, 3)
    if np.any(p[..., 2] >= 1.0 - STEREO_TOL):
        raise NorthPoleExcluded("stereographic chart excludes the north pole")
    den = 1.0 - p[..., 2]
    return np.stack([p[..., 0] / den, p[..., 1] / den], axis=-1)


def stereo_inv(u) -> np.ndarray:
    u = _points(u, 2)
    r2 = np.sum(u * u, axis=-1)
    den = 1.0 + r2
    return np.stack([2 * u[..., 0] / den, 2 * u[..., 1] / den, (r2 - 1.0) / den], axis=-1)


class HomogeneousSpace:
    """G/H with a section and a projection, tied to a :class:`liealg.MatrixGroup`."""

    def __init__(self, name, group, point_dim, section, project, check, stabilizer, raw_project):
        self.name = name
        self.group = group
        self.point_dim = point_dim
        self.section = section
        self.project = project
        self.check = check
        # angle -> stabiliser element of the base point
        self.stabilizer = stabilizer
        # quotient map applied to ambient (off-group) matrices without group projection
        self.raw_project = raw_project

    def __repr__(self):
        return f"HomogeneousSpace({self.name})"


def _raw_h2(a):
    a = np.asarray(a, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = project_sl2_to_h2(a)
    ok = np.all(np.isfinite(p), axis=-1) & (p[..., 1] > 0)
    return p, ok


def _raw_s2(a):
    col = np.asarray(a, dtype=np.float64)[..., :, 2]
    n = matcore.norm(col)
    ok = np.isfinite(n) & (n > 1e-12)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = col / np.where(ok, n, 1.0)[..., None]
    return p, ok


H2 = HomogeneousSpace("H2", liealg.SL2, 2, section_h2, project_sl2_to_h2, check_h2,
                      lambda t: so2_block(t, 2), _raw_h2)
S2 = HomogeneousSpace("S2", liealg.SO3, 3, section_s2, project_so3_to_s2, check_s2,
                      lambda t: so2_block(t, 3), _raw_s2)

SPACES = {"H2": H2, "S2": S2}


def get_space(name) -> HomogeneousSpace:
    if isinstance(name, HomogeneousSpace):
        return name
    key = str(name).upper()
    if key not in SPACES:
        raise InvalidSpec(f"unknown space {name!r}; expected one of {sorted(SPACES)}")
    return SPACES[key]
