"""Closed-form exponential and logarithm for SL(2, R) and SO(3).

Group and algebra elements are plain float64 arrays of shape ``(..., n, n)``.
The :class:`MatrixGroup` objects :data:`SL2` and :data:`SO3` bundle the
per-group operations behind one interface so that the datagen and flowmatch
layers never branch on the group.
"""

from __future__ import annotations

import numpy as np

from . import matcore
from .errors import InvalidAlgebraElement, OutsideExpImage

ALG_TOL = 1e-10
GROUP_TOL = 1e-9
SERIES_EPS = 1e-8
SO3_PI_SWITCH = np.pi - 1e-6
EXP_IMAGE_MARGIN = 1e-12


def _mat(x, n):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-2:] != (n, n):
        raise ValueError(f"expected (..., {n}, {n}) array, got {x.shape}")
    return x


# SL(2, R)


def check_sl2_algebra(x) -> np.ndarray:
    x = _mat(x, 2)
    if np.any(np.abs(matcore.trace(x)) > ALG_TOL):
        raise InvalidAlgebraElement("sl2 element must be traceless")
    return x


def _cosh_sinhc(s):
    """Return ``(cosh(sqrt s), sinh(sqrt s)/sqrt s)`` as entire functions of ``s``.

    Negative ``s`` gives the trigonometric branch ``cos``/``sinc``.
    """
    s = np.asarray(s, dtype=np.float64)
    c = np.empty_like(s)
    f = np.empty_like(s)
    small = np.abs(s) < SERIES_EPS
    pos = (s > 0) & ~small
    neg = (s < 0) & ~small
    c[small] = 1.0 + s[small] / 2.0 + s[small] ** 2 / 24.0
    f[small] = 1.0 + s[small] / 6.0 + s[small] ** 2 / 120.0
    r = np.sqrt(s[pos])
    c[pos] = np.cosh(r)
    f[pos] = np.sinh(r) / r
    r = np.sqrt(-s[neg])
    c[neg] = np.cos(r)
    f[neg] = np.sin(r) / r
    return c, f


def exp_sl2(x) -> np.ndarray:
    """Exponential of traceless 2x2 matrices via Cayley-Hamilton (``X^2 = -det(X) I``)."""
    x = check_sl2_algebra(x)
    s = -matcore.det(x)
    c, f = _cosh_sinhc(s)
    return c[..., None, None] * np.eye(2) + f[..., None, None] * x


def log_sl2(g) -> np.ndarray:
    """Principal logarithm on ``{trace > -2}``.

    Elliptic (|tr| < 2), parabolic (tr = 2) and hyperbolic (tr > 2) branches
    share the form ``f(tr) * (g - tr/2 I)`` with ``f = theta / sin(theta)``
    or ``theta / sinh(theta)``.
    """
    g = _mat(g, 2)
    tau = matcore.trace(g)
    if np.any(tau <= -2.0 + EXP_IMAGE_MARGIN):
        raise OutsideExpImage("trace <= -2: not in the image of exp")
    half = np.asarray(tau / 2.0)
    u = half - 1.0
    f = np.empty_like(half)
    small = np.abs(u) < SERIES_EPS
    hyp = (u > 0) & ~small
    ell = (u < 0) & ~small
    f[small] = 1.0 - u[small] / 3.0
    th = np.arccosh(half[hyp])
    f[hyp] = th / np.sinh(th)
    th = np.arccos(half[ell])
    f[ell] = th / np.sin(th)
    return f[..., None, None] * (g - half[..., None, None] * np.eye(2))


def encode_sl2(x) -> np.ndarray:
    x = check_sl2_algebra(x)
    return np.stack([x[..., 0, 0], x[..., 0, 1], x[..., 1, 0]], axis=-1)


def decode_sl2(c) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    a, b, cc = c[..., 0], c[..., 1], c[..., 2]
    return np.stack([np.stack([a, b], -1), np.stack([cc, -a], -1)], axis=-2)


def project_sl2_algebra(m) -> np.ndarray:
    """Frobenius-orthogonal projection of an arbitrary 2x2 matrix onto sl2."""
    m = _mat(m, 2)
    a = 0.5 * (m[..., 0, 0] - m[..., 1, 1])
    # built from (a, b, c) so the trace is exactly zero
    return decode_sl2(np.stack([a, m[..., 0, 1], m[..., 1, 0]], axis=-1))


# SO(3)


def hat(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != 3:
        raise ValueError("hat expects 3-vectors")
    z = np.zeros(v.shape[:-1])
    x, y, w = v[..., 0], v[..., 1], v[..., 2]
    return np.stack(
        [
            np.stack([z, -w, y], -1),
            np.stack([w, z, -x], -1),
            np.stack([-y, x, z], -1),
        ],
        axis=-2,
    )


def check_so3_algebra(x) -> np.ndarray:
    x = _mat(x, 3)
    if np.any(matcore.frob_norm(x + np.swapaxes(x, -1, -2)) > ALG_TOL):
        raise InvalidAlgebraElement("so3 element must be skew-symmetric")
    return x


def vee(x) -> np.ndarray:
    x = check_so3_algebra(x)
    return np.stack([x[..., 2, 1], x[..., 0, 2], x[..., 1, 0]], axis=-1)


def _vee_unchecked(x):
    return np.stack([x[..., 2, 1], x[..., 0, 2], x[..., 1, 0]], axis=-1)


def exp_so3(x) -> np.ndarray:
    """Rodrigues' formula ``I + sin(t) K + (1 - cos(t)) K^2`` with ``K = hat(w / |w|)``."""
    x = check_so3_algebra(x)
    w = _vee_unchecked(x)
    theta = matcore.norm(w)
    small = theta < SERIES_EPS
    safe = np.where(small, 1.0, theta)
    # coefficients on hat(w) and hat(w)^2, so no division of w is needed
    a = np.where(small, 1.0, np.sin(safe) / safe)
    b = np.where(small, 0.5, (1.0 - np.cos(safe)) / safe**2)
    x2 = x @ x
    return np.eye(3) + a[..., None, None] * x + b[..., None, None] * x2


def log_so3(g) -> np.ndarray:
    """Logarithm with rotation angle in ``[0, pi]``.

    Near ``theta = pi`` the axis is recovered from the symmetric part, where
    the skew part carries no information.
    """
    g = _mat(g, 3)
    batch = g.shape[:-2]
    g = g.reshape(-1, 3, 3)
    skew = 0.5 * (g - np.swapaxes(g, -1, -2))
    sv = _vee_unchecked(skew)
    sin_t = matcore.norm(sv)
    cos_t = (matcore.trace(g) - 1.0) / 2.0
    theta = np.arctan2(sin_t, cos_t)
    out = np.empty_like(g)

    small = theta < SERIES_EPS
    near_pi = theta >= SO3_PI_SWITCH
    reg = ~small & ~near_pi
    out[small] = skew[small]
    out[reg] = (theta[reg] / sin_t[reg])[:, None, None] * skew[reg]

    if np.any(near_pi):
        gs = g[near_pi]
        th = theta[near_pi]
        ct = cos_t[near_pi]
        sym = 0.5 * (gs + np.swapaxes(gs, -1, -2))
        nnt = (sym - ct[:, None, None] * np.eye(3)) / (1.0 - ct)[:, None, None]
        k = np.argmax(np.diagonal(nnt, axis1=-2, axis2=-1), axis=-1)
        rows = np.arange(len(k))
        col = nnt[rows, :, k]
        axis = col / np.sqrt(np.maximum(col[rows, k], 1e-300))[:, None]
        axis = axis / matcore.norm(axis)[:, None]
        sign = np.where(np.sum(axis * sv[near_pi], axis=-1) < 0, -1.0, 1.0)
        out[near_pi] = hat(sign[:, None] * th[:, None] * axis)
    return out.reshape(batch + (3, 3))


def encode_so3(x) -> np.ndarray:
    return vee(x)


def decode_so3(c) -> np.ndarray:
    return hat(c)


def project_so3_algebra(m) -> np.ndarray:
    m = _mat(m, 3)
    return 0.5 * (m - np.swapaxes(m, -1, -2))


class MatrixGroup:
    """A matrix Lie group with closed-form exp/log and a coordinate chart of its algebra."""

    def __init__(self, name, n, dim, exp, log, encode, decode, project_algebra, to_group, is_member):
        self.name = name
        self.n = n
        self.dim = dim
        self.exp = exp
        self.log = log
        self.encode = encode
        self.decode = decode
        self.project_algebra = project_algebra
        # (ambient matrices) -> (group elements, ok mask)
        self.to_group = to_group
        self.is_member = is_member

    @property
    def ambient_dim(self) -> int:
        return self.n * self.n

    def __repr__(self):
        return f"MatrixGroup({self.name})"


def _sl2_to_group(a):
    d = matcore.det(a)
    ok = (d > 1e-10) & np.all(np.isfinite(a), axis=(-2, -1))
    scale = np.sqrt(np.where(ok, d, 1.0))
    g = np.where(ok[..., None, None], a / scale[..., None, None], np.eye(2))
    return g, ok


def is_sl2(g, tol=GROUP_TOL) -> np.ndarray:
    return np.abs(matcore.det(g) - 1.0) <= tol


def is_so3(g, tol=GROUP_TOL) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    orth = matcore.frob_norm(np.swapaxes(g, -1, -2) @ g - np.eye(3)) <= tol
    return orth & (np.abs(matcore.det(g) - 1.0) <= tol)


SL2 = MatrixGroup("SL2", 2, 3, exp_sl2, log_sl2, encode_sl2, decode_sl2,
                  project_sl2_algebra, _sl2_to_group, is_sl2)
SO3 = MatrixGroup("SO3", 3, 3, exp_so3, log_so3, encode_so3, decode_so3,
                  project_so3_algebra, matcore.polar_newton, is_so3)

GROUPS = {"SL2": SL2, "SO3": SO3}
