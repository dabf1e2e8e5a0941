"""Small fixed-size linear algebra on 2x2 / 3x3 matrices and 2-/3-vectors.

Every function accepts a single matrix of shape ``(n, n)`` or a stack of
shape ``(..., n, n)`` and works in float64.
"""

from __future__ import annotations

import numpy as np

from .errors import NonProjectable, SingularMatrix

SINGULAR_TOL = 1e-14
POLAR_TOL = 1e-10
POLAR_MAX_ITER = 50


def _as_square(a, name="a"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] not in (2, 3):
        raise ValueError(f"{name} must have shape (..., 2, 2) or (..., 3, 3), got {a.shape}")
    return a


def eye(n: int) -> np.ndarray:
    return np.eye(n)


def matmul(a, b) -> np.ndarray:
    return np.matmul(_as_square(a), _as_square(b, "b"))


def transpose(a) -> np.ndarray:
    return np.swapaxes(_as_square(a), -1, -2)


def trace(a) -> np.ndarray:
    return np.trace(_as_square(a), axis1=-2, axis2=-1)


def frob_norm(a) -> np.ndarray:
    return np.sqrt(np.sum(np.square(_as_square(a)), axis=(-2, -1)))


def det(a) -> np.ndarray:
    a = _as_square(a)
    if a.shape[-1] == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return (
        a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
        - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
        + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
    )


def adjugate(a) -> np.ndarray:
    a = _as_square(a)
    if a.shape[-1] == 2:
        out = np.empty_like(a)
        out[..., 0, 0] = a[..., 1, 1]
        out[..., 0, 1] = -a[..., 0, 1]
        out[..., 1, 0] = -a[..., 1, 0]
        out[..., 1, 1] = a[..., 0, 0]
        return out
    # cofactor transpose: columns of adj are cross products of rows
    r0, r1, r2 = a[..., 0, :], a[..., 1, :], a[..., 2, :]
    return np.stack([np.cross(r1, r2), np.cross(r2, r0), np.cross(r0, r1)], axis=-1)


def inverse(a) -> np.ndarray:
    """Closed-form inverse via the adjugate; raises SingularMatrix if any |det| <= 1e-14."""
    a = _as_square(a)
    d = det(a)
    if np.any(np.abs(d) <= SINGULAR_TOL):
        raise SingularMatrix(f"|det| <= {SINGULAR_TOL}")
    return adjugate(a) / d[..., None, None]


def norm(v) -> np.ndarray:
    return np.sqrt(np.sum(np.square(np.asarray(v, dtype=np.float64)), axis=-1))


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = norm(v)
    if np.any(n == 0):
        raise ValueError("cannot normalize a zero vector")
    return v / n[..., None]


def _orthogonality_defect(q) -> np.ndarray:
    return frob_norm(np.swapaxes(q, -1, -2) @ q - np.eye(q.shape[-1]))


def polar_newton(a, tol: float = POLAR_TOL, max_iter: int = POLAR_MAX_ITER):
    """Batched Newton polar iteration ``Q <- (Q + Q^-T) / 2``.

    Returns ``(q, ok)`` where ``ok`` flags entries with positive determinant
    whose iteration converged. Rejected entries hold the identity.
    """
    a = _as_square(a)
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    q = a.reshape(-1, n, n).copy()
    ok = (det(q) > 0) & np.all(np.isfinite(q), axis=(-2, -1))
    q[~ok] = np.eye(n)
    active = ok.copy()
    for _ in range(max_iter):
        if not active.any():
            break
        qa = q[active]
        d = det(qa)
        # rows that collapsed to singular cannot be iterated further
        good = np.abs(d) > SINGULAR_TOL
        step = np.where(good[:, None, None], 0.5 * (qa + np.swapaxes(adjugate(qa), -1, -2) / np.where(good, d, 1.0)[:, None, None]), qa)
        q[active] = step
        idx = np.flatnonzero(active)
        ok[idx[~good]] = False
        done = _orthogonality_defect(step) <= tol
        active[idx[done | ~good]] = False
    ok &= ~active
    ok &= np.abs(det(q) - 1.0) <= 1e-9
    q[~ok] = np.eye(n)
    return q.reshape(batch_shape + (n, n)), ok.reshape(batch_shape)


def polar_project_so3(a) -> np.ndarray:
    """Nearest rotation to ``a`` in Frobenius norm.

    Raises NonProjectable if any input has ``det <= 0`` or fails to converge.
    """
    a = _as_square(a)
    if a.shape[-1] != 3:
        raise ValueError("polar_project_so3 expects 3x3 matrices")
    q, ok = polar_newton(a)
    if not np.all(ok):
        raise NonProjectable("det <= 0 or polar iteration did not converge")
    return q
