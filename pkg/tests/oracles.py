"""Independent reference computations used only by the tests."""

import numpy as np


def matmul_loops(a, b):
    n = len(a)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(n):
                s += a[i][k] * b[k][j]
            out[i, j] = s
    return out


def expm_series(x, terms=30):
    """Truncated Taylor series with scaling and squaring (norm scaled below 0.5)."""
    x = np.asarray(x, dtype=np.float64)
    nrm = np.linalg.norm(x)
    s = max(0, int(np.ceil(np.log2(nrm / 0.5)))) if nrm > 0.5 else 0
    y = x / 2**s
    out = np.eye(len(x))
    term = np.eye(len(x))
    for k in range(1, terms + 1):
        term = term @ y / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def cross(v, w):
    return np.array([v[1] * w[2] - v[2] * w[1], v[2] * w[0] - v[0] * w[2], v[0] * w[1] - v[1] * w[0]])


def mlp_forward_loops(weights, biases, t, x):
    """Per-sample forward pass written independently of homfm.net."""
    h = list(x) + [t]
    for li, (w, b) in enumerate(zip(weights, biases)):
        z = [sum(w[i][j] * h[j] for j in range(len(h))) + b[i] for i in range(len(b))]
        if li < len(weights) - 1:
            z = [v / (1.0 + np.exp(-v)) for v in z]
        h = z
    return np.array(h)


def random_sl2(rng, n, scale=1.0):
    """SL(2) elements from products of exp; filtered to trace > -2 by the caller."""
    a = rng.normal(scale=scale, size=(n, 2, 2))
    d = np.linalg.det(a)
    a[d < 0, :, 0] *= -1
    return a / np.sqrt(np.abs(np.linalg.det(a)))[:, None, None]


def random_rotation(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, 3, 3)))
    q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[:, None, :]
    q[np.linalg.det(q) < 0, :, 0] *= -1
    return q


def fd_gradient_error(p, t, x, y, h=1e-5):
    """Worst relative error of ``net.backward`` against central differences, over every parameter."""
    from homfm import net

    _, gw, gb = net.backward(p, t, x, y)
    worst = 0.0
    for params, grads in ((p.weights, gw), (p.biases, gb)):
        for theta, g in zip(params, grads):
            it = np.nditer(theta, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                old = theta[idx]
                theta[idx] = old + h
                lp = net.backward(p, t, x, y)[0]
                theta[idx] = old - h
                lm = net.backward(p, t, x, y)[0]
                theta[idx] = old
                fd = (lp - lm) / (2 * h)
                denom = max(abs(fd), abs(g[idx]), 1e-6)
                worst = max(worst, abs(fd - g[idx]) / denom)
    return worst
