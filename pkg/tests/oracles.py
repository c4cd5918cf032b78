"""Independent reference implementations used by the tests."""

import numpy as np


def kaczmarz(A, b, rows, x0=None):
    """Plain randomized Kaczmarz along a fixed row sequence."""
    x = np.zeros(A.shape[1]) if x0 is None else np.array(x0, dtype=float)
    out = [x.copy()]
    for i in rows:
        a = A[i]
        x = x - (a @ x - b[i]) / (a @ a) * a
        out.append(x.copy())
    return out


def majorizer(alpha, beta, d, dz, x, xhat, gamma):
    """h(alpha, beta) = |alpha d - beta dz|^2 / (2 gamma) - <x - xhat, alpha d - beta dz>."""
    v = np.multiply.outer(alpha, d) - np.multiply.outer(beta, dz)
    return 0.5 / gamma * np.sum(v * v, axis=-1) - v @ (x - xhat)


def grid_minimum(h, center, scale, size=201, rounds=6):
    """Minimum of ``h(a, b)`` over a grid refined around the best point each round."""
    ca, cb = center
    sa, sb = scale
    best = np.inf
    for _ in range(rounds):
        a = ca + sa * np.linspace(-1, 1, size)
        b = cb + sb * np.linspace(-1, 1, size)
        AA, BB = np.meshgrid(a, b, indexing="ij")
        vals = h(AA, BB)
        k = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[k] < best:
            best = float(vals[k])
            ca, cb = AA[k], BB[k]
        sa, sb = sa * 4 / size, sb * 4 / size
    return best


def cgne_reference(A, b, x1, iters):
    """Textbook CG on A A^T y = b - A x1 written in x-space (Craig / CGNE)."""
    x = np.array(x1, dtype=float)
    r = b - A @ x
    p = A.T @ r
    out = [x.copy()]
    for _ in range(iters):
        rr = r @ r
        if rr == 0 or p @ p == 0:
            break
        a = rr / (p @ p)
        x = x + a * p
        r = r - a * (A @ p)
        p = A.T @ r + (r @ r) / rr * p
        out.append(x.copy())
    return out
