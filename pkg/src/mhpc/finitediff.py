"""Central finite-difference helpers for building model derivatives.

These serve the model builders (the default derivative mode is central
differences over the state). Test oracles keep their own independent
difference code.
"""

from __future__ import annotations

import numpy as np

DEFAULT_STEP = 1e-6


def jacobian(f, x, eps: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference Jacobian of ``f`` at ``x`` (vector to vector)."""
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(np.asarray(f(x), dtype=float))
    J = np.empty((f0.shape[0], x.shape[0]))
    for j in range(x.shape[0]):
        xp = x.copy()
        xm = x.copy()
        xp[j] += eps
        xm[j] -= eps
        J[:, j] = (np.atleast_1d(f(xp)) - np.atleast_1d(f(xm))) / (2.0 * eps)
    return J


def gradient(f, x, eps: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty(x.shape[0])
    for j in range(x.shape[0]):
        xp = x.copy()
        xm = x.copy()
        xp[j] += eps
        xm[j] -= eps
        g[j] = (float(f(xp)) - float(f(xm))) / (2.0 * eps)
    return g


def hessian(f, x, eps: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of a scalar function (symmetrized)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    H = np.empty((n, n))
    f0 = float(f(x))
    for i in range(n):
        for j in range(i, n):
            xpp = x.copy(); xpm = x.copy(); xmp = x.copy(); xmm = x.copy()
            xpp[i] += eps; xpp[j] += eps
            xpm[i] += eps; xpm[j] -= eps
            xmp[i] -= eps; xmp[j] += eps
            xmm[i] -= eps; xmm[j] -= eps
            if i == j:
                H[i, i] = (float(f(xpp)) - 2.0 * f0 + float(f(xmm))) / (4.0 * eps**2)
            else:
                H[i, j] = (
                    float(f(xpp)) - float(f(xpm)) - float(f(xmp)) + float(f(xmm))
                ) / (4.0 * eps**2)
                H[j, i] = H[i, j]
    return H
