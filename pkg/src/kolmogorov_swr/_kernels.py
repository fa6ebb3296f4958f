"""Compiled inner loops. Arrays are (rows, columns) with columns contiguous."""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def tridiag_matvec(diag, off, y, scale, out):
    n, k = y.shape
    for j in range(k):
        out[0, j] = scale * diag[0] * y[0, j]
    if n > 1:
        for j in range(k):
            out[0, j] += scale * off[0] * y[1, j]
    for i in range(1, n - 1):
        a, b, c = scale * off[i - 1], scale * diag[i], scale * off[i]
        for j in range(k):
            out[i, j] = a * y[i - 1, j] + b * y[i, j] + c * y[i + 1, j]
    if n > 1:
        a, b = scale * off[n - 2], scale * diag[n - 1]
        for j in range(k):
            out[n - 1, j] = a * y[n - 2, j] + b * y[n - 1, j]
    return out


@numba.njit(cache=True, nogil=True)
def ldl_solve_inplace(d, l, b):
    """Overwrite ``b`` (n, k) with the solution of L D L^T x = b."""
    n, k = b.shape
    for i in range(1, n):
        li = l[i - 1]
        for j in range(k):
            b[i, j] -= li * b[i - 1, j]
    for i in range(n):
        inv = 1.0 / d[i]
        for j in range(k):
            b[i, j] *= inv
    for i in range(n - 2, -1, -1):
        li = l[i]
        for j in range(k):
            b[i, j] -= li * b[i + 1, j]
    return b


@numba.njit(cache=True, nogil=True)
def semi_lagrangian(u, w, upstream_right, out):
    n, k = u.shape
    for i in range(n):
        wi = w[i]
        if upstream_right[i]:
            for j in range(k - 1):
                out[i, j] = u[i, j] + wi * (u[i, j + 1] - u[i, j])
            out[i, k - 1] = u[i, k - 1] + wi * (u[i, 0] - u[i, k - 1])
        else:
            out[i, 0] = u[i, 0] + wi * (u[i, k - 1] - u[i, 0])
            for j in range(1, k):
                out[i, j] = u[i, j] + wi * (u[i, j - 1] - u[i, j])
    return out


def as_2d(a: np.ndarray) -> np.ndarray:
    return a.reshape(a.shape[0], -1)
