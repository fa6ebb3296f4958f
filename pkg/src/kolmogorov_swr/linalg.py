"""
Linear finite elements in the velocity variable and symmetric tridiagonal solves.

Matrices are stored by their main diagonal and their (shared) off-diagonal.
Mass and stiffness entries use the closed-form integrals of piecewise-linear
hat functions on a uniform mesh:

    M = hv/6 * tridiag(1, 4, 1)    (boundary diagonal hv/3)
    S = 1/hv * tridiag(-1, 2, -1)  (boundary diagonal 1/hv)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import as_2d, ldl_solve_inplace, tridiag_matvec

PIVOT_FLOOR = 1e-300


class NotPositiveDefiniteError(ArithmeticError):
    """Raised when an LDL^T pivot collapses, i.e. the matrix is not SPD."""


@dataclass(frozen=True)
class TriDiagSystem:
    """Symmetric tridiagonal matrix given by ``diag`` (n) and ``off`` (n-1)."""

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=float)
        off = np.array(self.off, dtype=float)
        if diag.ndim != 1 or off.ndim != 1 or off.size != max(diag.size - 1, 0):
            raise ValueError(f"inconsistent tridiagonal shapes {diag.shape}, {off.shape}")
        diag.flags.writeable = False
        off.flags.writeable = False
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "off", off)

    @property
    def n(self) -> int:
        return self.diag.size

    def __add__(self, other: TriDiagSystem) -> TriDiagSystem:
        return TriDiagSystem(self.diag + other.diag, self.off + other.off)

    def scaled(self, factor: float) -> TriDiagSystem:
        return TriDiagSystem(factor * self.diag, factor * self.off)

    def with_diagonal_bump(self, index: int, amount: float) -> TriDiagSystem:
        """Return a copy with ``amount`` added to one diagonal entry."""
        diag = self.diag.copy()
        diag[index] += amount
        return TriDiagSystem(diag, self.off)

    def submatrix(self, start: int, stop: int) -> TriDiagSystem:
        """Principal submatrix on rows/cols ``start:stop``."""
        return TriDiagSystem(self.diag[start:stop], self.off[start:max(stop - 1, start)])

    def matvec(self, y: np.ndarray) -> np.ndarray:
        """Product with ``y`` of shape (n,) or (n, k); the first axis is contracted."""
        return self.scaled_matvec(y, 1.0)

    def scaled_matvec(self, y: np.ndarray, scale: float) -> np.ndarray:
        y = np.ascontiguousarray(y, dtype=float)
        out = np.empty_like(y)
        tridiag_matvec(self.diag, self.off, as_2d(y), scale, as_2d(out))
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def factor(self) -> TriDiagFactor:
        return TriDiagFactor.from_system(self)


@dataclass(frozen=True)
class TriDiagFactor:
    """LDL^T factorization: ``d`` holds D, ``l`` the unit-lower subdiagonal of L.

    The factors are read-only, so one factorization can serve any number of
    concurrent solves; each solve allocates its own output.
    """

    d: np.ndarray
    l: np.ndarray

    @classmethod
    def from_system(cls, sys: TriDiagSystem) -> TriDiagFactor:
        n = sys.n
        d = np.empty(n)
        l = np.empty(max(n - 1, 0))
        d[0] = sys.diag[0]
        for i in range(1, n):
            if not d[i - 1] > PIVOT_FLOOR:
                raise NotPositiveDefiniteError(f"pivot {d[i - 1]!r} at row {i - 1}")
            l[i - 1] = sys.off[i - 1] / d[i - 1]
            d[i] = sys.diag[i] - l[i - 1] * sys.off[i - 1]
        if n and not d[-1] > PIVOT_FLOOR:
            raise NotPositiveDefiniteError(f"pivot {d[-1]!r} at row {n - 1}")
        d.flags.writeable = False
        l.flags.writeable = False
        return cls(d, l)

    @property
    def n(self) -> int:
        return self.d.size

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for ``rhs`` of shape (n,) or (n, k); columns are independent systems."""
        x = np.array(rhs, dtype=float, order="C")
        return self.solve_inplace(x)

    def solve_inplace(self, x: np.ndarray) -> np.ndarray:
        if x.shape[0] != self.n:
            raise ValueError(f"rhs has {x.shape[0]} rows, system has {self.n}")
        ldl_solve_inplace(self.d, self.l, as_2d(x))
        return x


@dataclass(frozen=True)
class RobinAugmentation:
    """Weak Robin term at one end of a 1-D element system.

    ``coefficient`` is added to the end diagonal entry and the incoming trace,
    multiplied by ``rhs_trace_weight``, to the matching right-hand side entry.
    """

    side: str  # "low" or "high"
    coefficient: float
    rhs_trace_weight: float = 1.0

    def __post_init__(self):
        if self.side not in ("low", "high"):
            raise ValueError(f"side must be 'low' or 'high', got {self.side!r}")
        if self.coefficient < 0:
            raise ValueError(f"Robin coefficient must be >= 0, got {self.coefficient}")

    def index(self, n: int) -> int:
        return 0 if self.side == "low" else n - 1

    def apply(self, sys: TriDiagSystem) -> TriDiagSystem:
        return sys.with_diagonal_bump(self.index(sys.n), self.coefficient)


def solve_tridiag(sys: TriDiagSystem, rhs: np.ndarray) -> np.ndarray:
    """One-shot factor and solve of a symmetric positive definite system."""
    return sys.factor().solve(rhs)


def assemble_mass(n_nodes: int, hv: float) -> TriDiagSystem:
    if n_nodes < 2 or hv <= 0:
        raise ValueError(f"need n_nodes >= 2 and hv > 0, got {n_nodes}, {hv}")
    diag = np.full(n_nodes, 2.0 * hv / 3.0)
    diag[0] = diag[-1] = hv / 3.0
    return TriDiagSystem(diag, np.full(n_nodes - 1, hv / 6.0))


def assemble_stiffness(n_nodes: int, hv: float) -> TriDiagSystem:
    if n_nodes < 2 or hv <= 0:
        raise ValueError(f"need n_nodes >= 2 and hv > 0, got {n_nodes}, {hv}")
    diag = np.full(n_nodes, 2.0 / hv)
    diag[0] = diag[-1] = 1.0 / hv
    return TriDiagSystem(diag, np.full(n_nodes - 1, -1.0 / hv))
