"""
Two-stage splitting for u_t + v u_x - u_vv = f on one velocity subdomain.

Each time step n -> n+1 does

1. a backward-Euler step of length tau for the heat equation in v, with
   linear finite elements: ((1/tau) M + S) u* = (1/tau) M u^n (+ M f), one
   independent system per x-node;
2. a semi-Lagrangian transport step u^{n+1}(x, v) = u*(x - tau v, v) with
   linear interpolation on the periodic x-grid.

The literal scheme uses tau = dt / 2 in both stages, so a run to t^n follows
the continuous solution at time n * tau. ``substep_full_dt=True`` takes
tau = dt instead.

Arrays are laid out (v, x) internally so the tridiagonal solves run along the
first axis; recorded fields are stored (t, x, v).
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .grid import Grid
from ._kernels import semi_lagrangian
from .linalg import RobinAugmentation, TriDiagSystem, assemble_mass, assemble_stiffness

logger = logging.getLogger(__name__)

Source = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


class CFLError(ValueError):
    pass


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary conditions of one subdomain in v.

    The physical ends v = -1 and v = 1 always carry homogeneous Neumann
    conditions. ``inner`` is the condition at the interface end ``side``;
    ``"none"`` means a monodomain with Neumann at both ends.
    """

    inner: str = "none"
    side: str | None = None
    coefficient: float = 0.0

    def __post_init__(self):
        if self.inner not in ("none", "dirichlet", "robin"):
            raise ValueError(f"unknown inner condition {self.inner!r}")
        if self.inner != "none" and self.side not in ("low", "high"):
            raise ValueError("an interface condition needs side='low' or side='high'")
        if self.inner == "robin" and self.coefficient < 0:
            raise ValueError("Robin coefficient must be nonnegative")

    @classmethod
    def neumann(cls) -> BoundarySpec:
        return cls()

    @classmethod
    def dirichlet(cls, side: str) -> BoundarySpec:
        return cls("dirichlet", side)

    @classmethod
    def robin(cls, side: str, coefficient: float) -> BoundarySpec:
        return cls("robin", side, coefficient)

    @property
    def needs_trace(self) -> bool:
        return self.inner != "none"


class ParabolicOperator:
    """Backward-Euler FEM step in v, factored once and applied column-wise."""

    def __init__(
        self,
        n_nodes: int,
        hv: float,
        tau: float,
        bc: BoundarySpec = BoundarySpec(),
        stiffness_perturbation: float = 0.0,
    ):
        self.n = n_nodes
        self.tau = tau
        self.bc = bc
        self.mass = assemble_mass(n_nodes, hv)
        stiff = assemble_stiffness(n_nodes, hv)
        if stiffness_perturbation:
            # fault injection: breaks the zero row sums of S
            stiff = TriDiagSystem(stiff.diag * (1.0 + stiffness_perturbation), stiff.off)
        self.stiffness = stiff
        system = self.mass.scaled(1.0 / tau) + stiff
        self.k = None
        if bc.inner == "robin":
            aug = RobinAugmentation(bc.side, bc.coefficient)
            system = aug.apply(system)
            self.k = aug.index(n_nodes)
        elif bc.inner == "dirichlet":
            self.k = 0 if bc.side == "low" else n_nodes - 1
            # eliminate the prescribed node: the reduced matrix stays SPD
            if bc.side == "low":
                self._free = slice(1, n_nodes)
                self._coupling = system.off[0]
            else:
                self._free = slice(0, n_nodes - 1)
                self._coupling = system.off[-1]
        self.system = system
        if bc.inner == "dirichlet":
            self.factor = system.submatrix(self._free.start, self._free.stop).factor()
        else:
            self.factor = system.factor()

    def __call__(
        self, u: np.ndarray, trace: np.ndarray | None = None, forcing: np.ndarray | None = None
    ) -> np.ndarray:
        """Advance columns ``u`` (n, ...) by one stage; ``forcing`` is f at the new time."""
        if self.bc.needs_trace and trace is None:
            raise ValueError(f"{self.bc.inner} interface condition needs a trace")
        rhs = self.mass.scaled_matvec(u, 1.0 / self.tau)
        if forcing is not None:
            rhs += self.mass.matvec(forcing)
        if self.bc.inner == "robin":
            rhs[self.k] += trace
        elif self.bc.inner == "dirichlet":
            if self.bc.side == "low":
                rhs[1] -= self._coupling * trace
            else:
                rhs[-2] -= self._coupling * trace
            # a leading/trailing row slice of a C-ordered array is still contiguous
            self.factor.solve_inplace(rhs[self._free])
            rhs[self.k] = trace
            return rhs
        return self.factor.solve_inplace(rhs)


def parabolic_half_step(
    u_in: np.ndarray,
    bc: BoundarySpec,
    trace_at_step: np.ndarray | None,
    tau: float,
    hv: float,
) -> np.ndarray:
    """One implicit stage for columns ``u_in`` of shape (n_v, n_x)."""
    return ParabolicOperator(u_in.shape[0], hv, tau, bc)(u_in, trace_at_step)


def transport_weights(v: np.ndarray, tau: float, hx: float) -> np.ndarray:
    w = np.abs(v) * tau / hx
    bad = np.flatnonzero(w > 1.0 + 1e-12)
    if bad.size:
        i = bad[np.argmax(w[bad])]
        raise CFLError(f"CFL violated: weight {w[i]:.4g} > 1 at v = {v[i]:.6g}")
    return w


def transport_step(u_half: np.ndarray, tau: float, v: np.ndarray, hx: float) -> np.ndarray:
    """Semi-Lagrangian shift of each v-row of a (n_v, n_x) slab, periodic in x."""
    w = transport_weights(v, tau, hx)
    return _transport(u_half, w, v < 0)


def _transport(u: np.ndarray, w: np.ndarray, upstream_right: np.ndarray) -> np.ndarray:
    # foot of the characteristic x - tau v lies right of x_m when v < 0
    u = np.ascontiguousarray(u, dtype=float)
    return semi_lagrangian(u, w, upstream_right, np.empty_like(u))


@dataclass
class Field:
    """Recorded solution on rows ``row_start ..`` of one subdomain.

    ``values[n, m, i]`` is u at (t^n, x_m, v_{row_start + i}). ``stage[n]`` is
    the parabolic stage of step n-1 -> n (before transport); ``stage[0]``
    repeats the initial data.
    """

    values: np.ndarray
    stage: np.ndarray
    row_start: int
    extent: tuple[int, int]
    grid: Grid
    tau: float
    subdomain: int = 0

    @property
    def rows(self) -> range:
        return range(self.row_start, self.row_start + self.values.shape[2])

    def row(self, i: int) -> np.ndarray:
        """Values on the global v-row ``i`` as a (n_t + 1, n_x) array."""
        return self.values[:, :, self._local(i)]

    def stage_row(self, i: int) -> np.ndarray:
        return self.stage[:, :, self._local(i)]

    def _local(self, i: int) -> int:
        if i not in self.rows:
            raise IndexError(f"v-row {i} not recorded (have {self.rows})")
        return i - self.row_start


class SubdomainSolver:
    """Split-step solver for the v-rows ``extent`` (inclusive) of a grid.

    The parabolic matrix does not change in time, so it is factored once at
    construction and reused for every step and every call to ``advance``.
    """

    def __init__(
        self,
        grid: Grid,
        extent: tuple[int, int] | None = None,
        bc: BoundarySpec = BoundarySpec(),
        substep_full_dt: bool = False,
        subdomain: int = 0,
        stiffness_perturbation: float = 0.0,
    ):
        self.grid = grid
        self.extent = extent if extent is not None else (0, grid.n_v_total)
        lo, hi = self.extent
        if not 0 <= lo < hi <= grid.n_v_total:
            raise ValueError(f"bad subdomain extent {self.extent}")
        self.bc = bc
        self.subdomain = subdomain
        self.tau = grid.dt if substep_full_dt else grid.dt / 2.0
        self.v = grid.v_nodes[lo : hi + 1]
        self.n = hi - lo + 1
        self.weights = transport_weights(self.v, self.tau, grid.hx)
        self._upstream_right = self.v < 0
        self.parabolic = ParabolicOperator(
            self.n, grid.hv, self.tau, bc, stiffness_perturbation=stiffness_perturbation
        )

    def advance(
        self,
        initial: np.ndarray | None = None,
        trace: np.ndarray | None = None,
        record: tuple[int, int] | None = None,
        source: Source | None = None,
    ) -> Field:
        """Run all n_t steps.

        ``initial`` is a (n_v, n_x) slab on this subdomain's rows (zeros if
        omitted). ``trace[n]`` feeds the interface during step n-1 -> n.
        ``source(t, x, v)`` is sampled at the stage's own time (n + 1) * tau.
        ``record`` restricts the stored rows (inclusive global indices).
        """
        g = self.grid
        lo, hi = self.extent
        if self.bc.needs_trace:
            if trace is None:
                raise ValueError("interface condition requires a trace")
            if trace.shape != (g.n_t + 1, g.n_x):
                raise ValueError(f"trace shape {trace.shape} != {(g.n_t + 1, g.n_x)}")
        r0, r1 = record if record is not None else self.extent
        if not lo <= r0 <= r1 <= hi:
            raise ValueError(f"record rows {(r0, r1)} outside subdomain {self.extent}")
        sel = slice(r0 - lo, r1 - lo + 1)

        if initial is None:
            u = np.zeros((self.n, g.n_x))
        else:
            u = np.array(initial, dtype=float)
            if u.shape != (self.n, g.n_x):
                raise ValueError(f"initial slab shape {u.shape} != {(self.n, g.n_x)}")
        values = np.empty((g.n_t + 1, g.n_x, r1 - r0 + 1))
        stage = np.empty_like(values)
        values[0] = stage[0] = u[sel].T
        if source is not None:
            vv, xx = np.meshgrid(self.v, g.x_nodes, indexing="ij")

        for n in range(g.n_t):
            forcing = None if source is None else source((n + 1) * self.tau, xx, vv)
            half = self.parabolic(u, None if trace is None else trace[n + 1], forcing)
            u = _transport(half, self.weights, self._upstream_right)
            stage[n + 1] = half[sel].T
            values[n + 1] = u[sel].T
        return Field(values, stage, r0, self.extent, g, self.tau, self.subdomain)


def advance_window(
    initial: np.ndarray | None,
    bc: BoundarySpec,
    trace: np.ndarray | None,
    grid: Grid,
    extent: tuple[int, int] | None = None,
    substep_full_dt: bool = False,
) -> Field:
    """Convenience wrapper building a ``SubdomainSolver`` for a single run."""
    solver = SubdomainSolver(grid, extent, bc, substep_full_dt=substep_full_dt)
    return solver.advance(initial, trace)


def dump_field(field: Field, path: str | Path, steps=None) -> None:
    """Write selected time levels of ``field``.

    ``.csv``: comment header ``# n_t,n_x,n_v,subdomain`` then one line
    ``n,m,i,value`` per sample. ``.bin``: four little-endian int64
    (n_t, n_x, n_v, subdomain) followed by float64 values in (n, m, i)
    row-major order. ``n_t`` counts the stored levels.
    """
    path = Path(path)
    steps = np.arange(field.values.shape[0]) if steps is None else np.asarray(steps)
    data = field.values[steps]
    header = np.array([data.shape[0], data.shape[1], data.shape[2], field.subdomain], "<i8")
    if path.suffix == ".bin":
        with path.open("wb") as fh:
            fh.write(header.tobytes())
            fh.write(np.ascontiguousarray(data, "<f8").tobytes())
        return
    buf = io.StringIO()
    buf.write("# n_t,n_x,n_v,subdomain\n# " + ",".join(map(str, header)) + "\n")
    buf.write("n,m,i,value\n")
    n_idx, m_idx, i_idx = np.indices(data.shape).reshape(3, -1)
    for n, m, i, val in zip(steps[n_idx], m_idx, i_idx + field.row_start, data.ravel()):
        buf.write(f"{n},{m},{i},{float(val)!r}\n")
    path.write_text(buf.getvalue())


def load_field_dump(path: str | Path) -> tuple[np.ndarray, int]:
    """Read back a dump; returns the (n, m, i) array and the subdomain id."""
    path = Path(path)
    if path.suffix == ".bin":
        raw = path.read_bytes()
        n_t, n_x, n_v, sub = np.frombuffer(raw[:32], "<i8")
        return np.frombuffer(raw[32:], "<f8").reshape(n_t, n_x, n_v).copy(), int(sub)
    lines = path.read_text().splitlines()
    n_t, n_x, n_v, sub = (int(s) for s in lines[1].lstrip("# ").split(","))
    vals = np.array([float(line.rsplit(",", 1)[1]) for line in lines[3:]])
    return vals.reshape(n_t, n_x, n_v), sub
