"""Monodomain sanity checks for the split-step solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridConfig, build_grid
from .splitstep import SubdomainSolver


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.value:.3e} (tol {self.tolerance:.1e}) {self.detail}".rstrip()


def manufactured_solution(t, x, v):
    """u = sin(2 pi x - t) cos(pi v) e^-t; cos(pi v) has zero slope at v = +-1."""
    return np.sin(2 * np.pi * x - t) * np.cos(np.pi * v) * np.exp(-t)


def manufactured_source(t, x, v):
    """u_t + v u_x - u_vv for ``manufactured_solution``."""
    phase = 2 * np.pi * x - t
    return np.exp(-t) * np.cos(np.pi * v) * (
        (2 * np.pi * v - 1) * np.cos(phase) + (np.pi**2 - 1) * np.sin(phase)
    )


def discrete_mass(values: np.ndarray, hv: float) -> np.ndarray:
    """sum_m sum_i (M u[n, m])_i for every n; M's row sums are trapezoid weights."""
    w = np.full(values.shape[2], hv)
    w[0] = w[-1] = hv / 2
    return values.sum(axis=1) @ w


def _random_slab(grid, rng):
    return rng.uniform(0.0, 1.0, size=(grid.n_v_nodes, grid.n_x))


def check_conservation(cfg=GridConfig(), seed=0, tol=1e-10, stiffness_perturbation=0.0):
    grid = build_grid(cfg)
    solver = SubdomainSolver(grid, stiffness_perturbation=stiffness_perturbation)
    field = solver.advance(_random_slab(grid, np.random.default_rng(seed)))
    mass = discrete_mass(field.values, grid.hv)
    drift = float(np.max(np.abs(mass - mass[0])))
    return CheckResult("mass conservation", drift <= tol, drift, tol, f"over {grid.n_t} steps")


def check_max_principle(cfg=GridConfig(), seed=1, tol=1e-13, stiffness_perturbation=0.0):
    grid = build_grid(cfg)
    solver = SubdomainSolver(grid, stiffness_perturbation=stiffness_perturbation)
    field = solver.advance(_random_slab(grid, np.random.default_rng(seed)))
    peaks = field.values.max(axis=(1, 2))
    rise = float(max(np.max(np.diff(peaks)), 0.0))
    return CheckResult("maximum non-increasing", rise <= tol, rise, tol)


def check_linearity(cfg=GridConfig(T=0.5), seed=2, tol=1e-11, stiffness_perturbation=0.0):
    grid = build_grid(cfg)
    rng = np.random.default_rng(seed)
    solver = SubdomainSolver(grid, stiffness_perturbation=stiffness_perturbation)
    u0, w0 = _random_slab(grid, rng), _random_slab(grid, rng)
    a, b = 0.7, -1.3
    lhs = solver.advance(a * u0 + b * w0).values
    rhs = a * solver.advance(u0).values + b * solver.advance(w0).values
    gap = float(np.max(np.abs(lhs - rhs)))
    return CheckResult("linearity", gap <= tol, gap, tol)


def _manufactured_run(dt, h, t_final, substep_full_dt, stiffness_perturbation=0.0):
    # the literal scheme covers tau = dt / 2 of physical time per step
    T = t_final if substep_full_dt else 2 * t_final
    grid = build_grid(GridConfig(T=T, dt=dt, hx=h, hv=h))
    solver = SubdomainSolver(
        grid, substep_full_dt=substep_full_dt, stiffness_perturbation=stiffness_perturbation
    )
    V, X = np.meshgrid(grid.v_nodes, grid.x_nodes, indexing="ij")
    field = solver.advance(manufactured_solution(0.0, X, V), source=manufactured_source)
    exact = manufactured_solution(t_final, X, V).T
    return field.values[-1], exact


def temporal_order(substep_full_dt=False, h=0.02, dts=(0.02, 0.01, 0.005), t_final=0.5,
                   stiffness_perturbation=0.0):
    """Observed order from successive differences under dt-refinement at fixed h.

    Differences cancel the dt-independent spatial error, which otherwise
    swamps the time error because the transport CFL ties dt to hx.
    """
    sols = [_manufactured_run(dt, h, t_final, substep_full_dt, stiffness_perturbation)[0]
            for dt in dts]
    diffs = [np.max(np.abs(a - b)) for a, b in zip(sols, sols[1:])]
    return [float(np.log2(d0 / d1)) for d0, d1 in zip(diffs, diffs[1:])], diffs


def joint_order(substep_full_dt=False, hs=(0.05, 0.025, 0.0125), t_final=0.5):
    """Observed order against the exact solution with dt = hx = hv refined together."""
    errs = []
    for h in hs:
        u, exact = _manufactured_run(h, h, t_final, substep_full_dt)
        errs.append(float(np.max(np.abs(u - exact))))
    return [float(np.log2(e0 / e1)) for e0, e1 in zip(errs, errs[1:])], errs


def check_order(substep_full_dt=False, min_order=1.0, stiffness_perturbation=0.0):
    orders, diffs = temporal_order(substep_full_dt, stiffness_perturbation=stiffness_perturbation)
    label = "full-dt" if substep_full_dt else "literal"
    return CheckResult(
        f"temporal order ({label})", min(orders) >= min_order, min(orders), min_order,
        f"successive differences {', '.join(f'{d:.2e}' for d in diffs)}",
    )


def run_all(stiffness_perturbation: float = 0.0) -> list[CheckResult]:
    kw = {"stiffness_perturbation": stiffness_perturbation}
    return [
        check_conservation(**kw),
        check_max_principle(**kw),
        check_linearity(**kw),
        check_order(False, **kw),
        check_order(True, **kw),
    ]
