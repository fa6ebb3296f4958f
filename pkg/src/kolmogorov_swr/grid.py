"""Space-time grid on [0, T] x [0, 1) x [-1, 1] and its two velocity subdomains."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BASE_STEP = 0.01
V_MIN, V_MAX = -1.0, 1.0


def _as_count(length: float, step: float, what: str) -> int:
    count = round(length / step)
    if count < 1 or abs(count * step - length) > 1e-9 * max(1.0, length):
        raise ValueError(f"{what}: {length} is not an integer multiple of step {step}")
    return count


@dataclass(frozen=True)
class GridConfig:
    """Base steps are scaled by ``2**-refine_level``."""

    T: float = 2.0
    dt: float = BASE_STEP
    hx: float = BASE_STEP
    hv: float = BASE_STEP
    refine_level: int = 0
    overlap_elems: int = 3

    def __post_init__(self):
        if min(self.T, self.dt, self.hx, self.hv) <= 0:
            raise ValueError("T, dt, hx and hv must be positive")
        if self.refine_level < 0 or self.overlap_elems < 0:
            raise ValueError("refine_level and overlap_elems must be nonnegative")

    @property
    def scale(self) -> float:
        return 2.0 ** -self.refine_level

    @property
    def steps(self) -> tuple[float, float, float]:
        """Actual (dt, hx, hv) after refinement."""
        return self.dt * self.scale, self.hx * self.scale, self.hv * self.scale


@dataclass(frozen=True)
class Grid:
    config: GridConfig
    dt: float
    hx: float
    hv: float
    n_t: int
    n_x: int
    n_v_total: int  # index of the last v node; there are n_v_total + 1 nodes
    idx_alpha: int
    idx_beta: int
    t_nodes: np.ndarray = field(repr=False)
    x_nodes: np.ndarray = field(repr=False)
    v_nodes: np.ndarray = field(repr=False)

    @property
    def interface_alpha(self) -> float:
        return float(self.v_nodes[self.idx_alpha])

    @property
    def interface_beta(self) -> float:
        return float(self.v_nodes[self.idx_beta])

    @property
    def overlap(self) -> float:
        return (self.idx_beta - self.idx_alpha) * self.hv

    @property
    def n_v_nodes(self) -> int:
        return self.n_v_total + 1

    @property
    def omega1(self) -> tuple[int, int]:
        """Inclusive v-index range of the low-velocity subdomain [-1, beta]."""
        return 0, self.idx_beta

    @property
    def omega2(self) -> tuple[int, int]:
        """Inclusive v-index range of the high-velocity subdomain [alpha, 1]."""
        return self.idx_alpha, self.n_v_total

    @property
    def trace_size(self) -> int:
        """Unknowns carried by one interface trace (time levels t^1..t^N x x-nodes)."""
        return self.n_t * self.n_x


def build_grid(cfg: GridConfig) -> Grid:
    """Uniform nodes t^n = n dt, x_m = m hx (periodic), v_i = -1 + i hv.

    The non-overlapping interface sits at v = 0; the overlap band is
    [0, overlap_elems * hv].
    """
    dt, hx, hv = cfg.steps
    n_t = _as_count(cfg.T, dt, "T / dt")
    n_x = _as_count(1.0, hx, "1 / hx")
    n_v_total = _as_count(V_MAX - V_MIN, hv, "2 / hv")
    if n_v_total % 2:
        raise ValueError("v = 0 must be a grid node (2 / hv must be even)")
    idx_alpha = n_v_total // 2
    idx_beta = idx_alpha + cfg.overlap_elems
    if idx_beta >= n_v_total:
        raise ValueError(f"overlap of {cfg.overlap_elems} elements reaches v = 1")
    return Grid(
        config=cfg,
        dt=dt,
        hx=hx,
        hv=hv,
        n_t=n_t,
        n_x=n_x,
        n_v_total=n_v_total,
        idx_alpha=idx_alpha,
        idx_beta=idx_beta,
        t_nodes=np.arange(n_t + 1) * dt,
        x_nodes=np.arange(n_x) * hx,
        # centred form keeps v = 0 exact and the node set symmetric under v -> -v
        v_nodes=(np.arange(n_v_total + 1) - idx_alpha) * hv,
    )
