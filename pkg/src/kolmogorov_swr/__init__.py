"""Schwarz waveform relaxation for the Kolmogorov equation u_t + v u_x - u_vv = f."""

from .grid import Grid, GridConfig, build_grid
from .splitstep import BoundarySpec, Field, SubdomainSolver, advance_window
from .swr import (
    InterfaceTrace,
    SwrConfig,
    SwrReport,
    TransmissionKind,
    extract_trace,
    init_trace,
    swr_error,
    swr_run,
)
from .sweep import SweepSpec, sweep_one_sided, sweep_two_sided

__all__ = [
    "BoundarySpec",
    "Field",
    "Grid",
    "GridConfig",
    "InterfaceTrace",
    "SubdomainSolver",
    "SweepSpec",
    "SwrConfig",
    "SwrReport",
    "TransmissionKind",
    "advance_window",
    "build_grid",
    "extract_trace",
    "init_trace",
    "sweep_one_sided",
    "sweep_two_sided",
    "swr_error",
    "swr_run",
]
