"""Empirical search for Robin parameters by brute-force sampling."""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .grid import GridConfig, build_grid
from .swr import SwrConfig, TransmissionKind, swr_run


def sample_range(lo: float, hi: float, step: float) -> np.ndarray:
    """lo, lo + step, ... up to hi inclusive (within rounding)."""
    if hi < lo or step <= 0:
        raise ValueError(f"bad range [{lo}, {hi}] step {step}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


@dataclass(frozen=True)
class SweepSpec:
    p_range: tuple[float, float, float]
    q_range: tuple[float, float, float] | None = None
    fixed_iters: int = 15
    grid: GridConfig = GridConfig()
    swr: SwrConfig = SwrConfig()
    workers: int = 1

    def __post_init__(self):
        if self.fixed_iters < 1:
            raise ValueError("fixed_iters must be >= 1")
        for r in (self.p_range, self.q_range):
            if r is not None:
                sample_range(*r)

    @property
    def two_sided(self) -> bool:
        return self.q_range is not None

    def samples(self) -> list[tuple[float, float | None]]:
        ps = sample_range(*self.p_range)
        if self.q_range is None:
            return [(float(p), None) for p in ps]
        qs = sample_range(*self.q_range)
        return [(float(p), float(q)) for p, q in itertools.product(ps, qs)]


@dataclass(frozen=True)
class SweepRecord:
    p: float
    q: float | None
    iterations: int
    converged: bool
    error_at_K: float


@dataclass
class SweepResult:
    records: list[SweepRecord]
    fixed_iters: int
    best: SweepRecord = field(init=False)

    def __post_init__(self):
        # fewest iterations; ties go to the smaller error after K iterations
        self.best = min(
            self.records, key=lambda r: (not r.converged, r.iterations, r.error_at_K)
        )

    def write_csv(self, path: str | Path) -> None:
        two = any(r.q is not None for r in self.records)
        with Path(path).open("w", newline="") as fh:
            fh.write(f"# error_at_K uses K={self.fixed_iters}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["p", "q", "iterations", "converged", "error_at_K"] if two
                       else ["p", "iterations", "converged", "error_at_K"])
            for r in self.records:
                head = [r.p, r.q] if two else [r.p]
                w.writerow(head + [r.iterations, int(r.converged), repr(r.error_at_K)])


def _run_sample(args) -> SweepRecord:
    grid_cfg, swr_cfg, k, p, q = args
    kind = TransmissionKind.one_sided(p) if q is None else TransmissionKind.two_sided(p, q)
    cfg = replace(swr_cfg, transmission=kind, min_iters=max(swr_cfg.min_iters, k))
    report = swr_run(build_grid(grid_cfg), cfg)
    hist = report.error_history
    return SweepRecord(p, q, report.iterations, report.converged, float(hist[min(k, len(hist)) - 1]))


def _sweep(spec: SweepSpec) -> SweepResult:
    jobs = [(spec.grid, spec.swr, spec.fixed_iters, p, q) for p, q in spec.samples()]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            # map keeps sample order regardless of completion order
            records = list(pool.map(_run_sample, jobs))
    else:
        records = [_run_sample(job) for job in jobs]
    return SweepResult(records, spec.fixed_iters)


def sweep_one_sided(spec: SweepSpec) -> SweepResult:
    if spec.two_sided:
        raise ValueError("one-sided sweep takes no q_range")
    return _sweep(spec)


def sweep_two_sided(spec: SweepSpec) -> SweepResult:
    if not spec.two_sided:
        raise ValueError("two-sided sweep needs a q_range")
    return _sweep(spec)
