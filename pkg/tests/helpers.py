"""Shared generators for randomized schedule specs used across test modules."""

from __future__ import annotations

import numpy as np

from lrdual import ScheduleKind, ScheduleSpec

ALL_KINDS = list(ScheduleKind)


def random_spec_and_wd(rng: np.random.Generator, max_steps: int = 5000, alpha_cap: float = 0.9):
    """Random valid spec plus a weight decay keeping every alpha below alpha_cap."""
    kind = ALL_KINDS[int(rng.integers(len(ALL_KINDS)))]
    total = int(rng.integers(2, max_steps + 1))
    warmup = int(rng.integers(0, max(1, total // 2)))
    peak_base = float(10.0 ** rng.uniform(-3, 0))
    rho = float(rng.choice([1.0, 0.5, 0.125]))
    ratio = float(rng.choice([0.0, 0.1, 0.5]))
    peak = rho * peak_base
    wd = float(rng.uniform(0.05, 1.0)) * alpha_cap / peak

    params = {}
    if kind is ScheduleKind.CYCLIC:
        params = {"period_steps": int(rng.integers(2, max(3, total)))}
    elif kind is ScheduleKind.RATIONAL:
        params = {"weight_decay": wd}
    elif kind is ScheduleKind.PIECEWISE:
        n = total - max(warmup, 1)
        params = {"multipliers": tuple(rng.uniform(0.0, 1.0, n))}
    spec = ScheduleSpec(
        kind=kind,
        total_steps=total,
        peak_base_lr=peak_base,
        warmup_steps=warmup,
        mup_factor=rho,
        decay_ratio=ratio,
        kind_params=params,
    )
    return spec, wd
