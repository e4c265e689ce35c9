"""Grid sweeps of schedules against noise levels on the analytic quadratic.

Cells are the cross product of schedules, peak learning rates, noise
variances, step counts and batch sizes. Every cell is independent: its seed
derives from the base seed and the cell's enumeration index, so results are
identical no matter how many workers execute the grid. Unstable cells are
flagged in the output rather than dropped.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Optional, Sequence, Tuple

from ..errors import ValidationError
from ..schedules import ScheduleKind, ScheduleSpec, lr_curve, steps_from_fraction
from .quadratic import sgd_monte_carlo_gap, sgd_quadratic_expected_gap
from .rng import derive_seed

__all__ = ["SweepSchedule", "SweepGrid", "SweepCellResult", "run_noise_sweep"]

_MODES = ("analytic", "monte-carlo")


@dataclass(frozen=True)
class SweepSchedule:
    """One schedule shape entering the grid."""

    kind: str
    decay_ratio: float = 0.0
    kind_params: Mapping[str, object] = field(default_factory=dict)

    def label(self) -> str:
        return ScheduleKind(self.kind).value


@dataclass(frozen=True)
class SweepGrid:
    """Sweep definition; axis order fixes the cell enumeration."""

    schedules: Tuple[SweepSchedule, ...]
    peak_lrs: Tuple[float, ...]
    sigma2s: Tuple[float, ...]
    steps: Tuple[int, ...]
    batches: Tuple[int, ...]
    mu: float = 1.0
    d0: float = 1.0
    warmup_frac: float = 0.1
    trials: int = 1000

    def __post_init__(self) -> None:
        for name in ("schedules", "peak_lrs", "sigma2s", "steps", "batches"):
            if not getattr(self, name):
                raise ValidationError(f"sweep grid axis {name} must be non-empty")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValidationError(f"mu must be positive, got {self.mu}")
        if self.d0 < 0:
            raise ValidationError(f"d0 must be non-negative, got {self.d0}")
        if not (0.0 <= self.warmup_frac < 1.0):
            raise ValidationError(f"warmup_frac must be in [0, 1), got {self.warmup_frac}")
        if self.trials < 2:
            raise ValidationError(f"trials must be >= 2, got {self.trials}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> "SweepGrid":
        """Build a grid from a parsed JSON document."""
        try:
            schedules = tuple(
                SweepSchedule(
                    kind=str(entry["kind"]),
                    decay_ratio=float(entry.get("decay_ratio", 0.0)),
                    kind_params=dict(entry.get("kind_params", {})),
                )
                for entry in data["schedules"]  # type: ignore[index]
            )
            return cls(
                schedules=schedules,
                peak_lrs=tuple(float(v) for v in data["peak_lrs"]),  # type: ignore[index]
                sigma2s=tuple(float(v) for v in data["sigma2s"]),  # type: ignore[index]
                steps=tuple(int(v) for v in data["steps"]),  # type: ignore[index]
                batches=tuple(int(v) for v in data["batches"]),  # type: ignore[index]
                mu=float(data.get("mu", 1.0)),
                d0=float(data.get("d0", 1.0)),
                warmup_frac=float(data.get("warmup_frac", 0.1)),
                trials=int(data.get("trials", 1000)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed sweep grid: {exc}") from exc

    def to_mapping(self) -> dict:
        """JSON-ready document mirroring the grid fields."""
        return {
            "schedules": [
                {
                    "kind": s.kind,
                    "decay_ratio": s.decay_ratio,
                    "kind_params": dict(s.kind_params),
                }
                for s in self.schedules
            ],
            "peak_lrs": list(self.peak_lrs),
            "sigma2s": list(self.sigma2s),
            "steps": list(self.steps),
            "batches": list(self.batches),
            "mu": self.mu,
            "d0": self.d0,
            "warmup_frac": self.warmup_frac,
            "trials": self.trials,
        }


@dataclass(eq=False)
class SweepCellResult:
    """Final gap of one grid cell; gaps are None when the cell is unstable
    or the mode did not compute them."""

    index: int
    schedule: str
    peak_lr: float
    decay_ratio: float
    sigma2: float
    batch: int
    steps: int
    stable: bool
    gap_analytic: Optional[float] = None
    gap_mc_mean: Optional[float] = None
    gap_mc_stderr: Optional[float] = None

    def sort_key(self):
        return (
            self.schedule,
            self.peak_lr,
            self.decay_ratio,
            self.sigma2,
            self.batch,
            self.steps,
        )


def _run_cell(
    index: int,
    sched: SweepSchedule,
    peak: float,
    sigma2: float,
    total: int,
    batch: int,
    grid: SweepGrid,
    mode: str,
    base_seed: int,
) -> SweepCellResult:
    spec = ScheduleSpec(
        kind=ScheduleKind(sched.kind),
        total_steps=total,
        peak_base_lr=peak,
        warmup_steps=steps_from_fraction(grid.warmup_frac, total),
        decay_ratio=sched.decay_ratio,
        kind_params=dict(sched.kind_params),
    )
    lrs = lr_curve(spec)
    result = SweepCellResult(
        index=index,
        schedule=sched.label(),
        peak_lr=peak,
        decay_ratio=sched.decay_ratio,
        sigma2=sigma2,
        batch=batch,
        steps=total,
        stable=bool((lrs * grid.mu < 2.0).all()),
    )
    if not result.stable:
        return result
    sigma2_eff = sigma2 / batch
    result.gap_analytic = float(
        sgd_quadratic_expected_gap(lrs, grid.mu, sigma2_eff, grid.d0)[-1]
    )
    if mode == "monte-carlo":
        mean, stderr = sgd_monte_carlo_gap(
            lrs,
            grid.mu,
            sigma2_eff,
            grid.d0,
            trials=grid.trials,
            seed=derive_seed(base_seed, index),
        )
        result.gap_mc_mean = mean
        result.gap_mc_stderr = stderr
    return result


def run_noise_sweep(
    grid: SweepGrid,
    mode: str = "analytic",
    seed: int = 0,
    jobs: int = 1,
) -> Sequence[SweepCellResult]:
    """Evaluate every grid cell; output is sorted by cell key, not run order."""
    if mode not in _MODES:
        raise ValidationError(f"mode must be one of {_MODES}, got {mode!r}")
    if jobs < 1:
        raise ValidationError(f"jobs must be >= 1, got {jobs}")
    cells = list(
        product(grid.schedules, grid.peak_lrs, grid.sigma2s, grid.steps, grid.batches)
    )

    def work(item):
        index, (sched, peak, sigma2, total, batch) = item
        return _run_cell(index, sched, peak, sigma2, total, batch, grid, mode, seed)

    items = list(enumerate(cells))
    if jobs == 1:
        results = [work(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, items))
    return sorted(results, key=SweepCellResult.sort_key)
