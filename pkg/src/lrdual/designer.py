"""Schedule design: the rational schedule and the inverse coefficient problem.

Uniform dual coefficients require the coefficient ratio

    c_{t,i+1} / c_{t,i} = alpha_{i+1} / ((1 - alpha_{i+1}) * alpha_i)

to equal one, which pins the smoothing recurrence alpha' = alpha / (1 + alpha)
and hence the learning-rate recurrence lr' = lr / (1 + lr * wd). More
generally, any convex combination of inputs has a generating smoothing
schedule, recovered here by backward substitution against the profile's
remaining mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleTargetError, ValidationError

__all__ = [
    "TargetProfile",
    "DesignedSchedule",
    "rational_schedule",
    "coefficient_ratio",
    "schedule_from_coefficients",
]

_SUM_TOL = 1e-12
# Slack for the recovered smoothing values: float rounding may push a
# feasible alpha a hair past its bound, but anything further is a genuine
# infeasibility and is reported, never clamped.
_FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class TargetProfile:
    """Desired coefficients of every input at the final step."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.weights, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("weights must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0:
            raise ValidationError("weights must be finite and non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValidationError(
                f"weights must sum to 1 within {_SUM_TOL}, got {total!r}"
            )
        object.__setattr__(self, "weights", arr)

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class DesignedSchedule:
    """Result of inverting a target profile.

    ``alphas`` is the full smoothing sequence (index 1 is the initial-weights
    pseudo-input, always 1). ``base_lrs`` holds the pre-scaling learning
    rates of the len(alphas) - 1 real optimizer steps.
    """

    alphas: np.ndarray
    base_lrs: np.ndarray


def rational_schedule(
    peak_lr: float,
    weight_decay: float,
    total_steps: int,
    warmup_steps: int = 0,
) -> np.ndarray:
    """Learning rates whose dual coefficients stay uniform after warmup.

    Linear warmup reaches ``peak_lr`` at step ``warmup_steps`` (step 1 when
    there is no warmup); from there each step applies
    ``lr' = lr / (1 + lr * weight_decay)``. With weight decay 1 and no warmup
    this is the harmonic sequence 1, 1/2, 1/3, ...
    """
    if weight_decay == 0:
        raise DomainError(
            "weight_decay of zero degenerates the rational recurrence to a "
            "constant schedule"
        )
    if not (weight_decay > 0 and math.isfinite(weight_decay)):
        raise DomainError(f"weight_decay must be positive, got {weight_decay}")
    if not (peak_lr > 0 and math.isfinite(peak_lr)):
        raise ValidationError(f"peak_lr must be positive, got {peak_lr}")
    if not isinstance(total_steps, (int, np.integer)) or total_steps < 1:
        raise ValidationError(f"total_steps must be a positive integer, got {total_steps!r}")
    if not isinstance(warmup_steps, (int, np.integer)) or warmup_steps < 0:
        raise ValidationError(f"warmup_steps must be non-negative, got {warmup_steps!r}")
    if warmup_steps >= total_steps:
        raise ValidationError(
            f"warmup_steps={warmup_steps} must be smaller than total_steps={total_steps}"
        )
    w_eff = max(warmup_steps, 1)
    lrs = np.empty(total_steps, dtype=np.float64)
    for t in range(1, w_eff + 1):
        lrs[t - 1] = peak_lr * (t / w_eff)
    for t in range(w_eff, total_steps):
        prev = lrs[t - 1]
        lrs[t] = prev / (1.0 + prev * weight_decay)
    return lrs


def coefficient_ratio(alpha_i: float, alpha_next: float) -> float:
    """Ratio of adjacent dual coefficients, independent of the step count."""
    if not (0.0 < alpha_i <= 1.0) or not math.isfinite(alpha_i):
        raise DomainError(f"alpha_i must be in (0, 1], got {alpha_i}")
    if not (0.0 < alpha_next < 1.0) or not math.isfinite(alpha_next):
        raise DomainError(f"alpha_next must be in (0, 1), got {alpha_next}")
    return alpha_next / ((1.0 - alpha_next) * alpha_i)


def schedule_from_coefficients(
    target: TargetProfile,
    weight_decay: float,
    mup_factor: float = 1.0,
) -> DesignedSchedule:
    """Recover the smoothing schedule that realizes ``target``.

    Backward substitution: the last alpha equals the last coefficient, and
    each earlier alpha divides its coefficient by the product of the
    ``(1 - alpha)`` factors after it. That product telescopes to the mass of
    the profile up to the index, so the division uses the extended-precision
    prefix sums of the target directly; feeding recovered values back into
    later denominators would compound their rounding. A recovered alpha
    outside [0, 1] (beyond a 1e-9 slack) raises
    :class:`InfeasibleTargetError` naming the offending index, never clamps.
    An alpha within the slack of 1 is a full reset; indices behind a reset
    carry no realizable mass, so their alphas are free and set to zero
    (coefficients above the slack there are reported as infeasible).
    """
    if not (weight_decay > 0 and math.isfinite(weight_decay)):
        raise DomainError(f"weight_decay must be positive, got {weight_decay}")
    if not (0.0 < mup_factor <= 1.0):
        raise ValidationError(f"mup_factor must be in (0, 1], got {mup_factor}")
    c = target.weights
    n = len(c)
    prefix = np.cumsum(c.astype(np.longdouble))
    alphas = np.zeros(n, dtype=np.float64)
    resets = 0

    for i in range(n - 1, 0, -1):
        if resets > 0:
            if c[i] > _FEASIBILITY_SLACK:
                raise InfeasibleTargetError(
                    i + 1,
                    f"coefficient {c[i]} at index {i + 1} is unreachable behind a "
                    f"full reset (alpha = 1) at a later index",
                )
            alphas[i] = 0.0
            continue
        if prefix[i] == 0.0:
            alphas[i] = 0.0
            continue
        a = float(np.longdouble(c[i]) / prefix[i])
        if a > 1.0 + _FEASIBILITY_SLACK:
            raise InfeasibleTargetError(
                i + 1,
                f"recovered alpha={a} at index {i + 1} exceeds 1; the profile is "
                f"not realizable with the initial-weights convention",
            )
        if a >= 1.0 - _FEASIBILITY_SLACK:
            a = 1.0
            resets += 1
        alphas[i] = a

    if resets > 0:
        if c[0] > _FEASIBILITY_SLACK:
            raise InfeasibleTargetError(
                1,
                f"initial-weights coefficient {c[0]} is unreachable behind a full reset",
            )
    elif prefix[0] > 0.0:
        a1 = float(np.longdouble(c[0]) / prefix[0])
        if abs(a1 - 1.0) > _FEASIBILITY_SLACK:  # pragma: no cover - defensive
            raise InfeasibleTargetError(
                1,
                f"index 1 resolves to alpha={a1}, not 1; the profile is not "
                f"consistent with initial weights as the first input",
            )
    alphas[0] = 1.0
    base_lrs = alphas[1:] / (mup_factor * weight_decay)
    return DesignedSchedule(alphas=alphas, base_lrs=base_lrs)
