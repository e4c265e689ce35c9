"""Reference AdamW and the reconstruction of its iterates from dual coefficients.

A step of AdamW with decoupled weight decay,

    theta_t = (1 - lr * wd) * theta_{t-1} - lr * mhat_t / (sqrt(vhat_t) + eps),

is a moving average ``theta_t = (1 - a_t) theta_{t-1} + a_t x_t`` with
``a_t = lr_t * wd`` and ``x_t = -mhat_t / ((sqrt(vhat_t) + eps) * wd)``. A
recorded trace therefore satisfies ``theta_T = sum_i c_{T,i} X_i`` exactly,
where ``X`` is the update list shifted by one so the initial parameters sit
at index 1 with smoothing 1, and ``c`` are the dual coefficients of the
realized smoothing sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from ..dual import DualCoefficients, SmoothingSequence
from ..errors import (
    DivergenceError,
    DomainError,
    NonFiniteGradientError,
    ValidationError,
)
from ..schedules import ScheduleSpec, lr_curve
from .quadratic import QuadraticProblem
from .rng import normal_field

__all__ = [
    "AdamWConfig",
    "AdamWState",
    "AdamWTrace",
    "adamw_step",
    "train",
    "reconstruct_from_updates",
]


@dataclass(frozen=True)
class AdamWConfig:
    """Optimizer hyperparameters; defaults follow common LLM practice."""

    weight_decay: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.95
    epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if not (0.0 <= self.weight_decay and math.isfinite(self.weight_decay)):
            raise ValidationError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not (0.0 <= self.beta1 < 1.0):
            raise ValidationError(f"beta1 must be in [0, 1), got {self.beta1}")
        if not (0.0 <= self.beta2 < 1.0):
            raise ValidationError(f"beta2 must be in [0, 1), got {self.beta2}")
        if not (self.epsilon > 0.0):
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")


@dataclass
class AdamWState:
    """Parameters plus first/second moment accumulators after ``step`` steps."""

    theta: np.ndarray
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def initial(cls, theta0: np.ndarray) -> "AdamWState":
        theta0 = np.asarray(theta0, dtype=np.float64)
        return cls(
            theta=theta0.copy(),
            m=np.zeros_like(theta0),
            v=np.zeros_like(theta0),
            step=0,
        )


def _apply(
    state: AdamWState,
    gradient: np.ndarray,
    lr: float,
    config: AdamWConfig,
) -> Tuple[AdamWState, np.ndarray]:
    """One AdamW step; returns the new state and the normalized update
    ``mhat / (sqrt(vhat) + eps)`` actually applied."""
    gradient = np.asarray(gradient, dtype=np.float64)
    if not np.all(np.isfinite(gradient)):
        raise NonFiniteGradientError(
            state.step + 1, f"non-finite gradient at step {state.step + 1}"
        )
    if lr < 0:
        raise DomainError(f"learning rate must be non-negative, got {lr}")
    t = state.step + 1
    # overflow is deliberate here: divergence is detected from the iterate
    with np.errstate(over="ignore", invalid="ignore"):
        m = config.beta1 * state.m + (1.0 - config.beta1) * gradient
        v = config.beta2 * state.v + (1.0 - config.beta2) * gradient * gradient
        mhat = m / (1.0 - config.beta1**t)
        vhat = v / (1.0 - config.beta2**t)
        direction = mhat / (np.sqrt(vhat) + config.epsilon)
        theta = (1.0 - lr * config.weight_decay) * state.theta - lr * direction
    return AdamWState(theta=theta, m=m, v=v, step=t), direction


def adamw_step(
    state: AdamWState,
    gradient: np.ndarray,
    lr: float,
    config: AdamWConfig,
) -> AdamWState:
    """Functional AdamW step with bias-corrected moments."""
    new_state, _ = _apply(state, gradient, lr, config)
    return new_state


@dataclass(eq=False)
class AdamWTrace:
    """Recorded trajectory of a training run.

    ``thetas[k]`` is the parameter vector after k steps (``thetas[0]`` is the
    initialization). ``updates`` holds the moving-average inputs shifted by
    one: ``updates[0]`` is the initialization itself and ``updates[k]`` the
    rescaled update of step k; it is ``None`` when weight decay is zero,
    because the rescaling divides by it. ``lrs[k-1]`` is the realized
    learning rate of step k.
    """

    thetas: np.ndarray
    updates: Optional[np.ndarray]
    lrs: np.ndarray
    weight_decay: float

    @property
    def steps(self) -> int:
        return len(self.lrs)

    def smoothing(self) -> SmoothingSequence:
        """Realized smoothing sequence [1, lr_1*wd, ..., lr_T*wd]."""
        if self.weight_decay == 0:
            raise DomainError(
                "the moving-average view needs weight_decay > 0; this trace has 0"
            )
        return SmoothingSequence(
            np.concatenate([[1.0], self.lrs * self.weight_decay])
        )


def train(
    problem: Union[QuadraticProblem, np.ndarray],
    spec: ScheduleSpec,
    config: AdamWConfig,
    seed: int = 0,
    theta0: Optional[np.ndarray] = None,
) -> AdamWTrace:
    """Run AdamW for ``spec.total_steps`` steps and record the trajectory.

    ``problem`` is either a :class:`QuadraticProblem` (noisy quadratic
    gradients, deterministic in ``seed``) or a scripted gradient stream of
    shape (total_steps, dim). Raises :class:`DivergenceError` naming the
    first step at which parameters became non-finite.
    """
    lrs = lr_curve(spec)
    steps = spec.total_steps

    if isinstance(problem, QuadraticProblem):
        dim = problem.dim
        start = problem.theta0() if theta0 is None else np.asarray(theta0, np.float64)
        noise_std = math.sqrt(problem.effective_noise_var)
        optimum = problem.theta_star()

        def gradient_at(step: int, theta: np.ndarray) -> np.ndarray:
            g = problem.curvature_vector * (theta - optimum)
            if noise_std > 0:
                g = g + noise_std * normal_field(seed, step, dim)
            return g

    else:
        scripted = np.asarray(problem, dtype=np.float64)
        if scripted.ndim != 2 or scripted.shape[0] != steps:
            raise ValidationError(
                f"scripted gradients must have shape ({steps}, dim), got {scripted.shape}"
            )
        dim = scripted.shape[1]
        start = np.zeros(dim) if theta0 is None else np.asarray(theta0, np.float64)

        def gradient_at(step: int, theta: np.ndarray) -> np.ndarray:
            return scripted[step - 1]

    record_updates = config.weight_decay > 0
    thetas = np.empty((steps + 1, dim))
    thetas[0] = start
    updates = np.empty((steps + 1, dim)) if record_updates else None
    if record_updates:
        updates[0] = start

    state = AdamWState.initial(start)
    for t in range(1, steps + 1):
        state, direction = _apply(state, gradient_at(t, state.theta), lrs[t - 1], config)
        if not np.all(np.isfinite(state.theta)):
            raise DivergenceError(t, f"parameters became non-finite at step {t}")
        thetas[t] = state.theta
        if record_updates:
            updates[t] = -direction / config.weight_decay

    return AdamWTrace(
        thetas=thetas,
        updates=updates,
        lrs=lrs,
        weight_decay=config.weight_decay,
    )


def reconstruct_from_updates(
    trace: AdamWTrace,
    coeffs: DualCoefficients,
) -> Tuple[np.ndarray, float]:
    """Rebuild the final parameters as the coefficient-weighted update sum.

    ``coeffs`` must come from the trace's realized smoothing sequence.
    Returns ``(theta_hat, relative_error)`` where the error compares against
    the recorded final parameters.
    """
    if trace.weight_decay == 0:
        raise DomainError(
            "reconstruction requires weight_decay > 0 (updates are scaled by 1/wd)"
        )
    if trace.updates is None:
        raise DomainError("trace has no recorded updates")
    n_inputs = len(trace.updates)
    if coeffs.t != n_inputs:
        raise ValidationError(
            f"coefficients cover {coeffs.t} inputs but the trace has {n_inputs}"
        )
    theta_hat = coeffs.c @ trace.updates
    theta_final = trace.thetas[-1]
    norm = float(np.linalg.norm(theta_final))
    err = float(np.linalg.norm(theta_hat - theta_final))
    relative_error = err if norm == 0.0 else err / norm
    return theta_hat, relative_error
