"""Learning-rate schedules for AdamW and their dual coefficient view.

The package covers five areas: schedule shapes as pure functions of the
step index (:mod:`lrdual.schedules`), the convex-combination coefficients a
schedule implies for AdamW's weight updates (:mod:`lrdual.dual`), schedule
design from target coefficient profiles (:mod:`lrdual.designer`), a
reference AdamW plus bias/variance experiments on noisy quadratics
(:mod:`lrdual.oracle`), and power-law scaling fits (:mod:`lrdual.scaling`).
"""

from .designer import (
    DesignedSchedule,
    TargetProfile,
    coefficient_ratio,
    rational_schedule,
    schedule_from_coefficients,
)
from .dual import (
    DualCoefficients,
    SmoothingSequence,
    coefficient_matrix,
    coefficients_at,
    init_coefficient,
    init_coefficient_approx,
    timescale,
)
from .errors import (
    DivergenceError,
    DomainError,
    InfeasibleTargetError,
    InfiniteTimescaleError,
    LRDualError,
    NonFiniteGradientError,
    ValidationError,
)
from .scaling import ExtrapolationWarning, PowerLawFit, fit_power_law, predict, slope_gap
from .schedules import (
    ScheduleKind,
    ScheduleSpec,
    alpha_curve,
    average_alpha,
    lr_at,
    lr_curve,
    mup_scale,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ScheduleKind",
    "ScheduleSpec",
    "lr_at",
    "lr_curve",
    "mup_scale",
    "alpha_curve",
    "average_alpha",
    "SmoothingSequence",
    "DualCoefficients",
    "coefficients_at",
    "coefficient_matrix",
    "init_coefficient",
    "init_coefficient_approx",
    "timescale",
    "TargetProfile",
    "DesignedSchedule",
    "rational_schedule",
    "coefficient_ratio",
    "schedule_from_coefficients",
    "PowerLawFit",
    "ExtrapolationWarning",
    "fit_power_law",
    "predict",
    "slope_gap",
    "LRDualError",
    "ValidationError",
    "DomainError",
    "InfiniteTimescaleError",
    "InfeasibleTargetError",
    "DivergenceError",
    "NonFiniteGradientError",
]
