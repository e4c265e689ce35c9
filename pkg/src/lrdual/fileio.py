"""CSV, JSON and SVG emitters plus the run manifest.

Floats are printed with 17 significant digits so every CSV round-trips to
the exact double that produced it, and all writers are deterministic: the
same data yields byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .designer import TargetProfile
from .dual import DualCoefficients, LOG_FLUSH_THRESHOLD
from .errors import ValidationError
from .oracle.sweep import SweepCellResult
from .scaling import PowerLawFit

__all__ = [
    "fmt17",
    "write_text_file",
    "write_schedule_csv",
    "write_coefficients_csv",
    "write_coefficient_matrix_csv",
    "write_sweep_csv",
    "write_fit_json",
    "read_target_profile",
    "read_points",
    "read_multipliers",
    "svg_line_plot",
    "RunManifest",
    "MANIFEST_NAME",
]

MANIFEST_NAME = "manifest.json"


def fmt17(x: float) -> str:
    """Render a double with 17 significant digits (lossless round trip)."""
    return format(float(x), ".17g")


def write_text_file(path: Path, text: str) -> None:
    """Write text with pinned newlines so output bytes are platform-free."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


_write_text = write_text_file


def write_schedule_csv(path: Path, lrs: np.ndarray, alphas: np.ndarray) -> None:
    """Rows ``step,lr,alpha`` for steps 1..T."""
    lines = ["step,lr,alpha"]
    for step, (lr, alpha) in enumerate(zip(lrs, alphas), start=1):
        lines.append(f"{step},{fmt17(lr)},{fmt17(alpha)}")
    _write_text(path, "\n".join(lines) + "\n")


def write_coefficients_csv(path: Path, coeffs: DualCoefficients) -> None:
    """Rows ``i,c,log_c`` for inputs 1..t at the final step."""
    c = coeffs.c
    lines = ["i,c,log_c"]
    for i in range(coeffs.t):
        lines.append(f"{i + 1},{fmt17(c[i])},{fmt17(coeffs.log_c[i])}")
    _write_text(path, "\n".join(lines) + "\n")


def write_coefficient_matrix_csv(path: Path, log_rows) -> None:
    """Sparse ``t,i,log_c`` triplets of the lower-triangular coefficient table.

    ``log_rows`` is any iterable of log-coefficient rows (row ``t`` covering
    inputs ``1..t``); a square matrix works too, its upper-triangle padding
    falls below the omission threshold.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# rows with log_c < {int(LOG_FLUSH_THRESHOLD)} omitted\n")
        fh.write("t,i,log_c\n")
        for t, row in enumerate(log_rows, start=1):
            for i, value in enumerate(row[:t], start=1):
                if value >= LOG_FLUSH_THRESHOLD:
                    fh.write(f"{t},{i},{fmt17(value)}\n")


_SWEEP_COLUMNS = (
    "schedule,peak_lr,decay_ratio,sigma2,batch,steps,"
    "gap_analytic,gap_mc_mean,gap_mc_stderr,stable"
)


def write_sweep_csv(path: Path, results: Sequence[SweepCellResult]) -> None:
    lines = [_SWEEP_COLUMNS]
    for r in results:
        gaps = [
            "" if v is None else fmt17(v)
            for v in (r.gap_analytic, r.gap_mc_mean, r.gap_mc_stderr)
        ]
        lines.append(
            f"{r.schedule},{fmt17(r.peak_lr)},{fmt17(r.decay_ratio)},"
            f"{fmt17(r.sigma2)},{r.batch},{r.steps},"
            f"{gaps[0]},{gaps[1]},{gaps[2]},{str(r.stable).lower()}"
        )
    _write_text(path, "\n".join(lines) + "\n")


def write_fit_json(path: Path, fit: PowerLawFit) -> None:
    text = (
        "{"
        f'"c": {fmt17(fit.coefficient)}, '
        f'"m": {fmt17(fit.exponent)}, '
        f'"r_squared": {fmt17(fit.r_squared)}'
        "}\n"
    )
    _write_text(path, text)


def _data_rows(path: Path, expected_fields: int) -> List[List[str]]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != expected_fields:
                raise ValidationError(
                    f"{path}:{lineno}: expected {expected_fields} fields, got {len(fields)}"
                )
            rows.append(fields)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    return rows


def read_target_profile(path: Path) -> TargetProfile:
    """Read an ``i,c`` CSV into a target profile (rows sorted by index)."""
    rows = _data_rows(path, 2)
    if rows[0][0].lower() == "i":
        rows = rows[1:]
    try:
        indexed = sorted((int(i), float(c)) for i, c in rows)
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed profile row: {exc}") from exc
    indices = [i for i, _ in indexed]
    if indices != list(range(1, len(indexed) + 1)):
        raise ValidationError(f"{path}: profile indices must be 1..{len(indexed)}")
    return TargetProfile(np.array([c for _, c in indexed]))


def read_points(path: Path) -> List[Tuple[float, float]]:
    """Read an ``x,y`` CSV into a list of pairs."""
    rows = _data_rows(path, 2)
    if rows[0][0].lower() == "x":
        rows = rows[1:]
    try:
        return [(float(x), float(y)) for x, y in rows]
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed point row: {exc}") from exc


def read_multipliers(path: Path) -> Tuple[float, ...]:
    """Read one multiplier per line (used by the piecewise schedule kind)."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: not a number: {line!r}") from exc
    return tuple(values)


# -- SVG ----------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_WIDTH, _HEIGHT = 720, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 32, 48
_LOG_FLOOR = 1e-300


def svg_line_plot(
    series: Sequence[Tuple[str, np.ndarray, np.ndarray]],
    *,
    title: str,
    x_label: str,
    y_label: str,
    log_y: bool = False,
) -> str:
    """Minimal static line plot: one polyline per series.

    With ``log_y`` the y axis is log10; non-positive y values cannot be
    drawn on it and are dropped from their polyline.
    """
    if not series:
        raise ValidationError("svg_line_plot needs at least one series")
    xs_all, ys_all = [], []
    cleaned = []
    for name, xs, ys in series:
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if log_y:
            keep = ys > 0
            xs, ys = xs[keep], ys[keep]
            ys = np.log10(np.maximum(ys, _LOG_FLOOR))
        cleaned.append((name, xs, ys))
        if len(xs):
            xs_all.append(xs)
            ys_all.append(ys)
    if not xs_all:
        raise ValidationError("no drawable points (log axis dropped every value)")
    x_lo = min(float(a.min()) for a in xs_all)
    x_hi = max(float(a.max()) for a in xs_all)
    y_lo = min(float(a.min()) for a in ys_all)
    y_hi = max(float(a.max()) for a in ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
        f'y2="{_HEIGHT - _MARGIN_B}" stroke="black"/>',
        f'<line x1="{_MARGIN_L}" y1="{_HEIGHT - _MARGIN_B}" x2="{_WIDTH - _MARGIN_R}" '
        f'y2="{_HEIGHT - _MARGIN_B}" stroke="black"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>',
        f'<text x="16" y="{_HEIGHT / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {_HEIGHT / 2:.1f})">'
        f'{y_label}{" (log10)" if log_y else ""}</text>',
    ]
    for k, (name, xs, ys) in enumerate(cleaned):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
        )
        parts.append(
            f'<text x="{_WIDTH - _MARGIN_R - 8}" y="{_MARGIN_T + 16 + 16 * k}" '
            f'text-anchor="end" font-family="sans-serif" font-size="11" '
            f'fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- run manifest ---------------------------------------------------------------


@dataclass
class RunManifest:
    """Reproducibility record written next to every command's outputs.

    Replaying ``argv`` reproduces the listed outputs byte for byte; nothing
    time- or host-dependent is stored.
    """

    command: str
    argv: List[str]
    config: Mapping[str, object]
    version: str
    base_seed: Optional[int] = None
    outputs: List[str] = field(default_factory=list)

    def write(self, out_dir: Path) -> Path:
        path = Path(out_dir) / MANIFEST_NAME
        payload = {
            "command": self.command,
            "argv": list(self.argv),
            "config": _jsonable(self.config),
            "version": self.version,
            "base_seed": self.base_seed,
            "outputs": list(self.outputs),
        }
        _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        try:
            return cls(
                command=data["command"],
                argv=list(data["argv"]),
                config=data["config"],
                version=data["version"],
                base_seed=data["base_seed"],
                outputs=list(data["outputs"]),
            )
        except KeyError as exc:
            raise ValidationError(f"{path}: manifest missing field {exc}") from exc


def _jsonable(value):
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value
