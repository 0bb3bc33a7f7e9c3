"""Least-squares scaling fits in linearizing coordinates.

=======  =====================  ==================
model    fitted line            transform
=======  =====================  ==================
log      y = a ln x + b         x -> ln x
power    ln y = a ln x + b      x -> ln x, y -> ln y
exp      ln y = a x + b         y -> ln y
linear   y = a x + b            none
=======  =====================  ==================

Power and exp fits share the ``ln y`` axis, so their residual sums are
directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MODELS = ("log", "power", "exp", "linear")


@dataclass(frozen=True)
class FitResult:
    model: str
    slope: float
    intercept: float
    r2: float
    residuals: np.ndarray
    sse: float

    @property
    def params(self) -> tuple[float, float]:
        return self.slope, self.intercept


def _values(rows, field: str) -> np.ndarray:
    out = []
    for r in rows:
        v = r[field] if isinstance(r, dict) else getattr(r, field)
        out.append(float(v))
    return np.array(out)


def fit_xy(x, y, model: str) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    if x.size < 3 or x.size != y.size:
        raise ValueError("need at least 3 matching (x, y) points")
    if model in ("log", "power") and np.any(x <= 0):
        raise ValueError(f"{model} model needs positive x values")
    if model in ("power", "exp") and np.any(y <= 0):
        raise ValueError(f"{model} model needs positive y values")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("fit data contain non-finite values")
    X = np.log(x) if model in ("log", "power") else x
    Y = np.log(y) if model in ("power", "exp") else y
    A = np.column_stack([X, np.ones_like(X)])
    (slope, intercept), *_ = np.linalg.lstsq(A, Y, rcond=None)
    res = Y - (slope * X + intercept)
    sse = float(res @ res)
    sst = float(((Y - Y.mean()) ** 2).sum())
    r2 = 1.0 - sse / sst if sst > 0 else (1.0 if sse == 0 else 0.0)
    return FitResult(model, float(slope), float(intercept), r2, res, sse)


def fit_scaling(rows, x_field: str, y_field: str, model: str) -> FitResult:
    """Fit ``y_field`` against ``x_field`` over result rows (objects or dicts)."""
    return fit_xy(_values(rows, x_field), _values(rows, y_field), model)


def exp_beats_power(x, y) -> bool:
    """True when an exponential describes y(x) with a smaller residual sum than a power law."""
    return fit_xy(x, y, "exp").sse < fit_xy(x, y, "power").sse
