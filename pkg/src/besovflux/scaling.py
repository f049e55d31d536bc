"""Log-log slope fitting and scale ladders shared by the scan routines."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

# values at or below this are treated as exact zeros when taking logarithms
LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float

    def to_dict(self) -> dict:
        return asdict(self)


def loglog_fit(x, y) -> SlopeFit:
    """Least-squares line through (log2 x, log2 y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.shape != y.shape:
        raise ValueError("need at least two paired points for a slope")
    lx = np.log2(x)
    ly = np.log2(np.maximum(np.abs(y), LOG_FLOOR))
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), float(r2))


def geometric_ladder(start: float, stop: float, ratio: float) -> np.ndarray:
    """Geometric sequence from ``start`` towards ``stop`` (inclusive within rounding).

    Works in either direction; ``ratio`` > 1 is the step factor.
    """
    if ratio <= 1 or start <= 0 or stop <= 0:
        raise ValueError("ladder needs positive endpoints and ratio > 1")
    count = int(np.floor(abs(np.log(stop / start)) / np.log(ratio) + 1e-9)) + 1
    direction = 1.0 if stop >= start else -1.0
    return start * ratio ** (direction * np.arange(count))


def parse_ladder(text: str) -> np.ndarray:
    """Parse a ``"start:stop:ratio"`` ladder specification."""
    try:
        start, stop, ratio = (float(t) for t in text.split(":"))
    except ValueError as exc:
        raise ValueError(f"ladder must look like start:stop:ratio, got {text!r}") from exc
    return geometric_ladder(start, stop, ratio)
