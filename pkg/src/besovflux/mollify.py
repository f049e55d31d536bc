"""Mollification by the standard compactly supported bump and the commutator estimates.

The kernel is sampled at grid nodes (periodic distance) and renormalised to unit
discrete mass, so ``f^eps`` is an exact discrete convolution.  On a refined grid
the same discrete measure is used: its Fourier multiplier is the coarse DFT,
extended periodically in k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .grid import TorusField, TorusGrid, gradient, upsample
from .norms import BesovSpec, lebesgue_norm
from .scaling import loglog_fit

__all__ = [
    "Mollifier",
    "default_ladder",
    "mollify",
    "ceti_commutator",
    "ceti_decomposition",
    "commutator_field",
    "commutator_norm",
    "mollification_rates",
    "tensor_commutator_norm",
    "commutator_scan",
    "commutator_vanishing",
]

MIN_SPACINGS = 4
MAX_EPS = math.pi / 4
CETI_RTOL = 1e-9


def bump(r):
    """exp(-1/(1 - r^2)) on r < 1, zero outside (unnormalised)."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


@dataclass(frozen=True, eq=False)
class Mollifier:
    """eta_eps sampled on ``grid`` with unit discrete mass."""

    grid: TorusGrid
    eps: float
    kernel: np.ndarray = field(init=False, repr=False)
    kernel_hat: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.eps < MAX_EPS:
            raise ValueError(f"eps must lie in (0, pi/4), got {self.eps}")
        if self.eps < MIN_SPACINGS * self.grid.spacing * (1 - 1e-12):
            raise ValueError(
                f"mollifier under-resolved: eps={self.eps:.4g} < {MIN_SPACINGS} grid spacings "
                f"({MIN_SPACINGS * self.grid.spacing:.4g})"
            )
        dist2 = np.zeros(self.grid.shape)
        for x in self.grid.coords:
            d = np.minimum(x, 2 * np.pi - x)
            dist2 = dist2 + d * d
        kernel = bump(np.sqrt(dist2) / self.eps)
        kernel /= kernel.sum() * self.grid.cell_volume
        khat = np.fft.fftn(kernel).real * self.grid.cell_volume
        kernel.setflags(write=False)
        khat.setflags(write=False)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "kernel_hat", khat)

    @cached_property
    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer node offsets (centred) with nonzero weight, and their quadrature weights."""
        idx = np.argwhere(self.kernel > 0)
        n = self.grid.n
        offsets = np.where(idx >= n // 2, idx - n, idx)
        weights = self.kernel[tuple(idx.T)] * self.grid.cell_volume
        return offsets, weights

    def multiplier(self, grid: TorusGrid | None = None) -> np.ndarray:
        grid = self.grid if grid is None else grid
        if grid == self.grid:
            return self.kernel_hat
        if grid.dim != self.grid.dim or grid.n % self.grid.n:
            raise ValueError(f"mollifier on {self.grid} cannot act on {grid}")
        idx = tuple(np.mod(k, self.grid.n).astype(int) for k in grid.wavenumbers)
        return self.kernel_hat[idx]


def default_ladder(grid: TorusGrid, start: float = 16, stop: float = 4, ratio: float = 2**0.5) -> np.ndarray:
    """Geometric eps ladder in units of the grid spacing, largest first, capped below pi/4."""
    count = int(round(math.log(start / stop) / math.log(ratio))) + 1
    eps = grid.spacing * start * ratio ** (-np.arange(count))
    return eps[eps < MAX_EPS]


def mollify(f: TorusField, m: Mollifier) -> TorusField:
    return f.apply_multiplier(m.multiplier(f.grid), even=True)


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a[:, None] * b[None]).reshape((-1,) + a.shape[1:])


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def _product(a: np.ndarray, b: np.ndarray, mode: str) -> np.ndarray:
    if mode == "product":
        return _outer(a, b)
    if mode == "cross":
        if a.shape[0] != 3 or b.shape[0] != 3:
            raise ValueError("cross mode needs three-component fields")
        return _cross(a, b)
    raise ValueError(f"unknown mode {mode!r}")


def commutator_field(f: TorusField, g: TorusField, m: Mollifier, mode: str = "product") -> TorusField:
    """(f g)^eps - f^eps g^eps on the fields' own grid (componentwise outer or cross product)."""
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")
    fe = mollify(f, m)
    ge = mollify(g, m)
    prod = TorusField(f.grid, _product(f.values, g.values, mode))
    return mollify(prod, m) - TorusField(f.grid, _product(fe.values, ge.values, mode))


def ceti_decomposition(f: TorusField, g: TorusField, m: Mollifier) -> TorusField:
    """int eta_eps(y) [f(x-y) - f(x)][g(x-y) - g(x)] dy - (f - f^eps)(g - g^eps), by node quadrature."""
    if f.grid != g.grid or f.grid != m.grid:
        raise ValueError("grid mismatch between fields and mollifier")
    offsets, weights = m.support
    axes = tuple(range(1, f.grid.dim + 1))
    acc = np.zeros((f.components * g.components,) + f.grid.shape)
    for off, w in zip(offsets, weights):
        shift = tuple(int(o) for o in off)
        df = np.roll(f.values, shift, axis=axes) - f.values
        dg = np.roll(g.values, shift, axis=axes) - g.values
        acc += w * _outer(df, dg)
    rf = f.values - mollify(f, m).values
    rg = g.values - mollify(g, m).values
    return TorusField(f.grid, acc - _outer(rf, rg))


def ceti_commutator(f: TorusField, g: TorusField, m: Mollifier, check: bool = True) -> TorusField:
    """(fg)^eps - f^eps g^eps, checked against the three-term commutator decomposition.

    The mismatch is measured relative to max|f| max|g|, the scale of the
    products that cancel; ``ArithmeticError`` is raised above ``CETI_RTOL``.
    """
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")
    direct = commutator_field(f, g, m)
    if check:
        other = ceti_decomposition(f, g, m)
        scale = np.abs(f.values).max() * np.abs(g.values).max()
        if scale > 0:
            err = np.abs(direct.values - other.values).max() / scale
            if err > CETI_RTOL:
                raise ArithmeticError(f"commutator identity violated: relative mismatch {err:.3e}")
    return direct


def commutator_norm(
    f: TorusField, g: TorusField, m: Mollifier, s: float, mode: str = "product"
) -> float:
    """||(fg)^eps - f^eps g^eps||_{L^s}, products formed on a 2x refined grid (alias-free)."""
    ff = upsample(f, 2)
    gg = ff if g is f else upsample(g, 2)
    return lebesgue_norm(commutator_field(ff, gg, m, mode), s, oversample=1)


def _derivative_norm(f: TorusField, k: int, q: float) -> float:
    out = f
    for _ in range(k):
        out = gradient(out)
    return lebesgue_norm(out, q)


def _check_ladder(eps_ladder: Sequence[float], grid: TorusGrid, minimum: int = 5) -> np.ndarray:
    eps = np.asarray(eps_ladder, dtype=float)
    if eps.size < minimum:
        raise ValueError(f"ladder needs at least {minimum} values, got {eps.size}")
    lo, hi = MIN_SPACINGS * grid.spacing * (1 - 1e-12), MAX_EPS
    if eps.min() < lo or eps.max() >= hi:
        raise ValueError(f"ladder outside resolved range [{lo:.4g}, {hi:.4g})")
    return eps


def mollification_rates(
    f: TorusField,
    spec: BesovSpec,
    eps_ladder: Sequence[float],
    k: int = 0,
    certificate=None,
) -> dict:
    """Slopes of ||f^eps - f||_{L^p} and ||grad^k f^eps||_{L^p} against eps (log2-log2 fits)."""
    if not 0 < spec.s < 1:
        raise ValueError("rates are stated for 0 < alpha < 1")
    if k not in (0, 1, 2):
        raise ValueError("derivative order must be 0, 1 or 2")
    eps = _check_ladder(eps_ladder, f.grid)
    err = np.empty(eps.size)
    deriv = np.empty(eps.size)
    for i, e in enumerate(eps):
        fe = mollify(f, Mollifier(f.grid, float(e)))
        err[i] = lebesgue_norm(fe - f, spec.p)
        deriv[i] = _derivative_norm(fe, k, spec.p)
    fit_err = loglog_fit(eps, err)
    fit_der = loglog_fit(eps, deriv)
    out = {
        "eps": eps,
        "difference": err,
        "derivative": deriv,
        "difference_slope": fit_err.slope,
        "derivative_slope": fit_der.slope,
        "difference_fit": fit_err,
        "derivative_fit": fit_der,
        "expected_difference": spec.s,
        "expected_derivative": spec.s - k,
    }
    if certificate is not None and certificate.planted_alpha is not None:
        out["planted_residual"] = fit_err.slope - certificate.planted_alpha
    return out


def _commutator_exponents(theta: float, p: float, q: float) -> tuple[float, float]:
    if not 0 < theta <= 2:
        raise ValueError(f"theta must lie in (0, 2], got {theta}")
    if not p > 1 or not q > 1:
        raise ValueError(f"exponents out of range: p={p}, q={q} (need > 1)")
    return p / (p - 1), q / (q - 1)


def tensor_commutator_norm(v: TorusField, m: Mollifier, theta: float, p: float, q: float) -> float:
    """||(v (x) v)^eps - v^eps (x) v^eps||_{L^s}, s = q/(q-1), at one eps and one snapshot."""
    _, s = _commutator_exponents(theta, p, q)
    return commutator_norm(v, v, m, s)


def commutator_scan(
    v: TorusField, eps_ladder: Sequence[float], theta: float, p: float, q: float, alpha: float | None = None
) -> dict:
    """eps-scan of the tensor commutator norm with a log-log slope; compared with theta*alpha if given."""
    r, s = _commutator_exponents(theta, p, q)
    eps = _check_ladder(eps_ladder, v.grid, minimum=2)
    vals = np.array([commutator_norm(v, v, Mollifier(v.grid, float(e)), s) for e in eps])
    fit = loglog_fit(eps, vals)
    out = {"eps": eps, "values": vals, "slope": fit.slope, "fit": fit, "r": r, "s": s}
    if alpha is not None:
        out["expected"] = theta * alpha
    return out


def commutator_vanishing(
    f: TorusField, g: TorusField, mollifiers: Sequence[Mollifier], mode: str = "product", q: float = 2.0
) -> np.ndarray:
    """eps -> ||(fg)^eps - f^eps g^eps||_{L^q} (or the cross-product variant) along a ladder."""
    if mode == "cross" and (f.components != 3 or g.components != 3):
        raise ValueError("cross mode needs three-component fields")
    g_arg = f if g is f else g
    return np.array([commutator_norm(f, g_arg, m, q, mode) for m in mollifiers])
