"""Scale-to-scale transfer functionals for energy and helicity.

All integrals are evaluated as Parseval sums of exactly computed products.  A
product of two fields whose coefficients vanish outside the dealiasing ball is
alias-free on the native grid inside that ball, which is all the pairing with a
band-limited test factor ever sees; anything else is evaluated on a grid refined
by two.

Sign conventions:

* ``energy_flux_LP`` is Pi_N = -d/dt (1/2)||S_N v||^2 along exact Euler
  evolution, so Pi_N > 0 means energy leaves the scales <= N.
* ``energy_flux_moll`` equals d/dt (1/2)||v^eps||^2.
* ``helicity_flux_LP`` equals d/dt int S_N v . S_N omega.
* ``helicity_flux_moll`` is 2 int (v^eps (x) v^eps - (v (x) v)^eps) : grad omega^eps,
  which is minus d/dt int v^eps . omega^eps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dyadic import make_partition
from .grid import TorusField, TorusGrid, padded_coefficients
from .mollify import Mollifier
from .scaling import SlopeFit, loglog_fit

__all__ = [
    "ENERGY_LP",
    "ENERGY_MOLL",
    "HELICITY_LP",
    "HELICITY_MOLL",
    "FLUX_KINDS",
    "DIV_TOL",
    "FluxSeries",
    "GammaKernel",
    "GammaBound",
    "TimeWindow",
    "energy_flux_LP",
    "energy_flux_moll",
    "helicity_flux_LP",
    "helicity_flux_LP_rotational",
    "helicity_flux_moll",
    "lowpass_energy",
    "lowpass_helicity",
    "mollified_energy",
    "mollified_helicity",
    "gamma_bound",
    "flux_scan",
    "pressure",
    "weak_solution_residual",
]

ENERGY_LP = "energy_LP"
ENERGY_MOLL = "energy_moll"
HELICITY_LP = "helicity_LP"
HELICITY_MOLL = "helicity_moll"
FLUX_KINDS = (ENERGY_LP, ENERGY_MOLL, HELICITY_LP, HELICITY_MOLL)

# relative |k . vhat| allowed before a field is refused as compressible
DIV_TOL = 1e-10
# coefficients outside the dealiasing ball below this (relative) count as absent
CLEAN_RTOL = 1e-13
# relative mismatch allowed between the two helicity formulations
FORM_RTOL = 1e-8


class _Work:
    """A vector field's coefficients on the grid where its products are exact."""

    def __init__(self, v: TorusField):
        grid = v.grid
        spec = v.spectral
        peak = np.abs(spec).max()
        clean = np.abs(spec[:, ~grid.dealias_mask]).max(initial=0.0) <= CLEAN_RTOL * peak
        self.coarse = grid
        self.factor = 1 if clean else 2
        self.grid = grid if clean else grid.refined(2)
        self.spec = v.spectral if clean else padded_coefficients(grid, v.spectral, 2)
        self.kvec = self.grid.kvec

    def phys(self, spec: np.ndarray) -> np.ndarray:
        axes = tuple(range(-self.grid.dim, 0))
        return np.fft.ifftn(spec, axes=axes).real * self.grid.n**self.grid.dim

    def fft(self, values: np.ndarray) -> np.ndarray:
        axes = tuple(range(-self.grid.dim, 0))
        return np.fft.fftn(values, axes=axes) / self.grid.n**self.grid.dim

    def outer(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Coefficients of a_i b_j, shape (d, d, ...)."""
        return self.fft(a[:, None] * b[None, :])

    def cross(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.fft(
            np.stack([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
        )

    def grad(self, spec: np.ndarray) -> np.ndarray:
        """Coefficients of d_j u_i, shape (d, d, ...)."""
        return 1j * spec[:, None] * self.kvec[None, :]

    def curl(self, spec: np.ndarray) -> np.ndarray:
        k = self.kvec
        return 1j * np.stack(
            [
                k[1] * spec[2] - k[2] * spec[1],
                k[2] * spec[0] - k[0] * spec[2],
                k[0] * spec[1] - k[1] * spec[0],
            ]
        )

    def pair(self, a: np.ndarray, b: np.ndarray) -> float:
        """int a . b over the torus for real fields given by coefficients."""
        return float(np.sum((a * np.conj(b)).real) * self.grid.volume)


def _require_vector(v: TorusField, dim: int | None = None):
    if v.components != v.grid.dim:
        raise ValueError("flux functionals need a velocity field")
    if dim is not None and v.grid.dim != dim:
        raise ValueError(f"this functional needs dim = {dim}, got {v.grid.dim}")
    div = v.max_divergence()
    if div > DIV_TOL:
        raise ValueError(f"velocity is not divergence-free (relative |k.v| = {div:.3e})")


def _check_N(v: TorusField, N: int):
    part = make_partition(v.grid)
    if not 0 <= N <= part.j_max:
        raise IndexError(f"scale N={N} outside [0, {part.j_max}]")
    return part


def _mollifier_multiplier(m: Mollifier, w: _Work) -> np.ndarray:
    if m.grid != w.coarse:
        raise ValueError(f"mollifier built on {m.grid}, field lives on {w.coarse}")
    return m.multiplier(w.grid)


def energy_flux_LP(v: TorusField, N: int) -> float:
    """Pi_N = -int S_N[v_j (I - S_N^2) v_i] S_N d_j v_i dx."""
    _require_vector(v)
    part = _check_N(v, N)
    w = _Work(v)
    s = part.lowpass_multiplier(N, kmag=w.grid.kmag)
    u = w.phys(w.spec)
    high = w.phys(w.spec * (1.0 - s * s))
    prod = w.fft(high[:, None] * u[None, :])  # v_j (I - S_N^2) v_i at [i, j]
    return -w.pair(s * prod, s * w.grad(w.spec))


def energy_flux_moll(v: TorusField, m: Mollifier) -> float:
    """int [(v (x) v)^eps - v^eps (x) v^eps] : grad v^eps dx."""
    _require_vector(v)
    w = _Work(v)
    eta = _mollifier_multiplier(m, w)
    u = w.phys(w.spec)
    ue = w.phys(eta * w.spec)
    comm = eta * w.outer(u, u) - w.outer(ue, ue)
    return w.pair(comm, w.grad(eta * w.spec))


def helicity_flux_LP(v: TorusField, N: int, cross_check: bool = False) -> float:
    """2 int (S_N(v (x) v) - S_N v (x) S_N v) : grad S_N omega dx.

    With ``cross_check`` the rotational form is evaluated as well and an
    ``ArithmeticError`` is raised if the two disagree beyond ``FORM_RTOL``.
    """
    _require_vector(v, dim=3)
    part = _check_N(v, N)
    w = _Work(v)
    s = part.lowpass_multiplier(N, kmag=w.grid.kmag)
    u = w.phys(w.spec)
    us = w.phys(s * w.spec)
    comm = s * w.outer(u, u) - w.outer(us, us)
    value = 2.0 * w.pair(comm, w.grad(s * w.curl(w.spec)))
    if cross_check:
        other = _helicity_rotational(w, s)
        scale = _helicity_scale(w)
        if abs(value - other) > FORM_RTOL * max(abs(value), abs(other), scale):
            raise ArithmeticError(f"helicity flux forms disagree: {value!r} vs {other!r}")
    return value


def _helicity_rotational(w: _Work, s: np.ndarray) -> float:
    om = w.curl(w.spec)
    u = w.phys(w.spec)
    o = w.phys(om)
    us = w.phys(s * w.spec)
    os_ = w.phys(s * om)
    comm = s * w.cross(o, u) - w.cross(os_, us)
    return -2.0 * w.pair(comm, s * om)


def _helicity_scale(w: _Work) -> float:
    # size of the individual products that cancel, times a round-off allowance
    u = w.phys(w.spec)
    g = w.phys(w.grad(w.curl(w.spec)))
    return 1e-4 * float(np.abs(u).max() ** 2 * np.abs(g).max() * w.grid.volume)


def helicity_flux_LP_rotational(v: TorusField, N: int) -> float:
    """-2 int [S_N(omega x v) - S_N omega x S_N v] . S_N omega dx."""
    _require_vector(v, dim=3)
    part = _check_N(v, N)
    w = _Work(v)
    return _helicity_rotational(w, part.lowpass_multiplier(N, kmag=w.grid.kmag))


def helicity_flux_moll(v: TorusField, m: Mollifier) -> float:
    """2 int (v^eps (x) v^eps - (v (x) v)^eps) : grad omega^eps dx."""
    _require_vector(v, dim=3)
    w = _Work(v)
    eta = _mollifier_multiplier(m, w)
    u = w.phys(w.spec)
    ue = w.phys(eta * w.spec)
    comm = w.outer(ue, ue) - eta * w.outer(u, u)
    return 2.0 * w.pair(comm, w.grad(eta * w.curl(w.spec)))


def _l2(spec: np.ndarray, grid: TorusGrid) -> float:
    return float(np.sum(np.abs(spec) ** 2) * grid.volume)


def lowpass_energy(v: TorusField, N: int) -> float:
    """(1/2)||S_N v||^2."""
    s = make_partition(v.grid).lowpass_multiplier(N)
    return 0.5 * _l2(s * v.spectral, v.grid)


def mollified_energy(v: TorusField, m: Mollifier) -> float:
    return 0.5 * _l2(m.multiplier(v.grid) * v.spectral, v.grid)


def _helicity_of(spec: np.ndarray, grid: TorusGrid) -> float:
    k = grid.kvec
    om = 1j * np.stack(
        [k[1] * spec[2] - k[2] * spec[1], k[2] * spec[0] - k[0] * spec[2], k[0] * spec[1] - k[1] * spec[0]]
    )
    return float(np.sum((spec * np.conj(om)).real) * grid.volume)


def lowpass_helicity(v: TorusField, N: int) -> float:
    """int S_N v . S_N omega."""
    if v.grid.dim != 3:
        raise ValueError("helicity needs dim = 3")
    s = make_partition(v.grid).lowpass_multiplier(N)
    return _helicity_of(s * v.spectral, v.grid)


def mollified_helicity(v: TorusField, m: Mollifier) -> float:
    if v.grid.dim != 3:
        raise ValueError("helicity needs dim = 3")
    return _helicity_of(m.multiplier(v.grid) * v.spectral, v.grid)


@dataclass
class FluxSeries:
    """Flux values along a scale ladder (integer N) or a mollifier ladder (eps)."""

    kind: str
    index: np.ndarray
    values: np.ndarray
    slope: SlopeFit | None = None
    exponents: dict = field(default_factory=dict)
    budget_residual: float | None = None

    def __post_init__(self):
        if self.kind not in FLUX_KINDS:
            raise ValueError(f"unknown flux kind {self.kind!r}")
        self.index = np.asarray(self.index)
        self.values = np.asarray(self.values, dtype=float)
        if self.index.shape != self.values.shape or self.index.ndim != 1:
            raise ValueError("index and values must be matching 1-d sequences")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("flux values must be finite")
        steps = np.diff(self.index.astype(float))
        if self.index.size > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("flux index must be strictly monotone")

    @property
    def by_scale(self) -> bool:
        return self.kind in (ENERGY_LP, HELICITY_LP)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "exponents": self.exponents,
            "slope": None if self.slope is None else self.slope.to_dict(),
            "budget_residual": self.budget_residual,
            "index": [int(i) if self.by_scale else float(i) for i in self.index],
            "values": [float(x) for x in self.values],
        }

    def to_json(self, **extra) -> str:
        payload = self.to_dict()
        payload.update(extra)
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        name = "N" if self.by_scale else "eps"
        rows = [f"{name},value"]
        for i, x in zip(self.index, self.values):
            idx = str(int(i)) if self.by_scale else repr(float(i))
            rows.append(f"{idx},{float(x)!r}")
        return "\n".join(rows) + "\n"


def _fit_decay(kind: str, index: np.ndarray, values: np.ndarray) -> SlopeFit | None:
    """log2 |value| against N (scale ladders) or against log2 eps (mollifier ladders).

    Exact zeros carry no slope information and are skipped.
    """
    keep = np.abs(values) > 0
    if keep.sum() < 2:
        return None
    x = np.asarray(index, dtype=float)[keep]
    y = np.abs(values[keep])
    if kind in (ENERGY_LP, HELICITY_LP):
        return loglog_fit(2.0**x, y)
    return loglog_fit(x, y)


def flux_scan(v: TorusField, kind: str, index: Sequence[float], exponents: dict | None = None) -> FluxSeries:
    """Evaluate one flux functional along a ladder and fit its decay."""
    if kind == ENERGY_LP:
        vals = [energy_flux_LP(v, int(N)) for N in index]
    elif kind == HELICITY_LP:
        vals = [helicity_flux_LP(v, int(N)) for N in index]
    elif kind == ENERGY_MOLL:
        vals = [energy_flux_moll(v, Mollifier(v.grid, float(e))) for e in index]
    elif kind == HELICITY_MOLL:
        vals = [helicity_flux_moll(v, Mollifier(v.grid, float(e))) for e in index]
    else:
        raise ValueError(f"unknown flux kind {kind!r}")
    index = np.asarray(index, dtype=int if kind in (ENERGY_LP, HELICITY_LP) else float)
    values = np.asarray(vals)
    return FluxSeries(kind, index, values, _fit_decay(kind, index, values), dict(exponents or {}))


@dataclass(frozen=True)
class GammaKernel:
    """Two-sided geometric weight 2^{j a} for j <= 0 and 2^{-(1-a) j} for j > 0."""

    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"kernel exponent must lie in (0, 1), got {self.alpha}")

    def __call__(self, j) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        return np.where(j <= 0, 2.0 ** (j * self.alpha), 2.0 ** (-(1.0 - self.alpha) * j))

    def l1_norm(self) -> float:
        a = self.alpha
        left = 1.0 / (1.0 - 2.0**-a)
        right = 2.0 ** (a - 1.0) / (1.0 - 2.0 ** (a - 1.0))
        return left + right

    def convolve(self, d: Sequence[float], N: int, j_min: int = -1) -> float:
        """(Gamma * d)(N) = sum_j Gamma(N - j) d_j over the supplied indices."""
        d = np.asarray(d, dtype=float)
        j = j_min + np.arange(d.size)
        return float(np.sum(self(N - j) * d))


@dataclass(frozen=True)
class GammaBound:
    value: float
    exponent: float
    conv_d: float
    conv_dtilde: float
    warning: str | None = None


def gamma_bound(
    d: Sequence[float],
    dtilde: Sequence[float] | None,
    alpha: float,
    beta: float | None,
    theta: float,
    N: int,
    C: float = 1.0,
    j_min: int = -1,
) -> GammaBound:
    """C 2^{e N} (Gamma * d)^theta(N) (Gamma_2 * dtilde)(N).

    Without ``beta`` the second factor reuses the velocity sequence and kernel and
    e = 2 - alpha - theta alpha, which is critical at zero.  With ``beta`` the
    second kernel has exponent beta and e = 1 - beta - theta alpha, which must
    not be positive.  Exponent mismatches are recorded, not raised.
    """
    d = np.asarray(d, dtype=float)
    dt = d if dtilde is None else np.asarray(dtilde, dtype=float)
    if np.any(d < 0) or np.any(dt < 0):
        raise ValueError("per-scale sequences must be nonnegative")
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    g1 = GammaKernel(alpha)
    if beta is None:
        g2 = g1
        exponent = 2.0 - alpha - theta * alpha
        warning = None if abs(exponent) < 1e-12 else f"2 - alpha - theta*alpha = {exponent:.6g}, not critical"
    else:
        g2 = GammaKernel(beta)
        exponent = 1.0 - beta - theta * alpha
        warning = None if exponent <= 1e-12 else f"1 - beta - theta*alpha = {exponent:.6g} > 0"
    c1 = g1.convolve(d, N, j_min)
    c2 = g2.convolve(dt, N, j_min)
    value = C * 2.0 ** (exponent * N) * c1**theta * c2
    return GammaBound(float(value), float(exponent), c1, c2, warning)


def pressure(v: TorusField) -> TorusField:
    """Solution of -Lap P = div div (v (x) v) with zero mean."""
    _require_vector(v)
    w = _Work(v)
    u = w.phys(w.spec)
    prod = w.outer(u, u)
    k = w.kvec
    k2 = np.where(w.grid.k2 == 0, 1.0, w.grid.k2)
    spec = -np.einsum("i...,j...,ij...->...", k, k, prod) / k2
    spec[(0,) * w.grid.dim] = 0.0
    if w.factor > 1:
        spec = _truncate(spec, w.grid, v.grid)
    return TorusField.from_spectral(v.grid, spec)


def _truncate(spec: np.ndarray, fine: TorusGrid, coarse: TorusGrid) -> np.ndarray:
    """Restrict fine-grid coefficients to the coarse lattice (exact for pairings with fields empty on the Nyquist planes)."""
    idx = np.ix_(*([np.mod(np.fft.fftfreq(coarse.n, 1.0 / coarse.n), fine.n).astype(int)] * coarse.dim))
    return spec[idx]


@dataclass(frozen=True)
class TimeWindow:
    """Smooth bump exp(1 - 1/(1 - s^2)) in time, s mapping (t0, t1) onto (-1, 1)."""

    t0: float
    t1: float

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError("time window needs t1 > t0")

    def _s(self, t):
        return (2.0 * np.asarray(t, dtype=float) - self.t0 - self.t1) / (self.t1 - self.t0)

    def __call__(self, t):
        s = self._s(t)
        out = np.zeros_like(s)
        inside = np.abs(s) < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out

    def derivative(self, t):
        s = self._s(t)
        out = np.zeros_like(s)
        inside = np.abs(s) < 1
        si = s[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - si**2)) * (-2.0 * si / (1.0 - si**2) ** 2)
        return out * 2.0 / (self.t1 - self.t0)


def weak_solution_residual(
    trajectory: Sequence,
    test_field: TorusField,
    window: TimeWindow | Callable | None = None,
    scalar_test: TorusField | None = None,
) -> float:
    """Residual of the distributional Euler equations against phi(x, t) = w(t) psi(x).

    ``trajectory`` is a time-ordered sequence of states exposing ``t`` and
    ``velocity()``.  The momentum identity

        int [v(T).phi(T) - v(0).phi(0)] = int int v.d_t phi + (v (x) v) : grad phi + P div phi

    and the weak incompressibility int int v . grad(w chi) are both evaluated, time
    integrals by the trapezoid rule over the stored states; the sum of their
    absolute residuals is returned.  ``window`` defaults to a bump supported on
    the trajectory's time span.  ``chi`` defaults to the first component of psi.
    """
    states = list(trajectory)
    if len(states) < 2:
        raise ValueError("need at least two states for a time integral")
    grid = test_field.grid
    if test_field.components != grid.dim:
        raise ValueError("test field must be a vector field")
    times = np.array([s.t for s in states], dtype=float)
    if window is None:
        window = TimeWindow(times[0], times[-1])
    if not hasattr(window, "derivative"):
        raise ValueError("window must provide derivative(t)")
    chi = test_field[0] if scalar_test is None else scalar_test
    k = grid.kvec
    grad_psi = 1j * test_field.spectral[:, None] * k[None, :]
    div_psi = np.sum(1j * k * test_field.spectral, axis=0)
    grad_chi = 1j * k * chi.spectral[0]

    w_t = np.asarray(window(times), dtype=float)
    dw_t = np.asarray(window.derivative(times), dtype=float)
    pair_v, pair_flux, pair_p, pair_div = (np.empty(len(states)) for _ in range(4))
    for i, s in enumerate(states):
        v = s.velocity()
        if v.grid != grid:
            raise ValueError(f"trajectory grid {v.grid} does not match test field grid {grid}")
        vs = v.spectral
        pair_v[i] = _pair(vs, test_field.spectral, grid)
        w = _Work(v)
        u = w.phys(w.spec)
        prod = w.outer(u, u)
        if w.factor > 1:
            prod = _truncate(prod, w.grid, grid)
        pair_flux[i] = _pair(prod, grad_psi, grid)
        pair_p[i] = _pair(pressure(v).spectral[0], div_psi, grid)
        pair_div[i] = _pair(vs, grad_chi, grid)
    lhs = w_t[-1] * pair_v[-1] - w_t[0] * pair_v[0]
    rhs = np.trapezoid(dw_t * pair_v + w_t * (pair_flux + pair_p), times)
    incompressible = np.trapezoid(w_t * pair_div, times)
    return float(abs(lhs - rhs) + abs(incompressible))


def _pair(a: np.ndarray, b: np.ndarray, grid: TorusGrid) -> float:
    return float(np.sum((a * np.conj(b)).real) * grid.volume)
