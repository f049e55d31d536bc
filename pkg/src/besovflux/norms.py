"""Lebesgue and Besov norms on the torus, plus the norm-only inequality checks.

All spatial L^p norms are computed by the rectangle rule on a grid refined by
``OVERSAMPLE`` (exact trigonometric interpolation), and 2D grids to at least
``MIN_FINE_2D`` points per axis, since |f|^p is not band-limited.  Vector and tensor fields are reduced pointwise with the
Euclidean norm over components before the spatial norm is taken.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .dyadic import make_partition
from .grid import TorusField, gradient, upsample
from .scaling import LOG_FLOOR, loglog_fit

__all__ = [
    "C_NAT",
    "VMO",
    "BesovSpec",
    "BesovReport",
    "lebesgue_norm",
    "lebesgue_norms",
    "time_lebesgue_norm",
    "besov_norm",
    "cnat_tail_diagnostic",
    "besov_vmo_functional",
    "check_interpolation_chain",
    "check_embedding_sembed",
    "gn_exponents",
    "check_gagliardo_nirenberg",
    "BERNSTEIN_EXPONENTS",
    "bernstein_ratios",
]

C_NAT = "cnat"
VMO = "vmo"
OVERSAMPLE = 2
# 2D fields are refined to at least this many points per axis; |f|^p has kinks
# where f vanishes and the rectangle rule converges only like n^-4 there
MIN_FINE_2D = 256

Summability = Union[float, str]


def _pointwise_magnitude(values: np.ndarray) -> np.ndarray:
    if values.shape[0] == 1:
        return np.abs(values[0])
    return np.sqrt(np.sum(values**2, axis=0))


def _norm_of_samples(mag: np.ndarray, p: float, cell: float) -> float:
    if p == np.inf:
        return float(mag.max())
    if p == 2:
        return float(np.sqrt(np.sum(mag * mag) * cell))
    return float((np.sum(mag**p) * cell) ** (1.0 / p))


def _check_p(p: float):
    if not p >= 1:
        raise ValueError(f"Lebesgue exponent must satisfy p >= 1, got {p}")


def _refinement(grid) -> int:
    if grid.dim <= 2:
        return max(OVERSAMPLE, MIN_FINE_2D // grid.n)
    return OVERSAMPLE


def lebesgue_norms(f: TorusField, ps: Sequence[float], oversample: int | None = None) -> list[float]:
    """Several L^p norms of one field from a single oversampled evaluation."""
    for p in ps:
        _check_p(p)
    if all(p == 2 for p in ps):
        # Parseval is exact and avoids the refined grid
        val = float(np.sqrt(np.sum(np.abs(f.spectral) ** 2) * f.grid.volume))
        return [val for _ in ps]
    fine = upsample(f, _refinement(f.grid) if oversample is None else oversample)
    mag = _pointwise_magnitude(fine.values)
    cell = fine.grid.cell_volume
    return [_norm_of_samples(mag, float(p), cell) for p in ps]


def lebesgue_norm(f: TorusField, p: float, oversample: int | None = None) -> float:
    return lebesgue_norms(f, [p], oversample)[0]


def time_lebesgue_norm(values: Sequence[float], times: Sequence[float], p: float) -> float:
    """L^p(0,T) norm of a snapshot series (rectangle rule, left endpoints)."""
    _check_p(p)
    values = np.abs(np.asarray(values, dtype=float))
    times = np.asarray(times, dtype=float)
    if values.size < 2:
        raise ValueError("need at least two snapshots for a time norm")
    dt = np.diff(times)
    v = values[:-1]
    if p == np.inf:
        return float(values.max())
    return float(np.sum(dt * v**p) ** (1.0 / p))


@dataclass(frozen=True)
class BesovSpec:
    """Space descriptor B^s_{p,q}; ``q`` may be a number, ``C_NAT`` or ``VMO``."""

    s: float
    p: float
    q: Summability = np.inf

    def __post_init__(self):
        _check_p(self.p)
        if isinstance(self.q, str):
            if self.q not in (C_NAT, VMO):
                raise ValueError(f"unknown summability {self.q!r}")
        elif not self.q >= 1:
            raise ValueError(f"summability must be >= 1, got {self.q}")

    @property
    def q_numeric(self) -> float:
        return np.inf if isinstance(self.q, str) else float(self.q)

    def to_dict(self) -> dict:
        q = self.q if isinstance(self.q, str) else _num(self.q)
        return {"s": self.s, "p": _num(self.p), "q": q}


def _num(x: float):
    return "inf" if x == np.inf else float(x)


def _aggregate(d: np.ndarray, q: float) -> float:
    if q == np.inf:
        return float(d.max()) if d.size else 0.0
    return float(np.sum(d**q) ** (1.0 / q))


@dataclass(frozen=True)
class BesovReport:
    """Per-scale sequence d_j = 2^{js} ||Delta_j f||_{L^p} and its aggregates.

    ``norm`` is the l^q aggregate of ``d_j`` over j = -1..j_max.
    ``homogeneous`` aggregates the homogeneous blocks (zero mode discarded) and
    ``equivalent_norm = lp_part + homogeneous`` is the equivalent form valid for s > 0.
    """

    spec: BesovSpec
    j: np.ndarray
    d_j: np.ndarray
    norm: float
    homogeneous_d_j: np.ndarray
    homogeneous: float
    lp_part: float
    tail_sup: float
    j_resolved: int
    slope: float | None = field(default=None)

    @property
    def equivalent_norm(self) -> float:
        return self.lp_part + self.homogeneous

    def resolved(self) -> tuple[np.ndarray, np.ndarray]:
        keep = self.j <= self.j_resolved
        return self.j[keep], self.d_j[keep]

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "j": [int(j) for j in self.j],
            "d_j": [float(d) for d in self.d_j],
            "norm": self.norm,
            "homogeneous": self.homogeneous,
            "lp_part": self.lp_part,
            "equivalent_norm": self.equivalent_norm,
            "tail_sup": self.tail_sup,
            "j_resolved": self.j_resolved,
            "slope": self.slope,
        }

    def to_json(self, **extra) -> str:
        payload = self.to_dict()
        payload.update(extra)
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "d_j"])
        for j, d in zip(self.j, self.d_j):
            w.writerow([int(j), repr(float(d))])
        return buf.getvalue()


def besov_norm(f: TorusField, spec: BesovSpec) -> BesovReport:
    part = make_partition(f.grid)
    js = np.array(list(part.indices))
    d = np.empty(js.size)
    dh = np.empty(js.size)
    for i, j in enumerate(js):
        w = 2.0 ** (j * spec.s)
        d[i] = w * lebesgue_norm(f.apply_multiplier(part.block_multiplier(j), even=True), spec.p)
        if j >= 0:
            dh[i] = d[i]
        else:
            dh[i] = w * lebesgue_norm(f.apply_multiplier(part.homogeneous_multiplier(j), even=True), spec.p)
    q = spec.q_numeric
    resolved = d[js <= part.j_resolved]
    top = resolved[-max(1, math.ceil(resolved.size / 3)) :]
    report = BesovReport(
        spec=spec,
        j=js,
        d_j=d,
        norm=_aggregate(d, q),
        homogeneous_d_j=dh,
        homogeneous=_aggregate(dh, q),
        lp_part=lebesgue_norm(f, spec.p),
        tail_sup=float(top.max()),
        j_resolved=part.j_resolved,
    )
    if spec.q == C_NAT and part.j_resolved >= 3:
        slope = cnat_tail_diagnostic(report)["slope"]
        report = BesovReport(**{**report.__dict__, "slope": slope})
    return report


def cnat_tail_diagnostic(report: BesovReport) -> dict:
    """Least-squares slope of log2 d_j over the top half of the resolved j >= 0.

    A negative slope is consistent with the vanishing-tail (c(N)) condition,
    a slope near zero with B^s_{p,inf} outside it.  No verdict is returned.
    """
    js, d = report.resolved()
    keep = js >= 0
    js, d = js[keep], d[keep]
    if js.size < 4:
        raise ValueError(f"need at least 4 resolved scales, have {js.size}")
    m = max(2, math.ceil(js.size / 2))
    js_top, d_top = js[-m:], d[-m:]
    fit = loglog_fit(2.0**js_top, np.maximum(d_top, LOG_FLOOR))
    return {"j": js_top.tolist(), "d_j": d_top.tolist(), "slope": fit.slope, "r2": fit.r2}


def _ball_offsets(grid, eps: float) -> np.ndarray:
    r = int(np.floor(eps / grid.spacing + 1e-12))
    ax = np.arange(-r, r + 1)
    offs = np.stack(np.meshgrid(*([ax] * grid.dim), indexing="ij"), axis=-1).reshape(-1, grid.dim)
    dist = np.sqrt(np.sum(offs**2, axis=1)) * grid.spacing
    return offs[dist <= eps * (1 + 1e-12)]


def besov_vmo_functional(
    f: TorusField, spec: BesovSpec, eps_list: Sequence[float], inner: float | None = None
) -> np.ndarray:
    """V(eps) = eps^-s ( int [avg_{|y|<=eps} |f(x) - f(x-y)|^q dy]^{p/q} dx )^{1/p}.

    The ball average runs over grid nodes within distance eps, so shifts are
    exact rolls.  ``inner`` is the exponent q inside the average (defaults to p).
    """
    grid = f.grid
    p = spec.p
    q = p if inner is None else inner
    if not 1 <= q < np.inf:
        raise ValueError(f"inner exponent must be finite and >= 1, got {q}")
    out = []
    axes = tuple(range(1, grid.dim + 1))
    for eps in eps_list:
        if eps < grid.spacing:
            raise ValueError(f"unresolved scale: eps={eps} is below one grid spacing")
        offs = _ball_offsets(grid, eps)
        acc = np.zeros(grid.shape)
        for m in offs:
            diff = f.values - np.roll(f.values, tuple(m), axis=axes)
            acc += _pointwise_magnitude(diff) ** q
        local = (acc / len(offs)) ** (1.0 / q)
        val = _norm_of_samples(local, p, grid.cell_volume)
        out.append(val / eps**spec.s)
    return np.array(out)


def _dual_exponent(p: float) -> float:
    return np.inf if p == 1 else 2 * p / (p - 1)


def check_interpolation_chain(f: TorusField, p: float) -> dict:
    """Per block: ||D_j f||_3 against ||D_j f||_2^{1-p/3} ||D_j f||_{2p/(p-1)}^{p/3}."""
    if not 1 <= p <= 3:
        raise ValueError(f"interpolation chain needs 1 <= p <= 3, got {p}")
    part = make_partition(f.grid)
    r = _dual_exponent(p)
    js = np.array(list(part.indices))
    lhs, rhs, lhs_w, rhs_w = (np.empty(js.size) for _ in range(4))
    l2_total = lebesgue_norm(f, 2)
    for i, j in enumerate(js):
        block = f.apply_multiplier(part.block_multiplier(j), even=True)
        n3, n2, nr = lebesgue_norms(block, [3, 2, r])
        lhs[i] = n3
        rhs[i] = n2 ** (1 - p / 3) * nr ** (p / 3)
        lhs_w[i] = 2.0 ** (j / 3) * n3
        rhs_w[i] = l2_total ** (1 - p / 3) * (2.0 ** (j / p) * nr) ** (p / 3)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.nan)
    return {"j": js, "lhs": lhs, "rhs": rhs, "ratio": ratio, "lhs_weighted": lhs_w, "rhs_weighted": rhs_w}


def check_embedding_sembed(f: TorusField, p: float) -> dict:
    """B^{1/p}_{2p/(p-1),inf} norm of f against ||grad f||_{L^{6p/(5p-5)}} (one snapshot, 3D)."""
    if not 1 < p <= 3:
        raise ValueError(f"embedding check needs 1 < p <= 3, got {p}")
    if f.grid.dim != 3:
        raise ValueError("embedding check is stated for dim = 3")
    grad_exp = 6 * p / (5 * p - 5)
    lhs = besov_norm(f, BesovSpec(1 / p, 2 * p / (p - 1), np.inf)).norm
    rhs = lebesgue_norm(gradient(f), grad_exp)
    ratio = None if lhs == 0 and rhs == 0 else (lhs / rhs if rhs > 0 else np.inf)
    return {"lhs_norm": lhs, "rhs_norm": rhs, "ratio": ratio, "gradient_exponent": grad_exp}


def gn_exponents(d, p, variant: str = "energy") -> dict:
    """Exponents of the Gagliardo-Nirenberg step.

    Returns the target Lebesgue exponent, the gradient exponent and the two
    interpolation weights (L^2 weight, gradient weight).  Works with
    ``fractions.Fraction`` inputs for exact arithmetic.
    """
    if variant == "energy":
        target = 4 * d * p / (d * p + d - 2 * p + 2)
        grad = 2 * d * p / ((d + 2) * (p - 1))
        w_l2 = (6 - 2 * p - p * d + 3 * d) / (2 * d + 4)
        w_grad = (p * d + 2 * p - 2 - d) / (2 * d + 4)
    elif variant == "helicity":
        if d != 3:
            raise ValueError("helicity variant is three-dimensional")
        target = 3 * p / (7 - 2 * p)
        grad = 6 * p / (5 * p - 7)
        w_l2 = (21 - 7 * p) / 7
        w_grad = (7 * p - 14) / 7
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return {"target": target, "gradient": grad, "weight_l2": w_l2, "weight_gradient": w_grad}


def check_gagliardo_nirenberg(f: TorusField, p: float, variant: str = "energy") -> dict:
    """Both sides of ||f||_r <= C ||f||_2^a ||grad f||_m^b, plus the torus form with + ||f||_2."""
    lo = 1 if variant == "energy" else 2
    if not lo < p <= 3:
        raise ValueError(f"{variant} variant needs {lo} < p <= 3, got {p}")
    e = gn_exponents(f.grid.dim, p, variant)
    for name in ("target", "gradient"):
        if not 1 <= e[name] <= np.inf:
            raise ValueError(f"configuration error: {name} exponent {e[name]} outside [1, inf]")
    lhs, l2 = lebesgue_norms(f, [e["target"], 2])
    g = lebesgue_norm(gradient(f), e["gradient"])
    rhs_hom = l2 ** e["weight_l2"] * g ** e["weight_gradient"]
    return {
        "lhs": lhs,
        "rhs": rhs_hom + l2,
        "rhs_homogeneous": rhs_hom,
        "exponents": {k: float(v) for k, v in e.items()},
    }


BERNSTEIN_EXPONENTS = (1.0, 2.0, 3.0, 4.0, np.inf)


def bernstein_ratios(f: TorusField, exponents: Sequence[float] = BERNSTEIN_EXPONENTS) -> dict:
    """Per-block Bernstein quotients.

    ``upper[(j, a, b)]`` is ||grad D_j f||_b / (2^{j(1 + d(1/a - 1/b))} ||D_j f||_a) for a <= b;
    ``lower[(j, a)]`` is 2^j ||D_j f||_a / ||grad D_j f||_a for j >= 0.  Blocks that
    vanish identically are skipped.
    """
    part = make_partition(f.grid)
    d = f.grid.dim
    ps = sorted(float(p) for p in exponents)
    upper, lower = {}, {}
    for j in part.indices:
        block = f.apply_multiplier(part.block_multiplier(j), even=True)
        nb = dict(zip(ps, lebesgue_norms(block, ps)))
        if nb[2.0 if 2.0 in nb else ps[0]] == 0:
            continue
        ng = dict(zip(ps, lebesgue_norms(gradient(block), ps)))
        for a in ps:
            for b in ps:
                if b < a:
                    continue
                inv = (1.0 / a) - (0.0 if b == np.inf else 1.0 / b)
                upper[(j, a, b)] = ng[b] / (2.0 ** (j * (1 + d * inv)) * nb[a])
            if j >= 0 and ng[a] > 0:
                lower[(j, a)] = 2.0**j * nb[a] / ng[a]
    return {"upper": upper, "lower": lower}
