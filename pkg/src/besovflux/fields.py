"""Synthetic divergence-free velocity fields with known regularity.

Random generators use ``numpy.random.Philox`` (a counter-based generator) keyed
by the integer seed, so (seed, grid, parameters) fix a field bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dyadic import make_partition
from .grid import TorusField, TorusGrid, leray_coefficients
from .norms import C_NAT, BesovSpec, besov_norm, lebesgue_norm

__all__ = [
    "GeneratorCertificate",
    "taylor_green_2d",
    "taylor_green_pressure",
    "abc_flow",
    "single_mode",
    "lacunary_field",
    "random_smooth_field",
    "random_band_limited_field",
    "shell_annulus",
]

RNG_ALGORITHM = "numpy.random.Philox"
PLANT_TOLERANCE = 0.05
MAX_RESCALES = 5


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) % 2**64))


@dataclass
class GeneratorCertificate:
    kind: str
    seed: int | None = None
    planted_alpha: float | None = None
    planted_p: float | None = None
    planted_dj: list[float] | None = None
    norms_at_build: list[float] | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "rng": RNG_ALGORITHM,
            "planted_alpha": self.planted_alpha,
            "planted_p": self.planted_p,
            "planted_dj": self.planted_dj,
            "norms_at_build": self.norms_at_build,
            "params": self.params,
        }

    def to_json(self, **extra) -> str:
        payload = self.to_dict()
        payload.update(extra)
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorCertificate":
        keys = ("kind", "seed", "planted_alpha", "planted_p", "planted_dj", "norms_at_build", "params")
        return cls(**{k: d[k] for k in keys if k in d})


def taylor_green_2d(grid: TorusGrid, amplitude: float = 1.0) -> TorusField:
    """(sin x cos y, -cos x sin y), a steady Euler flow."""
    if grid.dim != 2:
        raise ValueError("Taylor-Green field is two-dimensional")
    x, y = grid.coords
    return TorusField(grid, amplitude * np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)]))


def taylor_green_pressure(grid: TorusGrid, amplitude: float = 1.0) -> TorusField:
    x, y = grid.coords
    return TorusField(grid, amplitude**2 * (np.cos(2 * x) + np.cos(2 * y)) / 4)


def abc_flow(grid: TorusGrid, A: float = 1.0, B: float = 1.0, C: float = 1.0) -> TorusField:
    """Arnold-Beltrami-Childress flow; curl v = v for every (A, B, C)."""
    if grid.dim != 3:
        raise ValueError("ABC flow is three-dimensional")
    x, y, z = grid.coords
    return TorusField(
        grid,
        np.stack(
            [
                A * np.sin(z) + C * np.cos(y),
                B * np.sin(x) + A * np.cos(z),
                C * np.sin(y) + B * np.cos(x),
            ]
        ),
    )


def single_mode(grid: TorusGrid, k: Sequence[int], amplitude: Sequence[float]) -> TorusField:
    """a cos(k.x); the amplitude vector must be orthogonal to k."""
    k = np.asarray(k, dtype=float)
    a = np.asarray(amplitude, dtype=float)
    if abs(np.dot(k, a)) > 1e-12 * max(1.0, np.linalg.norm(a) * np.linalg.norm(k)):
        raise ValueError("amplitude must be orthogonal to k for a divergence-free mode")
    phase = sum(ki * xi for ki, xi in zip(k, grid.coords))
    return TorusField(grid, a.reshape((-1,) + (1,) * grid.dim) * np.cos(phase)[None])


def _unit_phase_coefficients(grid: TorusGrid, rng: np.random.Generator) -> np.ndarray:
    """Divergence-free coefficients with |vhat(k)| = 1 and uniformly random phase, Hermitian."""
    noise = rng.standard_normal((grid.dim,) + grid.shape)
    spec = np.fft.fftn(noise, axes=tuple(range(1, grid.dim + 1)))
    spec = leray_coefficients(grid, spec)
    mag = np.sqrt(np.sum(np.abs(spec) ** 2, axis=0))
    spec = np.where(mag > 0, spec / np.where(mag > 0, mag, 1.0), 0.0)
    spec[(slice(None),) + (0,) * grid.dim] = 0.0
    return spec


def shell_annulus(grid: TorusGrid, j: int) -> np.ndarray:
    """Lattice points with 4/3 2^j <= |k| <= 3/2 2^j, where block j's multiplier is exactly 1
    and every other block's is exactly 0."""
    lo, hi = 4.0 / 3.0 * 2.0**j, 1.5 * 2.0**j
    return (grid.kmag >= lo) & (grid.kmag <= hi) & grid.dealias_mask


def lacunary_field(
    grid: TorusGrid,
    planted_dj: Sequence[float],
    alpha: float,
    p_target: float = 2.0,
    seed: int = 0,
) -> tuple[TorusField, GeneratorCertificate]:
    """Random-phase field whose sequence 2^{j alpha} ||Delta_j v||_{L^p} equals ``planted_dj``.

    Entry i of ``planted_dj`` is placed on block j = i, on the annulus where that
    block's multiplier is identically one, so shells do not leak into neighbours.
    """
    part = make_partition(grid)
    planted = np.asarray(planted_dj, dtype=float)
    if planted.size > part.j_resolved + 1:
        raise ValueError(f"at most {part.j_resolved + 1} planted scales fit on n={grid.n}")
    if not 2 <= p_target < np.inf:
        raise ValueError("p_target must lie in [2, inf)")
    spec_unit = _unit_phase_coefficients(grid, _rng(seed))
    spec = BesovSpec(alpha, p_target, C_NAT)

    shells = []
    for j, target in enumerate(planted):
        mask = shell_annulus(grid, j)
        if not mask.any():
            raise ValueError(f"unachievable planted sequence: no lattice modes for shell j={j}")
        shells.append((j, target, mask))

    coeffs = np.ones(len(shells))
    for _ in range(MAX_RESCALES):
        for i, (j, target, mask) in enumerate(shells):
            if target == 0:
                coeffs[i] = 0.0
                continue
            shell = TorusField.from_spectral(grid, coeffs[i] * spec_unit * mask, hermitian=True)
            measured = 2.0 ** (j * alpha) * lebesgue_norm(shell, p_target)
            if measured == 0:
                raise ValueError(f"unachievable planted sequence: shell j={j} vanishes")
            coeffs[i] *= target / measured
        total = _sum_shells(grid, spec_unit, shells, coeffs)
        report = besov_norm(total, spec)
        measured_dj = report.d_j[1 : planted.size + 1]
        err = np.abs(measured_dj - planted) / np.where(planted > 0, planted, 1.0)
        if np.all(err <= PLANT_TOLERANCE):
            break
    else:
        bad = int(np.argmax(err))
        raise ValueError(f"unachievable planted sequence: shell j={bad} misses its target")

    cert = GeneratorCertificate(
        kind="lacunary",
        seed=int(seed),
        planted_alpha=float(alpha),
        planted_p=float(p_target),
        planted_dj=[float(x) for x in planted],
        norms_at_build=[float(x) for x in report.d_j],
        params={"n": grid.n, "dim": grid.dim},
    )
    return total, cert


def _sum_shells(grid, spec_unit, shells, coeffs) -> TorusField:
    weight = np.zeros(grid.shape)
    for c, (_, _, mask) in zip(coeffs, shells):
        weight[mask] = c
    # annuli are disjoint and avoid the Nyquist planes, so symmetry is preserved
    return TorusField.from_spectral(grid, spec_unit * weight, hermitian=True)


def random_smooth_field(grid: TorusGrid, decay_rate: float, seed: int = 0) -> TorusField:
    """Divergence-free field with |vhat(k)| proportional to (1 + |k|)^-decay_rate on the dealiased band.

    Normalised to unit mean-square speed.
    """
    if not decay_rate > 1:
        raise ValueError("decay_rate must exceed 1")
    spec = _unit_phase_coefficients(grid, _rng(seed))
    spec = spec * (1.0 + grid.kmag) ** (-decay_rate) * grid.dealias_mask
    v = TorusField.from_spectral(grid, spec)
    rms = np.sqrt(np.mean(np.sum(v.values**2, axis=0)))
    return v * (1.0 / rms)


def random_band_limited_field(
    grid: TorusGrid,
    seed: int = 0,
    components: int = 1,
    kmax: float | None = None,
    decay_rate: float = 0.0,
) -> TorusField:
    """Generic (not divergence-free) random field with modes 0 < |k| < kmax."""
    rng = _rng(seed)
    kmax = grid.dealias_radius if kmax is None else kmax
    noise = rng.standard_normal((components,) + grid.shape)
    spec = np.fft.fftn(noise, axes=tuple(range(1, grid.dim + 1))) / grid.n**grid.dim
    mask = (grid.kmag < kmax) & (grid.kmag > 0)
    spec = spec * mask * (1.0 + grid.kmag) ** (-decay_rate)
    return TorusField.from_spectral(grid, spec)
