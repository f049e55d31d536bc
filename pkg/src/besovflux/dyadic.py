"""Dyadic partition of unity and the Littlewood-Paley block / low-pass operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .grid import TorusField, TorusGrid

__all__ = [
    "INNER",
    "OUTER",
    "smooth_cutoff",
    "varrho",
    "varphi",
    "DyadicPartition",
    "make_partition",
    "dyadic_block",
    "low_pass",
    "DyadicDecomposition",
    "decompose",
]

# radial cutoff chi: 1 on |xi| <= INNER, 0 on |xi| >= OUTER
INNER = 3.0 / 4.0
OUTER = 4.0 / 3.0


def _bump_tail(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _smooth_step(t):
    """C^infinity step: 0 for t <= 0, 1 for t >= 1."""
    a = _bump_tail(t)
    b = _bump_tail(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


def smooth_cutoff(r):
    """chi(r): radial low-pass profile, nonincreasing, exactly 1 below 3/4 and 0 above 4/3."""
    return 1.0 - _smooth_step((np.asarray(r, dtype=float) - INNER) / (OUTER - INNER))


def varrho(r):
    return smooth_cutoff(r)


def varphi(r):
    """Shell profile chi(r/2) - chi(r); supported in 3/4 <= r <= 8/3.

    Built telescopically, so varrho + sum_{j=0}^{J} varphi(2^-j r) = chi(2^-(J+1) r)
    holds exactly in exact arithmetic.
    """
    r = np.asarray(r, dtype=float)
    return smooth_cutoff(r / 2.0) - smooth_cutoff(r)


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    """Partition of unity sampled on a grid.

    ``j_max`` is the last block whose support meets the dealiased ball
    (``2^j * 3/4 <= n/3``), which is what makes the partition sum to one on
    that ball.  ``j_resolved`` is the last block whose whole shell
    ``|xi| <= 2^j * 8/3`` fits inside the ball; scale-fitting diagnostics use
    blocks up to ``j_resolved`` only.
    """

    grid: TorusGrid
    j_min: int
    j_max: int
    j_resolved: int
    varrho: np.ndarray = field(repr=False)
    varphi: np.ndarray = field(repr=False)

    @property
    def indices(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def block_multiplier(self, j: int, kmag: np.ndarray | None = None) -> np.ndarray:
        if not self.j_min <= j <= self.j_max:
            raise IndexError(f"block index {j} outside [{self.j_min}, {self.j_max}]")
        kmag = self.grid.kmag if kmag is None else kmag
        if j == -1:
            return varrho(kmag)
        return varphi(kmag / 2.0**j)

    def homogeneous_multiplier(self, j: int, kmag: np.ndarray | None = None) -> np.ndarray:
        """phi(2^-j xi) for every j, including j = -1 (which only sees |k| = 1 modes on the torus)."""
        kmag = self.grid.kmag if kmag is None else kmag
        return varphi(kmag / 2.0**j)

    def lowpass_multiplier(self, N: int, kmag: np.ndarray | None = None) -> np.ndarray:
        if not 0 <= N <= self.j_max + 1:
            raise IndexError(f"low-pass index {N} outside [0, {self.j_max + 1}]")
        kmag = self.grid.kmag if kmag is None else kmag
        return varrho(kmag / 2.0**N)

    def partition_sum(self) -> np.ndarray:
        total = self.varrho.copy()
        for j in range(0, self.j_max + 1):
            total = total + varphi(self.grid.kmag / 2.0**j)
        return total


def _j_max(n: int) -> int:
    # largest j with 2^j * 3/4 <= n/3, i.e. 9 * 2^j <= 4n
    j = 0
    while 9 * 2 ** (j + 1) <= 4 * n:
        j += 1
    return j


def _j_resolved(n: int) -> int:
    # largest j with 2^j * 8/3 <= n/3, i.e. 8 * 2^j <= n
    j = 0
    while 8 * 2 ** (j + 1) <= n:
        j += 1
    return j


@lru_cache(maxsize=32)
def make_partition(grid: TorusGrid) -> DyadicPartition:
    j_max = _j_max(grid.n)
    if grid.n < 16 or j_max < 2:
        raise ValueError("insufficient resolution: need n >= 16 for three dyadic shells")
    return DyadicPartition(
        grid=grid,
        j_min=-1,
        j_max=j_max,
        j_resolved=_j_resolved(grid.n),
        varrho=varrho(grid.kmag),
        varphi=varphi(grid.kmag),
    )


def dyadic_block(f: TorusField, j: int) -> TorusField:
    """Delta_j f: apply phi(2^-j xi) (varrho for j = -1) coefficient-wise."""
    part = make_partition(f.grid)
    return f.apply_multiplier(part.block_multiplier(j), even=True)


def low_pass(f: TorusField, N: int, squared: bool = False) -> TorusField:
    """S_N f = varrho(2^-N xi) f, or S_N^2 f when ``squared``."""
    m = make_partition(f.grid).lowpass_multiplier(N)
    return f.apply_multiplier(m * m if squared else m, even=True)


@dataclass(frozen=True)
class DyadicDecomposition:
    source: TorusField
    blocks: dict[int, TorusField]

    def reconstruct(self) -> TorusField:
        total = TorusField.zeros(self.source.grid, self.source.components)
        for b in self.blocks.values():
            total = total + b
        return total


def decompose(f: TorusField) -> DyadicDecomposition:
    part = make_partition(f.grid)
    return DyadicDecomposition(f, {j: dyadic_block(f, j) for j in part.indices})
