"""Periodic grids on [0, 2pi)^d and real fields with a cached Fourier representation.

Coefficients are normalised so that ``f(x) = sum_k fhat(k) exp(i k.x)``, i.e.
``fhat = fftn(f) / n**d``.  With this convention Parseval reads
``int |f|^2 dx = (2 pi)^d sum |fhat|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "TorusGrid",
    "TorusField",
    "gradient",
    "curl",
    "divergence",
    "leray_project",
    "dealias",
    "upsample",
]


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid with ``n`` points per axis on the ``dim``-torus."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return (2 * np.pi) ** self.dim

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        x = np.arange(self.n) * self.spacing
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Integer wavevector components in FFT order, broadcast to the grid shape."""
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        return tuple(np.meshgrid(*([k] * self.dim), indexing="ij"))

    @cached_property
    def kvec(self) -> np.ndarray:
        return np.stack(self.wavenumbers)

    @cached_property
    def k2(self) -> np.ndarray:
        return np.sum(self.kvec**2, axis=0)

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @property
    def dealias_radius(self) -> float:
        return self.n / 3

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        # spherical 2/3 rule: the ball sits inside the usual 2/3 cube
        return self.kmag < self.dealias_radius

    def refined(self, factor: int) -> "TorusGrid":
        return TorusGrid(self.dim, self.n * factor)


def _fft(a: np.ndarray, dim: int) -> np.ndarray:
    axes = tuple(range(-dim, 0))
    n = a.shape[-1]
    return np.fft.fftn(a, axes=axes) / n**dim


def _ifft(a: np.ndarray, dim: int) -> np.ndarray:
    axes = tuple(range(-dim, 0))
    n = a.shape[-1]
    return np.fft.ifftn(a * n**dim, axes=axes)


def _irfft(a: np.ndarray, dim: int) -> np.ndarray:
    """Samples from conjugate-symmetric coefficients, reading only the half spectrum."""
    axes = tuple(range(-dim, 0))
    n = a.shape[-1]
    return np.fft.irfftn(a[..., : n // 2 + 1] * n**dim, s=(n,) * dim, axes=axes)


class TorusField:
    """A real scalar or vector field sampled on a :class:`TorusGrid`.

    Samples are stored with a leading component axis, shape
    ``(components, n, ..., n)``; tensors are flattened row-major into that axis.  Instances are immutable; the spectral
    coefficients are computed on first access and cached.
    """

    __slots__ = ("grid", "_phys", "_spec")
    # numpy scalars defer to __rmul__ instead of treating the field as a sequence
    __array_ufunc__ = None

    def __init__(self, grid: TorusGrid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape == grid.shape:
            values = values[None]
        if values.shape[1:] != grid.shape:
            raise ValueError(f"sample shape {values.shape} does not match grid {grid.shape}")
        self.grid = grid
        self._phys = np.array(values, copy=True)
        self._phys.setflags(write=False)
        self._spec = None

    @classmethod
    def from_spectral(cls, grid: TorusGrid, coeffs: np.ndarray, hermitian: bool = False) -> "TorusField":
        """Build from coefficients.

        With ``hermitian=True`` the caller guarantees conjugate symmetry; the
        coefficients are then kept as the primary representation and samples are
        synthesised on first access.  Otherwise the real part of the inverse
        transform defines the field.
        """
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape == grid.shape:
            coeffs = coeffs[None]
        if coeffs.shape[1:] != grid.shape:
            raise ValueError(f"coefficient shape {coeffs.shape} does not match grid {grid.shape}")
        if not hermitian:
            return cls(grid, _ifft(coeffs, grid.dim).real)
        field = cls.__new__(cls)
        field.grid = grid
        field._phys = None
        field._spec = np.array(coeffs, copy=True)
        field._spec.setflags(write=False)
        return field

    @classmethod
    def zeros(cls, grid: TorusGrid, components: int = 1) -> "TorusField":
        return cls(grid, np.zeros((components,) + grid.shape))

    @property
    def values(self) -> np.ndarray:
        if self._phys is None:
            phys = _irfft(self._spec, self.grid.dim)
            phys.setflags(write=False)
            self._phys = phys
        return self._phys

    @property
    def spectral(self) -> np.ndarray:
        if self._spec is None:
            spec = _fft(self._phys, self.grid.dim)
            spec.setflags(write=False)
            self._spec = spec
        return self._spec

    @property
    def components(self) -> int:
        rep = self._phys if self._phys is not None else self._spec
        return rep.shape[0]

    @property
    def is_scalar(self) -> bool:
        return self.components == 1

    def __len__(self) -> int:
        return self.components

    def __getitem__(self, i) -> "TorusField":
        if self._phys is None:
            return TorusField.from_spectral(self.grid, self._spec[i], hermitian=True)
        return TorusField(self.grid, self._phys[i])

    def _combine(self, other: "TorusField", op) -> "TorusField":
        self._check(other)
        if self._phys is None and other._phys is None:
            return TorusField.from_spectral(self.grid, op(self._spec, other._spec), hermitian=True)
        return TorusField(self.grid, op(self.values, other.values))

    def _check(self, other: "TorusField"):
        if other.grid != self.grid:
            raise ValueError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: "TorusField") -> "TorusField":
        return self._combine(other, np.add)

    def __sub__(self, other: "TorusField") -> "TorusField":
        return self._combine(other, np.subtract)

    def __mul__(self, c: float) -> "TorusField":
        c = float(c)
        if self._phys is None:
            return TorusField.from_spectral(self.grid, c * self._spec, hermitian=True)
        return TorusField(self.grid, c * self._phys)

    __rmul__ = __mul__

    def __neg__(self) -> "TorusField":
        return self * -1.0

    def apply_multiplier(self, m: np.ndarray, even: bool = False) -> "TorusField":
        """Multiply every component's coefficients by ``m`` (broadcast over components).

        ``even=True`` declares ``m`` real with m(-k) = m(k) on the stored lattice, so
        conjugate symmetry is preserved and no inverse transform is needed yet.
        """
        return TorusField.from_spectral(self.grid, self.spectral * m, hermitian=even)

    def max_divergence(self) -> float:
        """max_k |k . vhat(k)| relative to max |vhat|, zero for a zero field."""
        if self.components != self.grid.dim:
            raise ValueError("divergence needs a vector field")
        spec = self.spectral
        scale = np.abs(spec).max()
        if scale == 0:
            return 0.0
        return float(np.abs(np.einsum("i...,i...->...", self.grid.kvec, spec)).max() / scale)

    def is_divergence_free(self, tol: float = 1e-10) -> bool:
        return self.max_divergence() <= tol

    def inner(self, other: "TorusField") -> float:
        """L^2 inner product, summed over components, by Parseval."""
        self._check(other)
        s = np.sum(self.spectral * np.conj(other.spectral)).real
        return float(s * self.grid.volume)

    def __repr__(self) -> str:
        return f"TorusField(dim={self.grid.dim}, n={self.grid.n}, components={self.components})"


def gradient(f: TorusField) -> TorusField:
    """Spectral gradient.  Scalar -> vector; vector v -> tensor dv_i/dx_j flattened as i*dim + j."""
    grid = f.grid
    ik = 1j * grid.kvec
    spec = f.spectral
    out = (spec[:, None] * ik[None]).reshape((-1,) + grid.shape)
    return TorusField.from_spectral(grid, out)


def divergence(v: TorusField) -> TorusField:
    grid = v.grid
    if v.components != grid.dim:
        raise ValueError("divergence needs a vector field")
    spec = np.sum(1j * grid.kvec * v.spectral, axis=0)
    return TorusField.from_spectral(grid, spec)


def curl(v: TorusField) -> TorusField:
    """Vorticity.  In 2D returns the scalar dv_y/dx - dv_x/dy."""
    grid = v.grid
    if v.components != grid.dim:
        raise ValueError("curl needs a vector field")
    s = v.spectral
    k = grid.kvec
    if grid.dim == 2:
        return TorusField.from_spectral(grid, 1j * (k[0] * s[1] - k[1] * s[0]))
    out = 1j * np.stack(
        [
            k[1] * s[2] - k[2] * s[1],
            k[2] * s[0] - k[0] * s[2],
            k[0] * s[1] - k[1] * s[0],
        ]
    )
    return TorusField.from_spectral(grid, out)


def leray_coefficients(grid: TorusGrid, spec: np.ndarray) -> np.ndarray:
    k = grid.kvec
    k2 = np.where(grid.k2 == 0, 1.0, grid.k2)
    kdotv = np.sum(k * spec, axis=0)
    return spec - k * (kdotv / k2)


def leray_project(v: TorusField) -> TorusField:
    """Project onto divergence-free fields, vhat - k (k.vhat)/|k|^2; the mean is untouched."""
    if v.components != v.grid.dim:
        raise ValueError("leray_project needs a vector field")
    return TorusField.from_spectral(v.grid, leray_coefficients(v.grid, v.spectral))


def dealias(f: TorusField) -> TorusField:
    return f.apply_multiplier(f.grid.dealias_mask, even=True)


def _pad_axis(a: np.ndarray, axis: int, m: int) -> np.ndarray:
    n = a.shape[axis]
    h = n // 2
    shape = list(a.shape)
    shape[axis] = m
    out = np.zeros(shape, dtype=complex)

    def sl(x, s):
        idx = [slice(None)] * x.ndim
        idx[axis] = s
        return tuple(idx)

    out[sl(out, slice(0, h))] = a[sl(a, slice(0, h))]
    out[sl(out, slice(m - h + 1, m))] = a[sl(a, slice(h + 1, n))]
    # Nyquist coefficient is shared between +n/2 and -n/2 so the result stays real
    nyq = a[sl(a, slice(h, h + 1))]
    out[sl(out, slice(h, h + 1))] += 0.5 * nyq
    out[sl(out, slice(m - h, m - h + 1))] += 0.5 * nyq
    return out


def padded_coefficients(grid: TorusGrid, spec: np.ndarray, factor: int) -> np.ndarray:
    m = grid.n * factor
    out = spec
    for ax in range(spec.ndim - grid.dim, spec.ndim):
        out = _pad_axis(out, ax, m)
    return out


def upsample(f: TorusField, factor: int) -> TorusField:
    """Exact trigonometric interpolation onto a grid refined by ``factor``."""
    if factor == 1:
        return f
    fine = f.grid.refined(factor)
    # padding keeps the coefficients of a real field conjugate-symmetric
    return TorusField.from_spectral(fine, padded_coefficients(f.grid, f.spectral, factor), hermitian=True)
