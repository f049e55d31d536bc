import numpy as np
import pytest
from hypothesis import given, strategies as st

from besovflux.fields import abc_flow, random_band_limited_field
from besovflux.grid import TorusField, TorusGrid, curl, dealias, divergence, gradient, leray_project, upsample

from conftest import rel


def test_grid_rejects_bad_sizes():
    with pytest.raises(ValueError):
        TorusGrid(4, 16)
    with pytest.raises(ValueError):
        TorusGrid(2, 3)


def test_field_shape_checks(grid2):
    with pytest.raises(ValueError):
        TorusField(grid2, np.zeros((2, 32, 32)))
    f = TorusField(grid2, np.zeros(grid2.shape))
    assert f.components == 1


def test_curl_of_shear_2d(grid2):
    x, y = grid2.coords
    v = TorusField(grid2, np.stack([np.sin(y), np.zeros_like(y)]))
    np.testing.assert_allclose(curl(v).values[0], -np.cos(y), atol=1e-12)


def test_abc_is_beltrami(grid3):
    v = abc_flow(grid3)
    assert rel(curl(v).values, v.values) <= 1e-10


def test_leray_kills_gradients(grid2):
    x, y = grid2.coords
    psi = TorusField(grid2, np.sin(2 * x) * np.cos(3 * y) + np.cos(x))
    g = gradient(psi)
    assert np.abs(leray_project(g).values).max() <= 1e-12


def test_gradient_closed_form(grid2):
    x, y = grid2.coords
    f = TorusField(grid2, np.sin(3 * x) * np.cos(y))
    g = gradient(f).values
    np.testing.assert_allclose(g[0], 3 * np.cos(3 * x) * np.cos(y), atol=1e-11)
    np.testing.assert_allclose(g[1], -np.sin(3 * x) * np.sin(y), atol=1e-11)


@given(seed=st.integers(0, 2**32 - 1))
def test_parseval(seed):
    g = TorusGrid(2, 32)
    f = random_band_limited_field(g, seed=seed, components=2)
    quad = np.sum(f.values**2) * g.cell_volume
    spec = g.volume * np.sum(np.abs(f.spectral) ** 2)
    assert abs(quad - spec) <= 1e-10 * spec


@given(seed=st.integers(0, 2**32 - 1))
def test_leray_idempotent_and_solenoidal(seed):
    g = TorusGrid(3, 16)
    v = random_band_limited_field(g, seed=seed, components=3)
    p = leray_project(v)
    assert np.abs(divergence(p).values).max() <= 1e-10 * np.abs(v.values).max() * g.n
    assert rel(leray_project(p).values, p.values) <= 1e-12


@given(seed=st.integers(0, 2**32 - 1))
def test_lazy_spectral_matches_samples(seed):
    g = TorusGrid(2, 32)
    f = random_band_limited_field(g, seed=seed)
    lazy = f.apply_multiplier(g.dealias_mask, even=True)
    eager = TorusField(g, lazy.values)
    np.testing.assert_allclose(lazy.spectral, eager.spectral, atol=1e-15)
    np.testing.assert_allclose((lazy + f).values, lazy.values + f.values, atol=1e-14)
    np.testing.assert_allclose((lazy - f).values, lazy.values - f.values, atol=1e-14)
    np.testing.assert_allclose((-lazy).values, -lazy.values, atol=0)


def test_fields_are_immutable(grid2):
    f = random_band_limited_field(grid2, seed=1)
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 1.0


def test_upsample_is_exact_interpolation():
    g = TorusGrid(2, 32)
    x, y = g.coords
    f = TorusField(g, np.cos(5 * x + 2 * y) + np.sin(7 * y))
    fine = upsample(f, 2)
    X, Y = fine.grid.coords
    np.testing.assert_allclose(fine.values[0], np.cos(5 * X + 2 * Y) + np.sin(7 * Y), atol=1e-12)


def test_dealias_is_spherical(grid2):
    f = random_band_limited_field(grid2, seed=3, kmax=grid2.n)
    d = dealias(f)
    outside = grid2.kmag >= grid2.n / 3
    assert np.abs(d.spectral[0][outside]).max() == 0.0
    inside = ~outside
    np.testing.assert_allclose(d.spectral[0][inside], f.spectral[0][inside], atol=1e-15)
