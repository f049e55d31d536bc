import numpy as np
import pytest
from hypothesis import given, strategies as st

from besovflux.dyadic import dyadic_block, make_partition
from besovflux.fields import (
    GeneratorCertificate,
    abc_flow,
    lacunary_field,
    random_band_limited_field,
    random_smooth_field,
    single_mode,
    taylor_green_2d,
    taylor_green_pressure,
)
from besovflux.grid import TorusField, TorusGrid, curl, gradient, leray_project
from besovflux.norms import BesovSpec, besov_norm, cnat_tail_diagnostic, lebesgue_norm

from conftest import rel


def _advection(v):
    g = gradient(v).values.reshape((v.components, v.components) + v.grid.shape)
    return TorusField(v.grid, np.einsum("j...,ij...->i...", v.values, g))


def test_taylor_green_is_steady(grid2):
    v = taylor_green_2d(grid2)
    adv = _advection(v)
    assert np.abs(leray_project(adv).values).max() <= 1e-10
    # the pressure balances the advection exactly
    p = taylor_green_pressure(grid2)
    np.testing.assert_allclose(adv.values + gradient(p).values, 0, atol=1e-12)
    x, y = grid2.coords
    np.testing.assert_allclose(p.values[0], (np.cos(2 * x) + np.cos(2 * y)) / 4, atol=1e-14)


def test_abc_helicity_and_energy(grid3):
    v = abc_flow(grid3)
    helicity = v.inner(curl(v))
    assert helicity == pytest.approx(3 * (2 * np.pi) ** 3, rel=1e-12)
    assert v.inner(v) == pytest.approx(3 * (2 * np.pi) ** 3, rel=1e-12)


def test_abc_single_component(grid3):
    v = abc_flow(grid3, 1.0, 0.0, 0.0)
    z = grid3.coords[2]
    np.testing.assert_allclose(v.values[0], np.sin(z), atol=1e-14)
    np.testing.assert_allclose(v.values[1], np.cos(z), atol=1e-14)
    assert lebesgue_norm(v, 2) ** 2 == pytest.approx((2 * np.pi) ** 3, rel=1e-12)


def test_single_mode_requires_transverse_amplitude(grid2):
    with pytest.raises(ValueError):
        single_mode(grid2, (1, 0), (1.0, 0.0))


@pytest.mark.parametrize("rate", [0.0, 0.25])
def test_lacunary_tail_slope(rate):
    g = TorusGrid(2, 256)
    part = make_partition(g)
    js = np.arange(part.j_resolved + 1)
    f, cert = lacunary_field(g, 2.0 ** (-rate * js), 1 / 3, 3.0, seed=4)
    r = besov_norm(f, BesovSpec(1 / 3, 3.0, "cnat"))
    assert cnat_tail_diagnostic(r)["slope"] == pytest.approx(-rate, abs=0.05)
    assert cert.planted_alpha == pytest.approx(1 / 3)
    assert cert.seed == 4


def test_lacunary_single_shell_is_local():
    g = TorusGrid(2, 128)
    part = make_partition(g)
    j = 3
    planted = np.zeros(part.j_resolved + 1)
    planted[j] = 1.0
    f, _ = lacunary_field(g, planted, 0.5, 2.0, seed=1)
    for jj in part.indices:
        if abs(jj - j) >= 2:
            assert np.abs(dyadic_block(f, jj).values).max() <= 1e-14


def test_lacunary_rejects_too_many_scales(grid2):
    with pytest.raises(ValueError):
        lacunary_field(grid2, [1.0] * 10, 0.5, 2.0)


def test_certificate_round_trip_and_honesty():
    g = TorusGrid(2, 64)
    f, cert = lacunary_field(g, [1.0, 0.5, 0.25], 0.5, 2.0, seed=8)
    again = GeneratorCertificate.from_dict(cert.to_dict())
    assert again == cert
    r = besov_norm(f, BesovSpec(0.5, 2.0, "cnat"))
    np.testing.assert_allclose(r.d_j, cert.norms_at_build, rtol=1e-12)
    np.testing.assert_allclose(r.d_j[1:4], cert.planted_dj, rtol=0.05)


def test_smooth_field_fast_decay():
    g = TorusGrid(2, 128)
    r = besov_norm(random_smooth_field(g, 10.0, seed=2), BesovSpec(1 / 3, 3.0, "cnat"))
    assert r.slope <= -2


def test_rough_smooth_field_is_finite():
    g = TorusGrid(3, 16)
    v = random_smooth_field(g, 1.1, seed=3)
    assert np.isfinite(lebesgue_norm(v, 2))
    assert v.max_divergence() <= 1e-10


def test_smooth_field_rejects_slow_decay(grid2):
    with pytest.raises(ValueError):
        random_smooth_field(grid2, 1.0)


@given(seed=st.integers(0, 2**64 - 1))
def test_generators_deterministic(seed):
    g = TorusGrid(2, 32)
    assert np.array_equal(random_smooth_field(g, 3.0, seed).values, random_smooth_field(g, 3.0, seed).values)
    a = lacunary_field(g, [1.0, 1.0], 0.5, 2.0, seed=seed)[0]
    b = lacunary_field(g, [1.0, 1.0], 0.5, 2.0, seed=seed)[0]
    assert np.array_equal(a.values, b.values)


@given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([2, 3]))
def test_generators_divergence_free(seed, dim):
    g = TorusGrid(dim, 16 if dim == 3 else 32)
    for v in (random_smooth_field(g, 2.0, seed), lacunary_field(g, [1.0, 0.5], 0.5, 2.0, seed=seed)[0]):
        assert rel(leray_project(v).values, v.values) <= 1e-10


def test_band_limited_support(grid2):
    f = random_band_limited_field(grid2, seed=5, kmax=10)
    assert np.abs(f.spectral[0][grid2.kmag >= 10]).max() <= 1e-16
    assert abs(f.spectral[0][0, 0]) <= 1e-16
