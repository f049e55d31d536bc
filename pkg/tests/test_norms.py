from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from besovflux.dyadic import make_partition, varphi
from besovflux.fields import lacunary_field, random_band_limited_field, random_smooth_field, taylor_green_2d
from besovflux.grid import TorusField, TorusGrid
from besovflux.norms import (
    C_NAT,
    BesovSpec,
    bernstein_ratios,
    besov_norm,
    besov_vmo_functional,
    check_embedding_sembed,
    check_gagliardo_nirenberg,
    check_interpolation_chain,
    cnat_tail_diagnostic,
    gn_exponents,
    lebesgue_norm,
    time_lebesgue_norm,
)


def _cos_mean(p):
    return quad(lambda t: abs(np.cos(t)) ** p, 0, 2 * np.pi, limit=200)[0] / (2 * np.pi)


@pytest.fixture(scope="module")
def cosx(grid2):
    return TorusField(grid2, np.cos(grid2.coords[0]))


def test_cos_l2(cosx):
    assert lebesgue_norm(cosx, 2) == pytest.approx(np.sqrt(2 * np.pi**2), rel=1e-12)


def test_cos_linf(cosx):
    assert lebesgue_norm(cosx, np.inf) == pytest.approx(1.0, rel=1e-12)


def test_cos_l3(cosx):
    mean = _cos_mean(3)
    assert mean == pytest.approx(4 / (3 * np.pi), rel=1e-12)
    assert lebesgue_norm(cosx, 3) == pytest.approx(((2 * np.pi) ** 2 * mean) ** (1 / 3), rel=1e-8)


def test_p_below_one_rejected(cosx):
    with pytest.raises(ValueError):
        lebesgue_norm(cosx, 0.5)


def test_single_mode_besov_sequence():
    g = TorusGrid(2, 128)
    f = TorusField(g, np.cos(16 * g.coords[0]))
    r = besov_norm(f, BesovSpec(1 / 3, 3.0, np.inf))
    l3 = ((2 * np.pi) ** 2 * _cos_mean(3)) ** (1 / 3)
    expected = np.array([0.0 if j < 0 else 2 ** (j / 3) * varphi(16 / 2**j) * l3 for j in r.j])
    # |cos|^3 has kinks; at 16 samples per period the rectangle rule is good to ~1e-4
    np.testing.assert_allclose(r.d_j, expected, rtol=2e-4, atol=1e-12)
    assert np.count_nonzero(r.d_j > 1e-12) <= 2
    assert r.norm == pytest.approx(expected.max(), rel=2e-4)


def test_constant_has_no_homogeneous_part(grid2):
    f = TorusField(grid2, np.full(grid2.shape, 3.0))
    r = besov_norm(f, BesovSpec(0.5, 3.0, 2.0))
    assert r.homogeneous == 0.0
    assert r.equivalent_norm == pytest.approx(r.lp_part)


@pytest.mark.parametrize("rate", [0.0, 0.25])
def test_planted_sequence_is_read_back(rate):
    g = TorusGrid(2, 256)
    part = make_partition(g)
    js = np.arange(part.j_resolved + 1)
    planted = 2.0 ** (-rate * js)
    f, cert = lacunary_field(g, planted, 1 / 3, 3.0, seed=2)
    r = besov_norm(f, BesovSpec(1 / 3, 3.0, C_NAT))
    np.testing.assert_allclose(r.d_j[1 : js.size + 1], planted, rtol=0.05)
    assert cnat_tail_diagnostic(r)["slope"] == pytest.approx(-rate, abs=0.05)
    np.testing.assert_allclose(r.d_j, cert.norms_at_build, rtol=1e-12)


def test_smooth_field_tail_decays():
    g = TorusGrid(2, 128)
    r = besov_norm(taylor_green_2d(g) + random_smooth_field(g, 6.0, seed=1), BesovSpec(1 / 3, 3.0, C_NAT))
    assert r.slope <= -0.5


def test_vmo_of_constant(grid2):
    f = TorusField(grid2, np.ones(grid2.shape))
    assert np.all(besov_vmo_functional(f, BesovSpec(1 / 3, 3.0), [0.2, 0.4]) == 0)


def test_vmo_rate_smooth():
    g = TorusGrid(2, 256)
    f = TorusField(g, np.cos(g.coords[0]))
    eps = np.array([0.2, 0.4])
    V = besov_vmo_functional(f, BesovSpec(1 / 3, 3.0), eps)
    slope = np.log2(V[1] / V[0])
    assert slope == pytest.approx(2 / 3, abs=0.05)


def test_vmo_rejects_unresolved(grid2):
    f = TorusField(grid2, np.cos(grid2.coords[0]))
    with pytest.raises(ValueError):
        besov_vmo_functional(f, BesovSpec(1 / 3, 3.0), [grid2.spacing / 2])


def test_interpolation_single_mode():
    g = TorusGrid(2, 64)
    f = TorusField(g, np.cos(3 * g.coords[0]))
    r = check_interpolation_chain(f, 1.5)
    vol = (2 * np.pi) ** 2
    n = {p: (vol * _cos_mean(p)) ** (1 / p) for p in (2, 3, 6)}
    expected = n[3] / (n[2] ** 0.5 * n[6] ** 0.5)
    live = r["lhs"] > 1e-8 * r["lhs"].max()
    assert live.sum() >= 1
    np.testing.assert_allclose(r["ratio"][live], expected, rtol=1e-8)
    assert expected <= 1


@given(seed=st.integers(0, 2**32 - 1), p=st.sampled_from([1.5, 2.0, 2.5, 3.0]))
def test_interpolation_ratio_bounded(seed, p):
    f = random_band_limited_field(TorusGrid(2, 32), seed=seed)
    ratio = check_interpolation_chain(f, p)["ratio"]
    ratio = ratio[np.isfinite(ratio)]
    assert ratio.max() <= 1 + 1e-8
    if p == 3.0:
        assert np.abs(ratio - 1).max() <= 1e-12


def test_embedding_exponent():
    assert gn_exponents(3, 3)["target"] == 4.5
    assert Fraction(6 * 3, 5 * 3 - 5) == Fraction(9, 5)
    g = TorusGrid(3, 16)
    r = check_embedding_sembed(TorusField.zeros(g, 3), 3.0)
    assert r["gradient_exponent"] == pytest.approx(9 / 5)
    assert r["ratio"] is None


def test_embedding_ratio_on_smooth_fields():
    g = TorusGrid(3, 32)
    worst = max(check_embedding_sembed(random_smooth_field(g, 3.0, seed=s), 2.0)["ratio"] for s in range(3))
    assert worst <= 50


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("p", [Fraction(3, 2), Fraction(2), Fraction(5, 2), Fraction(3)])
def test_gn_exponent_consistency(d, p):
    e = gn_exponents(Fraction(d), p)
    # 1/r = a/2 + b (1/m - 1/d) with a + b = 1
    assert e["weight_l2"] + e["weight_gradient"] == 1
    assert 1 / e["target"] == e["weight_l2"] / 2 + e["weight_gradient"] * (1 / e["gradient"] - Fraction(1, d))


def test_gn_inequality_on_corpus():
    g = TorusGrid(3, 16)
    worst = 0.0
    for s in range(100):
        r = check_gagliardo_nirenberg(random_smooth_field(g, 2.0, seed=s), 3.0)
        worst = max(worst, r["lhs"] / r["rhs"])
    assert worst <= 50


def test_gn_rejects_out_of_range():
    with pytest.raises(ValueError):
        check_gagliardo_nirenberg(TorusField.zeros(TorusGrid(3, 16), 3), 2.0, variant="helicity")


@given(seed=st.integers(0, 2**32 - 1))
def test_bernstein_constants(seed):
    r = bernstein_ratios(random_band_limited_field(TorusGrid(2, 32), seed=seed))
    assert max(r["upper"].values()) <= 20
    assert max(r["lower"].values()) <= 20


@given(seed=st.integers(0, 2**32 - 1), c=st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_norm_homogeneity_and_q_monotone(seed, c):
    f = random_band_limited_field(TorusGrid(2, 32), seed=seed)
    norms = []
    for q in (1.0, 2.0, np.inf):
        spec = BesovSpec(1 / 3, 3.0, q)
        a, b = besov_norm(f, spec).norm, besov_norm(f * c, spec).norm
        assert b == pytest.approx(abs(c) * a, rel=1e-12)
        norms.append(a)
    assert norms[0] >= norms[1] * (1 - 1e-12) and norms[1] >= norms[2] * (1 - 1e-12)


@given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.4, 0.9))
def test_inclusion_chain(seed, alpha):
    f = random_smooth_field(TorusGrid(2, 64), 2.0, seed=seed)
    hi = besov_norm(f, BesovSpec(alpha, 3.0, np.inf))
    lo = besov_norm(f, BesovSpec(1 / 3, 3.0, np.inf))
    js, d_lo = lo.resolved()
    mid = len(js) // 2
    assert d_lo[mid] <= 2.0 ** (-js[mid] * (alpha - 1 / 3)) * hi.norm * (1 + 1e-12)


def test_time_norm_rectangle_rule():
    t = np.linspace(0, 1, 11)
    assert time_lebesgue_norm(np.ones(11), t, 2) == pytest.approx(1.0)
    assert time_lebesgue_norm(np.full(11, 3.0), t, np.inf) == 3.0


def test_spec_validation():
    with pytest.raises(ValueError):
        BesovSpec(0.3, 0.5)
    with pytest.raises(ValueError):
        BesovSpec(0.3, 2.0, "bogus")
