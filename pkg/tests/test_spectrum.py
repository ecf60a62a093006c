import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crsphere.funk_hecke import PowerKernel, WeightedPowerKernel, fh_eigenvalue_quadrature
from crsphere.spectrum import (
    ConditionalQ,
    HLSKernel,
    Intertwining,
    SphereGeometry,
    WeightedHLSKernel,
    conditional_lambda,
    fh_eigenvalue_closed,
    fh_eigenvalue_weighted,
    hls_constant,
    hls_gamma,
    hls_gamma_table,
    intertwine_eig,
    lambda_j,
    lambda_table,
    subcritical_constant,
)


def test_geometry():
    g = SphereGeometry(2)
    assert (g.Q, g.dim) == (6, 3)
    assert g.surface_area == pytest.approx(math.pi**3)
    with pytest.raises(ValueError):
        SphereGeometry(0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_conformal_lambda0_squared(n):
    g = SphereGeometry(n)
    assert lambda_j(g, 2.0, 0) ** 2 == pytest.approx(n * n / 4, rel=1e-14)


@pytest.mark.parametrize("j", range(6))
def test_lambda_at_d2_is_linear(geom, j):
    assert lambda_j(geom, 2.0, j) == pytest.approx(j + geom.n / 2, rel=1e-14)


def test_lambda_mpmath_oracle():
    g = SphereGeometry(2)
    exact = mpmath.gamma(mpmath.mpf(9) / 4 + 5) / mpmath.gamma(mpmath.mpf(3) / 4 + 5)
    assert lambda_j(g, 3.0, 5) == pytest.approx(float(exact), rel=1e-13)


@pytest.mark.parametrize("d", [0.0, -1.0, 4.0, 4.0 - 1e-9])
def test_lambda_domain(g1, d):
    with pytest.raises(ValueError):
        lambda_j(g1, d, 0)


@pytest.mark.parametrize("n, j, value", [(1, 0, 0), (1, 1, 2), (2, 2, 24), (1, 3, 12)])
def test_conditional_lambda(n, j, value):
    assert conditional_lambda(SphereGeometry(n), j) == value


def test_intertwine_eig_dispatch(g1):
    assert intertwine_eig(g1, Intertwining(2.0), (0, 0)) == pytest.approx(0.25, rel=1e-14)
    assert intertwine_eig(g1, ConditionalQ(), (3, 0)) == 12
    assert intertwine_eig(g1, ConditionalQ(), (0, 3)) == 12
    with pytest.raises(ValueError):
        intertwine_eig(g1, ConditionalQ(), (1, 1))
    assert intertwine_eig(g1, HLSKernel(2.0), (0, 0)) == pytest.approx(hls_constant(g1, 2.0))


@given(st.floats(0.05, 3.95), st.integers(0, 40), st.integers(0, 40))
def test_hls_gamma_range(lam, j, k):
    g = SphereGeometry(1)
    v = hls_gamma(g, lam, (j, k))
    if j == k == 0:
        assert v == 1.0
    else:
        assert 0.0 < v < 1.0


def test_hls_gamma_example(g1):
    assert hls_gamma(g1, 2.0, (1, 0)) == pytest.approx(1 / 3, rel=1e-14)


def test_hls_constant_examples(g1):
    assert hls_constant(g1, 2.0) == pytest.approx(4 / math.pi, rel=1e-14)
    assert hls_constant(g1, 1e-9) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("n, lam", [(1, 1.0), (2, 3.0), (3, 6.5)])
def test_hls_constant_against_quadrature(n, lam):
    g = SphereGeometry(n)
    quad = fh_eigenvalue_quadrature(g, PowerKernel(lam / 4), (0, 0))
    assert hls_constant(g, lam) == pytest.approx(quad, rel=1e-10)


def test_closed_form_constant_kernel_limit(geom):
    assert fh_eigenvalue_closed(geom, 0.0, (0, 0)) == pytest.approx(1.0, rel=1e-14)
    assert fh_eigenvalue_closed(geom, 0.0, (2, 1)) == 0.0


@pytest.mark.parametrize("idx", [(0, 0), (1, 0), (0, 2), (1, 1), (3, 2)])
def test_weighted_alpha_one_is_continuous(idx):
    g = SphereGeometry(2)
    at = fh_eigenvalue_weighted(g, 1.0, idx)
    for eps in (1e-6, -1e-6):
        assert fh_eigenvalue_weighted(g, 1.0 + eps, idx) == pytest.approx(at, rel=1e-5)


@pytest.mark.parametrize("n, idx", [(2, (0, 0)), (2, (1, 0)), (2, (2, 2)), (3, (0, 3))])
def test_weighted_alpha_one_against_quadrature(n, idx):
    g = SphereGeometry(n)
    quad = fh_eigenvalue_quadrature(g, WeightedPowerKernel(1.0), idx)
    assert fh_eigenvalue_weighted(g, 1.0, idx) == pytest.approx(quad, rel=1e-8)


def test_weighted_alpha_one_origin_is_not_E00():
    # the (0,0) limit is E_00 / n, not E_00
    g = SphereGeometry(2)
    assert fh_eigenvalue_weighted(g, 1.0, (0, 0)) == pytest.approx(
        fh_eigenvalue_closed(g, 1.0, (0, 0)) / 2, rel=1e-12)


def test_weighted_kernel_dispatch(g1):
    assert intertwine_eig(g1, WeightedHLSKernel(0.5), (1, 1)) == fh_eigenvalue_weighted(g1, 0.5, (1, 1))


@pytest.mark.parametrize("alpha", [-1.0, 1.0, 1.5])
def test_alpha_domain(g1, alpha):
    with pytest.raises(ValueError):
        fh_eigenvalue_closed(g1, alpha, (0, 0))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("q", [2.1, 2.5, 3.7])
def test_subcritical_constant_reduces_at_d2(n, q):
    g = SphereGeometry(n)
    assert subcritical_constant(g, 2.0, q) == pytest.approx(4 * (q - 2) / (g.Q - 2), rel=1e-12)


def test_lambda0_vanishes_as_d_to_Q(g1):
    assert lambda_j(g1, g1.Q - 1e-6, 0) ** 2 < 1e-12


@pytest.mark.parametrize("lam", [0.7, 2.0, 5.5])
def test_hls_gamma_table_matches_pointwise(lam):
    g = SphereGeometry(2)
    tab = hls_gamma_table(g, lam, 6, 4)
    assert tab.shape == (7, 5)
    for j in range(7):
        for k in range(5):
            assert tab[j, k] == pytest.approx(hls_gamma(g, lam, (j, k)), rel=1e-14)


def test_lambda_table_matches_pointwise():
    g = SphereGeometry(3)
    assert list(lambda_table(g, 3.3, 5)) == [lambda_j(g, 3.3, j) for j in range(6)]
