import math

import pytest

from crsphere.sphere import HarmonicExpansion, SampleSpec
from crsphere.spectrum import SphereGeometry, hls_constant, hls_gamma
from crsphere.verify import (
    ExtremalSpec,
    d2_constant_check,
    verify_extremal_hls,
    verify_onofri,
    verify_sobolev_conformal,
    verify_sobolev_end,
    verify_sobolev_subcritical,
    verify_subcritical_hls,
)

H = HarmonicExpansion.parse
SPEC = SampleSpec(seed=21, count=200_000)
RE_XI1 = "mono:{c},1,0,1,1+mono:{c},0,1,1,1"


@pytest.fixture
def g1():
    return SphereGeometry(1)


@pytest.mark.parametrize("c", ["1", "2.5", "0.3-0.4i"])
def test_constants_give_equality(g1, c):
    f = H(f"const:{c}")
    reps = [
        verify_subcritical_hls(g1, 2.0, 1.8, f, SPEC),
        verify_sobolev_conformal(g1, 1.5, f, SPEC),
        verify_sobolev_subcritical(g1, 1.5, 2.4, f, SPEC),
    ]
    if complex(f.mean).imag == 0:
        reps += [verify_sobolev_end(g1, 5.0, f, SPEC), verify_onofri(g1, f, SPEC)]
    assert [r.verdict for r in reps] == ["holds_equality"] * len(reps)


def test_hls_strict_with_spectral_cross_check(g1):
    f = H("const:1+mono:0.3,1,0,1,1")
    rep = verify_subcritical_hls(g1, 2.0, 2.0, f, SPEC)
    assert rep.verdict == "holds_strict"
    exact = hls_constant(g1, 2.0) * (1 + hls_gamma(g1, 2.0, (1, 0)) * 0.09 * 0.5)
    assert rep.params["lhs_spectral"] == pytest.approx(exact, rel=1e-14)
    assert abs(rep.lhs - exact) <= 3 * rep.sigma
    assert rep.parts[0].inequality_id == "hls-spectral-p2" and rep.parts[0].holds


def test_hls_spectral_cross_check_higher_bidegree():
    g = SphereGeometry(2)
    f = H("const:0.5+mono:0.7,2,1,1,2+mono:0.4i,3,3,2,3+mono:-0.2,0,2,3,3")
    rep = verify_subcritical_hls(g, 3.0, 1.9, f, SPEC)
    assert abs(rep.lhs - rep.params["lhs_spectral"]) <= 3 * rep.sigma
    assert rep.holds


def test_hls_p_range(g1):
    with pytest.raises(ValueError):
        verify_subcritical_hls(g1, 2.0, 1.2, H("const:1"), SPEC)
    with pytest.raises(ValueError):
        verify_subcritical_hls(g1, 2.0, 2.1, H("const:1"), SPEC)


def test_conformal_example(g1):
    rep = verify_sobolev_conformal(g1, 2.0, H("const:1+mono:0.5,1,0,1,1"), SPEC)
    assert rep.rhs == pytest.approx(4 * (1 / 4 + (3 / 8) * 0.25), rel=1e-14)
    assert rep.verdict == "holds_strict"


def test_conformal_monomial(g1):
    assert verify_sobolev_conformal(g1, 1.0, H("mono:1,2,0,1,1"), SPEC).verdict == "holds_strict"


def test_subcritical_examples(g1):
    f = H("const:1+" + RE_XI1.format(c=0.2))
    rep = verify_sobolev_subcritical(g1, 2.0, 3.0, f, SampleSpec(seed=21, count=1_000_000))
    assert rep.verdict == "holds_strict"
    assert rep.parts[0].inequality_id == "d2-constant-reduction"
    assert rep.parts[0].verdict == "holds_equality"
    two = verify_sobolev_subcritical(g1, 2.0, 2.0, f, SPEC)
    assert two.holds and two.rhs == pytest.approx(1 + 0.04 * 0.5 * 2)
    with pytest.raises(ValueError):
        verify_sobolev_subcritical(g1, 2.0, 4.0, f, SPEC)


def test_subcritical_cli_example():
    rep = verify_sobolev_subcritical(SphereGeometry(2), 3.0, 2.5, H("const:1+mono:0.4,1,0,1,2"),
                                     SampleSpec(seed=0, count=1_000_000))
    assert rep.verdict == "holds_strict"


@pytest.mark.parametrize("n", [1, 2, 3])
def test_d2_constant_check(n):
    assert d2_constant_check(SphereGeometry(n), 2.7).verdict == "holds_equality"


def test_sobolev_end(g1):
    f = H("const:1+" + RE_XI1.format(c=0.15))
    assert verify_sobolev_end(g1, 4.0, f, SPEC).verdict == "holds_strict"
    assert verify_sobolev_end(g1, 2.0, f, SPEC).holds
    with pytest.raises(ValueError):
        verify_sobolev_end(g1, 1.5, f, SPEC)


def test_onofri_quadratic_term(g1):
    for t in (0.5, 1.0, 2.0):
        rep = verify_onofri(g1, H(RE_XI1.format(c=t / 2)), SampleSpec(seed=22, count=1_000_000))
        assert rep.params["quadratic_term"] == pytest.approx(t * t / (4 * 2), rel=1e-14)
        assert rep.holds


def test_onofri_zero(g1):
    rep = verify_onofri(g1, H("const:0"), SPEC)
    assert rep.rhs == 0.0 and rep.verdict == "holds_equality"


def test_pluriharmonic_validation(g1):
    with pytest.raises(ValueError):
        verify_onofri(g1, H("mono:1,1,1,1,2"), SPEC)
    with pytest.raises(ValueError):
        verify_onofri(g1, H("mono:1,1,0,1,1"), SPEC)
    with pytest.raises(ValueError):
        verify_sobolev_end(g1, 3.0, H("mono:1i,0,0,1,1"), SPEC)


def test_extremal_spec_validation(g1):
    with pytest.raises(ValueError):
        ExtremalSpec((1.0, 0.0), "hls", 2.0)
    with pytest.raises(ValueError):
        ExtremalSpec((0.1, 0.0), "yamabe", 2.0)
    ext = ExtremalSpec((0.3, 0.1j), "sobolev", 2.0)
    assert ext.exponent(g1) == -1.0
    with pytest.raises(ValueError):
        ExtremalSpec((0.3, 0.1j, 0.0), "hls", 2.0).function(g1)


def test_extremal_hls_small_sample(g1):
    spec = SampleSpec(seed=23, count=300_000)
    rep = verify_extremal_hls(g1, 2.0, ExtremalSpec((0.5, 0.0), "hls", 2.0), spec)
    assert rep.verdict == "holds_equality"
    assert rep.sigma < 0.005
    wide = verify_extremal_hls(g1, 2.0, ExtremalSpec((0.95, 0.0), "hls", 2.0), spec)
    assert any("variance" in d for d in wide.diagnostics)
    with pytest.raises(ValueError):
        verify_extremal_hls(g1, 1.0, ExtremalSpec((0.5, 0.0), "hls", 2.0), spec)


def test_extremal_function_values(g1):
    f = ExtremalSpec((0.5, 0.0), "hls", 2.0).function(g1)
    import numpy as np
    v = f.values(np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex))
    assert v[0] == pytest.approx(0.5 ** -3) and v[1] == pytest.approx(1.0)
    assert math.isclose(ExtremalSpec((0.5, 0.0), "hls", 2.0).norm, 0.5)
