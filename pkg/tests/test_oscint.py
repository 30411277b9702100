import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from sfbm_kl.errors import ConvergenceError, DomainError
from sfbm_kl.oscint import (
    FrequencyLattice,
    PrimitiveFamily,
    difference_quotient,
    primitive,
    primitive_asymptotic,
    primitive_pair,
)

# independent high-precision values (mpmath, 30 digits, split integration)
MP_F1_M05_100 = 0.12022503696268887
MP_G2_M05_300 = 0.002275420482734775
MP_F1_13_505 = 0.00497091588805006


def closed_form(family, a, w):
    """int u^a cos/sin(w u) over [0,1] or [1,2] for integer a >= 0, by parts."""
    lo, hi = PrimitiveFamily.parse(family).interval

    def anti(k, cos, u):
        # antiderivative of u^k cos(wu) (cos=True) or u^k sin(wu)
        if k == 0:
            return math.sin(w * u) / w if cos else -math.cos(w * u) / w
        if cos:
            return u**k * math.sin(w * u) / w - k / w * anti(k - 1, False, u)
        return -(u**k) * math.cos(w * u) / w + k / w * anti(k - 1, True, u)

    cos = PrimitiveFamily.parse(family).is_cos
    return anti(a, cos, hi) - anti(a, cos, lo)


def test_spec_closed_forms():
    assert primitive("F1", 0.0, 10.0) == pytest.approx(math.sin(10) / 10, abs=1e-12)
    assert math.sin(10) / 10 == pytest.approx(-0.05440211109, abs=1e-11)
    assert primitive("F2", 1.0, 5.0) == pytest.approx((math.sin(5) - 5 * math.cos(5)) / 25, abs=1e-12)
    assert primitive("F2", 1.0, 5.0) == pytest.approx(-0.09509, abs=1e-5)
    assert primitive("G1", 0.0, 7.0) == pytest.approx(0.04766, abs=1e-5)


@pytest.mark.parametrize("family", ["F1", "F2", "G1", "G2"])
@pytest.mark.parametrize("a", [0, 1, 2])
@pytest.mark.parametrize("w", [0.7, 3.0, 40.0, 1234.5])
def test_exact_for_integer_exponents(family, a, w):
    assert abs(primitive(family, float(a), w) - closed_form(family, a, w)) <= 1e-12


def test_zero_frequency():
    assert primitive("F1", 0.5, 0.0) == pytest.approx(1 / 1.5, abs=1e-12)
    assert primitive("F2", 0.5, 0.0) == 0.0
    assert primitive("G1", -2.0, 0.0) == pytest.approx(0.5, abs=1e-12)


def test_against_high_precision_oracle():
    assert abs(primitive("F1", -0.5, 100.0) - MP_F1_M05_100) <= 1e-12
    assert abs(primitive("G2", -0.5, 300.0) - MP_G2_M05_300) <= 1e-12
    assert abs(primitive("F1", 1.3, 50.5) - MP_F1_13_505) <= 1e-12


def test_strong_endpoint_singularity():
    # int_0^1 u^-0.99 du = 100
    assert primitive("F1", -0.99, 0.0) == pytest.approx(100.0, abs=1e-9)
    ref = integrate.quad(lambda u: u**-0.9 * math.cos(30 * u), 0, 1, limit=500, epsabs=1e-13)[0]
    assert primitive("F1", -0.9, 30.0) == pytest.approx(ref, abs=1e-9)


def test_expansion_example():
    value, order = primitive_asymptotic("F1", 0.5, 100.0)
    assert order == 2.0
    assert value == pytest.approx(0.1202677, abs=1e-7)
    assert abs(value - MP_F1_M05_100) <= 1e-4


@pytest.mark.parametrize("m", [3, 10, 57])
def test_g_branch_on_lattice(m):
    ms = (m + 0.5) * math.pi
    for a in (-0.5, 0.0, 1.7):
        value, _ = primitive_asymptotic("G1", a, ms)
        assert value == pytest.approx((-1) ** (m + 1) / ms, abs=1e-14)


def test_identity_case():
    for w in (11.0, 123.4):
        assert primitive_asymptotic("F1", 1.0, w)[0] == pytest.approx(math.sin(w) / w, abs=1e-15)
        assert primitive_asymptotic("F1", 1.0, w)[0] == pytest.approx(primitive("F1", 0.0, w), abs=1e-14)


def test_expansion_remainder_is_second_order():
    # |exact - expansion| * omega^2 stays bounded on a decade
    for w in (100.0, 1000.0, 10000.0):
        err = abs(primitive("F2", -0.5, w) - primitive_asymptotic("F2", 0.5, w)[0])
        assert err * w * w < 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        primitive("F1", -1.0, 3.0)
    with pytest.raises(DomainError):
        primitive("G1", 0.0, -1.0)
    with pytest.raises(DomainError):
        primitive("F1", 0.0, 1.0, tol=1e-3)
    with pytest.raises(DomainError):
        primitive_asymptotic("F1", 0.5, 5.0)
    with pytest.raises(DomainError):
        primitive_asymptotic("F2", 2.5, 50.0)
    with pytest.raises(DomainError):
        PrimitiveFamily.parse("F3")
    # G families accept any real exponent
    assert math.isfinite(primitive("G2", -7.5, 20.0))


def test_budget_exhaustion():
    with pytest.raises(ConvergenceError):
        primitive("G1", 0.0, 1e9)


def test_determinism_and_pair():
    a = primitive("F2", -0.3, 77.7)
    assert a == primitive("F2", -0.3, 77.7)
    c, s = primitive_pair("F", -0.3, 77.7)
    assert s == a and c == primitive("F1", -0.3, 77.7)


def test_difference_quotient_confluent():
    exact = closed_form("F1", 1, 20.0)
    assert difference_quotient(0.0, 20.0 + 1e-9, 20.0) == pytest.approx(exact, abs=1e-6)


def test_difference_quotient_separated():
    m, n = 40, 10
    w1, w2 = (m + 0.5) * math.pi, (n + 0.5) * math.pi
    direct = (primitive("F2", -0.5, w1, tol=1e-13) - primitive("F2", -0.5, w2, tol=1e-13)) / (w1 - w2)
    assert abs(difference_quotient(-0.5, w1, w2, tol=1e-13) - direct) <= 1e-10


def test_difference_quotient_on_g_interval():
    w1, w2 = 3 * math.pi, 2 * math.pi
    exact = (closed_form("G2", 0, w1) - closed_form("G2", 0, w2)) / (w1 - w2)
    assert difference_quotient(0.0, w1, w2, "G") == pytest.approx(exact, abs=1e-12)


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.4])
@pytest.mark.parametrize("w", [20.0, 100.0])
def test_difference_quotient_continuity(a, w):
    vals = [difference_quotient(a, w + d, w) for d in (1e-3, 1e-6, 1e-9)]
    assert max(vals) - min(vals) <= 1e-5
    # the remaining variation is the slope in omega1, linear in the gap
    assert abs(vals[1] - vals[2]) <= 1e-3 * abs(vals[0] - vals[2]) * 1.01


def test_lattice_round_trip():
    lat = FrequencyLattice(-0.4, 24, integer=True)
    for k in range(24):
        w = (k + 0.5) * math.pi
        assert lat.value("F1", k) == primitive("F1", -0.4, w)
        assert lat.value("G2", k) == primitive("G2", -0.4, w)
        assert lat.value("F2", k, half=False) == primitive("F2", -0.4, k * math.pi)
    assert not lat.F1.flags.writeable
    assert lat.frequency(2) == pytest.approx(2.5 * math.pi)


def test_lattice_without_f_arrays():
    lat = FrequencyLattice(-1.5, 4)
    assert np.all(np.isnan(lat.F1)) and np.all(np.isfinite(lat.G1))
    with pytest.raises(DomainError):
        lat.value("G1", 0, half=False)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.0, 3.0), w=st.floats(0.0, 60.0), fam=st.sampled_from(["F1", "F2", "G1", "G2"]))
def test_matches_adaptive_quadrature(a, w, fam):
    family = PrimitiveFamily.parse(fam)
    lo, hi = family.interval
    trig = math.cos if family.is_cos else math.sin
    ref = integrate.quad(lambda u: u**a * trig(w * u), lo, hi, limit=400, epsabs=1e-14, epsrel=1e-14)[0]
    assert primitive(family, a, w) == pytest.approx(ref, abs=1e-10)
