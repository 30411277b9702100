import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sfbm_kl.errors import DomainError, SingularityError
from sfbm_kl.kernels import ProcessKind, check_hurst, covariance, covariance_array, gram, integral_relation_residual

unit = st.floats(0.0, 1.0)
hurst = st.floats(0.01, 0.99)


def test_sfbm_diagonal_value():
    assert covariance("sfbm", 0.75, 1.0, 1.0) == pytest.approx(2 - math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("kind", ["fbm", "sfbm"])
def test_brownian_at_half(kind):
    s, t = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1, 9))
    assert np.allclose(covariance_array(kind, 0.5, s, t), np.minimum(s, t), atol=1e-15)


def test_noise_values_and_singularity():
    h = 0.75
    expected = h * (2 * h - 1) * (0.5 ** (2 * h - 2) - 0.9 ** (2 * h - 2))
    assert covariance("sfbm-noise", h, 0.2, 0.7) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(SingularityError):
        covariance("sfbm-noise", h, 0.3, 0.3)
    with pytest.raises(DomainError):
        covariance("sfbm-noise", 0.5, 0.2, 0.7)


@pytest.mark.parametrize("h", [0.0, 1.0, -0.1, float("nan")])
def test_hurst_domain(h):
    with pytest.raises(DomainError):
        check_hurst(h)


def test_kind_parsing():
    assert ProcessKind.parse("SFBM_NOISE") is ProcessKind.SFBM_NOISE
    assert ProcessKind.parse("fbm") is ProcessKind.FBM
    with pytest.raises(DomainError):
        ProcessKind.parse("bm")


def test_time_domain():
    with pytest.raises(DomainError):
        covariance("fbm", 0.3, 1.2, 0.5)


@settings(max_examples=60, deadline=None)
@given(s=unit, t=unit, h=hurst, kind=st.sampled_from(["fbm", "sfbm"]))
def test_exact_symmetry(s, t, h, kind):
    assert covariance(kind, h, s, t) == covariance(kind, h, t, s)


@settings(max_examples=60, deadline=None)
@given(s=st.floats(0.01, 1.0), t=st.floats(0.01, 1.0), h=hurst)
def test_sfbm_variance_formula(s, t, h):
    v = covariance("sfbm", h, t, t)
    assert v == pytest.approx((2 - 2 ** (2 * h - 1)) * t ** (2 * h), rel=1e-12)


def test_gram_psd_fbm_rough():
    g = gram("fbm", 0.3, np.arange(1, 33) / 32)
    assert np.array_equal(g, g.T)
    assert np.linalg.eigvalsh(g).min() > -1e-12


def test_gram_validation():
    with pytest.raises(DomainError):
        gram("sfbm-noise", 0.7, [0.5, 1.0])
    with pytest.raises(DomainError):
        gram("sfbm", 0.7, [0.5, 0.5])
    with pytest.raises(DomainError):
        gram("sfbm", 0.7, [0.0, 0.5])


@pytest.mark.parametrize("h,s,t", [(0.75, 0.3, 0.8), (0.6, 1.0, 1.0), (0.9, 0.5, 0.5), (0.55, 0.2, 0.9)])
def test_noise_integrates_to_sfbm(h, s, t):
    assert integral_relation_residual(h, s, t) <= 1e-10
