import math

import pytest

from sfbm_kl.special import gamma, gamma_cos_product, sin_gamma


def test_gamma_values():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-14)


def test_gamma_cos_product_is_continuous_at_half():
    # both branches agree just outside the switch and the limit is -pi/2
    for d in (1.1e-3, 2e-3):
        for h in (0.5 + d / 2, 0.5 - d / 2):
            direct = math.gamma(2 * h - 1) * math.cos(math.pi * h)
            assert gamma_cos_product(h) == pytest.approx(direct, rel=1e-9)
    assert gamma_cos_product(0.5) == pytest.approx(-math.pi / 2, rel=1e-15)
    assert gamma_cos_product(0.5 + 1e-9) == pytest.approx(-math.pi / 2, rel=1e-8)


def test_sin_gamma():
    assert sin_gamma(0.5) == pytest.approx(1.0)
    assert sin_gamma(0.75) == pytest.approx(math.sin(0.75 * math.pi) * math.gamma(2.5))
