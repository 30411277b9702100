"""Gamma-function helpers used by the asymptotic formulas."""

import math

__all__ = ["gamma", "gamma_cos_product", "sin_gamma"]


def gamma(x: float) -> float:
    """Gamma function for real ``x`` that is not a non-positive integer."""
    return math.gamma(x)


def gamma_cos_product(h: float) -> float:
    """Return ``Gamma(2h-1) * cos(pi*h)``.

    Near ``h = 1/2`` both factors degenerate (a pole times a zero). There the
    reflection identity ``Gamma(z)Gamma(1-z) = pi/sin(pi z)`` with ``z = 2h-1``
    gives the cancellation-free form ``pi*cos(pi h)/(sin(pi(2h-1))*Gamma(2-2h))``,
    which in turn simplifies to ``-pi/(2*sin(pi h)*Gamma(2-2h))``.
    """
    z = 2.0 * h - 1.0
    if abs(z) < 1e-3:
        return -math.pi / (2.0 * math.sin(math.pi * h) * math.gamma(2.0 - 2.0 * h))
    return math.gamma(z) * math.cos(math.pi * h)


def sin_gamma(h: float) -> float:
    """Return ``sin(pi*h) * Gamma(2h+1)``, the common factor of the eigenvalue laws."""
    return math.sin(math.pi * h) * math.gamma(2.0 * h + 1.0)
