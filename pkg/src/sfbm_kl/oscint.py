"""Oscillatory-singular primitive integrals.

Every matrix element in this package reduces to four one-dimensional families

    F1(a, w) = int_0^1 u^a cos(w u) du      F2(a, w) = int_0^1 u^a sin(w u) du
    G1(a, w) = int_1^2 u^a cos(w u) du      G2(a, w) = int_1^2 u^a sin(w u) du

evaluated at frequencies on the lattice ``(k + 1/2) * pi``.

Quadrature layout
-----------------
The integration interval is cut into panels no longer than half a period
``pi / w``. On ``[0, 1]`` the first panel carries the algebraic endpoint
singularity and is integrated with a tanh-sinh rule whose level is doubled
until successive estimates agree to ``tol / 10``. All other panels are smooth
and use fixed 16-point Gauss-Legendre; with half-period panels and the
singularity at least one panel width away, the Bernstein-ellipse bound puts
their error far below 1e-15, so no a-posteriori estimate is needed.

For the pure exponentials the uniform panels are summed with the angle
addition formula, ``cos(w(c + x)) = cos(wc)cos(wx) - sin(wc)sin(wx)``, which
turns the work into two matrix-vector products.
"""

from __future__ import annotations

import enum
import math
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError
from .special import gamma

__all__ = [
    "PrimitiveFamily",
    "FrequencyLattice",
    "primitive",
    "primitive_pair",
    "primitive_asymptotic",
    "difference_quotient",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-10

_GL_ORDER = 16
_TS_TMAX = 5.0
_TS_MIN_LEVEL = 3
_TS_MAX_LEVEL = 10
_MAX_PANELS = 1 << 22
_CHUNK = 1 << 15
_MAX_WIDTH = 0.25


class PrimitiveFamily(enum.Enum):
    """Tag of a primitive family."""

    F1 = "F1"
    F2 = "F2"
    G1 = "G1"
    G2 = "G2"

    @classmethod
    def parse(cls, value) -> "PrimitiveFamily":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise DomainError(f"unknown primitive family {value!r}") from None

    @property
    def interval(self) -> tuple[float, float]:
        return (0.0, 1.0) if self in (PrimitiveFamily.F1, PrimitiveFamily.F2) else (1.0, 2.0)

    @property
    def is_cos(self) -> bool:
        return self in (PrimitiveFamily.F1, PrimitiveFamily.G1)


@lru_cache(maxsize=None)
def _gauss_legendre(order: int = _GL_ORDER):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def _tanh_sinh(level: int):
    """Tanh-sinh nodes on (0, 1) for step ``2**-level``.

    Returns the nodes ``s``, their complements ``1 - s`` (computed without
    cancellation) and the weights.
    """
    step = 2.0 ** (-level)
    n = int(round(_TS_TMAX / step))
    t = step * np.arange(-n, n + 1)
    q = np.pi * np.sinh(t)
    s = 1.0 / (1.0 + np.exp(-q))
    sc = 1.0 / (1.0 + np.exp(q))
    w = step * np.pi * np.cosh(t) * s * sc
    for arr in (s, sc, w):
        arr.setflags(write=False)
    return s, sc, w


def _check_tol(tol: float) -> None:
    if not (1e-15 < tol < 1e-4):
        raise DomainError(f"tol must lie in (1e-15, 1e-4), got {tol}")


def _first_panel(a: float, b: float, func, tol: float) -> np.ndarray:
    """Integrate ``u**a * func(u)`` over ``[0, b]`` by adaptive tanh-sinh.

    ``func`` maps an array of nodes to an array of shape ``(k, n)``. The value
    ``func(0)`` is integrated exactly against ``u**a``; the rule only sees the
    difference, which vanishes at the origin and keeps the transformed
    integrand decaying fast even for ``a`` close to -1.
    """
    f0 = func(np.zeros(1))[:, 0]
    exact = f0 * (b ** (a + 1.0) / (a + 1.0))
    prev = None
    for level in range(_TS_MIN_LEVEL, _TS_MAX_LEVEL + 1):
        s, _, w = _tanh_sinh(level)
        vals = func(b * s) - f0[:, None]
        est = exact + (vals @ (w * s**a)) * b ** (a + 1.0)
        if prev is not None and np.max(np.abs(est - prev)) <= 0.1 * tol:
            return est
        prev = est
    raise ConvergenceError(f"tanh-sinh did not converge for a={a}, panel={b}")


def _panel_layout(lo: float, hi: float, omega: float, a: float) -> tuple[np.ndarray, float]:
    """Centres and half-width of uniform smooth panels covering ``[lo, hi]``."""
    length = hi - lo
    if length <= 0.0:
        return np.empty(0), 0.0
    width = _MAX_WIDTH
    if omega > 0.0:
        width = min(width, math.pi / omega)
    if abs(a) > 16.0:
        width = min(width, 4.0 / abs(a))
    count = max(1, math.ceil(length / width - 1e-12))
    if count > _MAX_PANELS:
        raise ConvergenceError(f"panel budget exhausted ({count} panels for omega={omega})")
    half = 0.5 * length / count
    centres = lo + half * (2.0 * np.arange(count) + 1.0)
    return centres, half


def _smooth_exp(a: float, omega: float, centres: np.ndarray, half: float) -> np.ndarray:
    """Sum of ``u**a * (cos, sin)(omega u)`` over uniform Gauss-Legendre panels."""
    x, w = _gauss_legendre()
    out = np.zeros(2)
    if centres.size == 0:
        return out
    cx = np.cos(omega * half * x)
    sx = np.sin(omega * half * x)
    hw = half * w
    for start in range(0, centres.size, _CHUNK):
        c = centres[start:start + _CHUNK]
        ua = (c[:, None] + half * x) ** a * hw
        pc = ua @ cx
        ps = ua @ sx
        cc = np.cos(omega * c)
        sc = np.sin(omega * c)
        out[0] += cc @ pc - sc @ ps
        out[1] += sc @ pc + cc @ ps
    return out


def _smooth_generic(a: float, func, centres: np.ndarray, half: float) -> np.ndarray:
    x, w = _gauss_legendre()
    total = None
    for start in range(0, centres.size, _CHUNK):
        c = centres[start:start + _CHUNK]
        u = (c[:, None] + half * x).ravel()
        vals = func(u) @ (u**a * np.tile(half * w, c.size))
        total = vals if total is None else total + vals
    return total


def _cos_sin(a: float, omega: float, on_unit: bool, tol: float) -> np.ndarray:
    """Return ``[int u^a cos(omega u), int u^a sin(omega u)]`` on [0,1] or [1,2]."""

    def expo(u):
        ph = omega * u
        return np.stack((np.cos(ph), np.sin(ph)))

    if on_unit:
        b = 1.0 if omega <= math.pi else math.pi / omega
        out = _first_panel(a, b, expo, tol)
        centres, half = _panel_layout(b, 1.0, omega, a)
        return out + _smooth_exp(a, omega, centres, half)
    centres, half = _panel_layout(1.0, 2.0, omega, a)
    return _smooth_exp(a, omega, centres, half)


def _validate(family: PrimitiveFamily, a: float, omega: float) -> None:
    if not math.isfinite(a) or not math.isfinite(omega):
        raise DomainError("exponent and frequency must be finite")
    if omega < 0.0:
        raise DomainError(f"frequency must be nonnegative, got {omega}")
    if family in (PrimitiveFamily.F1, PrimitiveFamily.F2) and a <= -1.0:
        raise DomainError(f"F families need a > -1 for integrability, got a={a}")


def primitive_pair(interval: str, a: float, omega: float, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Cosine and sine primitives sharing one quadrature pass.

    Parameters
    ----------
    interval : {"F", "G"}
        ``"F"`` for ``[0, 1]`` and ``"G"`` for ``[1, 2]``.
    a, omega, tol
        As in :func:`primitive`.
    """
    fam = PrimitiveFamily.F1 if interval == "F" else PrimitiveFamily.G1
    if interval not in ("F", "G"):
        raise DomainError(f"interval must be 'F' or 'G', got {interval!r}")
    _validate(fam, float(a), float(omega))
    _check_tol(tol)
    c, s = _cos_sin(float(a), float(omega), interval == "F", tol)
    return float(c), float(s)


def primitive(family, a: float, omega: float, tol: float = DEFAULT_TOL) -> float:
    """Evaluate one primitive oscillatory integral.

    Parameters
    ----------
    family : PrimitiveFamily or str
        One of F1, F2, G1, G2.
    a : float
        Exponent of ``u**a``; must exceed -1 for the F families.
    omega : float
        Nonnegative frequency.
    tol : float
        Absolute error target in ``(1e-15, 1e-4)``.

    Returns
    -------
    float
        The integral value. Identical inputs give bit-identical output.
    """
    family = PrimitiveFamily.parse(family)
    c, s = primitive_pair("F" if family.interval[0] == 0.0 else "G", a, omega, tol)
    return c if family.is_cos else s


def primitive_asymptotic(family, a: float, omega: float) -> tuple[float, float]:
    """Two-term large-frequency expansion of a primitive.

    The F families follow the shifted-exponent convention of the oscillatory
    expansion of ``int_0^1 x^(a-1) cos/sin(omega x) dx``: with ``a`` the shifted
    exponent,

        F1 ~ Gamma(a) cos(pi a / 2) / omega^a + sin(omega) / omega
        F2 ~ Gamma(a) sin(pi a / 2) / omega^a - cos(omega) / omega

    The G families use the plain exponent, ``int_1^2 u^a ...``:

        G1 ~ (2^a sin(2 omega) - sin(omega)) / omega
        G2 ~ -(2^a cos(2 omega) - cos(omega)) / omega

    Returns
    -------
    value : float
    claimed_error_order : float
        Always 2: the remainder is ``O(omega**-2)``.

    Raises
    ------
    DomainError
        If ``omega < 10`` or, for the F families, the shifted exponent is
        outside ``(0, 2)``.
    """
    family = PrimitiveFamily.parse(family)
    if omega < 10.0:
        raise DomainError(f"asymptotic expansion needs omega >= 10, got {omega}")
    if family in (PrimitiveFamily.F1, PrimitiveFamily.F2):
        if not (0.0 < a < 2.0):
            raise DomainError(f"shifted exponent must lie in (0, 2), got {a}")
        g = gamma(a) / omega**a
        if family is PrimitiveFamily.F1:
            return g * math.cos(0.5 * math.pi * a) + math.sin(omega) / omega, 2.0
        return g * math.sin(0.5 * math.pi * a) - math.cos(omega) / omega, 2.0
    p = 2.0**a
    if family is PrimitiveFamily.G1:
        return (p * math.sin(2.0 * omega) - math.sin(omega)) / omega, 2.0
    return -(p * math.cos(2.0 * omega) - math.cos(omega)) / omega, 2.0


def difference_quotient(a: float, omega1: float, omega2: float, interval: str = "F",
                        tol: float = DEFAULT_TOL) -> float:
    """Stable ``int u^a (sin(w1 u) - sin(w2 u)) du / (w1 - w2)``.

    The integrand is rewritten as ``u^(a+1) cos(wbar u) sinc(delta u / 2pi)``
    with ``wbar`` the mean frequency and ``delta = w1 - w2``, which has no
    cancellation and tends to ``int u^(a+1) cos(w2 u) du`` as ``w1 -> w2``.

    Parameters
    ----------
    interval : {"F", "G"}
        ``[0, 1]`` or ``[1, 2]``.
    """
    if interval not in ("F", "G"):
        raise DomainError(f"interval must be 'F' or 'G', got {interval!r}")
    if omega1 < 0.0 or omega2 < 0.0:
        raise DomainError("frequencies must be nonnegative")
    if interval == "F" and a <= -1.0:
        raise DomainError(f"need a > -1 on [0, 1], got {a}")
    _check_tol(tol)
    wbar = 0.5 * (omega1 + omega2)
    delta = omega1 - omega2
    omega = max(omega1, omega2)
    b1 = a + 1.0

    def func(u):
        return (np.cos(wbar * u) * np.sinc(delta * u / (2.0 * np.pi)))[None, :]

    if interval == "F":
        b = 1.0 if omega <= math.pi else math.pi / omega
        out = _first_panel(b1, b, func, tol)
        centres, half = _panel_layout(b, 1.0, omega, b1)
        if centres.size:
            out = out + _smooth_generic(b1, func, centres, half)
    else:
        centres, half = _panel_layout(1.0, 2.0, omega, b1)
        out = _smooth_generic(b1, func, centres, half)
    return float(out[0])


class FrequencyLattice:
    """Cached primitives at the half-integer lattice ``(k + 1/2) * pi``.

    Parameters
    ----------
    a : float
        Exponent. The F arrays are filled only when ``a > -1``.
    size : int
        Number of lattice points ``k = 0, ..., size - 1``.
    tol : float
        Quadrature tolerance.
    integer : bool
        Also tabulate the integer points ``k * pi``.

    Attributes
    ----------
    omega : ndarray
        The half-integer frequencies.
    F1, F2, G1, G2 : ndarray
        Primitive values at ``omega``.
    """

    def __init__(self, a: float, size: int, tol: float = DEFAULT_TOL, integer: bool = False):
        if size < 1:
            raise DomainError("lattice size must be positive")
        _check_tol(tol)
        self.a = float(a)
        self.size = int(size)
        self.tol = tol
        self.omega = (np.arange(self.size) + 0.5) * np.pi
        self._half = self._table(self.omega)
        self._int = self._table(np.arange(self.size) * np.pi) if integer else None

    def _table(self, freqs: np.ndarray) -> dict[PrimitiveFamily, np.ndarray]:
        out = {fam: np.full(freqs.size, np.nan) for fam in PrimitiveFamily}
        with_f = self.a > -1.0
        for k, w in enumerate(freqs):
            w = float(w)
            if with_f:
                out[PrimitiveFamily.F1][k], out[PrimitiveFamily.F2][k] = _cos_sin(self.a, w, True, self.tol)
            out[PrimitiveFamily.G1][k], out[PrimitiveFamily.G2][k] = _cos_sin(self.a, w, False, self.tol)
        for arr in out.values():
            arr.setflags(write=False)
        return out

    @property
    def F1(self) -> np.ndarray:
        return self._half[PrimitiveFamily.F1]

    @property
    def F2(self) -> np.ndarray:
        return self._half[PrimitiveFamily.F2]

    @property
    def G1(self) -> np.ndarray:
        return self._half[PrimitiveFamily.G1]

    @property
    def G2(self) -> np.ndarray:
        return self._half[PrimitiveFamily.G2]

    def value(self, family, k: int, half: bool = True) -> float:
        """Stored value of ``family`` at ``(k + 1/2) pi`` (or ``k pi``)."""
        family = PrimitiveFamily.parse(family)
        table = self._half if half else self._int
        if table is None:
            raise DomainError("integer frequencies were not tabulated")
        return float(table[family][k])

    def frequency(self, k: int, half: bool = True) -> float:
        return float((k + 0.5) * np.pi) if half else float(k * np.pi)
