"""Covariance kernels of fBm, sub-fractional Bm and the sub-fractional noise.

All kernels live on the unit square. For Hurst index ``h`` the three kernels
are

* fBm:   ``(s^2h + t^2h - |s-t|^2h) / 2``
* sfBm:  ``s^2h + t^2h - ((s+t)^2h + |s-t|^2h) / 2``
* noise: ``h(2h-1) (|s-t|^(2h-2) - (s+t)^(2h-2))`` for ``h > 1/2``

The noise kernel is the mixed second derivative of the sfBm kernel and is
singular on the diagonal.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import DomainError, SingularityError
from .oscint import _tanh_sinh

__all__ = [
    "ProcessKind",
    "check_hurst",
    "covariance",
    "covariance_array",
    "gram",
    "integral_relation_residual",
]

_DIAG_EPS = 1e-14


class ProcessKind(enum.Enum):
    """Which covariance operator is meant."""

    FBM = "fbm"
    SFBM = "sfbm"
    SFBM_NOISE = "sfbm-noise"

    @classmethod
    def parse(cls, value) -> "ProcessKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for kind in cls:
            if key in (kind.value, kind.name.lower().replace("_", "-")):
                return kind
        raise DomainError(f"unknown process kind {value!r}")


def check_hurst(h: float, kind: ProcessKind | None = None) -> float:
    """Validate a Hurst index, returning it as a float.

    Raises
    ------
    DomainError
        If ``h`` is outside ``(0, 1)``, or ``kind`` is the noise and
        ``h <= 1/2``.
    """
    h = float(h)
    if not (0.0 < h < 1.0) or not math.isfinite(h):
        raise DomainError(f"Hurst index must lie in (0, 1), got {h}")
    if kind is not None and ProcessKind.parse(kind) is ProcessKind.SFBM_NOISE and h <= 0.5:
        raise DomainError(f"the noise kernel needs h > 1/2, got {h}")
    return h


def _abs_pow(d, p):
    # |s-t|^p with an exact zero on the diagonal (p > 0 here)
    d = np.abs(d)
    return np.where(d == 0.0, 0.0, d ** p)


def covariance_array(kind, h: float, s, t) -> np.ndarray:
    """Vectorised kernel evaluation with broadcasting over ``s`` and ``t``."""
    kind = ProcessKind.parse(kind)
    h = check_hurst(h, kind)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any((s < 0.0) | (s > 1.0)) or np.any((t < 0.0) | (t > 1.0)):
        raise DomainError("time arguments must lie in [0, 1]")
    h2 = 2.0 * h
    if kind is ProcessKind.FBM:
        return 0.5 * (s**h2 + t**h2 - _abs_pow(s - t, h2))
    if kind is ProcessKind.SFBM:
        return s**h2 + t**h2 - 0.5 * ((s + t) ** h2 + _abs_pow(s - t, h2))
    d = np.abs(s - t)
    if np.any(d < _DIAG_EPS):
        raise SingularityError("the noise kernel is singular on the diagonal s = t")
    return h * (h2 - 1.0) * (d ** (h2 - 2.0) - (s + t) ** (h2 - 2.0))


def covariance(kind, h: float, s: float, t: float) -> float:
    """Kernel value at one point; symmetric in ``(s, t)`` by construction.

    Examples
    --------
    >>> round(covariance("sfbm", 0.75, 1.0, 1.0), 7)
    0.5857864
    """
    lo, hi = (s, t) if s <= t else (t, s)
    return float(covariance_array(kind, h, lo, hi))


def gram(kind, h: float, grid) -> np.ndarray:
    """Covariance matrix on a grid.

    Parameters
    ----------
    grid : array_like
        Strictly increasing points in ``(0, 1]``.
    """
    kind = ProcessKind.parse(kind)
    if kind is ProcessKind.SFBM_NOISE:
        raise DomainError("the noise kernel has no Gram matrix (diagonal singularity)")
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise DomainError("grid must be a nonempty vector")
    if g[0] <= 0.0 or g[-1] > 1.0 or np.any(np.diff(g) <= 0.0):
        raise DomainError("grid must be strictly increasing in (0, 1]")
    m = covariance_array(kind, h, g[:, None], g[None, :])
    iu = np.triu_indices(g.size, 1)
    m[(iu[1], iu[0])] = m[iu]
    return m


def _ts_rule(lo: float, hi: float, level: int):
    """Tanh-sinh nodes on ``[lo, hi]``, with distances to both ends."""
    s, sc, w = _tanh_sinh(level)
    L = hi - lo
    return lo + L * s, L * s, L * sc, L * w


def _noise_double_integral(h: float, s: float, t: float, level: int) -> float:
    p = 2.0 * h - 2.0
    total = 0.0
    # split the outer variable where the inner singular point leaves [0, t]
    cuts = sorted({0.0, min(s, t), s})
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        x, _, _, wx = _ts_rule(lo, hi, level)
        inner = np.zeros_like(x)
        for i, xi in enumerate(x):
            acc = 0.0
            if xi > 0.0:
                # [0, min(x, t)] with the singular end at y = x when x <= t
                top = min(xi, t)
                y, dl, dr, wy = _ts_rule(0.0, top, level)
                dist = (xi - top) + dr
                acc += wy @ (dist ** p)
            if xi < t:
                y, dl, dr, wy = _ts_rule(xi, t, level)
                acc += wy @ (dl ** p)
            y, _, _, wy = _ts_rule(0.0, t, level)
            acc -= wy @ ((xi + y) ** p)
            inner[i] = acc
        total += wx @ inner
    return h * (2.0 * h - 1.0) * total


def integral_relation_residual(h: float, s: float, t: float, level: int = 7) -> float:
    """Check that the noise kernel integrates to the sfBm kernel.

    Returns ``|int_0^s int_0^t K_noise(x, y) dy dx - K_sfbm(s, t)|`` with the
    double integral computed by nested tanh-sinh rules that cluster nodes at
    the diagonal singularity.
    """
    h = check_hurst(h, ProcessKind.SFBM_NOISE)
    if not (0.0 < s <= 1.0 and 0.0 < t <= 1.0):
        raise DomainError("s and t must lie in (0, 1]")
    lo, hi = (s, t) if s <= t else (t, s)
    value = _noise_double_integral(h, lo, hi, level)
    return abs(value - covariance(ProcessKind.SFBM, h, lo, hi))
