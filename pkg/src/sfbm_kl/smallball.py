"""Small-ball probabilities of ``S = sum_k lambda_k xi_k^2``.

The spectrum is a computed head ``lambda_0 >= ... >= lambda_{K-1}`` completed
by a power-law tail ``c (k + 1/2)^(-p)``. The tail enters the
determinant ``D(lam) = prod(1 + 2 lam lambda_k)`` through an integral plus a
midpoint Euler-Maclaurin correction, which is exact enough that the Brownian
spectrum reproduces ``log cosh sqrt(2 lam)``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .asymptotics import fit_constant
from .eigensolve import Spectrum
from .errors import DomainError, NoMinimumError, ZeroHitError

__all__ = [
    "TailModel",
    "SmallBallMethod",
    "SmallBallResult",
    "log_determinant",
    "logdet_derivatives",
    "chernoff_smallball",
    "mc_smallball",
    "make_rng",
    "results_to_csv",
    "SmallBallFit",
    "fit_smallball_law",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 0x5F5BC0FFEE
MC_CHUNK = 1 << 14
_TAIL_SUM_TERMS = 1 << 21


@dataclass(frozen=True)
class TailModel:
    """Head eigenvalues plus a power-law tail.

    Attributes
    ----------
    head : ndarray
        Leading eigenvalues, descending.
    tail_constant, tail_power : float
        Tail eigenvalues are ``tail_constant * (k + offset)^(-tail_power)``
        for ``k >= N_head``. A zero constant means a finite spectrum.
    """

    head: np.ndarray = field(repr=False)
    tail_constant: float
    tail_power: float
    offset: float = 0.5
    source: Spectrum | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.tail_constant < 0.0:
            raise DomainError("tail constant must be nonnegative")
        if self.tail_constant > 0.0 and self.tail_power <= 1.0:
            raise DomainError("tail power must exceed 1 for a trace-class tail")
        if np.any(self.head < 0.0):
            raise DomainError("eigenvalues must be nonnegative")

    @property
    def N_head(self) -> int:
        return int(self.head.size)

    @classmethod
    def from_spectrum(cls, spec: Spectrum, power: float, n_head: int | None = None,
                      window: tuple[int, int] | None = None) -> "TailModel":
        """Head from a computed spectrum with a tail constant fitted to it.

        By default the head keeps the first ``N/4`` eigenvalues (the converged
        part of the truncation) and the constant is fitted over
        ``[N/8, N/4 - 1]``.
        """
        N = spec.N
        n_head = N // 4 if n_head is None else int(n_head)
        if window is None:
            window = (max(10, n_head // 2), n_head - 1)
        fit = fit_constant(spec, power, window, check=False)
        head = np.clip(np.array(spec.eigenvalues[:n_head]), 0.0, None)
        return cls(head, fit.fitted_constant, float(power), 0.5, spec)

    @classmethod
    def brownian(cls, n_head: int = 256) -> "TailModel":
        """Exact Brownian spectrum ``1/((k + 1/2) pi)^2``."""
        k = np.arange(n_head)
        return cls(1.0 / ((k + 0.5) * np.pi) ** 2, 1.0 / np.pi**2, 2.0, 0.5)

    @classmethod
    def finite(cls, eigenvalues) -> "TailModel":
        head = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
        return cls(head, 0.0, 2.0, 0.5)

    def eigenvalues(self, count: int) -> np.ndarray:
        """First ``count`` eigenvalues of the completed spectrum."""
        k = np.arange(self.N_head, max(count, self.N_head))
        tail = self.tail_constant * (k + self.offset) ** (-self.tail_power)
        return np.concatenate([self.head, tail])[:count]

    def mean(self) -> float:
        """``E S = sum lambda_k``."""
        total = math.fsum(self.head)
        if self.tail_constant > 0.0:
            p, c, K = self.tail_power, self.tail_constant, self.N_head + self.offset - 0.5
            total += c * K ** (1.0 - p) / (p - 1.0) - p * c * K ** (-p - 1.0) / 24.0
        return total


def _tail_terms(tail: TailModel, lam: float):
    """Tail contribution to ``log D`` and its first two ``lam`` derivatives."""
    c, p = tail.tail_constant, tail.tail_power
    if c == 0.0:
        return 0.0, 0.0, 0.0
    K = tail.N_head + tail.offset - 0.5
    bdot = 2.0 * c * K ** (-p)  # d beta / d lam
    beta = bdot * lam
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    t0 = K * integrate.quad(lambda y: math.log1p(beta * y ** (-p)), 1.0, math.inf, **opts)[0]
    i1 = integrate.quad(lambda y: 1.0 / (y**p + beta), 1.0, math.inf, **opts)[0]
    i2 = integrate.quad(lambda y: 1.0 / (y**p + beta) ** 2, 1.0, math.inf, **opts)[0]
    t1 = K * bdot * i1
    t2 = -K * bdot**2 * i2
    # midpoint Euler-Maclaurin: sum f(k + 1/2) = int_K f + f'(K)/24 + ...
    r = beta / (1.0 + beta)
    e0 = -p * r / (24.0 * K)
    e1 = -p * bdot / (1.0 + beta) ** 2 / (24.0 * K)
    e2 = 2.0 * p * bdot**2 / (1.0 + beta) ** 3 / (24.0 * K)
    return t0 + e0, t1 + e1, t2 + e2


def logdet_derivatives(tail: TailModel, lam: float) -> tuple[float, float, float]:
    """``log D(lam)`` and its first and second derivatives in ``lam``."""
    if lam < 0.0:
        raise DomainError("lam must be nonnegative")
    x = 2.0 * lam * tail.head
    q = tail.head / (1.0 + x)
    d0 = math.fsum(np.log1p(x))
    d1 = 2.0 * math.fsum(q)
    d2 = -4.0 * math.fsum(q * q)
    t0, t1, t2 = _tail_terms(tail, lam)
    return d0 + t0, d1 + t1, d2 + t2


def log_determinant(tail: TailModel, lam: float) -> float:
    """``log prod_k (1 + 2 lam lambda_k)`` over head and tail."""
    return logdet_derivatives(tail, lam)[0]


class SmallBallMethod(enum.Enum):
    SADDLE = "saddle"
    MC_PLAIN = "mc-plain"
    MC_TILTED = "mc-tilted"


@dataclass(frozen=True)
class SmallBallResult:
    epsilon: float
    log_p: float
    method: SmallBallMethod
    lambda_star: float | None = None
    std_error: float | None = None
    M: int | None = None
    seed: int | None = None
    stationarity: float | None = None

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "method": self.method.value,
            "log_p": self.log_p,
            "lambda_star": self.lambda_star,
            "std_error": self.std_error,
            "M": self.M,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def results_to_csv(results) -> str:
    """CSV table of several results, one row each."""
    buf = io.StringIO()
    cols = ["epsilon", "method", "log_p", "lambda_star", "std_error", "M", "seed"]
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for r in results:
        d = r.to_dict()
        writer.writerow({k: ("" if d[k] is None else (f"{d[k]:.17g}" if isinstance(d[k], float) else d[k]))
                         for k in cols})
    return buf.getvalue()


def _initial_lambda(tail: TailModel, eps: float) -> float:
    # leading law of log D for c k^-p gives lam ~ (A / (2 p eps))^(p / (p - 1))
    if tail.tail_constant > 0.0:
        p, c = tail.tail_power, tail.tail_constant
        A = (2.0 * c) ** (1.0 / p) * math.pi / math.sin(math.pi / p)
        return (A / (2.0 * p * eps)) ** (p / (p - 1.0))
    return 1.0 / eps


def chernoff_smallball(tail: TailModel, eps: float, prefactor: bool = False,
                       rtol: float = 1e-10, max_iter: int = 200) -> SmallBallResult:
    """Saddle-point bound ``min_lam [lam eps - log D(lam) / 2]``.

    The objective is convex, so a safeguarded Newton iteration on its
    derivative with a bisection fallback always converges.

    Parameters
    ----------
    prefactor : bool
        Add the second-order correction ``-log(lam*) - log(2 pi f'') / 2``,
        which turns the bound into the leading saddle-point approximation of
        ``log P``.

    Raises
    ------
    NoMinimumError
        If ``eps`` is not below the mean of ``S``.
    """
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    mean = tail.mean()
    if eps >= mean:
        raise NoMinimumError(f"eps={eps} is not below the mean {mean}")

    def deriv(lam):
        _, d1, d2 = logdet_derivatives(tail, lam)
        return eps - 0.5 * d1, -0.5 * d2

    lo, hi = 0.0, _initial_lambda(tail, eps)
    g, _ = deriv(hi)
    while g < 0.0:
        lo, hi = hi, 2.0 * hi
        g, _ = deriv(hi)
        if hi > 1e300:
            raise NoMinimumError("failed to bracket the saddle point")
    lam = 0.5 * (lo + hi) if lo > 0.0 else hi
    for _ in range(max_iter):
        g, gp = deriv(lam)
        if abs(g) <= rtol * eps:
            break
        if g > 0.0:
            hi = lam
        else:
            lo = lam
        step = lam - g / gp if gp > 0.0 else -1.0
        lam = step if lo < step < hi else 0.5 * (lo + hi)
    else:
        raise NoMinimumError("saddle-point iteration did not converge")
    d0, _, d2 = logdet_derivatives(tail, lam)
    value = lam * eps - 0.5 * d0
    if prefactor:
        value += -math.log(lam) - 0.5 * math.log(2.0 * math.pi * (-0.5 * d2))
    return SmallBallResult(eps, value, SmallBallMethod.SADDLE, lambda_star=lam, stationarity=abs(g))


def make_rng(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for substream ``stream`` of ``seed``."""
    if not (0 <= seed < 1 << 64):
        raise DomainError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(key=seed | (stream << 64)))


def _tail_moments(tail: TailModel, K: int, lam: float) -> tuple[float, float]:
    """Mean and variance of ``sum_{k >= K} mu_k xi_k^2``, ``mu = l/(1+2 lam l)``."""
    if tail.tail_constant == 0.0 and K >= tail.N_head:
        return 0.0, 0.0
    L = max(K, tail.N_head) + _TAIL_SUM_TERMS
    lk = tail.eigenvalues(L)[K:]
    mu = lk / (1.0 + 2.0 * lam * lk)
    m = math.fsum(mu)
    v = 2.0 * math.fsum(mu * mu)
    if tail.tail_constant > 0.0:
        p, c = tail.tail_power, tail.tail_constant
        x = L + tail.offset - 0.5
        m += c * x ** (1.0 - p) / (p - 1.0)
        v += 2.0 * c * c * x ** (1.0 - 2.0 * p) / (2.0 * p - 1.0)
    return m, v


def _explicit_modes(tail: TailModel, eps: float, K_max: int) -> int:
    total = tail.mean()
    lam = tail.eigenvalues(max(K_max, tail.N_head))
    for K in range(1, K_max + 1):
        if total - math.fsum(lam[:K]) <= 1e-3 * eps:
            return K
    return K_max


def mc_smallball(tail: TailModel, eps: float, M: int, seed: int = DEFAULT_SEED, tilted: bool = False,
                 lambda_star: float | None = None, K_max: int = 256, threads: int = 1) -> SmallBallResult:
    """Monte Carlo estimate of ``log P(S <= eps)``.

    ``K`` explicit modes are sampled, the smallest count whose neglected mean
    is at most ``1e-3 eps`` but no more than ``K_max``. The remaining tail is
    replaced by a gamma variable matching its mean and variance.

    In tilted mode the modes are drawn from ``N(0, 1/(1 + 2 lam* lambda_k))``
    and the exact identity ``P(S <= eps) = D(lam*)^(-1/2) E_Q[1{S<=eps} e^(lam* S)]``
    is used. Samples are generated in fixed chunks, chunk ``j`` drawing from
    substream ``j`` of ``seed``, and partial sums are reduced in chunk order,
    so the result does not depend on ``threads``.

    Returns
    -------
    SmallBallResult
        ``std_error`` is the delta-method standard error of ``log_p``.
    """
    if M < 1000:
        raise DomainError("M must be at least 1000")
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    if tilted and lambda_star is None:
        lambda_star = chernoff_smallball(tail, eps).lambda_star
    lam = float(lambda_star) if tilted else 0.0
    K = _explicit_modes(tail, eps, K_max)
    lk = tail.eigenvalues(max(K, tail.N_head))[:K]
    mu = lk / (1.0 + 2.0 * lam * lk)
    tm, tv = _tail_moments(tail, K, lam)
    shape, scale = (tm * tm / tv, tv / tm) if tv > 0.0 else (0.0, 0.0)

    def run(j: int):
        n = min(MC_CHUNK, M - j * MC_CHUNK)
        rng = make_rng(seed, j)
        z = rng.standard_normal((n, K))
        s = (z * z) @ mu
        if shape > 0.0:
            s = s + rng.gamma(shape, scale, n)
        if tilted:
            w = np.where(s <= eps, np.exp(lam * (np.minimum(s, eps) - eps)), 0.0)
            return math.fsum(w), math.fsum(w * w)
        hits = float(np.count_nonzero(s <= eps))
        return hits, hits

    chunks = range((M + MC_CHUNK - 1) // MC_CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(j) for j in chunks]
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / M
    if mean == 0.0:
        raise ZeroHitError(f"no sample fell in the ball eps={eps}; use the tilted estimator")
    var = max(s2 / M - mean * mean, 0.0) * M / (M - 1)
    se = math.sqrt(var / M) / mean
    if tilted:
        log_p = -0.5 * log_determinant(tail, lam) + lam * eps + math.log(mean)
        method = SmallBallMethod.MC_TILTED
    else:
        log_p = math.log(mean)
        method = SmallBallMethod.MC_PLAIN
    return SmallBallResult(eps, log_p, method, lambda_star=lambda_star if tilted else None,
                           std_error=se, M=int(M), seed=int(seed))


@dataclass(frozen=True)
class SmallBallFit:
    """``log_p ~ intercept - coefficient * eps^(-exponent)``."""

    exponent: float
    coefficient: float
    intercept: float


def fit_smallball_law(eps, log_p, exponent_guess: float = 1.0) -> SmallBallFit:
    """Fit the leading small-ball law with an additive constant.

    The constant absorbs the ``O(1)`` term of the saddle value (``log 2 / 2``
    for Brownian motion), which otherwise biases the exponent badly when
    ``log_p`` is only a few units. With three points the fit is exact.
    """
    eps = np.asarray(eps, dtype=float)
    y = np.asarray(log_p, dtype=float)
    if eps.size < 3 or eps.size != y.size:
        raise DomainError("need at least three (eps, log_p) pairs")

    def model(e, c0, k, g):
        return c0 - k * e ** (-g)

    k0 = float(np.mean(-y * eps**exponent_guess))
    with warnings.catch_warnings():
        # an exactly determined fit has no parameter covariance
        warnings.simplefilter("ignore", optimize.OptimizeWarning)
        popt, _ = optimize.curve_fit(model, eps, y, p0=(0.0, k0, exponent_guess), maxfev=20000)
    return SmallBallFit(exponent=float(popt[2]), coefficient=float(popt[1]), intercept=float(popt[0]))
