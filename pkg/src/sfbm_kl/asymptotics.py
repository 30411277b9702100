"""Closed-form eigenvalue and small-ball laws, and fits against spectra.

Two normalisations of the sub-fractional constants are carried side by side:
``PAPER`` uses the published constants, ``HALVED`` divides the sub-fractional
ones by two, which makes them equal to the fBm constant and reproduces the
exact Brownian spectrum at ``h = 1/2``. Fits decide between them.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .eigensolve import Spectrum
from .errors import DomainError, WindowError
from .kernels import ProcessKind, check_hurst
from .special import sin_gamma

__all__ = [
    "Hypothesis",
    "Branch",
    "AsymptoticLaw",
    "FitResult",
    "RemainderProbe",
    "H_STAR",
    "PUBLISHED_H_STAR",
    "leading_law",
    "logdet_asymptotic",
    "smallball_asymptotic",
    "smallball_coefficient",
    "format_table",
    "fit_constant",
    "remainder_probe",
    "hypothesis_verdict",
    "report",
]

# root of (2h+2)(4h+3)/(4h+5) = 3, i.e. 8h^2 + 2h - 9 = 0; the branch switch
H_STAR = (-1.0 + math.sqrt(73.0)) / 8.0
# the published closed form of the same switch, which does not solve that equation
PUBLISHED_H_STAR = (-1.0 + math.sqrt(74.0)) / 8.0


class Hypothesis(enum.Enum):
    PAPER = "paper"
    HALVED = "halved"

    @classmethod
    def parse(cls, value) -> "Hypothesis":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown hypothesis {value!r}") from None


class Branch(enum.Enum):
    BELOW_THRESHOLD = "below"
    ABOVE_THRESHOLD = "above"
    NA = "na"


@dataclass(frozen=True)
class AsymptoticLaw:
    """``lambda_n ~ constant * n^(-power)`` with a remainder exponent."""

    kind: ProcessKind
    h: float
    constant: float
    power: float
    remainder_power: float
    branch: Branch
    hypothesis: Hypothesis

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["branch"] = self.branch.value
        d["hypothesis"] = self.hypothesis.value
        return d


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of ``log lambda_n`` against ``log(n + offset)``.

    ``fitted_constant`` uses the fixed slope ``-power``; ``fitted_power`` and
    ``free_constant`` come from the free-slope fit (``fitted_power`` is the
    slope, so it is negative for a decaying spectrum).
    """

    fitted_constant: float
    fitted_power: float
    free_constant: float
    index_window: tuple[int, int]
    rms_log_residual: float
    power: float
    offset: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["index_window"] = list(self.index_window)
        return d


@dataclass(frozen=True)
class RemainderProbe:
    slope: float
    degenerate: bool
    index_window: tuple[int, int]


def leading_law(kind, h: float, hypothesis=Hypothesis.PAPER) -> AsymptoticLaw:
    """Leading eigenvalue law of a process.

    fBm: ``sin(pi h) Gamma(2h+1) / pi^(2h+1)``, power ``2h+1``.
    sfBm: twice that under ``PAPER``, power ``2h+1``; the remainder exponent
    is ``min((2h+2)(4h+3)/(4h+5), 3)`` with the branch flipping at ``H_STAR``.
    Noise: ``2 sin(pi h) Gamma(2h+1) / pi^(2h-1)`` under ``PAPER``, power
    ``2h-1``, remainder ``2h(4h-1)/(4h+1)``.
    """
    kind = ProcessKind.parse(kind)
    h = check_hurst(h, kind)
    hyp = Hypothesis.parse(hypothesis)
    sg = sin_gamma(h)
    factor = 2.0 if hyp is Hypothesis.PAPER else 1.0
    if kind is ProcessKind.FBM:
        rem = (2 * h + 2) * (4 * h + 3) / (4 * h + 5)
        return AsymptoticLaw(kind, h, sg / math.pi ** (2 * h + 1), 2 * h + 1, rem, Branch.NA, hyp)
    if kind is ProcessKind.SFBM:
        rem = min((2 * h + 2) * (4 * h + 3) / (4 * h + 5), 3.0)
        branch = Branch.BELOW_THRESHOLD if h < H_STAR else Branch.ABOVE_THRESHOLD
        return AsymptoticLaw(kind, h, factor * sg / math.pi ** (2 * h + 1), 2 * h + 1, rem, branch, hyp)
    rem = 2 * h * (4 * h - 1) / (4 * h + 1)
    return AsymptoticLaw(kind, h, factor * sg / math.pi ** (2 * h - 1), 2 * h - 1, rem, Branch.NA, hyp)


def logdet_asymptotic(h: float, lam: float, hypothesis=Hypothesis.PAPER) -> float:
    """Leading term of ``log prod(1 + 2 lam lambda_n)`` for sfBm.

    ``(c sin(pi h) Gamma(2h+1))^(1/(2h+1)) / sin(pi/(2h+1)) * lam^(1/(2h+1))``
    with ``c = 4`` under ``PAPER`` and ``c = 2`` under ``HALVED``.
    """
    h = check_hurst(h)
    if lam < 1.0:
        raise DomainError("the expansion needs lam >= 1")
    c = 4.0 if Hypothesis.parse(hypothesis) is Hypothesis.PAPER else 2.0
    p = 2.0 * h + 1.0
    return (c * sin_gamma(h)) ** (1.0 / p) / math.sin(math.pi / p) * lam ** (1.0 / p)


def smallball_coefficient(h: float, hypothesis=Hypothesis.PAPER) -> float:
    """``K`` in ``log P(||X||^2 <= eps) ~ -K eps^(-1/(2h))``."""
    h = check_hurst(h)
    c = 2.0 if Hypothesis.parse(hypothesis) is Hypothesis.PAPER else 1.0
    p = 2.0 * h + 1.0
    return h * (c * sin_gamma(h) / (p * math.sin(math.pi / p)) ** p) ** (1.0 / (2.0 * h))


def smallball_asymptotic(h: float, eps: float, hypothesis=Hypothesis.PAPER) -> float:
    """Leading term of the squared-L2 small-ball log-probability."""
    if not (0.0 < eps <= 1.0):
        raise DomainError("eps must lie in (0, 1]")
    return -smallball_coefficient(h, hypothesis) * eps ** (-1.0 / (2.0 * h))


def _eigs(spec) -> np.ndarray:
    return spec.eigenvalues if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)


def _check_window(window, N: int, lo_floor: int = 10) -> tuple[int, int]:
    lo, hi = int(window[0]), int(window[1])
    if lo < lo_floor or hi > N // 4 or hi <= lo:
        raise WindowError(f"window [{lo}, {hi}] must satisfy {lo_floor} <= lo < hi <= N/4 = {N // 4}")
    return lo, hi


def fit_constant(spec, power: float, window, offset: float = 0.5, check: bool = True) -> FitResult:
    """Fit ``lambda_n = c (n + offset)^(-power)`` over an index window.

    Parameters
    ----------
    spec : Spectrum or array_like
        Eigenvalues sorted descending; index ``n`` starts at 0.
    power : float
        Decay exponent for the fixed-slope fit.
    window : (int, int)
        Inclusive index range; must satisfy ``10 <= lo < hi <= N/4``.
    offset : float
        Abscissa shift. The default ``1/2`` matches the Brownian frequencies
        ``(n + 1/2) pi`` so that the Brownian spectrum is fitted exactly.
    check : bool
        Enforce the window rule.
    """
    lam = _eigs(spec)
    lo, hi = _check_window(window, lam.size) if check else (int(window[0]), int(window[1]))
    n = np.arange(lo, hi + 1)
    y = np.log(lam[lo:hi + 1])
    if not np.all(np.isfinite(y)):
        raise DomainError("eigenvalues in the window must be positive")
    x = np.log(n + offset)
    logc = np.mean(y + power * x)
    resid = y - (logc - power * x)
    slope, intercept = np.polyfit(x, y, 1)
    return FitResult(
        fitted_constant=float(math.exp(logc)),
        fitted_power=float(slope),
        free_constant=float(math.exp(intercept)),
        index_window=(lo, hi),
        rms_log_residual=float(np.sqrt(np.mean(resid**2))),
        power=float(power),
        offset=float(offset),
    )


def hypothesis_verdict(kind, h: float, fitted_constant: float, tolerance: float = 0.05) -> dict:
    """Relative deviation of a fitted constant from both hypotheses.

    Returns a dict with the deviations, the closer hypothesis under
    ``"verdict"`` and whether it lies within ``tolerance``.
    """
    dev = {}
    for hyp in Hypothesis:
        c = leading_law(kind, h, hyp).constant
        dev[hyp.value] = abs(fitted_constant - c) / c
    best = min(dev, key=dev.get)
    return {"deviation": dev, "verdict": best, "within_tolerance": dev[best] <= tolerance}


def remainder_probe(spec, law: AsymptoticLaw, window, offset: float = 0.5,
                    constant: float | None = None) -> RemainderProbe:
    """Log-log slope of ``|lambda_n - c (n + offset)^(-power)|`` over a window.

    ``c`` is the constant of ``law`` (the selected hypothesis) unless given.
    The probe is flagged degenerate when the median residual is within a
    factor 100 of the eigensolver noise floor ``eps * lambda_0 * N``.
    """
    lam = _eigs(spec)
    lo, hi = int(window[0]), int(window[1])
    if lo < 1 or hi >= lam.size or hi <= lo:
        raise WindowError(f"window [{lo}, {hi}] outside the spectrum")
    c = law.constant if constant is None else constant
    n = np.arange(lo, hi + 1)
    x = n + offset
    r = np.abs(lam[lo:hi + 1] - c * x ** (-law.power))
    floor = np.finfo(float).eps * abs(lam[0]) * lam.size
    degenerate = bool(np.median(r) < 100.0 * floor)
    with np.errstate(divide="ignore"):
        slope = float(np.polyfit(np.log(x), np.log(np.maximum(r, floor)), 1)[0])
    return RemainderProbe(slope, degenerate, (lo, hi))


def report(kind, h: float, spec, window) -> dict:
    """Fit both hypotheses on a spectrum and summarise as a JSON-ready dict."""
    laws = {hyp.value: leading_law(kind, h, hyp).to_dict() for hyp in Hypothesis}
    power = laws["paper"]["power"]
    fit = fit_constant(spec, power, window)
    verdict = hypothesis_verdict(kind, h, fit.fitted_constant)
    return {"law": laws, "fit": fit.to_dict(), "hypothesis_verdict": verdict, "window": list(fit.index_window)}


def format_table(rep: dict) -> str:
    """Human-readable two-row comparison table."""
    fit = rep["fit"]["fitted_constant"]
    lines = [f"fitted constant {fit:.7g}  window {rep['window']}", f"{'hypothesis':<10} {'constant':>12} {'rel.dev':>9}"]
    for hyp, law in rep["law"].items():
        dev = rep["hypothesis_verdict"]["deviation"][hyp]
        lines.append(f"{hyp:<10} {law['constant']:>12.7g} {dev:>9.4f}")
    lines.append(f"verdict: {rep['hypothesis_verdict']['verdict']}")
    return "\n".join(lines)


def to_json(rep: dict) -> str:
    return json.dumps(rep, sort_keys=True)
