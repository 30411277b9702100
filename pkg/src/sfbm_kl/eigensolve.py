"""Symmetric eigenproblems for Galerkin matrices.

Production decompositions use LAPACK through :func:`numpy.linalg.eigh`. A
cyclic Jacobi solver is included as an independent reference for small
matrices and is selectable with ``method="jacobi"``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .galerkin import GalerkinMatrix, Method, assemble
from .kernels import ProcessKind

__all__ = [
    "Spectrum",
    "spectrum",
    "jacobi_eigh",
    "ConvergenceSweep",
    "convergence_sweep",
    "PorterStirlingReport",
    "porter_stirling_check",
]

JACOBI_MAX_N = 64


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (descending) and optionally eigenvectors of a matrix."""

    kind: ProcessKind | None
    h: float | None
    N: int
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray | None = field(default=None, repr=False)
    residual: float | None = None

    def to_dict(self) -> dict:
        return {
            "kind": None if self.kind is None else self.kind.value,
            "h": self.h,
            "N": self.N,
            "eigenvalues": self.eigenvalues.tolist(),
            "residual": self.residual,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for v in self.eigenvalues:
            writer.writerow([f"{v:.17g}"])
        return buf.getvalue()


def jacobi_eigh(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Returns
    -------
    w : ndarray
        Eigenvalues in the order produced by the sweeps (unsorted).
    v : ndarray
        Orthogonal matrix whose columns are the eigenvectors.

    Raises
    ------
    ConvergenceError
        If the off-diagonal mass is still above ``tol * ||A||_F`` after
        ``max_sweeps`` sweeps.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    raise ConvergenceError("Jacobi iteration did not converge")


def _orient(v: np.ndarray) -> np.ndarray:
    # make the largest-magnitude component of each column positive
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def spectrum(matrix, want_vectors: bool = False, method: str = "lapack") -> Spectrum:
    """Full eigen-decomposition of a symmetric matrix.

    Parameters
    ----------
    matrix : GalerkinMatrix or array_like
    want_vectors : bool
        Also return eigenvectors and the residual ``max ||A v - lambda v||``.
    method : {"lapack", "jacobi"}
        Jacobi is limited to ``N <= 64``.

    Returns
    -------
    Spectrum
        Eigenvalues sorted descending with ties kept in original order.
    """
    if isinstance(matrix, GalerkinMatrix):
        a, kind, h = matrix.entries, matrix.kind, matrix.h
    else:
        a, kind, h = np.asarray(matrix, dtype=float), None, None
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("matrix must be square")
    if not np.array_equal(a, a.T):
        if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, np.max(np.abs(a))):
            raise DomainError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
    n = a.shape[0]
    if method == "jacobi":
        if n > JACOBI_MAX_N:
            raise DomainError(f"Jacobi is limited to N <= {JACOBI_MAX_N}")
        w, v = jacobi_eigh(a)
    elif method == "lapack":
        try:
            if want_vectors:
                w, v = np.linalg.eigh(a)
            else:
                w, v = np.linalg.eigvalsh(a), None
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(str(exc)) from exc
    else:
        raise DomainError(f"unknown eigen method {method!r}")
    order = np.argsort(-w, kind="stable")
    w = w[order]
    residual = None
    vecs = None
    if want_vectors:
        vecs = _orient(v[:, order])
        residual = float(np.max(np.linalg.norm(a @ vecs - vecs * w, axis=0)))
        vecs.setflags(write=False)
    w.setflags(write=False)
    return Spectrum(kind, h, n, w, vecs, residual)


@dataclass(frozen=True)
class ConvergenceSweep:
    """Leading eigenvalues of nested truncations.

    ``values[i, j]`` is the ``j``-th eigenvalue of the ``Ns[i]`` truncation.
    """

    kind: ProcessKind
    h: float
    Ns: tuple[int, ...]
    values: np.ndarray = field(repr=False)

    def max_decrease(self) -> float:
        """Largest drop of any eigenvalue when ``N`` grows (0 when monotone)."""
        if len(self.Ns) < 2:
            return 0.0
        drops = self.values[:-1] - self.values[1:]
        return float(max(0.0, drops.max()))


def convergence_sweep(kind, h: float, Ns, k: int, method=Method.REDUCED_1D, tol: float = 1e-10) -> ConvergenceSweep:
    """Leading ``k`` eigenvalues for each truncation size in ``Ns``.

    The largest matrix is assembled once; smaller truncations are its leading
    principal blocks, which is exactly the smaller Galerkin matrix.
    """
    Ns = tuple(int(n) for n in Ns)
    if not Ns or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise DomainError("Ns must be strictly increasing")
    if k > Ns[0] or k < 1:
        raise DomainError("k must lie in [1, min(Ns)]")
    big = assemble(kind, h, Ns[-1], method, tol)
    rows = []
    for n in Ns:
        w = np.linalg.eigvalsh(big.entries[:n, :n])
        rows.append(np.sort(w)[::-1][:k])
    vals = np.array(rows)
    vals.setflags(write=False)
    return ConvergenceSweep(big.kind, big.h, Ns, vals)


@dataclass(frozen=True)
class PorterStirlingReport:
    """Worst margins ``bound - lhs`` of the two eigenvalue inequalities."""

    product_margin: float
    sum_margin: float
    slack: float = 1e-10

    @property
    def worst_margin(self) -> float:
        return min(self.product_margin, self.sum_margin)

    @property
    def product_passed(self) -> bool:
        return self.product_margin >= -self.slack

    @property
    def sum_passed(self) -> bool:
        return self.sum_margin >= -self.slack

    @property
    def passed(self) -> bool:
        return self.product_passed and self.sum_passed


def _by_magnitude(a: np.ndarray) -> np.ndarray:
    return np.sort(np.abs(np.linalg.eigvalsh(a)))[::-1]


def porter_stirling_check(K1, K2, T, slack: float = 1e-10) -> PorterStirlingReport:
    """Brute-force check of the two compact-operator eigenvalue inequalities.

    With eigenvalues ordered by decreasing magnitude, for every ``n`` and
    ``1 <= j <= n``:

    * product: ``|l_n(T^T K1 T)| <= |l_j(K1)| * l_(n-j+1)(T^T T)``
    * sum:     ``|l_n(K1 + K2)| <= |l_(n-j+1)(K1)| + |l_j(K2)|``

    Only the minimum over ``j`` matters, so the margins reported are
    ``min_n [min_j bound - lhs]``.
    """
    K1 = np.asarray(K1, dtype=float)
    K2 = np.asarray(K2, dtype=float)
    T = np.asarray(T, dtype=float)
    n = K1.shape[0]
    if n > 16:
        raise DomainError("brute-force check is limited to dimension 16")
    if K2.shape != K1.shape or T.shape[0] != n:
        raise DomainError("dimension mismatch")
    lhs_p = _by_magnitude(T.T @ K1 @ T)
    k1 = _by_magnitude(K1)
    k2 = _by_magnitude(K2)
    tt = np.sort(np.linalg.eigvalsh(T.T @ T))[::-1]
    lhs_s = _by_magnitude(K1 + K2)
    m = min(lhs_p.size, n)
    prod = min(min(k1[j] * tt[i - j] for j in range(i + 1)) - lhs_p[i] for i in range(m))
    summ = min(min(k1[i - j] + k2[j] for j in range(i + 1)) - lhs_s[i] for i in range(n))
    return PorterStirlingReport(float(prod), float(summ), slack)
