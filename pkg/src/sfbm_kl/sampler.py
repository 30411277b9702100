"""Sample paths from the truncated KL expansion and a Cholesky reference.

KL eigenfunctions are synthesized from Galerkin eigenvectors,
``phi_k(t) = sum_j v_jk sqrt(2) sin((j + 1/2) pi t)``. Both generators draw
their normals from the same counter-based stream as the small-ball Monte
Carlo: paths are produced in fixed chunks, chunk ``j`` using substream ``j``.
"""

from __future__ import annotations

import enum
import io
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import spectrum
from .errors import DomainError, FactorizationError
from .galerkin import Method, assemble
from .kernels import ProcessKind, check_hurst, covariance_array, gram
from .smallball import DEFAULT_SEED, make_rng

__all__ = [
    "Generator",
    "SamplePathBatch",
    "CovarianceCheck",
    "kl_sample",
    "cholesky_sample",
    "covariance_check",
    "eigenfunctions",
    "write_fspc",
    "read_fspc",
]

PATH_CHUNK = 1 << 12
SUP_GRID = 1024
_MAGIC = b"FSPC"
_HEADER = struct.Struct("<4sIQQ")


class Generator(enum.Enum):
    KL = "kl"
    CHOLESKY = "cholesky"


@dataclass(frozen=True)
class SamplePathBatch:
    """``M`` sample paths on a common grid.

    ``bias_bound`` (KL only) bounds the covariance error caused by keeping
    ``n_modes`` terms: ``sum_{k >= n_modes} lambda_k sup |phi_k|^2``.
    """

    kind: ProcessKind
    h: float
    grid: np.ndarray = field(repr=False)
    paths: np.ndarray = field(repr=False)
    generator: Generator
    seed: int
    n_modes: int | None = None
    truncation: int | None = None
    bias_bound: float = 0.0

    @property
    def M(self) -> int:
        return int(self.paths.shape[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        np.savetxt(buf, self.paths, fmt="%.17g", delimiter=",")
        return buf.getvalue()

    def to_bytes(self) -> bytes:
        M, G = self.paths.shape
        return _HEADER.pack(_MAGIC, 1, M, G) + np.ascontiguousarray(self.paths, dtype="<f8").tobytes()


def write_fspc(batch: SamplePathBatch, path) -> None:
    """Write paths in the compact binary layout."""
    with open(path, "wb") as fh:
        fh.write(batch.to_bytes())


def read_fspc(data) -> np.ndarray:
    """Read an ``M x G`` path matrix from bytes or a file path."""
    if not isinstance(data, (bytes, bytearray)):
        with open(data, "rb") as fh:
            data = fh.read()
    magic, version, M, G = _HEADER.unpack_from(data)
    if magic != _MAGIC or version != 1:
        raise DomainError("not an FSPC version 1 stream")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != M * G:
        raise DomainError("FSPC payload size does not match its header")
    return body.reshape(M, G).astype(float)


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise DomainError("grid must be a nonempty vector")
    if np.any(g <= 0.0) or np.any(g > 1.0):
        raise DomainError("grid points must lie in (0, 1]")
    return g


def _check_kind(kind, h):
    kind = ProcessKind.parse(kind)
    if kind is ProcessKind.SFBM_NOISE:
        raise DomainError("the noise process has no pointwise sample paths")
    return kind, check_hurst(h, kind)


def _sine_matrix(t: np.ndarray, N: int) -> np.ndarray:
    return math.sqrt(2.0) * np.sin(np.outer(t, (np.arange(N) + 0.5) * np.pi))


def eigenfunctions(vectors: np.ndarray, t) -> np.ndarray:
    """Values ``phi_k(t_i)`` of the synthesized eigenfunctions (``|t| x K``)."""
    return _sine_matrix(np.asarray(t, dtype=float), vectors.shape[0]) @ vectors


def _trace(kind: ProcessKind, h: float) -> float:
    # int_0^1 K(t, t) dt
    if kind is ProcessKind.FBM:
        return 1.0 / (2.0 * h + 1.0)
    return (2.0 - 2.0 ** (2.0 * h - 1.0)) / (2.0 * h + 1.0)


def _generate(M: int, seed: int, width: int, transform, threads: int) -> np.ndarray:
    def run(j):
        n = min(PATH_CHUNK, M - j * PATH_CHUNK)
        return transform(make_rng(seed, j).standard_normal((n, width)))

    chunks = range((M + PATH_CHUNK - 1) // PATH_CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(j) for j in chunks]
    out = np.concatenate(parts, axis=0)
    out.setflags(write=False)
    return out


def kl_sample(kind, h: float, n_modes: int, grid, M: int, seed: int = DEFAULT_SEED,
              truncation: int | None = None, method=Method.REDUCED_1D, threads: int = 1) -> SamplePathBatch:
    """Paths ``X(t) = sum_{k < n_modes} sqrt(lambda_k) xi_k phi_k(t)``.

    Parameters
    ----------
    n_modes : int
        Number of KL terms kept.
    truncation : int, optional
        Galerkin size used for the eigenpairs; default ``max(2 n_modes, 64)``.
    """
    kind, h = _check_kind(kind, h)
    g = _check_grid(grid)
    N = max(2 * n_modes, 64) if truncation is None else int(truncation)
    if not (1 <= n_modes <= N):
        raise DomainError("n_modes must lie in [1, truncation]")
    if M < 1:
        raise DomainError("M must be positive")
    sp = spectrum(assemble(kind, h, N, method), want_vectors=True)
    lam = np.clip(sp.eigenvalues, 0.0, None)
    vecs = sp.eigenvectors
    basis = eigenfunctions(vecs[:, :n_modes], g) * np.sqrt(lam[:n_modes])
    # bias: computed modes beyond n_modes plus the mass missing from the truncation
    sup = np.max(eigenfunctions(vecs[:, n_modes:], np.linspace(0.0, 1.0, SUP_GRID)) ** 2, axis=0) \
        if n_modes < N else np.zeros(0)
    missing = max(_trace(kind, h) - math.fsum(lam), 0.0)
    bias = math.fsum(lam[n_modes:] * sup) + 2.0 * missing
    paths = _generate(M, seed, n_modes, lambda z: z @ basis.T, threads)
    return SamplePathBatch(kind, h, g, paths, Generator.KL, int(seed), n_modes, N, float(bias))


def cholesky_sample(kind, h: float, grid, M: int, seed: int = DEFAULT_SEED,
                    jitter: float | None = None, threads: int = 1) -> SamplePathBatch:
    """Exact Gaussian vectors on the grid through a Cholesky factor.

    The factor is of ``gram + jitter I`` with default jitter
    ``1e-12 trace / G``; on failure the jitter grows by 100 up to three times.

    Raises
    ------
    FactorizationError
        If all jitter escalations fail.
    """
    kind, h = _check_kind(kind, h)
    g = _check_grid(grid)
    if M < 1:
        raise DomainError("M must be positive")
    cov = gram(kind, h, g)
    j = 1e-12 * np.trace(cov) / g.size if jitter is None else float(jitter)
    for _ in range(4):
        try:
            L = np.linalg.cholesky(cov + j * np.eye(g.size))
            break
        except np.linalg.LinAlgError:
            j *= 100.0
    else:
        raise FactorizationError("Cholesky factorization failed after 3 jitter escalations")
    paths = _generate(M, seed, g.size, lambda z: z @ L.T, threads)
    return SamplePathBatch(kind, h, g, paths, Generator.CHOLESKY, int(seed))


@dataclass(frozen=True)
class CovarianceCheck:
    """Empirical against exact covariance on the grid.

    ``max_se`` is the largest pairwise standard error
    ``sqrt((K_ss K_tt + K_st^2) / M)`` of the uncentred covariance estimate.
    """

    max_abs_error: float
    max_se: float
    bias_bound: float
    max_mean_z: float

    @property
    def tolerance(self) -> float:
        return 4.0 * self.max_se + self.bias_bound

    @property
    def passed(self) -> bool:
        return self.max_abs_error <= self.tolerance


def empirical_covariance(batch: SamplePathBatch) -> np.ndarray:
    """Uncentred second moment ``paths^T paths / M`` (the mean is known to be 0)."""
    return batch.paths.T @ batch.paths / batch.M


def covariance_check(batch: SamplePathBatch) -> CovarianceCheck:
    """Compare a batch with the exact kernel.

    ``max_mean_z`` is the largest coordinate mean in units of its standard
    error, a check of centring.
    """
    if batch.M < 10_000:
        raise DomainError("covariance_check needs M >= 1e4")
    g = batch.grid
    exact = covariance_array(batch.kind, batch.h, g[:, None], g[None, :])
    emp = empirical_covariance(batch)
    d = np.diag(exact)
    se = np.sqrt((np.outer(d, d) + exact**2) / batch.M)
    mean_z = np.abs(batch.paths.mean(axis=0)) / np.sqrt(np.maximum(d, 1e-300) / batch.M)
    return CovarianceCheck(
        max_abs_error=float(np.max(np.abs(emp - exact))),
        max_se=float(np.max(se)),
        bias_bound=float(batch.bias_bound),
        max_mean_z=float(np.max(mean_z)),
    )
