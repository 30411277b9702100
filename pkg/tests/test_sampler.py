import math

import numpy as np
import pytest

from sfbm_kl import sampler
from sfbm_kl.errors import DomainError, FactorizationError
from sfbm_kl.sampler import (
    Generator,
    cholesky_sample,
    covariance_check,
    empirical_covariance,
    kl_sample,
    read_fspc,
    write_fspc,
)

GRID16 = np.linspace(1 / 16, 1, 16)
GRID64 = np.linspace(1 / 64, 1, 64)


@pytest.fixture(scope="module")
def kl_batch():
    return kl_sample("sfbm", 0.75, 256, GRID16, 200_000, seed=21)


@pytest.fixture(scope="module")
def chol_batch():
    return cholesky_sample("sfbm", 0.75, GRID16, 200_000, seed=22)


def test_brownian_variance_at_one():
    b = kl_sample("sfbm", 0.5, 256, GRID64, 200_000, seed=3)
    var = np.mean(b.paths[:, -1] ** 2)
    assert abs(var - 1.0) <= 3 * math.sqrt(2 / b.M) + b.bias_bound


def test_sfbm_variance_at_one(kl_batch):
    var = np.mean(kl_batch.paths[:, -1] ** 2)
    assert abs(var - (2 - math.sqrt(2))) <= 3 * math.sqrt(2 / kl_batch.M) * (2 - math.sqrt(2)) + kl_batch.bias_bound


def test_kl_covariance(kl_batch):
    chk = covariance_check(kl_batch)
    assert chk.passed
    assert chk.max_abs_error <= 4 * chk.max_se + chk.bias_bound
    assert chk.max_mean_z <= 4.0


def test_cholesky_covariance(chol_batch):
    chk = covariance_check(chol_batch)
    assert chk.passed and chk.bias_bound == 0.0
    assert chk.max_mean_z <= 4.0


def test_kl_and_cholesky_agree(kl_batch, chol_batch):
    a = empirical_covariance(kl_batch)
    b = empirical_covariance(chol_batch)
    tol = 4 * math.sqrt(2) * covariance_check(kl_batch).max_se + kl_batch.bias_bound
    assert np.max(np.abs(a - b)) <= tol


def test_bias_bound_decreases():
    bounds = [kl_sample("sfbm", 0.75, n, GRID16, 1).bias_bound for n in (128, 256, 512)]
    assert bounds[0] > bounds[1] > bounds[2] > 0


def test_single_point_cholesky_variance():
    b = cholesky_sample("sfbm", 0.5, [1.0], 1_000_000, seed=4)
    assert abs(np.mean(b.paths**2) - 1) <= 3 * math.sqrt(2 / 1e6)


def test_rough_fbm_factorises():
    b = cholesky_sample("fbm", 0.3, np.arange(1, 33) / 32, 10)
    assert b.paths.shape == (10, 32) and np.all(np.isfinite(b.paths))


def test_determinism():
    a = kl_sample("fbm", 0.6, 16, GRID16, 1, seed=99).paths
    b = kl_sample("fbm", 0.6, 16, GRID16, 1, seed=99).paths
    assert np.array_equal(a, b)
    c = cholesky_sample("fbm", 0.6, GRID16, 5000, seed=99, threads=3).paths
    d = cholesky_sample("fbm", 0.6, GRID16, 5000, seed=99).paths
    assert np.array_equal(c, d)
    assert not np.array_equal(c, cholesky_sample("fbm", 0.6, GRID16, 5000, seed=98).paths)


def test_factorisation_failure(monkeypatch):
    monkeypatch.setattr(sampler, "gram", lambda kind, h, g: -np.eye(len(g)))
    with pytest.raises(FactorizationError):
        cholesky_sample("fbm", 0.6, [0.5, 1.0], 10)


def test_validation():
    with pytest.raises(DomainError):
        kl_sample("sfbm-noise", 0.7, 8, GRID16, 10)
    with pytest.raises(DomainError):
        kl_sample("sfbm", 0.7, 100, GRID16, 10, truncation=64)
    with pytest.raises(DomainError):
        cholesky_sample("sfbm", 0.7, [0.0, 0.5], 10)
    with pytest.raises(DomainError):
        covariance_check(cholesky_sample("sfbm", 0.7, [0.5], 100))


def test_binary_and_csv_export(tmp_path):
    b = cholesky_sample("sfbm", 0.7, [0.25, 0.5, 1.0], 7, seed=1)
    raw = b.to_bytes()
    assert raw[:4] == b"FSPC"
    assert int.from_bytes(raw[4:8], "little") == 1
    assert int.from_bytes(raw[8:16], "little") == 7 and int.from_bytes(raw[16:24], "little") == 3
    assert len(raw) == 24 + 7 * 3 * 8
    path = tmp_path / "p.fspc"
    write_fspc(b, path)
    assert np.array_equal(read_fspc(path), b.paths)
    with pytest.raises(DomainError):
        read_fspc(b"XXXX" + raw[4:])
    rows = b.to_csv().strip().split("\n")
    assert len(rows) == 7 and float(rows[0].split(",")[2]) == b.paths[0, 2]
    assert b.generator is Generator.CHOLESKY
