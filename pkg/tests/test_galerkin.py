import json
import math

import numpy as np
import pytest

from sfbm_kl.errors import DomainError
from sfbm_kl.galerkin import (
    GalerkinMatrix,
    Method,
    assemble,
    assemble_a1,
    element_asymptotic,
    element_oracle,
    element_reduced,
)

# independent mpmath values (30 digits, nested adaptive quadrature split at x = y)
MP_SFBM_075_00 = 0.20206478627181037
MP_FBM_075_03 = -0.0043487854675459113


def bm(n):
    return 1.0 / ((n + 0.5) * math.pi) ** 2


def test_spec_bm_entry():
    # 1/(3.5 pi)^2
    assert element_reduced("sfbm", 0.5, 3, 3) == pytest.approx(bm(3), abs=1e-15)
    assert bm(3) == pytest.approx(0.0082711170, abs=1e-10)


@pytest.mark.parametrize("method", ["reduced1d", "oracle2d"])
@pytest.mark.parametrize("kind", ["fbm", "sfbm"])
def test_brownian_degeneration(kind, method):
    a = assemble(kind, 0.5, 16, method).entries
    assert np.max(np.abs(a - np.diag([bm(n) for n in range(16)]))) <= 1e-13


def test_frozen_high_precision_entries():
    for value in (element_reduced("sfbm", 0.75, 0, 0), element_oracle("sfbm", 0.75, 0, 0),
                  element_reduced("sfbm", 0.75, 0, 0, route="kernel")):
        assert value == pytest.approx(MP_SFBM_075_00, abs=1e-14)
    for value in (element_reduced("fbm", 0.75, 0, 3), element_oracle("fbm", 0.75, 3, 0)):
        assert value == pytest.approx(MP_FBM_075_03, abs=1e-14)


@pytest.mark.parametrize("kind,h", [
    ("fbm", 0.3), ("fbm", 0.75), ("sfbm", 0.45), ("sfbm", 0.6), ("sfbm", 0.9),
    ("sfbm-noise", 0.55), ("sfbm-noise", 0.8),
])
def test_two_routes_agree(kind, h):
    red = assemble(kind, h, 12).entries
    ora = assemble(kind, h, 12, Method.ORACLE_2D).entries
    assert np.max(np.abs(red - ora)) <= 1e-12


def test_ibp_and_kernel_routes_agree():
    for n, m in [(0, 0), (5, 2), (17, 4), (30, 30)]:
        a = element_reduced("sfbm", 0.7, n, m, route="ibp")
        b = element_reduced("sfbm", 0.7, n, m, route="kernel")
        assert a == pytest.approx(b, abs=1e-13)


def test_sfbm_splits_as_fbm_minus_a1():
    h, N = 0.75, 40
    diff = assemble("fbm", h, N).entries - assemble_a1(h, N) - assemble("sfbm", h, N).entries
    assert np.max(np.abs(diff)) <= 1e-15
    # doubling the fBm block instead would be off by the whole fBm matrix
    wrong = 2 * assemble("fbm", h, N).entries - assemble_a1(h, N) - assemble("sfbm", h, N).entries
    assert np.max(np.abs(wrong)) > 0.1


def test_near_brownian_continuity():
    h = 0.5 + 1e-9
    assert element_reduced("sfbm", h, 4, 4) == pytest.approx(bm(4), abs=1e-9)
    assert abs(element_reduced("sfbm", h, 4, 2)) <= 1e-9


def test_matrix_properties():
    mat = assemble("sfbm", 0.65, 24)
    a = mat.entries
    assert np.array_equal(a, a.T)
    assert not a.flags.writeable
    assert np.linalg.eigvalsh(a).min() > 0
    assert element_reduced("sfbm", 0.65, 3, 7) == element_reduced("sfbm", 0.65, 7, 3)


def test_threads_do_not_change_entries():
    a = assemble("sfbm", 0.8, 300, threads=1).entries
    b = assemble("sfbm", 0.8, 300, threads=4).entries
    assert np.array_equal(a, b)


def test_serialisation_round_trip():
    mat = assemble("fbm", 0.4, 6)
    back = GalerkinMatrix.from_json(mat.to_json())
    assert np.array_equal(back.entries, mat.entries)
    assert back.kind is mat.kind and back.method is mat.method
    assert json.loads(mat.to_json())["N"] == 6
    rows = mat.to_csv().strip().split("\n")
    assert len(rows) == 6 and float(rows[2].split(",")[3]) == mat.entries[2, 3]


def test_domain_checks():
    with pytest.raises(DomainError):
        assemble("sfbm-noise", 0.5, 8)
    with pytest.raises(DomainError):
        assemble("sfbm", 0.7, 65, Method.ORACLE_2D)
    with pytest.raises(DomainError):
        element_asymptotic("sfbm", 0.7, 5, 20)
    with pytest.raises(DomainError):
        Method.parse("spectral")


@pytest.mark.parametrize("kind", ["fbm", "sfbm", "sfbm-noise"])
@pytest.mark.parametrize("h", [0.6, 0.75, 0.9])
def test_corrected_diagonal_expansion_converges(kind, h):
    errs = [abs(element_asymptotic(kind, h, m, m, form="corrected") / element_reduced(kind, h, m, m) - 1)
            for m in (20, 40, 80, 160)]
    assert errs[-1] < 1e-5
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_published_sfbm_diagonal_is_twice_the_matrix_entry():
    # the published diagonal carries 2 sin(pi h) Gamma(2h+1) / m*^(2h+1)
    for h in (0.6, 0.75):
        ratio = element_asymptotic("sfbm", h, 400, 400, form="paper") / element_reduced("sfbm", h, 400, 400)
        # the published (-1)^m / m*^3 term still shifts it by about 3% here
        assert ratio == pytest.approx(2.0, abs=0.05)


def test_asymptotic_assembly_keeps_small_indices():
    red = assemble("sfbm", 0.7, 24).entries
    asy = assemble("sfbm", 0.7, 24, Method.ASYMPTOTIC, form="corrected").entries
    assert np.array_equal(asy[:10, :10], red[:10, :10])
    assert np.array_equal(asy, asy.T)


def test_corrected_off_diagonal_expansion():
    for n, m in [(40, 12), (120, 60)]:
        a = element_asymptotic("sfbm", 0.75, n, m, form="corrected")
        b = element_reduced("sfbm", 0.75, n, m)
        assert a == pytest.approx(b, rel=0.05, abs=1e-9)
