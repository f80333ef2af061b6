import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from qwjost.coin import CoinSequence
from qwjost.dispersion import (
    P_from,
    SheetPoint,
    arccos_branched,
    b_alpha,
    b_zero,
    check_admissible,
    choose_r0,
    choose_r_eps,
    is_admissible,
    lambda_alpha,
    lambda_infty,
    make_cutoffs,
    xi_alpha,
    zeta_profile,
)
from qwjost.errors import BranchCut, OutOfDomain, StripViolation, WindowTooSmall
from qwjost.transfer import transfer_matrices

finite = st.floats(-3, 3, allow_nan=False)


@given(finite, finite)
def test_arccos_matches_mpmath(re, im):
    assume(im != 0 or abs(re) <= 1)
    z = complex(re, im)
    ref = complex(mpmath.acos(mpmath.mpc(re, im)))
    assert abs(arccos_branched(z) - ref) <= 1e-13 * max(1, abs(ref))


def test_arccos_cut_and_range():
    with pytest.raises(BranchCut):
        arccos_branched(1.5)
    with pytest.raises(BranchCut):
        arccos_branched(np.array([0.2, -2.0]))
    w = arccos_branched(np.array([0.3 + 0.1j, 0.3 - 0.1j]))
    assert w[0].imag < 0 < w[1].imag
    assert arccos_branched(-1.0) == pytest.approx(math.pi)


def test_b_alpha_identity():
    for a in (0.1, 0.5, 1 / math.sqrt(2), 0.9):
        rho = math.sqrt(1 - a * a)
        assert b_alpha(a) == pytest.approx(math.acosh(1 / rho), rel=1e-14)
        assert b_zero(a) == pytest.approx(b_alpha(a) / 8)


def test_sheet_point_reduction():
    p = SheetPoint(1, 3 * math.pi + 0.2j)
    assert p.xi.real == pytest.approx(math.pi)
    assert SheetPoint(2, -math.pi).xi.real == math.pi
    assert SheetPoint(1, 0.0).on_edge
    with pytest.raises(ValueError):
        SheetPoint(3, 0.1)


@given(st.sampled_from([0.3, 0.5, 1 / math.sqrt(2)]), st.integers(1, 2), st.floats(-3.1, 3.1), st.floats(0, 0.99))
def test_round_trip(a, sheet, re, t):
    p = SheetPoint(sheet, complex(re, t * 2 * b_zero(a)))
    assume(is_admissible(p, a))
    lam = lambda_alpha(a, p)
    q = xi_alpha(a, lam, sheet)
    assert abs(lambda_alpha(a, q) - lam) <= 1e-12
    rho = math.sqrt(1 - a * a)
    assert abs(rho * np.cos(q.xi) - np.cos(lam)) <= 1e-13


def test_sheets_are_negatives():
    a = 0.5
    p1, p2 = SheetPoint(1, 0.7 + 0.01j), SheetPoint(2, 0.7 + 0.01j)
    assert lambda_alpha(a, p1) == pytest.approx(-lambda_alpha(a, p2))


def test_strip_violation():
    a = 0.5
    with pytest.raises(StripViolation):
        lambda_alpha(a, SheetPoint(1, 1.0 + 1j * (b_alpha(a) + 0.01)))


def test_xi_alpha_out_of_domain():
    # cos(lambda) far outside rho [-cosh b, cosh b] has no strip preimage
    with pytest.raises(OutOfDomain):
        xi_alpha(0.5, 3j, 1)


def test_admissible_domain():
    a = 0.5
    b0 = b_zero(a)
    assert is_admissible(SheetPoint(1, 1.0), a)
    assert not is_admissible(SheetPoint(1, 0.0), a)
    assert not is_admissible(SheetPoint(1, 0.5 * b0 * 1j), a)
    assert is_admissible(SheetPoint(2, 1.5 * b0 * 1j), a)
    assert not is_admissible(SheetPoint(1, 1.0 + 2.0 * b0 * 1j), a)
    with pytest.raises(OutOfDomain):
        check_admissible(SheetPoint(1, math.pi), a)


def test_zeta_equals_xi_for_constant(c1):
    cut = make_cutoffs(c1)
    p = SheetPoint(1, 0.9 + 0.03j)
    z = zeta_profile(c1, cut, p, c1.sites)
    assert np.all(z == p.xi)


def test_zeta_dispersion(c3):
    cut = make_cutoffs(c3)
    xs = c3.sites
    for p in (SheetPoint(1, 1.2), SheetPoint(2, -0.6 + 0.02j)):
        z = zeta_profile(c3, cut, p, xs)
        far = np.abs(xs) >= cut.r0
        lhs = c3.rho_at(xs[far]) * np.cos(z[far])
        assert np.max(np.abs(lhs - c3.rho_inf * np.cos(p.xi))) < 1e-14
        assert np.all(z[~far] == p.xi)
        assert np.all(z.imag >= 0)


def test_zeta_symmetry(c3):
    cut = make_cutoffs(c3)
    p = SheetPoint(1, 0.8 + 0.04j)
    z1 = zeta_profile(c3, cut, p, c3.sites)
    z2 = zeta_profile(c3, cut, p.reflect(), c3.sites)
    assert np.max(np.abs(z2 + np.conj(z1))) < 1e-13


def test_cutoffs(c2, c3):
    assert choose_r0(c2) == 4
    r = choose_r_eps(c3, 0.1)
    assert r >= choose_r0(c3)
    with pytest.raises(WindowTooSmall):
        choose_r0(CoinSequence.from_function(lambda x: 0.5 + 0.2 / (1 + np.abs(x)), (-5, 5), 0.5, 0.5), tol=1e-3)


def test_P_diagonalizes_transfer_matrix():
    a, lam_xi = 0.6 * np.exp(0.4j), SheetPoint(1, 1.1 + 0.02j)
    seq = CoinSequence.constant(a, (0, 0))
    lam = lambda_infty(seq, lam_xi)
    r = math.sqrt(1 - abs(a) ** 2)
    P = P_from(a, r, lam_xi.xi, lam)
    T = transfer_matrices(seq, np.array([0]), lam)[0]
    D = np.linalg.solve(P, T @ P)
    assert np.allclose(D, np.diag([np.exp(1j * lam_xi.xi), np.exp(-1j * lam_xi.xi)]), atol=1e-13)
    assert abs(np.linalg.det(P) + 2j * a * r * np.sin(lam_xi.xi)) < 1e-14
