import math

import numpy as np
import pytest

from qwjost.coin import CoinSequence
from qwjost.dispersion import SheetPoint
from qwjost.errors import NearSingular, SizeError
from qwjost.oracle import (
    build_finite,
    direct_solver,
    eigenvector_wronskian,
    half_mass_radius,
    outside_band_fraction,
    participation_ratio,
    smallest_singular_value,
    spectrum_finite,
    spectrum_table,
    wronskian_certificate,
)


def test_sizes(c1):
    for N in (7, 6, 4096):
        with pytest.raises(SizeError):
            build_finite(c1, N)


def test_free_ring_spectrum_is_explicit():
    # constant coin on the ring: eigenvalues solve rho cos k = cos lambda, k = 2 pi j / N
    a = 0.6
    N = 32
    fw = build_finite(CoinSequence.constant(a, (0, 0)), N)
    spectrum = spectrum_finite(fw)
    rho = math.sqrt(1 - a * a)
    k = 2 * math.pi * np.arange(N) / N
    lam = np.arccos(rho * np.cos(k))
    ref = np.sort(np.mod(np.concatenate([lam, -lam]), 2 * math.pi))
    assert np.allclose(spectrum.angles, ref, atol=1e-12)


def test_unitary_eigenvectors(c3):
    fw = build_finite(c3, 64)
    spectrum = spectrum_finite(fw)
    V = spectrum.vectors
    assert np.allclose(V.conj().T @ V, np.eye(128), atol=1e-10)
    assert np.allclose(fw.U @ V, V * spectrum.values, atol=1e-10)


def test_participation_ratio_limits():
    flat = np.ones((50, 2))
    assert participation_ratio(flat) == pytest.approx(50)
    loc = np.zeros((50, 2))
    loc[7, 1] = 1
    assert participation_ratio(loc) == pytest.approx(1)
    assert half_mass_radius(loc) == 0


def test_band_fraction_free(c1):
    spectrum = spectrum_finite(build_finite(c1, 128))
    assert outside_band_fraction(spectrum, c1.rho_inf) == 0.0
    rows = spectrum_table(build_finite(c1, 32), delta_band=0.0)
    assert all(r.abs_cos <= c1.rho_inf + 1e-10 for r in rows)


def test_near_singular(c1):
    fw = build_finite(c1, 16)
    lam = spectrum_finite(fw).angles[3]
    assert smallest_singular_value(fw, lam) < 1e-10
    with pytest.raises(NearSingular):
        direct_solver(fw, lam)


def test_wronskian_certificates(c3):
    p = SheetPoint(1, 1.1)
    assert wronskian_certificate(c3, p) > 1e-3
    fw = build_finite(c3, 128)
    gap, w = eigenvector_wronskian(fw, spectrum_finite(fw), p)
    assert gap < 0.1
    assert np.isfinite(w)
