import numpy as np
import pytest

from qwjost.dispersion import SheetPoint
from qwjost.errors import BoundaryLeak, RangeError
from qwjost.oracle import build_finite, direct_solver
from qwjost.resolvent import (
    WeightedNormSpec,
    apply_resolvent,
    default_ladder,
    delta_residual,
    kernel_eval,
    lap_sweep,
    resolvent_kernel,
    resolvent_residual,
    weighted_norm,
)
from qwjost.transfer import StateVector


def test_ladder():
    lad = default_ladder()
    assert len(lad) == 9
    assert lad[0] == 0.1
    assert lad[-1] >= 1e-6 > lad[-1] * 0.25


@pytest.mark.parametrize("p", [SheetPoint(1, 1.0 + 0.05j), SheetPoint(2, -2.4 + 0.02j)], ids=str)
def test_delta_identity(c3, p):
    k = resolvent_kernel(c3, None, p, (-150, 150))
    for y in (-60, 0, 7, 60):
        assert delta_residual(c3, k, y) < 1e-10


def test_resolvent_solves_equation(c2):
    k = resolvent_kernel(c2, None, SheetPoint(1, 0.7 + 0.05j), (-100, 100))
    rng = np.random.default_rng(0)
    u = StateVector(-5, rng.normal(size=(11, 2)) + 0j)
    v = apply_resolvent(k, u, (-80, 80))
    assert resolvent_residual(c2, k, u, v) < 1e-10


def test_kernel_against_ring(c1):
    p = SheetPoint(1, 1.1 + 0.1j)
    k = resolvent_kernel(c1, None, p, (-100, 100))
    solver = direct_solver(build_finite(c1, 200), k.lam)
    col = solver.column(0, 1).reshape(-1, 2)
    v = apply_resolvent(k, StateVector.delta((0, 0), 0, 1), (-30, 30))
    ref = col[100 - 30:100 + 31]
    assert np.max(np.abs(v.u - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_kernel_symmetry_constant_coin(c1):
    # translation invariance of the free kernel
    k = resolvent_kernel(c1, None, SheetPoint(1, 0.9 + 0.05j), (-100, 100))
    assert np.allclose(kernel_eval(k, 3, 1), kernel_eval(k, 13, 11), atol=1e-13)


def test_boundary_leak(c1):
    k = resolvent_kernel(c1, None, SheetPoint(1, 1.0 + 0.05j), (-10, 10))
    with pytest.raises(BoundaryLeak):
        apply_resolvent(k, StateVector.delta((-50, 50), 40, 0))


def test_weighted_norm():
    u = StateVector.delta((-3, 3), 2, 0, 2.0)
    assert weighted_norm(u, WeightedNormSpec(1.0)) == pytest.approx(2 * 5 ** 0.5)
    assert weighted_norm(u, WeightedNormSpec(0.0)) == pytest.approx(2)


def test_lap_preconditions(c3):
    with pytest.raises(RangeError):
        lap_sweep(c3, None, SheetPoint(1, 1.0 + 0.01j))
    with pytest.raises(RangeError):
        lap_sweep(c3, None, SheetPoint(1, 0.01))
    with pytest.raises(RangeError):
        lap_sweep(c3, None, SheetPoint(1, 1.0), [0.1, 0.2])


def test_lap_small_sigma_flagged(c2):
    rep = lap_sweep(c2, None, SheetPoint(1, 1.2), [0.1, 0.025, 0.00625], sigma=0.4, window=(-60, 60))
    assert not rep.sigma_ok
    assert any("sigma" in n for n in rep.notes)
