"""Two-sheet dispersion maps, the modified frequency and the diagonalizer.

The eigenvalues ``e^{+-i xi}`` of the transfer matrix at site ``x`` obey
``rho(x) cos(xi) = cos(lambda)``.  On sheet ``j`` we use
``lambda_alpha(xi) = (-1)^(j-1) Arccos(rho cos xi)``.  The inverse map does not
depend on the sheet: it returns the solution of ``rho cos xi = cos lambda`` with
``Im xi >= 0`` lying on the same side as the reference point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coin import CoinSequence
from .errors import (
    AlphaOutOfRange,
    BranchCut,
    Degenerate,
    NonConvergence,
    OutOfDomain,
    StripViolation,
    WindowTooSmall,
)

DEGENERATE_REL = 1e-10


def _reduce(re: float) -> float:
    """Reduce an angle into ``(-pi, pi]``."""
    r = math.remainder(re, 2 * math.pi)
    return math.pi if r == -math.pi else r


@dataclass(frozen=True)
class SheetPoint:
    sheet: int
    xi: complex

    def __post_init__(self):
        if self.sheet not in (1, 2):
            raise ValueError(f"sheet must be 1 or 2, got {self.sheet!r}")
        z = complex(self.xi)
        object.__setattr__(self, "xi", complex(_reduce(z.real), z.imag))

    @property
    def sign(self) -> int:
        return 1 if self.sheet == 1 else -1

    @property
    def is_real(self) -> bool:
        return self.xi.imag == 0.0

    @property
    def on_edge(self) -> bool:
        return self.is_real and self.xi.real in (0.0, math.pi)

    def cos(self) -> complex:
        return complex(np.cos(self.xi))

    def sin(self) -> complex:
        return complex(np.sin(self.xi))

    def reflect(self) -> "SheetPoint":
        """The point ``-conj(xi)`` on the same sheet."""
        return SheetPoint(self.sheet, -self.xi.conjugate())

    def shifted(self, d: complex) -> "SheetPoint":
        return SheetPoint(self.sheet, self.xi + d)


@dataclass(frozen=True)
class CutoffData:
    r0: int
    r_eps: int
    epsilon: float


# ---------------------------------------------------------------------------
# scalar building blocks
# ---------------------------------------------------------------------------


def _arccos_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    bad = (z.imag == 0.0) & (np.abs(z.real) > 1.0)
    if np.any(bad):
        raise BranchCut(f"Arccos undefined on the cut: z = {z[bad].flat[0]!r}")
    out = np.arccos(z)
    # points on the real segment [-1, 1] with a negative-zero imaginary part
    # must not be pushed to the opposite side of the slit
    real_seg = z.imag == 0.0
    if np.any(real_seg):
        out = np.where(real_seg, np.arccos(np.clip(z.real, -1.0, 1.0)) + 0j, out)
    return out


def arccos_branched(z):
    """Analytic extension of ``arccos`` off ``(-inf, -1] U [1, inf)``.

    The real part lies in ``[0, pi]``; the upper half-plane is sent below the
    real axis and the lower half-plane above it.  Accepts scalars or arrays.
    """
    out = _arccos_array(np.asarray(z))
    return complex(out) if out.ndim == 0 else out


def _rho(alpha) -> float:
    a = abs(complex(alpha))
    if not 0.0 < a < 1.0:
        raise AlphaOutOfRange(f"|alpha| must lie in (0, 1), got {a!r}")
    return math.sqrt(1.0 - a * a)


def b_alpha(alpha) -> float:
    """Strip half-width ``arccosh(1/rho)``, equal to ``artanh |alpha|``."""
    _rho(alpha)
    return math.atanh(abs(complex(alpha)))


def b_zero(alpha) -> float:
    """Working strip bound ``b_alpha / 8``."""
    return b_alpha(alpha) / 8.0


def lambda_from_rho(rho: float, sheet: int, xi):
    xi = np.asarray(xi, dtype=complex)
    b = math.acosh(1.0 / rho)
    if np.any(np.abs(xi.imag) >= b):
        raise StripViolation(f"|Im xi| must stay below b = {b!r}")
    out = (1 if sheet == 1 else -1) * _arccos_array(rho * np.cos(xi))
    return complex(out) if out.ndim == 0 else out


def lambda_alpha(alpha, p: SheetPoint) -> complex:
    return lambda_from_rho(_rho(alpha), p.sheet, p.xi)


def lambda_infty(seq: CoinSequence, p: SheetPoint) -> complex:
    return lambda_from_rho(seq.rho_inf, p.sheet, p.xi)


def _solve_cos(c: np.ndarray, rho: np.ndarray, side: np.ndarray) -> np.ndarray:
    """Solve ``rho cos(xi) = c`` for ``Im xi >= 0``.

    ``side`` (+1 / -1) picks the sign of ``Re xi`` when the solution is real.
    One Newton step on ``rho cos xi - c`` polishes the closed form.
    """
    shape = np.broadcast(np.asarray(c), np.asarray(rho), np.asarray(side)).shape
    c, rho, side = (np.broadcast_to(np.asarray(v), shape).reshape(-1) for v in (c, rho, side))
    c = c.astype(complex)
    w = c / rho
    out = np.empty(w.shape, dtype=complex)
    im = w.imag
    lower = im < 0
    upper = im > 0
    real = ~(lower | upper)
    out[lower] = np.arccos(w[lower])
    out[upper] = -np.arccos(w[upper])
    if np.any(real):
        wr = w.real[real]
        sr = side[real]
        val = np.empty(wr.shape, dtype=complex)
        inner = np.abs(wr) < 1.0
        val[inner] = sr[inner] * np.arccos(wr[inner])
        hi = wr >= 1.0
        val[hi] = 1j * np.arccosh(wr[hi])
        lo = wr <= -1.0
        val[lo] = math.pi + 1j * np.arccosh(-wr[lo])
        out[real] = val
    rho_b, c_b = rho, c
    s = np.sin(out)
    resid = rho_b * np.cos(out) - c_b
    safe = np.abs(s) > 1e-6
    if np.any(safe):
        step = np.zeros_like(out)
        step[safe] = resid[safe] / (rho_b[safe] * s[safe])
        cand = out + step
        keep_real = real & safe
        cand[keep_real] = cand[keep_real].real
        better = np.abs(rho_b * np.cos(cand) - c_b) < np.abs(resid)
        out = np.where(better & safe, cand, out)
    return out.reshape(shape)


def xi_alpha(alpha, lam, sheet_hint: int, side: int = 1) -> SheetPoint:
    """Inverse of :func:`lambda_alpha` on sheet ``sheet_hint``.

    Raises ``OutOfDomain`` when ``lam`` is not in the image of the strip on
    that sheet, or when the solution leaves the strip ``Im xi < b_alpha``.
    """
    rho = _rho(alpha)
    lam = complex(lam)
    sgn = 1 if sheet_hint == 1 else -1
    xi = complex(_solve_cos(np.array(np.cos(sgn * lam)), np.array(rho), np.array(side)))
    if not np.isfinite(xi):
        raise NonConvergence(f"inversion failed for lambda = {lam!r}")
    if xi.imag >= math.acosh(1.0 / rho):
        raise OutOfDomain(f"no solution with Im xi < b_alpha for lambda = {lam!r}")
    p = SheetPoint(sheet_hint, xi)
    back = lambda_from_rho(rho, sheet_hint, p.xi)
    if abs(back - lam) > 1e-9 * max(1.0, abs(lam)):
        raise OutOfDomain(f"lambda = {lam!r} is not in the image of sheet {sheet_hint}")
    return p


# ---------------------------------------------------------------------------
# admissible domain
# ---------------------------------------------------------------------------


def is_admissible(p: SheetPoint, alpha_inf) -> bool:
    """Membership in the working domain for the asymptotic coin ``alpha_inf``.

    ``0 <= Im xi < 2 b0``, the edge points ``{0, pi}`` are removed, and on the
    vertical lines ``Re xi in {0, pi}`` we additionally need ``Im xi > b0``.
    """
    b0 = b_zero(alpha_inf)
    v = p.xi.imag
    if v < 0 or v >= 2 * b0:
        return False
    if p.xi.real in (0.0, math.pi):
        return v > b0
    return True


def check_admissible(p: SheetPoint, alpha_inf) -> None:
    if p.on_edge:
        raise OutOfDomain(f"{p.xi!r} is an edge point")
    if not is_admissible(p, alpha_inf):
        raise StripViolation(f"{p} lies outside the admissible strip (b0 = {b_zero(alpha_inf)!r})")


# ---------------------------------------------------------------------------
# modified frequency and diagonalizer
# ---------------------------------------------------------------------------


def zeta_profile(seq: CoinSequence, cut: CutoffData, p: SheetPoint, xs) -> np.ndarray:
    """``zeta(x, xi)`` at every site in ``xs``.

    Inside ``|x| < r0`` and wherever ``rho(x)`` equals ``rho_inf`` exactly the
    value is ``xi`` itself; elsewhere it solves
    ``rho(x) cos(zeta) = rho_inf cos(xi)`` continuously from ``xi``.
    """
    xs = np.asarray(xs, dtype=np.int64)
    xi = p.xi
    rho_inf = seq.rho_inf
    rho = np.asarray(seq.rho_at(xs), dtype=float)
    out = np.full(xs.shape, xi, dtype=complex)
    mask = (np.abs(xs) >= cut.r0) & (rho != rho_inf)
    if np.any(mask):
        side = 1 if xi.real >= 0 else -1
        c = rho_inf * np.cos(xi)
        out[mask] = _solve_cos(np.full(mask.sum(), c), rho[mask], np.array(side))
    return out


def zeta(seq: CoinSequence, cut: CutoffData, x: int, p: SheetPoint) -> complex:
    return complex(zeta_profile(seq, cut, p, np.array([x]))[0])


def P_from(alpha, rho, zeta_val, lam) -> np.ndarray:
    """Stacked diagonalizers, shape ``(..., 2, 2)``."""
    alpha = np.asarray(alpha, dtype=complex)
    zeta_val = np.asarray(zeta_val, dtype=complex)
    shape = np.broadcast(alpha, zeta_val).shape
    el = np.exp(1j * lam)
    out = np.empty(shape + (2, 2), dtype=complex)
    out[..., 0, 0] = alpha
    out[..., 0, 1] = alpha
    out[..., 1, 0] = rho * np.exp(1j * zeta_val) - el
    out[..., 1, 1] = rho * np.exp(-1j * zeta_val) - el
    return out


def P_matrix(seq: CoinSequence, cut: CutoffData, x: int, p: SheetPoint) -> np.ndarray:
    """Diagonalizer ``P(x, xi)`` whose columns are the eigenvectors of ``T(x)``.

    ``det P = -2i alpha rho sin(zeta)``; a determinant below ``1e-10 |alpha| rho``
    raises ``Degenerate``.
    """
    a = complex(seq.alpha_at(x))
    r = float(seq.rho_at(x))
    z = zeta(seq, cut, x, p)
    lam = lambda_infty(seq, p)
    P = P_from(a, r, z, lam)
    det = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
    if abs(det) < DEGENERATE_REL * abs(a) * r:
        raise Degenerate(f"P({x}) is singular: |sin zeta| = {abs(np.sin(z))!r}")
    return P


# ---------------------------------------------------------------------------
# cutoff selection
# ---------------------------------------------------------------------------


def _radius(seq: CoinSequence) -> int:
    return min(seq.x_max, -seq.x_min)


def choose_r0(seq: CoinSequence, tol: float | None = None) -> int:
    """Smallest ``r >= 1`` with ``|alpha(+-x) - alpha_+-| < tol`` for all ``x >= r``.

    Default ``tol`` is a tenth of the distance from ``|alpha_+|`` to ``{0, 1}``.
    """
    a_inf = abs(seq.alpha_plus)
    if tol is None:
        tol = 0.1 * min(a_inf, 1.0 - a_inf)
    xs = seq.sites
    bad_plus = xs[(xs >= 1) & (np.abs(seq.values - seq.alpha_plus) >= tol)]
    bad_minus = -xs[(xs <= -1) & (np.abs(seq.values - seq.alpha_minus) >= tol)]
    worst = max(bad_plus.max(initial=0), bad_minus.max(initial=0))
    r0 = int(worst) + 1
    if r0 > max(_radius(seq), 1):
        raise WindowTooSmall(f"alpha never settles within tol = {tol!r} inside the window")
    return r0


def xi_grid_for_cutoff(alpha_inf, epsilon: float, n_re: int = 48) -> list[SheetPoint]:
    """Probe grid for :func:`choose_r_eps`: ``|sin xi| >= epsilon`` on several heights."""
    b0 = b_zero(alpha_inf)
    a = math.asin(min(epsilon, 1.0))
    us = np.concatenate([
        np.linspace(a, math.pi - a, n_re),
        -np.linspace(a, math.pi - a, n_re),
    ])
    pts = []
    for v in (0.0, 0.5 * b0, b0, 1.5 * b0):
        for u in us:
            z = complex(u, v)
            if abs(np.sin(z)) >= epsilon:
                for j in (1, 2):
                    pts.append(SheetPoint(j, z))
    return pts


def choose_r_eps(seq: CoinSequence, epsilon: float, r0: int | None = None, n_re: int = 48) -> int:
    """Smallest ``r >= r0`` beyond which ``|sin zeta| >= epsilon/2`` on the probe grid.

    Real ``xi`` must also give real ``zeta`` there.
    """
    if r0 is None:
        r0 = choose_r0(seq)
    cut = CutoffData(r0, r0, epsilon)
    xs = seq.sites
    far = np.abs(xs) >= r0
    xs = xs[far]
    worst = r0 - 1
    for p in xi_grid_for_cutoff(seq.alpha_plus, epsilon, n_re):
        z = zeta_profile(seq, cut, p, xs)
        bad = np.abs(np.sin(z)) < epsilon / 2
        if p.is_real:
            bad |= z.imag != 0.0
        if np.any(bad):
            worst = max(worst, int(np.abs(xs[bad]).max()))
    r = max(worst + 1, r0)
    if r > _radius(seq):
        raise WindowTooSmall(f"no r_eps inside the window for epsilon = {epsilon!r}")
    return r


def make_cutoffs(seq: CoinSequence, epsilon: float = 0.1, r0_tol: float | None = None) -> CutoffData:
    r0 = choose_r0(seq, r0_tol)
    return CutoffData(r0, choose_r_eps(seq, epsilon, r0), float(epsilon))
