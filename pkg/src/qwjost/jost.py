"""Modified plane waves (Jost solutions) by Neumann iteration.

For the ``+`` direction we write ``phi_+(x) = e^{i Z(x)} Pt(x) psi(x)`` where
``Pt`` is the diagonalizer for ``|x| >= r_eps`` and the constant ``P_inf``
inside.  Then ``psi(x+1) = (A(x) + V(x)) psi(x)`` with
``A = diag(1, e^{-2i zeta})`` and ``V`` summable.  On ``[x0, inf)`` we solve
``psi = e_1 - D psi``; in between we use the recursion directly; to the left
of ``x1`` the Volterra sum ``E`` takes over.  The ``-`` direction mirrors all
of this with ``phi_- = e^{-i Z} Pt chi``, ``chi -> e_2`` at ``-inf``.

All sums close exactly because the coin is constant outside its window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coin import CoinSequence
from .dispersion import (
    DEGENERATE_REL,
    CutoffData,
    P_from,
    SheetPoint,
    check_admissible,
    lambda_infty,
    make_cutoffs,
    zeta_profile,
)
from .errors import Degenerate, NonConvergence, WindowTooSmall, ZeroWronskian
from .transfer import transfer_matrices

NEUMANN_TOL = 1e-14
NEUMANN_CAP = 200
WRONSKIAN_REL = 1e-8


def _inv2(M: np.ndarray) -> np.ndarray:
    det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    out[..., 1, 1] = M[..., 0, 0]
    return out / det[..., None, None]


def _det2(M: np.ndarray) -> np.ndarray:
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def default_cutoffs(seq: CoinSequence, p: SheetPoint, epsilon: float | None = None) -> CutoffData:
    """Cutoffs with ``epsilon = min(0.1, |sin xi|)`` unless given."""
    if epsilon is None:
        epsilon = min(0.1, abs(np.sin(p.xi)))
    return make_cutoffs(seq, epsilon)


def _direction(direction) -> int:
    if direction in (1, "+", "plus"):
        return 1
    if direction in (-1, "-", "minus"):
        return -1
    raise ValueError(f"direction must be '+' or '-', got {direction!r}")


def p_infinity(seq: CoinSequence, p: SheetPoint, alpha_lim: complex | None = None) -> np.ndarray:
    """``P_inf = (nu_+ nu_-)`` built from the limit ``alpha_lim`` (default ``alpha_+``)."""
    a = seq.alpha_plus if alpha_lim is None else alpha_lim
    return P_from(a, seq.rho_inf, p.xi, lambda_infty(seq, p))


def nu(direction, seq: CoinSequence, p: SheetPoint) -> np.ndarray:
    """Asymptotic profile: ``(alpha_lim, rho_inf e^{+-i xi} - e^{i lambda_inf})``.

    The first entry is the coin limit at the infinity the solution is pinned to.
    """
    d = _direction(direction)
    a = seq.alpha_plus if d > 0 else seq.alpha_minus
    return p_infinity(seq, p, a)[:, 0 if d > 0 else 1].copy()


def grid_bounds(seq: CoinSequence, cut: CutoffData) -> tuple[int, int]:
    """``[X_L, X_R]`` such that ``V`` vanishes identically outside ``(X_L, X_R)``."""
    return min(seq.x_min - 2, -cut.r_eps - 1), max(seq.x_max + 1, cut.r_eps)


def modified_phase(seq: CoinSequence, cut: CutoffData, p: SheetPoint, x) -> np.ndarray | complex:
    """``Z(x)`` with ``Z(0) = 0`` and ``Z(x+1) - Z(x) = zeta(x)`` for every ``x``."""
    xs = np.atleast_1d(np.asarray(x, dtype=np.int64))
    lo, hi = min(xs.min(), 0), max(xs.max(), 0)
    grid = np.arange(lo, hi + 1)
    z = zeta_profile(seq, cut, p, grid)
    Z = _phase_from_zeta(z, lo)
    out = Z[xs - lo]
    return complex(out[0]) if np.ndim(x) == 0 else out


def _phase_from_zeta(z: np.ndarray, lo: int) -> np.ndarray:
    """Partial sums anchored at ``x = 0`` on the grid starting at ``lo <= 0``."""
    i0 = -lo
    Z = np.zeros(z.shape, dtype=complex)
    Z[i0 + 1:] = np.cumsum(z[i0:-1])
    if i0 > 0:
        Z[:i0] = -np.cumsum(z[:i0][::-1])[::-1]
    return Z


@dataclass
class _Frame:
    """Per-(coin, xi, direction) arrays on the grid ``[X_L, X_R]``."""

    X_L: int
    X_R: int
    lam: complex
    zeta: np.ndarray
    Pt: np.ndarray          # Pt(x) for x in [X_L, X_R + 1]
    V: np.ndarray           # V(x) for x in [X_L, X_R]
    M: np.ndarray           # A + V
    A_diag: np.ndarray      # the non-unit diagonal entry of A
    T: np.ndarray

    @property
    def xs(self) -> np.ndarray:
        return np.arange(self.X_L, self.X_R + 1)


def _frame(seq: CoinSequence, cut: CutoffData, p: SheetPoint, d: int) -> _Frame:
    X_L, X_R = grid_bounds(seq, cut)
    xs = np.arange(X_L, X_R + 2)
    lam = lambda_infty(seq, p)
    z = zeta_profile(seq, cut, p, xs)
    alpha = np.asarray(seq.alpha_at(xs))
    rho = np.sqrt(1.0 - np.abs(alpha) ** 2)
    Pt = P_from(alpha, rho, z, lam)
    inner = np.abs(xs) < cut.r_eps
    P_inf = p_infinity(seq, p, seq.alpha_plus if d > 0 else seq.alpha_minus)
    Pt[inner] = P_inf
    far = ~inner
    det = _det2(Pt[far])
    if np.any(np.abs(det) < DEGENERATE_REL * np.abs(alpha[far]) * rho[far]):
        bad = xs[far][np.argmin(np.abs(det) / (np.abs(alpha[far]) * rho[far]))]
        raise Degenerate(f"diagonalizer degenerate at x = {bad} for xi = {p.xi!r}")
    if abs(_det2(P_inf)) < DEGENERATE_REL * abs(seq.alpha_plus) * seq.rho_inf:
        raise Degenerate(f"P_inf degenerate for xi = {p.xi!r}")

    n = xs.size - 1
    zg = z[:n]
    T = transfer_matrices(seq, xs[:n], lam)
    Pinv = _inv2(Pt)
    # A = diag(1, e^{-2i zeta}) for '+', diag(e^{2i zeta}, 1) for '-'
    e2 = np.exp(-2j * d * zg)
    A = np.zeros((n, 2, 2), dtype=complex)
    if d > 0:
        A[:, 0, 0], A[:, 1, 1] = 1.0, e2
    else:
        A[:, 0, 0], A[:, 1, 1] = e2, 1.0
    B = np.zeros_like(A)
    seam = np.abs(xs[:n]) < cut.r_eps
    if np.any(seam):
        phase = np.exp(-1j * d * zg[seam])[:, None, None]
        B[seam] = phase * (Pinv[:n][seam] @ T[seam] @ Pt[:n][seam]) - A[seam]
    Qm1 = Pinv[1:] @ (Pt[:n] - Pt[1:])
    V = Qm1 @ A + (Qm1 + np.eye(2)) @ B
    return _Frame(X_L, X_R, lam, zg, Pt, V, A + V, e2, T)


def _l1(V: np.ndarray) -> np.ndarray:
    return np.linalg.norm(V, ord=2, axis=(1, 2))


def build_V(seq: CoinSequence, cut: CutoffData, p: SheetPoint, x, direction="+") -> np.ndarray:
    """``V(x, xi)`` for the given direction; zero outside the grid."""
    d = _direction(direction)
    fr = _frame(seq, cut, p, d)
    xs = np.atleast_1d(np.asarray(x))
    out = np.zeros(xs.shape + (2, 2), dtype=complex)
    inside = (xs >= fr.X_L) & (xs <= fr.X_R)
    out[inside] = fr.V[xs[inside] - fr.X_L]
    return out[0] if np.ndim(x) == 0 else out


def _x0_x1(fr: _Frame, r_eps: int) -> tuple[int, int]:
    norms = _l1(fr.V)
    xs = fr.xs
    # tail[i] = sum_{y >= xs[i]} ||V(y)||, head[i] = sum_{y < xs[i]} ||V(y)||
    tail = np.cumsum(norms[::-1])[::-1]
    head = np.concatenate([[0.0], np.cumsum(norms)[:-1]])
    ok0 = (xs >= r_eps) & (tail <= 0.5)
    ok1 = (xs <= -r_eps) & (head <= 0.5)
    if not ok0.any() or not ok1.any():
        raise WindowTooSmall("no x0/x1 with l1 tail of V below 1/2")
    return int(xs[ok0][0]), int(xs[ok1][-1])


def choose_x0_x1(seq: CoinSequence, cut: CutoffData, p: SheetPoint, direction="+") -> tuple[int, int]:
    """Smallest ``x0 >= r_eps`` with ``sum_{y>=x0} ||V|| <= 1/2`` and largest
    ``x1 <= -r_eps`` with ``sum_{y<x1} ||V|| <= 1/2``."""
    fr = _frame(seq, cut, p, _direction(direction))
    return _x0_x1(fr, cut.r_eps)


@dataclass(frozen=True)
class IterationReport:
    terms: int
    increment: float
    fixed_point_residual: float
    left_terms: int = 0
    left_increment: float = 0.0
    left_fixed_point_residual: float = 0.0


@dataclass(frozen=True)
class JostSolution:
    direction: int
    p: SheetPoint
    lam: complex
    x_lo: int
    m: np.ndarray
    Z: np.ndarray
    zeta: np.ndarray
    psi: np.ndarray
    cut: CutoffData
    x0: int
    x1: int
    report: IterationReport
    nu: np.ndarray
    P_left: np.ndarray = field(repr=False)
    P_right: np.ndarray = field(repr=False)

    @property
    def x_hi(self) -> int:
        return self.x_lo + self.m.shape[0] - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.x_lo, self.x_hi + 1)

    def _zeta_edge(self, right: bool) -> complex:
        return complex(self.zeta[-1] if right else self.zeta[0])

    def psi_at(self, x) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(x, dtype=np.int64))
        out = np.empty(xs.shape + (2,), dtype=complex)
        inside = (xs >= self.x_lo) & (xs <= self.x_hi)
        out[inside] = self.psi[xs[inside] - self.x_lo]
        right = xs > self.x_hi
        left = xs < self.x_lo
        d = self.direction
        if np.any(right):
            k = xs[right] - self.x_hi
            out[right] = self.psi[-1]
            if d < 0:
                out[right, 0] = self.psi[-1, 0] * np.exp(2j * self._zeta_edge(True) * k)
        if np.any(left):
            k = self.x_lo - xs[left]
            out[left] = self.psi[0]
            if d > 0:
                out[left, 1] = self.psi[0, 1] * np.exp(2j * self._zeta_edge(False) * k)
        return out

    def m_at(self, x) -> np.ndarray:
        """Bounded profile at arbitrary integer sites (exact beyond the grid)."""
        xs = np.atleast_1d(np.asarray(x, dtype=np.int64))
        out = np.empty(xs.shape + (2,), dtype=complex)
        inside = (xs >= self.x_lo) & (xs <= self.x_hi)
        out[inside] = self.m[xs[inside] - self.x_lo]
        out_r = xs > self.x_hi
        out_l = xs < self.x_lo
        if np.any(out_r | out_l):
            ps = self.psi_at(xs)
            out[out_r] = ps[out_r] @ self.P_right.T
            out[out_l] = ps[out_l] @ self.P_left.T
        return out[0] if np.ndim(x) == 0 else out

    def Z_at(self, x) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(x, dtype=np.int64))
        out = np.empty(xs.shape, dtype=complex)
        inside = (xs >= self.x_lo) & (xs <= self.x_hi)
        out[inside] = self.Z[xs[inside] - self.x_lo]
        r = xs > self.x_hi
        out[r] = self.Z[-1] + self._zeta_edge(True) * (xs[r] - self.x_hi)
        l = xs < self.x_lo
        out[l] = self.Z[0] - self._zeta_edge(False) * (self.x_lo - xs[l])
        return out[0] if np.ndim(x) == 0 else out

    def phi_at(self, x) -> np.ndarray:
        """``e^{+-i Z(x)} m(x)``; grows exponentially on one side when ``Im xi > 0``."""
        m = self.m_at(x)
        return np.exp(1j * self.direction * self.Z_at(x))[..., None] * m

    def recursion_residual(self, seq: CoinSequence) -> float:
        """``max |e^{+-i zeta(x)} m(x+1) - T(x) m(x)| / max |m|`` over the grid.

        This is the recursion for ``phi`` with the phase divided out.
        """
        xs = self.sites[:-1]
        T = transfer_matrices(seq, xs, self.lam)
        lhs = np.exp(1j * self.direction * self.zeta[:-1])[:, None] * self.m[1:]
        rhs = np.einsum("nij,nj->ni", T, self.m[:-1])
        return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(self.m)))

    def tail_deviation(self, seq: CoinSequence, x: int | None = None) -> float:
        """``||m(x) - nu|| / ||nu||`` at the window edge the solution is pinned to.

        The edge is ``x_max`` for ``+`` and ``x_min`` for ``-``.  Because ``J``
        reads ``u(x-1)`` the left edge value is fixed by the tail coin alone,
        while the right one still feels ``alpha(x_max)``.
        """
        if x is None:
            x = seq.x_max if self.direction > 0 else seq.x_min
        return float(np.linalg.norm(self.m_at(x) - self.nu) / np.linalg.norm(self.nu))

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.m, axis=1)))


def _neumann(step, start: np.ndarray, tol: float, cap: int) -> tuple[np.ndarray, int, float]:
    cur = start
    inc = math.inf
    for k in range(1, cap + 1):
        nxt = step(cur)
        inc = float(np.max(np.abs(nxt - cur)))
        cur = nxt
        if inc < tol:
            return cur, k, inc
    raise NonConvergence(f"Neumann series stalled: increment {inc:.3e} after {cap} terms")


def _apply_V(V: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("nij,nj->ni", V, v)


def _sweep_down(e2, w2, start):
    """``S(x) = e2(x) (S(x+1) + w2(x))`` from the top, ``S(top+1) = start``."""
    out = np.empty(len(w2), dtype=complex)
    s = complex(start)
    for i in range(len(w2) - 1, -1, -1):
        s = e2[i] * (s + w2[i])
        out[i] = s
    return out


def _sweep_up(e2, w1, start):
    """``S(x+1) = e2(x) S(x) + w1(x)`` from the bottom, returns ``S`` at ``bottom+1..``."""
    out = np.empty(len(w1), dtype=complex)
    s = complex(start)
    for i in range(len(w1)):
        s = e2[i] * s + w1[i]
        out[i] = s
    return out


def _solve_plus(fr: _Frame, x0: int, x1: int, tol: float, cap: int):
    n = fr.xs.size
    i0, i1 = x0 - fr.X_L, x1 - fr.X_L
    V, e2 = fr.V, 1.0 / fr.A_diag   # e^{2i zeta}
    psi = np.zeros((n, 2), dtype=complex)

    # far right: psi = e1 - D psi on [x0, X_R]
    Vr, er = V[i0:], e2[i0:]
    e1 = np.zeros((n - i0, 2), dtype=complex)
    e1[:, 0] = 1.0

    def D(v):
        w = _apply_V(Vr, v)
        out = np.empty_like(v)
        out[:, 0] = np.cumsum(w[::-1, 0])[::-1]
        out[:, 1] = _sweep_down(er, w[:, 1], 0.0)
        return out

    right, terms, inc = _neumann(lambda v: e1 - D(v), e1.copy(), tol, cap)
    fp = float(np.max(np.abs(right - (e1 - D(right)))))
    psi[i0:] = right

    # middle: psi(x) = M(x)^{-1} psi(x+1)
    Minv = _inv2(fr.M[i1:i0])
    for i in range(i0 - 1, i1 - 1, -1):
        psi[i] = Minv[i - i1] @ psi[i + 1]

    # far left: psi = g - E psi on [X_L, x1)
    lterms, linc, lfp = 0, 0.0, 0.0
    if i1 > 0:
        Vl, el = V[:i1], e2[:i1]
        top = psi[i1]
        g = np.zeros((i1, 2), dtype=complex)
        g[:, 0] = top[0]
        g[:, 1] = _sweep_down(el, np.zeros(i1), top[1])

        def E(v):
            w = _apply_V(Vl, v)
            out = np.empty_like(v)
            out[:, 0] = np.cumsum(w[::-1, 0])[::-1]
            out[:, 1] = _sweep_down(el, w[:, 1], 0.0)
            return out

        left, lterms, linc = _neumann(lambda v: g - E(v), g.copy(), tol, cap)
        lfp = float(np.max(np.abs(left - (g - E(left)))))
        psi[:i1] = left
    return psi, IterationReport(terms, inc, fp, lterms, linc, lfp)


def _solve_minus(fr: _Frame, x0: int, x1: int, tol: float, cap: int):
    n = fr.xs.size
    i0, i1 = x0 - fr.X_L, x1 - fr.X_L
    V, e2 = fr.V, fr.A_diag         # e^{2i zeta}
    chi = np.zeros((n, 2), dtype=complex)

    # far left: chi = e2 + D chi on [X_L, x1]
    Vl, el = V[:i1 + 1], e2[:i1 + 1]
    base = np.zeros((i1 + 1, 2), dtype=complex)
    base[:, 1] = 1.0

    def D(v):
        w = _apply_V(Vl, v)
        out = np.empty_like(v)
        out[0] = 0.0
        out[1:, 1] = np.cumsum(w[:-1, 1])
        out[1:, 0] = _sweep_up(el[:-1], w[:-1, 0], 0.0)
        return out

    left, terms, inc = _neumann(lambda v: base + D(v), base.copy(), tol, cap)
    fp = float(np.max(np.abs(left - (base + D(left)))))
    chi[:i1 + 1] = left

    # middle: chi(x+1) = M(x) chi(x)
    for i in range(i1, i0):
        chi[i + 1] = fr.M[i] @ chi[i]

    # far right: chi = g + E chi on (x0, X_R]
    rterms, rinc, rfp = 0, 0.0, 0.0
    m = n - 1 - i0
    if m > 0:
        Vr, er = V[i0:n - 1], e2[i0:n - 1]
        bottom = chi[i0]
        g = np.zeros((m, 2), dtype=complex)
        g[:, 1] = bottom[1]
        g[:, 0] = _sweep_up(er, np.zeros(m), bottom[0])

        def E(v):
            # v holds chi on (x0, X_R]; chi(x0) is fixed
            full = np.vstack([bottom[None, :], v[:-1]])
            w = _apply_V(Vr, full)
            out = np.empty_like(v)
            out[:, 1] = np.cumsum(w[:, 1])
            out[:, 0] = _sweep_up(er, w[:, 0], 0.0)
            return out

        right, rterms, rinc = _neumann(lambda v: g + E(v), g.copy(), tol, cap)
        rfp = float(np.max(np.abs(right - (g + E(right)))))
        chi[i0 + 1:] = right
    return chi, IterationReport(terms, inc, fp, rterms, rinc, rfp)


def solve_jost(
    seq: CoinSequence,
    cut: CutoffData | None,
    p: SheetPoint,
    direction="+",
    *,
    tol: float = NEUMANN_TOL,
    cap: int = NEUMANN_CAP,
    check: bool = True,
) -> JostSolution:
    """Jost solution pinned to ``+inf`` (``direction='+'``) or ``-inf``."""
    check_admissible(p, seq.alpha_plus)
    if cut is None:
        cut = default_cutoffs(seq, p)
    d = _direction(direction)
    fr = _frame(seq, cut, p, d)
    zt = fr.zeta[np.abs(fr.xs) >= cut.r_eps]
    if np.any(zt.imag < -1e-15):
        raise Degenerate("Im zeta < 0 on the far region")
    x0, x1 = _x0_x1(fr, cut.r_eps)
    if d > 0:
        psi, rep = _solve_plus(fr, x0, x1, tol, cap)
    else:
        psi, rep = _solve_minus(fr, x0, x1, tol, cap)
    m = np.einsum("nij,nj->ni", fr.Pt[:-1], psi)
    Z = _phase_from_zeta(fr.zeta, fr.X_L)
    # the coin is constant past the grid: keep its diagonalizers for extension
    n_right = fr.Pt[-1]
    sol = JostSolution(
        direction=d,
        p=p,
        lam=fr.lam,
        x_lo=fr.X_L,
        m=m,
        Z=Z,
        zeta=fr.zeta,
        psi=psi,
        cut=cut,
        x0=x0,
        x1=x1,
        report=rep,
        nu=nu(d, seq, p),
        P_left=fr.Pt[0].copy(),
        P_right=n_right.copy(),
    )
    if check:
        res = sol.recursion_residual(seq)
        if not res <= 1e-10:
            raise NonConvergence(f"recursion residual {res:.3e} too large")
    return sol


def jost_wronskian(plus: JostSolution, minus: JostSolution, x) -> np.ndarray:
    """``det(phi_+(x), phi_-(x)) = det(m_+(x), m_-(x))``."""
    a, b = plus.m_at(x), minus.m_at(x)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True)
class JostPair:
    plus: JostSolution
    minus: JostSolution
    W: complex
    drift: float


def jost_pair(seq: CoinSequence, cut: CutoffData | None, p: SheetPoint, **kw) -> JostPair:
    """Both Jost solutions and ``W = det(phi_+, phi_-)`` at ``x = 0``.

    ``drift`` is ``max |W(x) - W(0)| / |W(0)|`` over the grid.
    """
    if cut is None:
        cut = default_cutoffs(seq, p)
    plus = solve_jost(seq, cut, p, "+", **kw)
    minus = solve_jost(seq, cut, p, "-", **kw)
    xs = plus.sites
    W_all = jost_wronskian(plus, minus, xs)
    W0 = complex(W_all[-plus.x_lo])
    scale = plus.sup_norm() * minus.sup_norm()
    if abs(W0) < WRONSKIAN_REL * scale:
        raise ZeroWronskian(f"|W| = {abs(W0):.3e} at xi = {p.xi!r}")
    drift = float(np.max(np.abs(W_all - W0)) / abs(W0))
    return JostPair(plus, minus, W0, drift)
