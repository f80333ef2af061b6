"""Resolvent kernel from a Jost pair, weighted norms and the limiting absorption sweep.

In the ``v = J u`` coordinates the operator ``J (U - e^{i lambda}) J^{-1}`` is
the second-order difference operator ``L`` below, and ``K`` is its Green's
function::

    K(x, y) = e^{-i lambda} / W * ( phi_-(x) phi_+(y)^T Pi_<(x, y)
                                    + phi_+(x) phi_-(y)^T Pi_>(x, y) )

with ``Pi_< = [[0, 1{x<y}], [1{x<=y}, 0]]``, ``Pi_> = [[0, 1{x>=y}], [1{x>y}, 0]]``
(matrix products) and ``W = det(phi_+, phi_-)``.  The phases are combined
as ``e^{+-i(Z(x) - Z(y))}`` so only bounded factors are ever formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coin import CoinSequence
from .dispersion import CutoffData, SheetPoint, check_admissible
from .errors import BoundaryLeak, RangeError, WindowMismatch
from .jost import JostPair, default_cutoffs, jost_pair
from .transfer import StateVector, evolve_U, j_inverse, j_map

LAP_EPS_MIN = 0.05


@dataclass(frozen=True)
class WeightedNormSpec:
    sigma: float

    def weight(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (1.0 + x * x) ** self.sigma


@dataclass(frozen=True)
class ResolventKernel:
    p: SheetPoint
    pair: JostPair
    window: tuple[int, int]

    @property
    def lam(self) -> complex:
        return self.pair.plus.lam

    @property
    def W(self) -> complex:
        return self.pair.W

    @property
    def z(self) -> complex:
        """Spectral parameter ``e^{i lambda}``."""
        return complex(np.exp(1j * self.lam))

    def blocks(self, xs, ys) -> np.ndarray:
        """``K(x, y)`` for all pairs, shape ``(len(xs), len(ys), 2, 2)``."""
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        plus, minus = self.pair.plus, self.pair.minus
        mpx, mmx = plus.m_at(xs), minus.m_at(xs)
        mpy, mmy = plus.m_at(ys), minus.m_at(ys)
        Zx, Zy = plus.Z_at(xs), plus.Z_at(ys)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        dZ = Zx[:, None] - Zy[None, :]
        le = X <= Y
        ge = ~le | (X == Y)
        ph_lo = np.zeros(X.shape, dtype=complex)
        ph_hi = np.zeros(X.shape, dtype=complex)
        ph_lo[le] = np.exp(-1j * dZ[le])
        ph_hi[ge] = np.exp(1j * dZ[ge])
        # rows m(y)^T Pi: (m_2 1{.}, m_1 1{.})
        lt = (X < Y).astype(float)
        gt = (X > Y).astype(float)
        r_lo = np.stack([mpy[None, :, 1] * le, mpy[None, :, 0] * lt], axis=-1)
        r_hi = np.stack([mmy[None, :, 1] * gt, mmy[None, :, 0] * ge], axis=-1)
        K = (ph_lo[..., None, None] * mmx[:, None, :, None] * r_lo[..., None, :]
             + ph_hi[..., None, None] * mpx[:, None, :, None] * r_hi[..., None, :])
        return K * (np.exp(-1j * self.lam) / self.W)

    def matrix(self, xs) -> np.ndarray:
        """Dense kernel with index ``2 * i + c`` on both sides."""
        xs = np.asarray(xs)
        n = xs.size
        return self.blocks(xs, xs).transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


def resolvent_kernel(
    seq: CoinSequence,
    cut: CutoffData | None,
    p: SheetPoint,
    window: tuple[int, int] | None = None,
) -> ResolventKernel:
    if cut is None:
        cut = default_cutoffs(seq, p)
    pair = jost_pair(seq, cut, p)
    if window is None:
        window = default_window(seq)
    return ResolventKernel(p, pair, window)


def default_window(seq: CoinSequence, shrink: int = 10) -> tuple[int, int]:
    lo, hi = seq.x_min + shrink, seq.x_max - shrink
    if lo > hi:
        raise WindowMismatch("coin window too small for the kernel window")
    return (lo, hi)


def kernel_eval(k: ResolventKernel, x: int, y: int) -> np.ndarray:
    return k.blocks(np.array([x]), np.array([y]))[0, 0]


def apply_L(seq: CoinSequence, z: complex, x_min: int, v: np.ndarray) -> np.ndarray:
    """``J (U - z) J^{-1}`` on ``v`` given on ``[x_min, x_min + n - 1]``.

    Exact on the interior sites; the two ends are returned as zero.
    Works column-wise on trailing axes.
    """
    v = np.asarray(v)
    n = v.shape[0]
    xs = np.arange(x_min, x_min + n)
    a = np.asarray(seq.alpha_at(xs))
    r = np.sqrt(1.0 - np.abs(a) ** 2)
    extra = (slice(None),) + (None,) * (v.ndim - 2)
    out = np.zeros_like(v)
    i = slice(1, n - 1)
    out[i, 0] = (r[1:-1][extra] * v[2:, 0] - a[1:-1][extra] * v[i, 1] - z * v[i, 0])
    out[i, 1] = (r[:-2][extra] * v[:-2, 1] + np.conj(a[:-2])[extra] * v[i, 0] - z * v[i, 1])
    return out


def delta_residual(seq: CoinSequence, k: ResolventKernel, y: int, xs=None) -> float:
    """``max_x |(L K(., y))(x) - delta_{xy} I|`` over interior sites."""
    if xs is None:
        xs = np.arange(y - 30, y + 31)
    xs = np.asarray(xs)
    K = k.blocks(xs, np.array([y]))[:, 0]            # (n, 2, 2)
    R = apply_L(seq, k.z, int(xs[0]), K)[1:-1]
    inner = xs[1:-1]
    R[inner == y] -= np.eye(2)
    return float(np.max(np.abs(R)))


def apply_resolvent(k: ResolventKernel, u: StateVector, out_window: tuple[int, int] | None = None) -> StateVector:
    """``(U - e^{i lambda})^{-1} u`` via ``J^{-1} K J``, returned on ``out_window``."""
    sup = u.support()
    if sup is None:
        lo, hi = out_window or k.window
        return StateVector.zeros((lo, hi))
    if sup[0] < k.window[0] or sup[1] > k.window[1]:
        raise BoundaryLeak(f"state support {sup} leaves the kernel window {k.window}")
    f = j_map(u.restrict(sup))
    ys = f.sites
    lo, hi = out_window or k.window
    xs = np.arange(lo, hi + 2)
    g = np.einsum("xyij,yj->xi", k.blocks(xs, ys), f.u)
    return j_inverse(StateVector(lo, g)).restrict((lo, hi))


def resolvent_residual(seq: CoinSequence, k: ResolventKernel, u: StateVector, v: StateVector, margin: int = 1) -> float:
    """``max |(U - e^{i lambda}) v - u|`` away from the ends of ``v``'s window."""
    uv = evolve_U(seq, v, "open").restrict(v.window).u - k.z * v.u
    d = uv - u.restrict(v.window).u
    return float(np.max(np.abs(d[margin:-margin])))


def weighted_norm(u: StateVector, norm: WeightedNormSpec) -> float:
    w = norm.weight(u.sites)
    return float(math.sqrt(np.sum(np.sum(np.abs(u.u) ** 2, axis=1) * w)))


# ---------------------------------------------------------------------------
# limiting absorption sweep
# ---------------------------------------------------------------------------


def default_ladder(start: float = 1e-1, ratio: float = 0.25, stop: float = 1e-6) -> list[float]:
    n = int(math.floor(math.log(stop / start) / math.log(ratio) + 1e-9)) + 1
    return [start * ratio ** k for k in range(n)]


def ladder_from(start: float, ratio: float, count: int) -> list[float]:
    return [start * ratio ** k for k in range(count)]


@dataclass(frozen=True)
class LapRow:
    eps: float
    hs_norm: float
    cauchy: float


@dataclass(frozen=True)
class LapReport:
    p: SheetPoint
    sigma: float
    rows: list[LapRow]
    tol: float
    notes: list[str] = field(default_factory=list)

    @property
    def differences(self) -> list[float]:
        return [r.cauchy for r in self.rows[1:]]

    @property
    def monotone(self) -> bool:
        d = self.differences
        return all(b < a for a, b in zip(d, d[1:]))

    @property
    def final_ratio(self) -> float:
        return self.rows[-1].cauchy / self.rows[-1].hs_norm

    @property
    def sigma_ok(self) -> bool:
        return self.sigma > 0.5

    @property
    def converged(self) -> bool:
        return self.monotone and self.final_ratio <= self.tol


def lap_sweep(
    seq: CoinSequence,
    cut: CutoffData | None,
    xi_real: SheetPoint,
    eps_ladder=None,
    sigma: float = 1.0,
    *,
    window: tuple[int, int] | None = None,
    tol: float = 1e-3,
) -> LapReport:
    """Weighted Hilbert-Schmidt norms of ``K`` at ``xi + i eps`` down the ladder.

    The Cauchy difference in row ``k`` is the weighted HS norm of
    ``K_{eps_k} - K_{eps_{k-1}}``.  ``sigma <= 1/2`` is allowed but flagged.
    """
    if not xi_real.is_real:
        raise RangeError("lap_sweep needs a real base point")
    ladder = list(default_ladder() if eps_ladder is None else eps_ladder)
    if not ladder or any(e <= 0 for e in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise RangeError("eps ladder must be positive and strictly decreasing")
    s = abs(math.sin(xi_real.xi.real))
    eps_min = cut.epsilon if cut is not None else LAP_EPS_MIN
    if s < eps_min:
        raise RangeError(f"|sin xi| = {s:.3g} is below epsilon = {eps_min:.3g}")
    check_admissible(xi_real, seq.alpha_plus)
    if cut is None:
        cut = default_cutoffs(seq, xi_real)
    if window is None:
        window = default_window(seq)
    xs = np.arange(window[0], window[1] + 1)
    w = np.repeat(WeightedNormSpec(sigma).weight(xs) ** -0.5, 2)
    notes = []
    if sigma <= 0.5:
        notes.append("sigma <= 1/2: outside the range where the limit is guaranteed")
    rows, prev = [], None
    for eps in ladder:
        k = resolvent_kernel(seq, cut, xi_real.shifted(1j * eps), window)
        Kw = w[:, None] * k.matrix(xs) * w[None, :]
        hs = float(np.linalg.norm(Kw))
        diff = float("nan") if prev is None else float(np.linalg.norm(Kw - prev))
        rows.append(LapRow(eps, hs, diff))
        prev = Kw
    rep = LapReport(xi_real, sigma, rows, tol, notes)
    if not rep.monotone:
        notes.append("NonMonotone: Cauchy differences do not decrease")
    return rep
