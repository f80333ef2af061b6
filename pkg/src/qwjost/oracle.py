"""Brute-force finite-ring ground truth.

The ring has ``N`` sites ``[-N/2, N/2 - 1]`` and the unknowns are ordered
``2 * i + c`` with ``c = 0`` the right mover and ``c = 1`` the left mover, the
same order used by :meth:`ResolventKernel.matrix`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .coin import CoinSequence
from .dispersion import SheetPoint, lambda_infty
from .errors import DiagonalizationFailure, NearSingular, SizeError
from .jost import default_cutoffs, jost_wronskian, solve_jost
from .transfer import band_distance

NEAR_SINGULAR = 1e-10
MAX_DENSE_N = 2048


@dataclass(frozen=True)
class FiniteWalk:
    N: int
    sites: np.ndarray
    U: np.ndarray = field(repr=False)
    seq: CoinSequence = field(repr=False)

    def index(self, x: int, component: int) -> int:
        return 2 * (int(x) - int(self.sites[0])) + component

    def apply(self, u: np.ndarray) -> np.ndarray:
        """``U`` on a state of shape ``(N, 2)``."""
        return (self.U @ np.asarray(u).reshape(-1)).reshape(-1, 2)


def build_finite(seq: CoinSequence, N: int) -> FiniteWalk:
    """Dense ``U = S C`` on the periodic ring of ``N`` sites."""
    if N < 8 or N % 2 or N > MAX_DENSE_N:
        raise SizeError(f"ring size must be even with 8 <= N <= {MAX_DENSE_N}, got {N}")
    sites = np.arange(-N // 2, N // 2)
    C = seq.coin_at(sites)
    U = np.zeros((2 * N, 2 * N), dtype=complex)
    i = np.arange(N)
    right = (i + 1) % N   # u_R at x moves to x + 1
    left = (i - 1) % N    # u_L at x moves to x - 1
    for c in range(2):
        U[2 * right, 2 * i + c] = C[:, 0, c]
        U[2 * left + 1, 2 * i + c] = C[:, 1, c]
    defect = np.max(np.abs(U.conj().T @ U - np.eye(2 * N)))
    if defect > 1e-12:
        raise DiagonalizationFailure(f"ring operator not unitary: defect {defect:.2e}")
    return FiniteWalk(N, sites, U, seq)


def _shifted(fw: FiniteWalk, lam) -> np.ndarray:
    return fw.U - np.exp(1j * complex(lam)) * np.eye(2 * fw.N)


def smallest_singular_value(fw: FiniteWalk, lam) -> float:
    return float(sla.svdvals(_shifted(fw, lam))[-1])


@dataclass
class DirectSolver:
    """LU of ``U_N - e^{i lambda}`` reused across source terms."""

    fw: FiniteWalk
    lam: complex
    sigma_min: float
    lu: tuple = field(repr=False)

    def column(self, y: int, component: int) -> np.ndarray:
        rhs = np.zeros(2 * self.fw.N, dtype=complex)
        rhs[self.fw.index(y, component)] = 1.0
        return sla.lu_solve(self.lu, rhs)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return sla.lu_solve(self.lu, rhs)


def direct_solver(fw: FiniteWalk, lam) -> DirectSolver:
    A = _shifted(fw, lam)
    smin = float(sla.svdvals(A)[-1])
    if smin < NEAR_SINGULAR:
        raise NearSingular(f"e^(i lambda) is (numerically) an eigenvalue: sigma_min = {smin:.2e}")
    return DirectSolver(fw, complex(lam), smin, sla.lu_factor(A))


def direct_resolvent(fw: FiniteWalk, lam, y: int, component: int) -> np.ndarray:
    """``(U_N - e^{i lambda})^{-1} delta_{(y, component)}`` as a ``(N, 2)`` array."""
    return direct_solver(fw, lam).column(y, component).reshape(-1, 2)


@dataclass(frozen=True)
class Spectrum:
    angles: np.ndarray
    values: np.ndarray
    vectors: np.ndarray = field(repr=False)   # columns, ordered like ``angles``
    off_diagonal: float

    def vector(self, k: int) -> np.ndarray:
        return self.vectors[:, k].reshape(-1, 2)


def spectrum_finite(fw: FiniteWalk) -> Spectrum:
    """Eigen-decomposition via the complex Schur form (unitary eigenvectors)."""
    T, Z = sla.schur(fw.U, output="complex")
    d = np.diag(T).copy()
    off = float(np.max(np.abs(np.triu(T, 1)))) if T.shape[0] > 1 else 0.0
    if off > 1e-8 or np.max(np.abs(np.abs(d) - 1.0)) > 1e-10:
        raise DiagonalizationFailure(f"Schur form not diagonal/unimodular (off-diagonal {off:.2e})")
    ang = np.mod(np.angle(d), 2 * math.pi)
    order = np.argsort(ang, kind="stable")
    return Spectrum(ang[order], d[order], Z[:, order], off)


def participation_ratio(v: np.ndarray) -> float:
    w = np.sum(np.abs(np.asarray(v).reshape(-1, 2)) ** 2, axis=1)
    return float(np.sum(w) ** 2 / np.sum(w ** 2))


def half_mass_radius(v: np.ndarray) -> int:
    """Smallest ring radius around the heaviest site holding half of the weight."""
    w = np.sum(np.abs(np.asarray(v).reshape(-1, 2)) ** 2, axis=1)
    N = w.size
    c = int(np.argmax(w))
    d = np.abs((np.arange(N) - c + N // 2) % N - N // 2)
    order = np.argsort(d, kind="stable")
    cum = np.cumsum(w[order])
    k = int(np.searchsorted(cum, 0.5 * cum[-1]))
    return int(d[order][k])


@dataclass(frozen=True)
class SpectrumRow:
    angle: float
    abs_cos: float
    in_band: bool
    pr: float
    radius: int


def spectrum_table(fw: FiniteWalk, spectrum: Spectrum | None = None, delta_band: float = 0.0) -> list[SpectrumRow]:
    spectrum = spectrum_finite(fw) if spectrum is None else spectrum
    rho = fw.seq.rho_inf
    dist = band_distance(spectrum.angles, rho)
    rows = []
    for k, a in enumerate(spectrum.angles):
        v = spectrum.vector(k)
        rows.append(SpectrumRow(float(a), abs(math.cos(a)), bool(dist[k] >= delta_band),
                                participation_ratio(v), half_mass_radius(v)))
    return rows


def outside_band_fraction(spectrum: Spectrum, rho_inf: float, tol: float = 1e-10) -> float:
    return float(np.mean(np.abs(np.cos(spectrum.angles)) > rho_inf + tol))


@dataclass(frozen=True)
class ProbeRow:
    N: int
    in_band: int
    min_pr: float
    baseline_min_pr: float
    growth: float          # min PR at N over min PR at the previous N
    max_radius_fraction: float


@dataclass(frozen=True)
class ProbeReport:
    rows: list[ProbeRow]
    delta_band: float
    growth_threshold: float = 1.5
    baseline_fraction: float = 0.2

    @property
    def growth_ok(self) -> bool:
        return all(r.growth >= self.growth_threshold for r in self.rows[1:])

    @property
    def baseline_ok(self) -> bool:
        return all(r.min_pr >= self.baseline_fraction * r.baseline_min_pr for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.growth_ok and self.baseline_ok


def _in_band_stats(fw: FiniteWalk, delta_band: float) -> tuple[int, float, float]:
    spectrum = spectrum_finite(fw)
    mask = band_distance(spectrum.angles, fw.seq.rho_inf) >= delta_band
    prs = [participation_ratio(spectrum.vector(k)) for k in np.flatnonzero(mask)]
    rad = [half_mass_radius(spectrum.vector(k)) for k in np.flatnonzero(mask)]
    if not prs:
        return 0, float("nan"), float("nan")
    return len(prs), float(min(prs)), float(max(rad)) / fw.N


def embedded_probe(seq: CoinSequence, N_list, delta_band: float = 0.1) -> ProbeReport:
    """Minimum participation ratio of in-band eigenvectors as the ring doubles.

    The baseline is the constant coin ``|alpha_+|`` on the same ring.
    """
    base_seq = CoinSequence.constant(abs(seq.alpha_plus), (0, 0))
    rows, prev = [], None
    for N in sorted(N_list):
        n, mn, rad = _in_band_stats(build_finite(seq, N), delta_band)
        _, bmn, _ = _in_band_stats(build_finite(base_seq, N), delta_band)
        growth = float("nan") if prev is None else mn / prev
        rows.append(ProbeRow(N, n, mn, bmn, growth, rad))
        prev = mn
    return ProbeReport(rows, delta_band)


def wronskian_certificate(seq: CoinSequence, p: SheetPoint) -> float:
    """Normalized ``|det(m_+(xi), m_+(-xi))|`` at ``x = 0`` for real in-band ``xi``.

    Both solutions are bounded and non-decaying; a nonzero value means they
    span all solutions, so none of them lies in l^2.
    """
    q = SheetPoint(p.sheet, -p.xi)
    cut = default_cutoffs(seq, p)
    a = solve_jost(seq, cut, p, "+")
    b = solve_jost(seq, cut, q, "+")
    W = jost_wronskian(a, b, np.array([0]))[0]
    return float(abs(W) / (a.sup_norm() * b.sup_norm()))


def eigenvector_wronskian(fw: FiniteWalk, spectrum: Spectrum, p: SheetPoint, x_ref: int = 0) -> tuple[float, float]:
    """Angle mismatch and normalized Wronskian of ``J u`` against ``phi_+``.

    ``u`` is the ring eigenvector whose angle is closest to ``lambda_inf(xi)``.
    """
    lam = lambda_infty(fw.seq, p).real
    gap = np.abs(np.angle(np.exp(1j * (spectrum.angles - lam))))
    k = int(np.argmin(gap))
    u = spectrum.vector(k)
    i = x_ref - int(fw.sites[0])
    v = np.array([u[i - 1, 1], u[i, 0]])       # (J u)(x_ref)
    phi = solve_jost(fw.seq, default_cutoffs(fw.seq, p), p, "+").m_at(x_ref)
    W = v[0] * phi[1] - v[1] * phi[0]
    scale = np.max(np.abs(u)) * np.linalg.norm(phi)
    return float(gap[k]), float(abs(W) / scale)
