"""Coin sequences, long-range validation and gauge normalization.

The lattice is represented by a finite window ``[x_min, x_max]`` holding
explicit values of ``alpha(x)``; outside the window the coin follows a tail
rule, by default exactly constant at the asymptotic limits ``alpha_plus`` /
``alpha_minus``.  With the constant tail every infinite sum appearing
downstream terminates after finitely many terms.

The canonical coin at site ``x`` is::

    C(x) = [[rho(x), conj(alpha(x))],
            [-alpha(x), rho(x)]],      rho(x) = sqrt(1 - |alpha(x)|^2)

and a general U(2) coin is ``exp(i theta) [[beta, conj(alpha)], [-alpha, conj(beta)]]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import (
    AlphaOutOfRange,
    BetaZero,
    EmptyWindow,
    ModulusMismatch,
    WindowMismatch,
)

UNITARITY_TOL = 1e-12
VERIFY_TOL = 1e-12


def _frozen(a, dtype=complex) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def canonical_coin(alpha) -> np.ndarray:
    """Canonical coin matrices for one or many ``alpha`` values, shape ``(..., 2, 2)``."""
    alpha = np.asarray(alpha, dtype=complex)
    rho = np.sqrt(1.0 - np.abs(alpha) ** 2)
    out = np.empty(alpha.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = rho
    out[..., 0, 1] = np.conj(alpha)
    out[..., 1, 0] = -alpha
    out[..., 1, 1] = rho
    return out


def general_coin(alpha, beta, theta) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    phase = np.exp(1j * np.asarray(theta, dtype=float))
    out = np.empty(alpha.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = beta
    out[..., 0, 1] = np.conj(alpha)
    out[..., 1, 0] = -alpha
    out[..., 1, 1] = np.conj(beta)
    return phase[..., None, None] * out


def unitarity_defect(mats: np.ndarray) -> float:
    mats = np.asarray(mats)
    prod = np.conj(np.swapaxes(mats, -1, -2)) @ mats
    return float(np.max(np.abs(prod - np.eye(2)))) if prod.size else 0.0


def _check_alpha_range(values: np.ndarray, what: str = "alpha") -> None:
    mod = np.abs(values)
    bad = np.flatnonzero((mod <= 0.0) | (mod >= 1.0))
    if bad.size:
        raise AlphaOutOfRange(
            f"|{what}| must lie in (0, 1); offending value {values.flat[bad[0]]!r}"
        )


@dataclass(frozen=True)
class CoinSequence:
    """Canonical coin ``alpha(x)`` on a window plus asymptotic limits.

    ``rho`` is always derived from ``alpha``; it is never stored.
    """

    x_min: int
    values: np.ndarray
    alpha_plus: complex
    alpha_minus: complex
    tail_rule: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.ndim != 1 or vals.size == 0:
            raise EmptyWindow("coin window must contain at least one site")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "x_min", int(self.x_min))
        object.__setattr__(self, "alpha_plus", complex(self.alpha_plus))
        object.__setattr__(self, "alpha_minus", complex(self.alpha_minus))
        _check_alpha_range(vals)
        _check_alpha_range(np.array([self.alpha_plus, self.alpha_minus]), "alpha_pm")

    # -- construction helpers ---------------------------------------------
    @classmethod
    def constant(cls, alpha: complex, window: tuple[int, int]) -> "CoinSequence":
        lo, hi = window
        return cls(lo, np.full(hi - lo + 1, alpha, dtype=complex), alpha, alpha)

    @classmethod
    def from_function(cls, f, window, alpha_plus=None, alpha_minus=None, extend_tail=False):
        """Tabulate ``f`` on ``window``.

        Limits default to ``f`` at the window edges.  With ``extend_tail`` the
        rule ``f`` itself is kept as the tail rule instead of the constant tail.
        """
        lo, hi = window
        xs = np.arange(lo, hi + 1)
        vals = np.asarray(f(xs), dtype=complex)
        ap = vals[-1] if alpha_plus is None else alpha_plus
        am = vals[0] if alpha_minus is None else alpha_minus
        return cls(lo, vals, ap, am, tail_rule=f if extend_tail else None)

    # -- accessors -----------------------------------------------------------
    @property
    def x_max(self) -> int:
        return self.x_min + self.values.size - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.x_min, self.x_max)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.x_min, self.x_max + 1)

    @property
    def rho_inf(self) -> float:
        return float(np.sqrt(1.0 - abs(self.alpha_plus) ** 2))

    def alpha_at(self, x):
        """``alpha`` at integer site(s) ``x``; outside the window the tail applies."""
        xs = np.asarray(x, dtype=np.int64)
        out = np.empty(xs.shape, dtype=complex)
        inside = (xs >= self.x_min) & (xs <= self.x_max)
        out[inside] = self.values[xs[inside] - self.x_min]
        outside = ~inside
        if np.any(outside):
            if self.tail_rule is not None:
                out[outside] = np.asarray(self.tail_rule(xs[outside]), dtype=complex)
            else:
                out[outside] = np.where(xs[outside] > self.x_max, self.alpha_plus, self.alpha_minus)
        return out if out.ndim else complex(out)

    def rho_at(self, x):
        r = np.sqrt(1.0 - np.abs(np.asarray(self.alpha_at(x))) ** 2)
        return r if np.ndim(r) else float(r)

    def coin_at(self, x) -> np.ndarray:
        return canonical_coin(self.alpha_at(x))

    def extend(self, window: tuple[int, int]) -> "CoinSequence":
        """Materialize the tail onto a larger window (constant tail beyond it)."""
        lo, hi = window
        if lo > self.x_min or hi < self.x_max:
            raise WindowMismatch("extension window must contain the current window")
        xs = np.arange(lo, hi + 1)
        return CoinSequence(lo, self.alpha_at(xs), self.alpha_plus, self.alpha_minus)


@dataclass(frozen=True)
class ValidationReport:
    unitarity_defect: float
    alpha_abs_min: float
    alpha_abs_max: float
    l1_variation: float
    gap_plus: float
    gap_minus: float
    modulus_mismatch: float
    unitarity_tol: float
    gap_tol: float
    modulus_tol: float

    @property
    def passed(self) -> bool:
        return (
            self.unitarity_defect <= self.unitarity_tol
            and self.gap_plus <= self.gap_tol
            and self.gap_minus <= self.gap_tol
            and self.modulus_mismatch <= self.modulus_tol
            and 0.0 < self.alpha_abs_min
            and self.alpha_abs_max < 1.0
        )

    def as_rows(self) -> list[tuple[str, float]]:
        return [
            ("unitarity_defect", self.unitarity_defect),
            ("alpha_abs_min", self.alpha_abs_min),
            ("alpha_abs_max", self.alpha_abs_max),
            ("l1_variation", self.l1_variation),
            ("gap_plus", self.gap_plus),
            ("gap_minus", self.gap_minus),
            ("modulus_mismatch", self.modulus_mismatch),
            ("passed", float(self.passed)),
        ]


def validate_long_range(
    seq: CoinSequence,
    *,
    unitarity_tol: float = UNITARITY_TOL,
    gap_tol: float = 1e-2,
    modulus_tol: float = 1e-12,
) -> ValidationReport:
    """Check the long-range hypotheses on the represented window.

    The l1 variation is the windowed sum of ``|alpha(x+1) - alpha(x)|``; the
    jumps onto the tails are reported separately as the boundary gaps.
    """
    if seq.values.size == 0:
        raise EmptyWindow("empty window")
    _check_alpha_range(seq.values)
    mod = np.abs(seq.values)
    return ValidationReport(
        unitarity_defect=unitarity_defect(seq.coin_at(seq.sites)),
        alpha_abs_min=float(mod.min()),
        alpha_abs_max=float(mod.max()),
        l1_variation=float(np.sum(np.abs(np.diff(seq.values)))),
        gap_plus=float(abs(seq.values[-1] - seq.alpha_plus)),
        gap_minus=float(abs(seq.values[0] - seq.alpha_minus)),
        modulus_mismatch=float(abs(abs(seq.alpha_plus) - abs(seq.alpha_minus))),
        unitarity_tol=unitarity_tol,
        gap_tol=gap_tol,
        modulus_tol=modulus_tol,
    )


def tail_limits(seq: CoinSequence, tol: float = 1e-12) -> tuple[complex, complex]:
    """Return ``(alpha_plus, alpha_minus)`` after checking their moduli agree."""
    if abs(abs(seq.alpha_plus) - abs(seq.alpha_minus)) > tol:
        raise ModulusMismatch(
            f"|alpha_+| = {abs(seq.alpha_plus)!r} differs from |alpha_-| = {abs(seq.alpha_minus)!r}"
        )
    return seq.alpha_plus, seq.alpha_minus


# ---------------------------------------------------------------------------
# general coins and the gauge transformation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneralCoinPoint:
    alpha: complex
    beta: complex
    theta: float = 0.0

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        if b == 0:
            raise BetaZero("beta = 0: arg(beta) is undefined")
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > UNITARITY_TOL:
            raise AlphaOutOfRange(f"|alpha|^2 + |beta|^2 != 1 for alpha={a!r}, beta={b!r}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "theta", float(self.theta))


@dataclass(frozen=True)
class GeneralCoin:
    """General U(2) coin data on a window.

    Tails are constant coins with ``theta = 0`` given by ``tail_plus`` /
    ``tail_minus`` (``(alpha, beta)`` pairs).  When omitted, the tails repeat the
    edge values of ``alpha``/``beta`` with ``theta`` set to zero.
    """

    x_min: int
    alpha: np.ndarray
    beta: np.ndarray
    theta: np.ndarray
    tail_plus: tuple[complex, complex] | None = None
    tail_minus: tuple[complex, complex] | None = None

    def __post_init__(self):
        a, b = _frozen(self.alpha), _frozen(self.beta)
        t = _frozen(self.theta, float)
        if a.ndim != 1 or a.size == 0:
            raise EmptyWindow("general coin window is empty")
        if not (a.shape == b.shape == t.shape):
            raise WindowMismatch("alpha, beta, theta must share one window")
        if np.any(b == 0):
            raise BetaZero("beta vanishes at some site")
        if np.max(np.abs(np.abs(a) ** 2 + np.abs(b) ** 2 - 1.0)) > UNITARITY_TOL:
            raise AlphaOutOfRange("|alpha|^2 + |beta|^2 = 1 violated")
        _check_alpha_range(a)
        tp = self.tail_plus if self.tail_plus is not None else (a[-1], b[-1])
        tm = self.tail_minus if self.tail_minus is not None else (a[0], b[0])
        for ta, tb in (tp, tm):
            GeneralCoinPoint(ta, tb)
        object.__setattr__(self, "x_min", int(self.x_min))
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "tail_plus", (complex(tp[0]), complex(tp[1])))
        object.__setattr__(self, "tail_minus", (complex(tm[0]), complex(tm[1])))

    @classmethod
    def from_points(cls, points: Mapping[int, GeneralCoinPoint], **tails) -> "GeneralCoin":
        xs = sorted(points)
        if not xs:
            raise EmptyWindow("no coin points given")
        if xs != list(range(xs[0], xs[-1] + 1)):
            raise WindowMismatch("coin points must cover a contiguous window")
        pts = [points[x] for x in xs]
        return cls(
            xs[0],
            [p.alpha for p in pts],
            [p.beta for p in pts],
            [p.theta for p in pts],
            **tails,
        )

    @property
    def x_max(self) -> int:
        return self.x_min + self.alpha.size - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.x_min, self.x_max)

    def _lookup(self, x, inside_vals, plus, minus):
        xs = np.asarray(x, dtype=np.int64)
        out = np.where(xs > self.x_max, plus, minus).astype(inside_vals.dtype)
        inside = (xs >= self.x_min) & (xs <= self.x_max)
        out[inside] = inside_vals[xs[inside] - self.x_min]
        return out

    def alpha_at(self, x):
        return self._lookup(x, self.alpha, self.tail_plus[0], self.tail_minus[0])

    def beta_at(self, x):
        return self._lookup(x, self.beta, self.tail_plus[1], self.tail_minus[1])

    def theta_at(self, x):
        return self._lookup(x, self.theta, 0.0, 0.0)

    def coin_at(self, x) -> np.ndarray:
        return general_coin(self.alpha_at(x), self.beta_at(x), self.theta_at(x))


@dataclass(frozen=True)
class GaugeResult:
    """Gauge phases and canonical coin.

    ``g`` is tabulated on ``[x_min - 1, x_max + 2]`` and ``h`` on
    ``[x_min - 2, x_max + 1]`` so that ``g(x+1)`` and ``h(x-1)`` exist for every
    site of the one-site-padded window ``[x_min - 1, x_max + 1]`` on which
    ``theta_prime`` lives.
    """

    x_min: int
    x_max: int
    g: np.ndarray
    h: np.ndarray
    theta_prime: np.ndarray
    alpha_prime: CoinSequence

    def g_at(self, x):
        return self.g[np.asarray(x) - (self.x_min - 1)]

    def h_at(self, x):
        return self.h[np.asarray(x) - (self.x_min - 2)]

    def theta_prime_at(self, x):
        return self.theta_prime[np.asarray(x) - (self.x_min - 1)]


def _signed_partial_sums(f, lo: int, hi: int, start: int) -> tuple[np.ndarray, np.ndarray]:
    """Return sites ``lo..hi`` and ``S(x)`` with ``S(start) = 0``, ``S(x+1) - S(x) = f(x)``."""
    a, b = min(lo, start), max(hi, start)
    xs = np.arange(a, b + 1)
    inc = np.asarray(f(xs[:-1]), dtype=float)
    s = np.concatenate([[0.0], np.cumsum(inc)])
    s = s - s[start - a]
    keep = (xs >= lo) & (xs <= hi)
    return xs[keep], s[keep]


def gauge_normalize(general: GeneralCoin | Mapping[int, GeneralCoinPoint], g0: float = 0.0, h0: float = 0.0) -> GaugeResult:
    """Diagonal gauge ``G(x) = diag(e^{i g(x)}, e^{i h(x)})`` removing ``theta`` and ``arg beta``.

    The phases obey ``g(x+1) = g(x) - theta(x) - b(x)`` and
    ``h(x-1) = h(x) - theta(x) + b(x)`` with ``b = arg beta`` (principal value)
    and free initial values ``g(0) = g0``, ``h(0) = h0``.  The canonical coin is
    ``alpha'(x) = exp(i theta'(x)) alpha(x)`` with
    ``theta'(x) = -g(x) + b(x) + h(x)``.
    """
    if not isinstance(general, GeneralCoin):
        general = GeneralCoin.from_points(general)
    lo, hi = general.window

    def b_at(x):
        return np.angle(general.beta_at(x))

    def th_at(x):
        return general.theta_at(x)

    # g(x+1) - g(x) = -(theta(x) + b(x)); anchored at g(0) = g0
    _, g = _signed_partial_sums(lambda x: -(th_at(x) + b_at(x)), lo - 1, hi + 2, 0)
    # h(x+1) - h(x) = theta(x+1) - b(x+1); anchored at h(0) = h0
    _, h = _signed_partial_sums(lambda x: th_at(x + 1) - b_at(x + 1), lo - 2, hi + 1, 0)
    g = g + g0
    h = h + h0

    xs = np.arange(lo - 1, hi + 2)
    g_x = g[xs - (lo - 1)]
    h_x = h[xs - (lo - 2)]
    theta_p = -g_x + b_at(xs) + h_x
    alpha_p = np.exp(1j * theta_p) * general.alpha_at(xs)
    seq = CoinSequence(lo, alpha_p[1:-1], alpha_p[-1], alpha_p[0])
    return GaugeResult(lo, hi, _frozen(g, float), _frozen(h, float), _frozen(theta_p, float), seq)


def conjugated_coin(general: GeneralCoin, result: GaugeResult, xs) -> np.ndarray:
    """``diag(e^{i g(x+1)}, e^{i h(x-1)}) C(x) diag(e^{-i g(x)}, e^{-i h(x)})``.

    This is the coin seen after conjugating ``U = S C`` by the gauge.
    """
    xs = np.asarray(xs)
    left = np.zeros(xs.shape + (2, 2), dtype=complex)
    left[..., 0, 0] = np.exp(1j * result.g_at(xs + 1))
    left[..., 1, 1] = np.exp(1j * result.h_at(xs - 1))
    right = np.zeros_like(left)
    right[..., 0, 0] = np.exp(-1j * result.g_at(xs))
    right[..., 1, 1] = np.exp(-1j * result.h_at(xs))
    return left @ general.coin_at(xs) @ right


def verify_gauge(general: GeneralCoin, result: GaugeResult, window: tuple[int, int] | None = None) -> float:
    """Max entrywise deviation between the conjugated coin and ``C_{alpha'}`` over ``window``."""
    if not isinstance(general, GeneralCoin):
        general = GeneralCoin.from_points(general)
    if (result.x_min, result.x_max) != general.window:
        raise WindowMismatch("gauge result was computed for a different window")
    lo, hi = window if window is not None else general.window
    if lo < general.x_min - 1 or hi > general.x_max + 1 or lo > hi:
        raise WindowMismatch(f"window {window} outside the gauge range")
    xs = np.arange(lo, hi + 1)
    target = canonical_coin(result.alpha_prime.alpha_at(xs))
    return float(np.max(np.abs(conjugated_coin(general, result, xs) - target)))


def phase_variation_bound(general: GeneralCoin) -> float:
    """Windowed bound for ``sum |alpha'(x+1) - alpha'(x)|``.

    The canonical phase advances by ``theta(x) + theta(x+1)`` per site, so
    ``|alpha'(x+1) - alpha'(x)| <= |theta(x) + theta(x+1)| |alpha(x+1)| + |alpha(x+1) - alpha(x)|``.
    """
    xs = np.arange(general.x_min, general.x_max)
    th = general.theta_at(xs) + general.theta_at(xs + 1)
    a1 = general.alpha_at(xs + 1)
    return float(np.sum(np.abs(th) * np.abs(a1) + np.abs(a1 - general.alpha_at(xs))))
