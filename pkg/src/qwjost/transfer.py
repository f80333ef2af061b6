"""Transfer matrices, the J coordinate change, Wronskians and walk evolution.

A state is a pair ``u(x) = (u_R(x), u_L(x))``: the first component is moved
right by the shift, the second left, ``(S u)(x) = (u_R(x-1), u_L(x+1))``.
The walk is ``U = S C``.

With ``v = J u``, ``(J u)(x) = (u_L(x-1), u_R(x))``, the eigenvalue equation
``U u = e^{i lambda} u`` becomes ``v(x+1) = T_lambda(x) v(x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coin import CoinSequence
from .errors import BoundaryLeak, GrowthOverflow, RangeError, WindowMismatch

GROWTH_LIMIT = 1e150


@dataclass(frozen=True)
class StateVector:
    """Finitely supported state on ``[x_min, x_min + len(u) - 1]``, zero outside."""

    x_min: int
    u: np.ndarray

    def __post_init__(self):
        arr = np.array(self.u, dtype=complex)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise WindowMismatch("state values must have shape (n, 2)")
        arr.setflags(write=False)
        object.__setattr__(self, "u", arr)
        object.__setattr__(self, "x_min", int(self.x_min))

    @classmethod
    def zeros(cls, window) -> "StateVector":
        lo, hi = window
        return cls(lo, np.zeros((hi - lo + 1, 2), dtype=complex))

    @classmethod
    def delta(cls, window, x: int, component: int, value: complex = 1.0) -> "StateVector":
        lo, hi = window
        if not lo <= x <= hi:
            raise WindowMismatch(f"site {x} outside window {window}")
        arr = np.zeros((hi - lo + 1, 2), dtype=complex)
        arr[x - lo, component] = value
        return cls(lo, arr)

    @property
    def x_max(self) -> int:
        return self.x_min + self.u.shape[0] - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.x_min, self.x_max)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.x_min, self.x_max + 1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.u))

    def at(self, x: int) -> np.ndarray:
        if self.x_min <= x <= self.x_max:
            return self.u[x - self.x_min]
        return np.zeros(2, dtype=complex)

    def restrict(self, window) -> "StateVector":
        """Values on ``window``, padding with zeros where needed."""
        lo, hi = window
        out = np.zeros((hi - lo + 1, 2), dtype=complex)
        a, b = max(lo, self.x_min), min(hi, self.x_max)
        if a <= b:
            out[a - lo:b - lo + 1] = self.u[a - self.x_min:b - self.x_min + 1]
        return StateVector(lo, out)

    def support(self) -> tuple[int, int] | None:
        nz = np.flatnonzero(np.any(self.u != 0, axis=1))
        if nz.size == 0:
            return None
        return (self.x_min + int(nz[0]), self.x_min + int(nz[-1]))


# ---------------------------------------------------------------------------
# transfer matrices
# ---------------------------------------------------------------------------


def transfer_matrices(seq: CoinSequence, xs, lam) -> np.ndarray:
    """Stacked ``T_lambda(x)`` for the sites ``xs``, shape ``(n, 2, 2)``."""
    xs = np.asarray(xs, dtype=np.int64)
    a = np.asarray(seq.alpha_at(xs), dtype=complex)
    r = np.sqrt(1.0 - np.abs(a) ** 2)
    e = np.exp(1j * complex(lam))
    out = np.empty(xs.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = e
    out[..., 0, 1] = a
    out[..., 1, 0] = np.conj(a)
    out[..., 1, 1] = 1.0 / e
    return out / r[..., None, None]


def transfer_matrix(seq: CoinSequence, x: int, lam) -> np.ndarray:
    return transfer_matrices(seq, np.array([x]), lam)[0]


def unimodular_inverse(T: np.ndarray) -> np.ndarray:
    out = np.empty_like(T)
    out[..., 0, 0] = T[..., 1, 1]
    out[..., 0, 1] = -T[..., 0, 1]
    out[..., 1, 0] = -T[..., 1, 0]
    out[..., 1, 1] = T[..., 0, 0]
    return out


def propagate(seq: CoinSequence, v0, x_from: int, x_to: int, lam) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``v(x+1) = T(x) v(x)`` from ``v(x_from) = v0`` to ``x_to``.

    Returns ``(sites, values)`` ordered by increasing ``x``.  Going backwards
    uses the exact inverse of the unimodular matrix.
    """
    v = np.array(v0, dtype=complex).reshape(2)
    step = 1 if x_to >= x_from else -1
    n = abs(x_to - x_from) + 1
    out = np.empty((n, 2), dtype=complex)
    out[0] = v
    if n > 1:
        if step > 0:
            Ts = transfer_matrices(seq, np.arange(x_from, x_to), lam)
        else:
            Ts = unimodular_inverse(transfer_matrices(seq, np.arange(x_from - 1, x_to - 1, -1), lam))
        for k in range(n - 1):
            v = Ts[k] @ v
            if not np.all(np.isfinite(v)) or abs(v[0]) + abs(v[1]) > GROWTH_LIMIT:
                raise GrowthOverflow(f"solution exceeded {GROWTH_LIMIT:g} at x = {x_from + step * (k + 1)}")
            out[k + 1] = v
    sites = np.arange(x_from, x_to + step, step)
    if step < 0:
        return sites[::-1], out[::-1]
    return sites, out


def recursion_residual(seq: CoinSequence, x_min: int, v: np.ndarray, lam) -> float:
    """Relative residual ``max |v(x+1) - T(x) v(x)| / max |v|``."""
    v = np.asarray(v)
    Ts = transfer_matrices(seq, np.arange(x_min, x_min + v.shape[0] - 1), lam)
    r = v[1:] - np.einsum("nij,nj->ni", Ts, v[:-1])
    scale = np.max(np.abs(v))
    return float(np.max(np.abs(r)) / scale) if scale else 0.0


def wronskian(v1, v2, x: int | None = None, x_min: int = 0):
    """``det(v1(x) v2(x))``.  With ``x=None`` returns the whole profile."""
    v1, v2 = np.asarray(v1), np.asarray(v2)
    w = v1[..., 0] * v2[..., 1] - v1[..., 1] * v2[..., 0]
    if x is None:
        return w
    return complex(w[x - x_min])


# ---------------------------------------------------------------------------
# J and the walk
# ---------------------------------------------------------------------------


def j_map(u: StateVector) -> StateVector:
    """``(J u)(x) = (u_L(x-1), u_R(x))`` on ``[x_min, x_max + 1]``."""
    lo, hi = u.window
    out = np.zeros((hi - lo + 2, 2), dtype=complex)
    out[1:, 0] = u.u[:, 1]
    out[:-1, 1] = u.u[:, 0]
    return StateVector(lo, out)


def j_inverse(v: StateVector) -> StateVector:
    """``(J^{-1} v)(x) = (v_2(x), v_1(x+1))`` on ``[x_min - 1, x_max]``."""
    lo, hi = v.window
    out = np.zeros((hi - lo + 2, 2), dtype=complex)
    out[1:, 0] = v.u[:, 1]
    out[:-1, 1] = v.u[:, 0]
    return StateVector(lo - 1, out)


def evolve_U(seq: CoinSequence, u: StateVector, mode: str = "periodic") -> StateVector:
    """One step of ``U = S C``.

    ``periodic``: ring on the window of ``u``.  ``truncated``: same window,
    requires zero boundary sites.  ``open``: window grows by one on each side.
    """
    cu = np.einsum("nij,nj->ni", seq.coin_at(u.sites), u.u)
    lo, hi = u.window
    if mode == "periodic":
        out = np.empty_like(cu)
        out[:, 0] = np.roll(cu[:, 0], 1)
        out[:, 1] = np.roll(cu[:, 1], -1)
        return StateVector(lo, out)
    if mode == "open":
        out = np.zeros((cu.shape[0] + 2, 2), dtype=complex)
        out[2:, 0] = cu[:, 0]
        out[:-2, 1] = cu[:, 1]
        return StateVector(lo - 1, out)
    if mode == "truncated":
        if np.any(u.u[0] != 0) or np.any(u.u[-1] != 0):
            raise BoundaryLeak("state touches the window boundary")
        out = np.zeros_like(cu)
        out[1:, 0] = cu[:-1, 0]
        out[:-1, 1] = cu[1:, 1]
        return StateVector(lo, out)
    raise ValueError(f"unknown mode {mode!r}")


def evolve_steps(seq: CoinSequence, u: StateVector, steps: int, mode: str = "periodic") -> StateVector:
    for _ in range(steps):
        u = evolve_U(seq, u, mode)
    return u


def state_from_solution(x_min: int, v: np.ndarray) -> StateVector:
    """``J^{-1} v`` restricted to where it is fully determined by ``v``."""
    vs = StateVector(x_min, v)
    lo, hi = vs.window
    return j_inverse(vs).restrict((lo, hi - 1))


def eigen_residual(seq: CoinSequence, u: StateVector, lam) -> float:
    """``max |(U u)(x) - e^{i lambda} u(x)|`` over sites where ``U u`` is exact."""
    uu = evolve_U(seq, u, "open").restrict(u.window)
    d = uu.u - np.exp(1j * complex(lam)) * u.u
    return float(np.max(np.abs(d[1:-1]))) if d.shape[0] > 2 else 0.0


def essential_band(rho_inf: float) -> list[tuple[float, float]]:
    """The arcs ``|cos lambda| <= rho_inf`` as ``lambda``-intervals in ``[0, 2 pi]``."""
    if not 0.0 < rho_inf <= 1.0:
        raise RangeError(f"rho_inf must lie in (0, 1], got {rho_inf!r}")
    a = math.acos(rho_inf)
    return [(a, math.pi - a), (math.pi + a, 2 * math.pi - a)]


def band_distance(lam, rho_inf: float) -> np.ndarray:
    """Signed angular distance to the band edges, positive inside the band."""
    lam = np.mod(np.asarray(lam, dtype=float), 2 * math.pi)
    d = np.full(lam.shape, -np.inf)
    for lo, hi in essential_band(rho_inf):
        d = np.maximum(d, np.minimum(lam - lo, hi - lam))
    return d
