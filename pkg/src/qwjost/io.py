"""Coin files and tabular output.

Coin files are JSON objects::

    {
      "window": [x_min, x_max],
      "alpha": [[re, im], ...]  |  {"rule": NAME, "params": {...}},
      "beta":  same forms (optional; general coins only),
      "theta": [t, ...] | {"rule": NAME, "params": {...}} (optional),
      "alpha_plus": [re, im],   "alpha_minus": [re, im],
      "tail_plus": [[re, im], [re, im]], "tail_minus": ... (optional, general coins)
    }

Rules for ``alpha``/``theta``: ``constant`` (``value``), ``inverse_distance``
(``base + amplitude / (1 + |x|)``), ``box`` (``base + amplitude * 1{|x| <= radius}``).
For ``beta`` the rule ``rho_phase`` gives
``sqrt(1 - |alpha|^2) * exp(i (phase0 + phase_amp / (1 + x^2)))``.
A file with ``beta`` or ``theta`` is a general coin; otherwise canonical.
Numbers are written with 17 significant digits.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .coin import CoinSequence, GeneralCoin
from .errors import CoinIOError, ParseError, QWError


def _cplx(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise ParseError(f"expected a number or [re, im] pair, got {v!r}")


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def eval_rule(rule: dict, xs: np.ndarray, alpha: np.ndarray | None = None) -> np.ndarray:
    name = rule.get("rule")
    params = rule.get("params", {})
    try:
        if name == "constant":
            return np.full(xs.shape, _cplx(params["value"]), dtype=complex)
        if name == "inverse_distance":
            return _cplx(params["base"]) + _cplx(params["amplitude"]) / (1.0 + np.abs(xs))
        if name == "box":
            r = int(params["radius"])
            return _cplx(params["base"]) + _cplx(params["amplitude"]) * (np.abs(xs) <= r)
        if name == "rho_phase":
            if alpha is None:
                raise ParseError("rule rho_phase needs alpha")
            ph = float(params["phase0"]) + float(params["phase_amp"]) / (1.0 + xs.astype(float) ** 2)
            return np.sqrt(1.0 - np.abs(alpha) ** 2) * np.exp(1j * ph)
    except KeyError as exc:
        raise ParseError(f"rule {name!r} is missing parameter {exc}") from None
    raise ParseError(f"unknown rule {name!r}")


def _values(field: Any, xs: np.ndarray, what: str, alpha=None) -> np.ndarray:
    if isinstance(field, dict):
        return np.asarray(eval_rule(field, xs, alpha))
    if isinstance(field, list):
        if len(field) != xs.size:
            raise ParseError(f"{what}: expected {xs.size} values, got {len(field)}")
        return np.array([_cplx(v) for v in field], dtype=complex)
    raise ParseError(f"{what}: expected a list or a rule object")


def parse_coin(doc: dict) -> CoinSequence | GeneralCoin:
    if not isinstance(doc, dict):
        raise ParseError("coin file must hold a JSON object")
    try:
        lo, hi = (int(v) for v in doc["window"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("coin file needs 'window': [x_min, x_max]") from None
    if hi < lo:
        raise ParseError(f"empty window [{lo}, {hi}]")
    if "alpha" not in doc:
        raise ParseError("coin file needs 'alpha'")
    xs = np.arange(lo, hi + 1)
    alpha = _values(doc["alpha"], xs, "alpha")
    if "beta" in doc or "theta" in doc:
        beta = _values(doc["beta"], xs, "beta", alpha) if "beta" in doc else np.sqrt(1 - np.abs(alpha) ** 2) + 0j
        theta = _values(doc.get("theta", {"rule": "constant", "params": {"value": 0}}), xs, "theta").real
        tails = {}
        for key in ("tail_plus", "tail_minus"):
            if key in doc:
                t = doc[key]
                tails[key] = (_cplx(t[0]), _cplx(t[1]))
        return GeneralCoin(lo, alpha, beta, theta, **tails)
    ap = _cplx(doc["alpha_plus"]) if "alpha_plus" in doc else alpha[-1]
    am = _cplx(doc["alpha_minus"]) if "alpha_minus" in doc else alpha[0]
    return CoinSequence(lo, alpha, ap, am)


def read_coin(path) -> CoinSequence | GeneralCoin:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CoinIOError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_coin(doc)


def coin_document(seq: CoinSequence | GeneralCoin) -> dict:
    lo, hi = seq.window
    if isinstance(seq, GeneralCoin):
        return {
            "window": [lo, hi],
            "alpha": [_pair(a) for a in seq.alpha],
            "beta": [_pair(b) for b in seq.beta],
            "theta": [float(t) for t in seq.theta],
            "tail_plus": [_pair(v) for v in seq.tail_plus],
            "tail_minus": [_pair(v) for v in seq.tail_minus],
        }
    return {
        "window": [lo, hi],
        "alpha": [_pair(a) for a in seq.values],
        "alpha_plus": _pair(seq.alpha_plus),
        "alpha_minus": _pair(seq.alpha_minus),
    }


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    try:
        d = path.parent if str(path.parent) else Path(".")
        fd, tmp = tempfile.mkstemp(dir=d, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise CoinIOError(f"cannot write {path}: {exc.strerror or exc}") from None


def write_coin(path, seq: CoinSequence | GeneralCoin) -> None:
    atomic_write(path, json.dumps(coin_document(seq), indent=1) + "\n")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def render_table(config: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [
        f"# qwjost {__version__}",
        "# config: " + json.dumps(config, sort_keys=True, separators=(",", ":")),
        ",".join(columns),
    ]
    for r in rows:
        lines.append(",".join(fmt(v) for v in r))
    return "\n".join(lines) + "\n"


def write_table(path, config: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write(path, render_table(config, columns, rows))


def read_table(path) -> tuple[dict, list[str], np.ndarray]:
    """Inverse of :func:`write_table` for numeric tables."""
    config, cols, data = {}, [], []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line.startswith("# config: "):
                    config = json.loads(line[len("# config: "):])
                elif line.startswith("#"):
                    continue
                elif not cols:
                    cols = line.split(",")
                elif line:
                    data.append([float(t) for t in line.split(",")])
    except OSError as exc:
        raise CoinIOError(str(exc)) from None
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return config, cols, np.array(data)


__all__ = [
    "QWError",
    "atomic_write",
    "coin_document",
    "parse_coin",
    "read_coin",
    "read_table",
    "render_table",
    "write_coin",
    "write_table",
]
