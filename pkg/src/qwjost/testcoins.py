"""The four reference coins used by the test and acceptance suites.

C1  constant alpha = 1/sqrt(2)
C2  short range: 0.5 + 0.3 on |x| <= 3
C3  long range: 0.5 + 0.2 / (1 + |x|)
C4  general coin with C3's alpha, theta = 0.3 / (1 + |x|) and
    beta = rho exp(i (0.2 + 0.3 / (1 + x^2))), tails with theta = 0

All live on the window [-200, 200]; the canonical ones tend to 0.5
(C1: 1/sqrt(2)).  The same data ship as JSON files under ``data/``.
"""
from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .coin import CoinSequence, GeneralCoin
from .io import parse_coin

WINDOW = (-200, 200)
NAMES = ("C1", "C2", "C3", "C4")


def c1(window=WINDOW) -> CoinSequence:
    return CoinSequence.constant(1 / np.sqrt(2), window)


def c2(window=WINDOW) -> CoinSequence:
    return CoinSequence.from_function(lambda x: 0.5 + 0.3 * (np.abs(x) <= 3), window, 0.5, 0.5)


def c3_alpha(x):
    return 0.5 + 0.2 / (1.0 + np.abs(x))


def c3(window=WINDOW) -> CoinSequence:
    return CoinSequence.from_function(c3_alpha, window, 0.5, 0.5)


def c4(window=WINDOW) -> GeneralCoin:
    lo, hi = window
    xs = np.arange(lo, hi + 1)
    a = c3_alpha(xs) + 0j
    beta = np.sqrt(1 - np.abs(a) ** 2) * np.exp(1j * (0.2 + 0.3 / (1.0 + xs.astype(float) ** 2)))
    theta = 0.3 / (1.0 + np.abs(xs))
    b_inf = np.sqrt(0.75) * np.exp(0.2j)
    return GeneralCoin(lo, a, beta, theta, tail_plus=(0.5, b_inf), tail_minus=(0.5, b_inf))


def by_name(name: str):
    return {"C1": c1, "C2": c2, "C3": c3, "C4": c4}[name.upper()]()


def data_file(name: str):
    return resources.files("qwjost") / "data" / f"{name.lower()}.json"


def load_shipped(name: str):
    """Parse the JSON copy of a reference coin."""
    return parse_coin(json.loads(data_file(name).read_text()))
