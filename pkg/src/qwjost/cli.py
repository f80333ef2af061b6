"""Command line front end.

Every subcommand reads a coin file, validates its numeric arguments before any
computation, and writes one CSV table whose ``#`` header holds the tool
version and the fully resolved configuration.  Exit codes: 0 success,
2 invalid input, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .coin import CoinSequence, GeneralCoin, gauge_normalize, validate_long_range, verify_gauge
from .dispersion import SheetPoint, check_admissible
from .errors import ParseError, QWError, RangeError, SizeError, WindowMismatch
from .io import read_coin, write_coin, write_table
from .jost import default_cutoffs, jost_pair, solve_jost
from .oracle import build_finite, spectrum_finite, spectrum_table
from .resolvent import default_window, lap_sweep, ladder_from, resolvent_kernel
from .transfer import StateVector, evolve_U


# -- argument parsing -------------------------------------------------------


def parse_xi(text: str) -> SheetPoint:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ParseError(f"--xi expects sheet:re[:im], got {text!r}")
    try:
        sheet = int(parts[0])
        re = float(parts[1])
        im = float(parts[2]) if len(parts) == 3 else 0.0
    except ValueError:
        raise ParseError(f"--xi: cannot parse {text!r}") from None
    if sheet not in (1, 2):
        raise ParseError(f"--xi: sheet must be 1 or 2, got {sheet}")
    return SheetPoint(sheet, complex(re, im))


def parse_xi_grid(text: str) -> list[SheetPoint]:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise ParseError(f"--xi-grid expects sheet:re_min:re_max:count[:im], got {text!r}")
    try:
        sheet, lo, hi, n = int(parts[0]), float(parts[1]), float(parts[2]), int(parts[3])
        im = float(parts[4]) if len(parts) == 5 else 0.0
    except ValueError:
        raise ParseError(f"--xi-grid: cannot parse {text!r}") from None
    if n < 1 or sheet not in (1, 2):
        raise ParseError("--xi-grid: count >= 1 and sheet in {1, 2} required")
    return [SheetPoint(sheet, complex(r, im)) for r in np.linspace(lo, hi, n)]


def parse_ladder(text: str) -> list[float]:
    parts = text.split(":")
    try:
        start, ratio, count = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise ParseError(f"--eps-ladder expects start:ratio:count, got {text!r}") from None
    if len(parts) != 3 or not (start > 0 and 0 < ratio < 1 and count >= 2):
        raise RangeError("--eps-ladder needs start > 0, 0 < ratio < 1, count >= 2")
    return ladder_from(start, ratio, count)


def parse_window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise ParseError(f"--window expects min:max, got {text!r}") from None
    if hi < lo:
        raise WindowMismatch(f"--window: max < min in {text!r}")
    return lo, hi


def _xi_text(p: SheetPoint) -> str:
    return f"{p.sheet}:{p.xi.real!r}:{p.xi.imag!r}"


def _canonical(coin) -> CoinSequence:
    if isinstance(coin, GeneralCoin):
        return gauge_normalize(coin).alpha_prime
    return coin


def _points(args) -> list[SheetPoint]:
    pts = []
    if args.xi:
        pts += [parse_xi(t) for t in args.xi]
    if args.xi_grid:
        pts += parse_xi_grid(args.xi_grid)
    if not pts:
        raise ParseError("give --xi or --xi-grid")
    return pts


def _base_config(args, **extra) -> dict:
    cfg = {"command": args.command, "coin": args.coin}
    cfg.update(extra)
    return cfg


# -- subcommands ----------------------------------------------------------------


def cmd_validate(args) -> None:
    coin = _canonical(read_coin(args.coin))
    tol = 1e-2 if args.tol is None else args.tol
    rep = validate_long_range(coin, gap_tol=tol)
    cfg = _base_config(args, gap_tol=tol, unitarity_tol=rep.unitarity_tol, modulus_tol=rep.modulus_tol)
    write_table(args.out, cfg, ["quantity", "value"], rep.as_rows())


def cmd_gauge(args) -> None:
    coin = read_coin(args.coin)
    if not isinstance(coin, GeneralCoin):
        lo, hi = coin.window
        xs = np.arange(lo, hi + 1)
        a = coin.values
        coin = GeneralCoin(lo, a, np.sqrt(1 - np.abs(a) ** 2) + 0j, np.zeros(xs.size),
                           tail_plus=(coin.alpha_plus, math.sqrt(1 - abs(coin.alpha_plus) ** 2)),
                           tail_minus=(coin.alpha_minus, math.sqrt(1 - abs(coin.alpha_minus) ** 2)))
    res = gauge_normalize(coin, args.g0, args.h0)
    dev = verify_gauge(coin, res)
    report = args.report or _sibling(args.out, "_report.csv")
    cfg = _base_config(args, g0=args.g0, h0=args.h0, canonical_out=args.out)
    rows = []
    for x in range(coin.x_min, coin.x_max + 1):
        dx = verify_gauge(coin, res, (x, x))
        a = res.alpha_prime.alpha_at(x)
        rows.append((x, res.g_at(x), res.h_at(x), res.theta_prime_at(x), a.real, a.imag, dx))
    write_coin(args.out, res.alpha_prime)
    write_table(report, dict(cfg, max_deviation=dev),
                ["x", "g", "h", "theta_prime", "re_alpha_prime", "im_alpha_prime", "deviation"], rows)


def _sibling(path: str, suffix: str) -> str:
    stem = path[:-5] if path.endswith(".json") else path
    return stem + suffix


def cmd_jost(args) -> None:
    seq = _canonical(read_coin(args.coin))
    pts = _points(args)
    for p in pts:
        check_admissible(p, seq.alpha_plus)
    lo, hi = parse_window(args.window) if args.window else seq.window
    xs = np.arange(lo, hi + 1)
    rows = []
    meta = []
    for p in pts:
        cut = default_cutoffs(seq, p)
        pair = jost_pair(seq, cut, p)
        zs = pair.plus.Z_at(xs)
        mp, mm = pair.plus.m_at(xs), pair.minus.m_at(xs)
        for i, x in enumerate(xs):
            rows.append((p.sheet, p.xi.real, p.xi.imag, x,
                         mp[i, 0].real, mp[i, 0].imag, mp[i, 1].real, mp[i, 1].imag,
                         mm[i, 0].real, mm[i, 0].imag, mm[i, 1].real, mm[i, 1].imag,
                         zs[i].real, zs[i].imag))
        meta.append({"xi": _xi_text(p), "r0": cut.r0, "r_eps": cut.r_eps, "epsilon": cut.epsilon,
                     "x0_plus": pair.plus.x0, "x1_plus": pair.plus.x1,
                     "x0_minus": pair.minus.x0, "x1_minus": pair.minus.x1,
                     "W": [pair.W.real, pair.W.imag], "wronskian_drift": pair.drift})
    cfg = _base_config(args, window=[lo, hi], points=meta)
    cols = ["sheet", "re_xi", "im_xi", "x",
            "re_mp1", "im_mp1", "re_mp2", "im_mp2",
            "re_mm1", "im_mm1", "re_mm2", "im_mm2", "re_Z", "im_Z"]
    write_table(args.out, cfg, cols, rows)


def cmd_resolvent(args) -> None:
    seq = _canonical(read_coin(args.coin))
    pts = _points(args)
    for p in pts:
        check_admissible(p, seq.alpha_plus)
    win = parse_window(args.window) if args.window else default_window(seq)
    xs = np.arange(win[0], win[1] + 1)
    rows, meta = [], []
    for p in pts:
        k = resolvent_kernel(seq, None, p, win)
        K = k.blocks(xs, xs)
        for i, x in enumerate(xs):
            for j, y in enumerate(xs):
                b = K[i, j]
                rows.append((p.sheet, p.xi.real, p.xi.imag, x, y,
                             b[0, 0].real, b[0, 0].imag, b[0, 1].real, b[0, 1].imag,
                             b[1, 0].real, b[1, 0].imag, b[1, 1].real, b[1, 1].imag))
        meta.append({"xi": _xi_text(p), "lambda": [k.lam.real, k.lam.imag], "W": [k.W.real, k.W.imag]})
    cfg = _base_config(args, window=list(win), points=meta)
    cols = ["sheet", "re_xi", "im_xi", "x", "y", "re_k11", "im_k11", "re_k12", "im_k12",
            "re_k21", "im_k21", "re_k22", "im_k22"]
    write_table(args.out, cfg, cols, rows)


def cmd_lap(args) -> None:
    seq = _canonical(read_coin(args.coin))
    pts = _points(args)
    ladder = parse_ladder(args.eps_ladder) if args.eps_ladder else ladder_from(0.1, 0.25, 9)
    sigma = 1.0 if args.sigma is None else args.sigma
    tol = 1e-3 if args.tol is None else args.tol
    for p in pts:
        if not p.is_real:
            raise RangeError("lap needs real xi")
        check_admissible(p, seq.alpha_plus)
    win = parse_window(args.window) if args.window else default_window(seq)
    rows, summary = [], []
    for p in pts:
        rep = lap_sweep(seq, None, p, ladder, sigma, window=win, tol=tol)
        for r in rep.rows:
            rows.append((p.sheet, p.xi.real, r.eps, r.hs_norm, r.cauchy))
        summary.append({"xi": _xi_text(p), "monotone": rep.monotone, "final_ratio": rep.final_ratio,
                        "converged": rep.converged, "notes": rep.notes})
    cfg = _base_config(args, eps_ladder=ladder, sigma=sigma, tol=tol, window=list(win), summary=summary)
    write_table(args.out, cfg, ["sheet", "re_xi", "eps", "hs_norm", "cauchy"], rows)


def cmd_oracle(args) -> None:
    seq = _canonical(read_coin(args.coin))
    N = 256 if args.ring is None else args.ring
    fw = build_finite(seq, N)
    rows = spectrum_table(fw, spectrum_finite(fw), args.delta_band)
    cfg = _base_config(args, ring=N, delta_band=args.delta_band)
    write_table(args.out, cfg, ["angle", "abs_cos", "in_band", "pr", "half_mass_radius"],
                [(r.angle, r.abs_cos, r.in_band, r.pr, r.radius) for r in rows])


def cmd_evolve(args) -> None:
    seq = _canonical(read_coin(args.coin))
    if args.steps < 0:
        raise RangeError("--steps must be >= 0")
    mode = args.mode
    if args.ring is not None:
        if args.ring < 2 or args.ring % 2:
            raise SizeError("--ring must be even")
        win = (-args.ring // 2, args.ring // 2 - 1)
    else:
        win = parse_window(args.window) if args.window else seq.window
    u = StateVector.delta(win, args.site, args.component)
    n0 = u.norm()
    rows = [(0, n0, 0.0)]
    for t in range(1, args.steps + 1):
        u = evolve_U(seq, u, mode)
        rows.append((t, u.norm(), abs(u.norm() - n0)))
    cfg = _base_config(args, window=list(win), mode=mode, steps=args.steps, site=args.site,
                       component=args.component)
    write_table(args.out, cfg, ["step", "norm", "norm_defect"], rows)


# -- entry point ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qwjost", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"qwjost {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, xi=False):
        p.add_argument("--coin", required=True, help="coin file (JSON)")
        p.add_argument("--out", required=True, help="output file")
        p.add_argument("--window", help="min:max")
        p.add_argument("--tol", type=float)
        if xi:
            p.add_argument("--xi", action="append", help="sheet:re[:im], repeatable")
            p.add_argument("--xi-grid", help="sheet:re_min:re_max:count[:im]")
        return p

    common(sub.add_parser("validate", help="check the long-range hypotheses"))
    g = common(sub.add_parser("gauge", help="reduce a general coin to canonical form"))
    g.add_argument("--g0", type=float, default=0.0)
    g.add_argument("--h0", type=float, default=0.0)
    g.add_argument("--report", help="verification table (default: <out>_report.csv)")
    common(sub.add_parser("jost", help="Jost profiles m+- and the phase Z"), xi=True)
    common(sub.add_parser("resolvent", help="kernel dump on a window"), xi=True)
    lp = common(sub.add_parser("lap", help="limiting absorption ladder"), xi=True)
    lp.add_argument("--eps-ladder", help="start:ratio:count")
    lp.add_argument("--sigma", type=float)
    o = common(sub.add_parser("oracle", help="finite-ring spectrum with participation ratios"))
    o.add_argument("--ring", type=int)
    o.add_argument("--delta-band", type=float, default=0.1)
    e = common(sub.add_parser("evolve", help="evolve a delta state"))
    e.add_argument("--ring", type=int)
    e.add_argument("--steps", type=int, default=100)
    e.add_argument("--site", type=int, default=0)
    e.add_argument("--component", type=int, choices=(0, 1), default=0)
    e.add_argument("--mode", choices=("periodic", "truncated"), default="periodic")
    return ap


COMMANDS = {
    "validate": cmd_validate,
    "gauge": cmd_gauge,
    "jost": cmd_jost,
    "resolvent": cmd_resolvent,
    "lap": cmd_lap,
    "oracle": cmd_oracle,
    "evolve": cmd_evolve,
}


def _glue_negative(argv: list[str]) -> list[str]:
    # "--window -5:5" would otherwise read -5:5 as an option
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a == "--window" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--window={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_glue_negative(argv))
    try:
        COMMANDS[args.command](args)
    except QWError as exc:
        sys.stderr.write(f"qwjost: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"qwjost: I/O error: {exc}\n")
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
