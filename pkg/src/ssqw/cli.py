"""
Command-line interface.

Exit codes: 0 success, 1 admissibility failure, 2 not equivalent (``equiv``),
3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as sio
from .builders import (
    KitagawaParams,
    Profile,
    SSQWParams,
    SuzukiParams,
    apply_gauge,
    build_canonical,
    build_kitagawa,
    build_suzuki,
    random_admissible_walk,
    random_gauge,
    random_params,
    random_suzuki,
    suzuki_factors,
)
from .canonical import GEOMETRIES, canonicalize
from .chiral import ChiralCertificate, chiral_certificate, chiral_factorize, chiral_search
from .dynamics import distribution, moments, trajectory
from .equivalence import decide_equivalence, window_spectrum
from .errors import (
    InfeasibleProfile,
    InvariantViolation,
    NotAdmissible,
    ParseError,
    SSQWError,
)
from .operator import WalkOperator
from .structure import check_admissibility

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_ADMISSIBILITY", "EXIT_NOT_EQUIVALENT", "EXIT_IO"]

EXIT_OK = 0
EXIT_ADMISSIBILITY = 1
EXIT_NOT_EQUIVALENT = 2
EXIT_IO = 3


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _out(text: str) -> None:
    sys.stdout.write(text)


def _lower(v) -> str:
    if isinstance(v, bool) or v is None:
        return {True: "true", False: "false", None: "null"}[v]
    return str(v)


# --------------------------------------------------------------------------- #
# input handling
# --------------------------------------------------------------------------- #

def _load(args, attr: str = "file"):
    """Walk object from a file, or a Kitagawa walk from flags."""
    kit = getattr(args, "kitagawa", None)
    if kit is not None:
        if args.lo is None or args.hi is None:
            raise _Fail(EXIT_IO, "--kitagawa needs --lo and --hi")
        if args.hi < args.lo:
            raise _Fail(EXIT_IO, "--hi must not be below --lo")
        return build_kitagawa(KitagawaParams(kit[0], kit[1], args.lo, args.hi))
    path = getattr(args, attr, None)
    if path is None:
        raise _Fail(EXIT_IO, "no input file given")
    return sio.parse_walk_file(path)


def _operator(obj) -> WalkOperator:
    if isinstance(obj, WalkOperator):
        return obj
    if isinstance(obj, SSQWParams):
        return build_canonical(obj)
    if isinstance(obj, SuzukiParams):
        return build_suzuki(obj)
    raise TypeError(type(obj))


def _add_walk_input(p: argparse.ArgumentParser, optional_file: bool = True) -> None:
    p.add_argument("file", nargs="?" if optional_file else None,
                   help="walk file (matrix dump, canonical or Suzuki spec; '-' for stdin)")
    p.add_argument("--kitagawa", nargs=2, type=float, metavar=("THETA1", "THETA2"),
                   help="use Kitagawa's walk instead of a file")
    p.add_argument("--lo", type=int, help="left end of the Kitagawa window")
    p.add_argument("--hi", type=int, help="right end of the Kitagawa window")


# --------------------------------------------------------------------------- #
# subcommands
# --------------------------------------------------------------------------- #

def _cmd_check(args) -> int:
    U = _operator(_load(args))
    rep = check_admissibility(U)
    d = rep.as_dict()
    lines = [
        f"window: {d['window'][0]},{d['window'][1]}",
        f"band_ok: {_lower(d['band_ok'])}",
        f"rank_ok: {_lower(d['rank_ok'])}",
        f"unitary_ok: {_lower(d['unitary_ok'])}",
        f"unitary_residual: {sio.fmt(d['unitary_residual'])}",
        f"assumption_a_ok: {_lower(d['assumption_a_ok'])}",
        f"assumption_b_ok: {_lower(d['assumption_b_ok'])}",
        f"cuts: {d['cuts']}",
        f"offenders: {d['offenders']}",
    ]
    _out("\n".join(lines) + "\n")
    return EXIT_OK if rep.ok else EXIT_ADMISSIBILITY


def _cmd_canonicalize(args) -> int:
    U = _operator(_load(args))
    form = canonicalize(U, args.geometry, origin=args.origin)
    text = sio.format_canonical(form)
    if args.out:
        sio.write_text(args.out, text)
    else:
        _out(text)
    if args.gauge:
        sio.write_text(args.gauge, sio.format_gauge(form.gauge, full=True if args.full_gauge else None))
    return EXIT_OK


def _cmd_equiv(args) -> int:
    U = _operator(sio.parse_walk_file(args.first))
    V = _operator(sio.parse_walk_file(args.second))
    verdict = decide_equivalence(U, V, args.geometry)
    _out(f"verdict: {verdict.status}\n")
    if verdict.discrepancy is not None:
        d = verdict.discrepancy
        _out(f"discrepancy: site={d.site} parameter={d.parameter} "
             f"first={sio.fmt(d.value)} second={sio.fmt(d.other)}\n")
    if verdict.reason:
        _out(f"reason: {verdict.reason}\n")
    if verdict.equivalent:
        _out(f"witness_residual: {sio.fmt(verdict.witness_residual)}\n")
        if args.witness:
            sio.write_text(args.witness, sio.format_gauge(verdict.witness, full=True))
        return EXIT_OK
    if verdict.status == "incomparable":
        return EXIT_ADMISSIBILITY
    return EXIT_NOT_EQUIVALENT


def _print_certificate(cert: ChiralCertificate | None, label: str) -> None:
    if cert is None:
        _out(f"certificate: none ({label})\n")
        return
    _out(f"certificate: found ({label})\n")
    for k, v in cert.residuals.items():
        _out(f"{k}: {sio.fmt(v)}\n")


def _cmd_chiral(args) -> int:
    obj = _load(args)
    U = _operator(obj)
    rep = check_admissibility(U)
    if isinstance(obj, SSQWParams):
        cert, label = chiral_factorize(obj), "theta = kappa = 0 factorization"
    elif isinstance(obj, SuzukiParams):
        S, C = suzuki_factors(obj)
        cert, label = ChiralCertificate.from_factors(S, C, U), "Suzuki factors"
    elif rep.ok:
        cert, label = chiral_certificate(U, args.geometry), "canonical form with theta = kappa = 0"
    else:
        cert, label = None, "walk not admissible; factorization not attempted"
    if cert is None and args.search:
        cert = chiral_search(U, budget=args.budget, seed=args.seed)
        label = "search" if cert is not None else "search inconclusive"
    elif cert is None:
        label = "sufficient condition not met; inconclusive"
    _print_certificate(cert, label)
    if cert is not None and args.dump_gamma:
        sio.write_text(args.dump_gamma, sio.format_dense(cert.gamma, U.lo))
    if cert is not None and args.dump_coin:
        sio.write_text(args.dump_coin, sio.format_dense(cert.coin, U.lo))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    obj = _load(args)
    psi = sio.parse_state_file(args.state)
    walk = obj if args.auto_grow else _operator(obj)
    if args.auto_grow and not isinstance(obj, SSQWParams):
        raise _Fail(EXIT_IO, "--auto-grow needs a canonical parameter file")
    lo, hi = _operator(obj).window
    if psi.window != (lo, hi):
        if psi.lo < lo or psi.hi > hi:
            raise _Fail(EXIT_IO, f"state window {psi.window} exceeds walk window {(lo, hi)}")
        psi = psi.padded(lo, hi)
    norm0 = psi.norm()
    lines = ["t,mean,second_moment,norm_residual"]
    final = psi
    for t, state in trajectory(walk, psi, args.steps, auto_grow=args.auto_grow,
                               confined=args.confined):
        final = state
        if t == args.steps or (args.every and t % args.every == 0):
            d = distribution(state)
            lines.append(",".join([str(t), sio.fmt(moments(d, 1)), sio.fmt(moments(d, 2)),
                                   sio.fmt(abs(d.total() - norm0**2))]))
    text = sio.format_distribution(distribution(final))
    if args.out:
        sio.write_text(args.out, text)
        _out("\n".join(lines) + "\n")
    else:
        _out(text)
        sys.stderr.write("\n".join(lines) + "\n")
    if args.summary:
        sio.write_text(args.summary, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    U = _operator(_load(args))
    ev = window_spectrum(U)
    rows = ["k,re,im,arg"]
    for k, z in enumerate(ev):
        rows.append(f"{k},{sio.fmt(z.real)},{sio.fmt(z.imag)},{sio.fmt(np.mod(np.angle(z), 2 * np.pi))}")
    _out("\n".join(rows) + "\n")
    return EXIT_OK


def _profile(args) -> Profile:
    return Profile(
        p_zero=tuple(args.p_zero or ()),
        r_zero=tuple(args.r_zero or ()),
        cuts=tuple(args.cut or ()),
        p_zero_rate=args.rate,
        r_zero_rate=args.rate,
        r_one_rate=args.rate / 2,
        cut_rate=args.cut_rate,
    )


def _cmd_random(args) -> int:
    if args.hi < args.lo:
        raise _Fail(EXIT_IO, "--hi must not be below --lo")
    if args.kind == "params":
        text = sio.format_params(random_params(args.seed, args.lo, args.hi, _profile(args),
                                               phases=not args.real))
    elif args.kind == "suzuki":
        text = sio.format_suzuki(random_suzuki(args.seed, args.lo, args.hi, cut_rate=args.cut_rate))
    elif args.kind == "walk":
        text = sio.format_matrix(random_admissible_walk(args.seed, args.lo, args.hi, _profile(args)))
    else:
        if not args.file:
            raise _Fail(EXIT_IO, "'random conjugate' needs an input walk file")
        U = _operator(sio.parse_walk_file(args.file))
        W = random_gauge(args.seed, U.lo, U.hi, diagonal_only=args.diagonal)
        text = sio.format_matrix(apply_gauge(U, W))
        if args.gauge:
            sio.write_text(args.gauge, sio.format_gauge(W, full=True))
    if args.out:
        sio.write_text(args.out, text)
    else:
        _out(text)
    return EXIT_OK


# --------------------------------------------------------------------------- #
# parser
# --------------------------------------------------------------------------- #

class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 3; code 2 is reserved for "not equivalent"."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="ssqw",
        description="Canonical forms, equivalence and chiral symmetry of split-step quantum walks.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    for name in ("check", "report"):
        p = sub.add_parser(name, help="admissibility report")
        _add_walk_input(p)
        p.set_defaults(func=_cmd_check)

    p = sub.add_parser("canonicalize", help="canonical parameters per segment")
    _add_walk_input(p)
    p.add_argument("--geometry", required=True, choices=GEOMETRIES)
    p.add_argument("--origin", type=int, help="reference site for the full-line anchor scan")
    p.add_argument("--out", help="canonical CSV path (default: stdout)")
    p.add_argument("--gauge", help="write the gauge W2 W1 to this CSV")
    p.add_argument("--full-gauge", action="store_true", help="always write 2x2 gauge entries")
    p.set_defaults(func=_cmd_canonicalize)

    p = sub.add_parser("equiv", help="decide unitary equivalence of two walks")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--geometry", required=True, choices=GEOMETRIES)
    p.add_argument("--witness", help="write the witness gauge CSV here when equivalent")
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("chiral", help="chiral symmetry certificate")
    _add_walk_input(p)
    p.add_argument("--geometry", default="finite", choices=GEOMETRIES)
    p.add_argument("--search", action="store_true", help="numerical search if no certificate")
    p.add_argument("--budget", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-gamma", help="write Gamma in the matrix CSV format")
    p.add_argument("--dump-coin", help="write C in the matrix CSV format")
    p.set_defaults(func=_cmd_chiral)

    p = sub.add_parser("simulate", help="time evolution and position distribution")
    _add_walk_input(p)
    p.add_argument("--state", required=True, help="initial state CSV")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--auto-grow", action="store_true", help="extend the window with constant tails")
    p.add_argument("--confined", action="store_true", help="the window is the whole system")
    p.add_argument("--every", type=int, default=0, help="summary line every N steps")
    p.add_argument("--out", help="distribution CSV path (default: stdout)")
    p.add_argument("--summary", help="also write the summary lines to this file")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("spectrum", help="eigenvalues of the window matrix")
    _add_walk_input(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("random", help="random parameters, walks or gauge conjugates")
    p.add_argument("kind", choices=("params", "suzuki", "walk", "conjugate"))
    p.add_argument("file", nargs="?", help="input walk for 'conjugate'")
    p.add_argument("--lo", type=int, default=0)
    p.add_argument("--hi", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-zero", type=int, nargs="*", help="sites with p = 0")
    p.add_argument("--r-zero", type=int, nargs="*", help="sites with r = 0")
    p.add_argument("--cut", type=int, nargs="*", help="interior cut bonds")
    p.add_argument("--rate", type=float, default=0.0, help="rate of random p = 0 / r = 0 sites")
    p.add_argument("--cut-rate", type=float, default=0.0)
    p.add_argument("--real", action="store_true", help="theta = kappa = 0")
    p.add_argument("--diagonal", action="store_true", help="diagonal gauge for 'conjugate'")
    p.add_argument("--gauge", help="write the gauge used by 'conjugate'")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_random)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Fail as e:
        sys.stderr.write(f"error: {e}\n")
        return e.code
    except NotAdmissible as e:
        sys.stderr.write(f"not admissible: {e.report.summary()}\n")
        return EXIT_ADMISSIBILITY
    except InfeasibleProfile as e:
        sys.stderr.write(f"infeasible profile: {e}\n")
        return EXIT_ADMISSIBILITY
    except (ParseError, InvariantViolation, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_IO
    except SSQWError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
