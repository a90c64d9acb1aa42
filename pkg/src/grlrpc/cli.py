"""Command-line interface: ``grlrpc <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 construction failure or only
infeasible points, 3 decoding failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .errors import ConstructionFailure, ParameterError
from .lrpc import encode as encode_word, extract_message, gen_code, load_code
from .rings import make_ring, make_rng, make_tower
from .submodules import RankProfile, sample_error, sample_module

EXIT_OK, EXIT_USAGE, EXIT_CONSTRUCTION, EXIT_DECODE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def parse_range(text: str) -> list[int]:
    """'1..7', '1,3,5' or '4'."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                a, b = int(lo), int(hi)
                if b < a:
                    raise ValueError
                out.extend(range(a, b + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    if not out or min(out) < 0:
        raise UsageError(f"bad range {text!r}")
    return out


def read_vector(path: str, tower) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        vals = [int(x) for x in line.split()]
        if len(vals) != tower.degree:
            raise UsageError(f"{path}: expected {tower.degree} integers per line, got {len(vals)}")
        if any(not 0 <= v < tower.q for v in vals):
            raise UsageError(f"{path}: coefficients must lie in [0, {tower.q})")
        rows.append(vals)
    return np.array(rows, dtype=np.int64).reshape(-1, tower.degree)


def format_vector(vec: np.ndarray) -> str:
    return "".join(" ".join(str(int(c)) for c in row) + "\n" for row in vec)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _common(p: argparse.ArgumentParser, top: bool = False) -> None:
    # accepted before or after the subcommand; subcommand values win
    default = None if top else argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=default, help="master RNG seed")
    p.add_argument("--out", default=default, help="output file (default stdout)")


def _code_params(p: argparse.ArgumentParser, required: bool) -> None:
    for name in ("p", "r", "s", "m", "n", "k"):
        p.add_argument(f"--{name}", type=int, required=required)
    p.add_argument("--lambda", dest="lam", type=int, required=required)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grlrpc", description="LRPC codes over Galois rings")
    _common(parser, top=True)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen-code", help="draw a random LRPC code and write it as JSON")
    _common(g)
    _code_params(g, required=True)
    g.add_argument("--H", dest="tower_modulus", default=None,
                   help="tower modulus as comma separated integers, lowest degree first")

    e = sub.add_parser("encode", help="encode a message (k lines) into a codeword (n lines)")
    _common(e)
    e.add_argument("--code", required=True)
    e.add_argument("--msg", default=None, help="message file; random message when omitted")
    e.add_argument("--error-rank", type=int, default=0,
                   help="add a random error of this rank (profile t) to the codeword")
    e.add_argument("--error-out", default=None, help="where to write the added error")

    d = sub.add_parser("decode", help="decode a received word")
    _common(d)
    d.add_argument("--code", required=True)
    d.add_argument("--word", required=True)
    d.add_argument("--msg-out", default=None, help="also write the decoded message here")

    b = sub.add_parser("bounds", help="failure-probability bounds as CSV")
    _common(b)
    b.add_argument("--code", default=None, help="take parameters from a code file")
    _code_params(b, required=False)
    b.add_argument("--t", required=True, help="error ranks, e.g. 1..7")

    sm = sub.add_parser("simulate", help="Monte Carlo failure rates as CSV")
    _common(sm)
    sm.add_argument("--code", default=None)
    _code_params(sm, required=False)
    sm.add_argument("--t", default="1..7")
    sm.add_argument("--profiles", default="phi1,phi2,phi3",
                    help="comma separated: phi1, phi2, phi3 or explicit profiles like 1+x")
    sm.add_argument("--min-trials", type=int, default=10_000)
    sm.add_argument("--max-trials", type=int, default=10_000)
    sm.add_argument("--min-failures", type=int, default=50)
    sm.add_argument("--min-dec-failures", type=int, default=1000)
    sm.add_argument("--batch", type=int, default=500)
    sm.add_argument("--workers", type=int, default=1)

    st = sub.add_parser("selftest", help="run the brute-force oracle checks on tiny rings")
    _common(st)
    return parser


_FIG1 = {"p": 2, "r": 2, "s": 1, "m": 21, "n": 20, "k": 8, "lam": 2}


def _params_from(args, allow_default: bool) -> dict:
    if getattr(args, "code", None):
        code = load_code(args.code)
        return dict(code.params, lam=code.lam) | {"code": code}
    vals = {k: getattr(args, k) for k in ("p", "r", "s", "m", "n", "k", "lam")}
    if all(v is None for v in vals.values()) and allow_default:
        return dict(_FIG1)
    missing = [k for k, v in vals.items() if v is None]
    if missing:
        raise UsageError("missing parameters: " + ", ".join("--" + ("lambda" if m == "lam" else m) for m in missing))
    return vals


def cmd_gen_code(args) -> int:
    R = make_ring(args.p, args.r, args.s)
    H = None
    if args.tower_modulus:
        H = [int(x) for x in args.tower_modulus.split(",")]
    S = make_tower(R, args.m, H)
    code = gen_code(S, args.n, args.k, args.lam, make_rng(args.seed))
    _emit(code.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_encode(args) -> int:
    code = load_code(args.code)
    S = code.tower
    rng = make_rng(args.seed)
    if args.msg:
        msg = read_vector(args.msg, S)
        if msg.shape[0] != code.k:
            raise UsageError(f"message must have {code.k} lines")
    else:
        msg = S.random(rng, (code.k,))
    word = encode_word(code, msg)
    if args.error_rank:
        E = sample_module(S, RankProfile.constant(args.error_rank, S.r), rng)
        err = sample_error(E, code.n, rng)
        word = (word + err) % S.q
        if args.error_out:
            Path(args.error_out).write_text(format_vector(err))
    _emit(format_vector(word), args.out)
    return EXIT_OK


def cmd_decode(args) -> int:
    from .decoder import decode

    code = load_code(args.code)
    word = read_vector(args.word, code.tower)
    if word.shape[0] != code.n:
        raise UsageError(f"received word must have {code.n} lines")
    out = decode(code, word)
    if not out.success:
        print(f"decoding failure: {out.reason}", file=sys.stderr)
        return EXIT_DECODE
    _emit(format_vector(out.codeword), args.out)
    if args.msg_out:
        Path(args.msg_out).write_text(format_vector(extract_message(code, out.codeword)))
    print(f"decoded; error support rank {out.support.rank} ({out.support.profile})", file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args) -> int:
    pr = _params_from(args, allow_default=False)
    ts = parse_range(args.t)
    import csv
    import io

    buf = io.StringIO()
    rows = []
    feasible = 0
    for t in ts:
        rep = bnd.total_bound(pr["p"], pr["r"], pr["s"], pr["m"], pr["n"], pr["k"], pr["lam"], t,
                              allow_infeasible=True)
        feasible += rep.feasible
        rows.append(rep.row())
    w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK if feasible else EXIT_CONSTRUCTION


def cmd_simulate(args) -> int:
    from .sim import SimConfig, run

    pr = _params_from(args, allow_default=True)
    code = pr.pop("code", None)
    cfg = SimConfig(
        **pr,
        t_values=parse_range(args.t),
        profiles=[x.strip() for x in args.profiles.split(",") if x.strip()],
        min_trials=args.min_trials,
        max_trials=args.max_trials,
        min_failures=args.min_failures,
        min_dec_failures=args.min_dec_failures,
        batch=args.batch,
        seed=args.seed if args.seed is not None else 0,
        workers=args.workers,
    )

    def progress(pt):
        print(f"t={pt.t} {pt.profile_id}: {pt.trials} trials, dec_fail={pt.dec_fail}, "
              f"{pt.seconds:.1f}s", file=sys.stderr)

    report = run(cfg, code=code, progress=progress)
    _emit(report.to_csv(), args.out)
    return EXIT_OK if any(pt.feasible for pt in report.points) else EXIT_CONSTRUCTION


def cmd_selftest(args) -> int:
    from .selftest import run_all

    ok = run_all(seed=args.seed if args.seed is not None else 0, stream=sys.stdout)
    return EXIT_OK if ok else EXIT_CONSTRUCTION


COMMANDS = {
    "gen-code": cmd_gen_code,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "selftest": cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        resolved = {k: v for k, v in vars(args).items()}
        print("config: " + json.dumps(resolved, sort_keys=True), file=sys.stderr)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionFailure as exc:
        print(f"construction failure: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
