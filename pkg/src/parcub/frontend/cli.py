"""Command-line driver: ``parcub check|normalize|eval``."""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ..conversion import normalize
from ..errors import Diagnostic
from ..interval import B0, B1, BVar, Context, P0, P1, PVar
from ..opsem import DEFAULT_FUEL, Machine
from ..syntax import Def
from .elaborate import Session


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parcub", description="Checker and evaluator for parametric cubical type theory.")
    ap.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="maximum number of reduction steps")
    ap.add_argument("--trace", action="store_true", help="print each reduction step to stderr")
    sub = ap.add_subparsers(dest="cmd", required=True)
    c = sub.add_parser("check", help="type-check definition files")
    c.add_argument("files", nargs="+")
    n = sub.add_parser("normalize", help="print the normal form of a definition")
    n.add_argument("file")
    n.add_argument("--def", dest="name", required=True)
    e = sub.add_parser("eval", help="evaluate a definition with the operational semantics")
    e.add_argument("file")
    e.add_argument("--def", dest="name", required=True)
    e.add_argument("--dims", default="", help="comma-separated dimension arguments, e.g. x,0,#1")
    for p in (c, n, e):
        p.add_argument("--fuel", type=int, default=argparse.SUPPRESS)
        p.add_argument("--trace", action="store_true", default=argparse.SUPPRESS)
    return ap


class UsageError(Exception):
    pass


def _load(path: str, fuel: int):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    session = Session(fuel)
    try:
        results = session.load(text)
    except Diagnostic as e:
        return session, [e]
    return session, [r.error for r in results if r.error is not None]


def _check_file(path: str, fuel: int):
    _, errors = _load(path, fuel)
    return [e.format(path) for e in errors]


def _cmd_check(args) -> int:
    with ThreadPoolExecutor() as pool:
        outputs = list(pool.map(lambda f: _check_file(f, args.fuel), args.files))
    failed = False
    for lines in outputs:
        for line in lines:
            print(line)
            failed = True
    return 1 if failed else 0


def _lookup(args):
    session, errors = _load(args.file, args.fuel)
    for e in errors:
        print(e.format(args.file))
    d = session.defs.get(args.name)
    if d is None:
        raise UsageError(f"no checked definition named {args.name} in {args.file}")
    return session, d, bool(errors)


def _parse_dims(spec: str, params):
    parts = [p.strip() for p in spec.split(",") if p.strip()]
    if len(parts) != len(params):
        raise UsageError(f"definition expects {len(params)} dimension arguments, got {len(parts)}")
    dims, ctx = [], Context()
    for text, (_, sort) in zip(parts, params):
        if text in ("0", "1", "#0", "#1"):
            bit = int(text[-1])
            if sort == "p" and text.startswith("#"):
                raise UsageError(f"{text} is a bridge endpoint but a path dimension is expected")
            dims.append((P0, P1)[bit] if sort == "p" else (B0, B1)[bit])
        else:
            if sort == "p":
                dims.append(PVar(text))
                ctx = ctx.with_path(text)
            else:
                dims.append(BVar(text))
                ctx = ctx.with_bridge(text)
    return tuple(dims), ctx


def _run(args, mode) -> int:
    session, d, had_errors = _lookup(args)
    show = session.printer
    if mode == "normalize":
        dims = tuple(PVar(p) if s == "p" else BVar(p) for p, s in d.params)
        ctx = Context()
        for p, s in d.params:
            ctx = ctx.with_path(p) if s == "p" else ctx.with_bridge(p)
        term = Def(d.name, dims)
        if args.trace and not d.params:
            _trace(session, term, args.fuel)
        print(show(normalize(ctx, term, session.defs, args.fuel)))
        return 1 if had_errors else 0
    dims, _ = _parse_dims(args.dims, d.params)
    term = Def(d.name, dims)
    m = Machine(session.defs, args.fuel, trace=_stderr if args.trace else None)
    print(show(m.eval(term)))
    return 1 if had_errors else 0


def _stderr(line: str):
    print(line, file=sys.stderr)


def _trace(session, term, fuel):
    try:
        Machine(session.defs, fuel, trace=_stderr).eval(term)
    except Diagnostic:
        pass


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        if args.cmd == "check":
            return _cmd_check(args)
        return _run(args, args.cmd)
    except UsageError as e:
        print(f"parcub: {e}", file=sys.stderr)
        return 2
    except Diagnostic as e:
        print(e.format(getattr(args, "file", "<input>")))
        return 1


if __name__ == "__main__":
    sys.exit(main())
