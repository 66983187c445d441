"""``kslocal`` command line: build, propagate, search, localize, check, export.

Exit codes: 0 success, 1 semantic failure, 2 usage or I/O error.
Input paths of the form ``bundled:NAME`` read the packaged data files.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import re
import sys
from pathlib import Path
from typing import Optional

from .checker import CHECK_EPSILON, check_certificate, load_certificate_json
from .datasets import bundled_payload
from .diagram import Diagram, build_diagram, export_dot, load_vectors
from .engine import DeductionStep, assignment_from_trace, propagate, search_total_admissible
from .errors import DegenerateOverlap, KSError, MalformedInput, UnknownObservable, ZeroVector
from .linalg import Vector
from .localizer import localize
from .scalars import EPSILON, parse_scalar

log = logging.getLogger("kslocal")


class UsageError(Exception):
    """Bad arguments or unreadable input; exit code 2."""


def _stamp(payload: dict, args) -> dict:
    if not args.no_timestamp:
        payload = {"generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"), **payload}
    return payload


def _read_json(path: str):
    if path.startswith("bundled:"):
        try:
            return bundled_payload(path.split(":", 1)[1])
        except FileNotFoundError as exc:
            raise UsageError(str(exc)) from None
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    if not text.strip():
        raise UsageError(f"{path} is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def _epsilon(args) -> float:
    return EPSILON if args.epsilon is None else args.epsilon


def _vectors_to_diagram(data, args) -> Diagram:
    vectors, labels = load_vectors(data)
    if args.mode == "float":
        vectors = [v.to_float() for v in vectors]
    elif args.mode == "exact" and not all(v.exact for v in vectors):
        raise UsageError("--mode exact given but the input contains decimal coordinates")
    return build_diagram(vectors, labels, _epsilon(args))


def _load_diagram(path: str, args) -> Diagram:
    """A diagram file is used as stored; a plain vectors file is built first."""
    data = _read_json(path)
    if isinstance(data, dict) and "contexts" in data and "observables" in data:
        return Diagram.from_json(data)
    return _vectors_to_diagram(data, args)


def _parse_vector(text: str) -> Vector:
    body = text.strip().strip("[]()")
    parts = [t for t in re.split(r"[,\s]+", body) if t]
    if len(parts) != 3:
        raise UsageError(f"expected three coordinates, got {text!r}")
    try:
        return Vector(tuple(parse_scalar(t) for t in parts))
    except (MalformedInput, ValueError) as exc:
        raise UsageError(f"bad coordinate in {text!r}: {exc}") from None


def _parse_sets(items) -> dict:
    seed = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or val.strip() not in ("0", "1"):
            raise UsageError(f"--set expects KEY=0 or KEY=1, got {item!r}")
        # resolved later: a label first ("16" or "P_16"), then a numeric id
        seed[key.strip()] = int(val)
    return seed


def _name(d: Diagram, oid: int) -> str:
    lab = d.label(oid)
    return f"{oid} ({lab})" if lab else str(oid)


# -- subcommands ------------------------------------------------------------


def cmd_build(args) -> int:
    d = _vectors_to_diagram(_read_json(args.vectors), args)
    n_ctx = len(d.contexts)
    print(f"{len(d)} observables, {n_ctx} context{'s' if n_ctx != 1 else ''}")
    for msg in d.diagnostics:
        print(f"note: {msg}", file=sys.stderr)
    if args.out:
        _write_json(Path(args.out), _stamp(d.to_json(), args))
    return 0


def cmd_propagate(args) -> int:
    d = _load_diagram(args.diagram, args)
    seed = _parse_sets(args.set)
    if not seed:
        raise UsageError("propagate needs at least one --set")
    res = propagate(d, seed)
    ones = sorted(k for k, v in res.assignment.items() if v == 1)
    if res.is_contradiction:
        print(f"CONTRADICTION at observable {_name(d, res.conflict.observable)}")
    else:
        print("FIXPOINT")
    print(f"defined {len(res.assignment)} of {len(d)}; value 1 on: {', '.join(_name(d, i) for i in ones)}")
    if args.out:
        payload = {
            "seed": {str(d.resolve(k)): v for k, v in seed.items()},
            "outcome": res.kind,
            "assignment": {str(k): v for k, v in sorted(res.assignment.items())},
            "trace": [s.to_json() for s in res.trace],
            "conflict": res.conflict.to_json() if res.conflict else None,
        }
        _write_json(Path(args.out), _stamp(payload, args))
    if args.expect and args.expect != res.kind:
        print(f"expected {args.expect}, got {res.kind}", file=sys.stderr)
        return 1
    return 0


def cmd_search(args) -> int:
    if args.cap < 0:
        raise UsageError("--cap must be non-negative")
    d = _load_diagram(args.diagram, args)
    found = search_total_admissible(d, cap=args.cap + 1)
    capped = len(found) > args.cap
    if capped:
        found = found[: args.cap]
        print(f"≥{args.cap} (capped)")
    else:
        print(f"{len(found)} total admissible assignment{'s' if len(found) != 1 else ''}")
    for a in found:
        print("  value 1 on: " + ", ".join(_name(d, i) for i, v in a.items() if v == 1))
    if args.out:
        payload = {"count": len(found), "capped": capped,
                   "assignments": [{str(k): v for k, v in a.items()} for a in found]}
        _write_json(Path(args.out), _stamp(payload, args))
    return 0


def cmd_localize(args) -> int:
    if args.mode == "exact":
        raise UsageError("localize needs radicals outside Q(sqrt2); use --mode float")
    psi, phi = _parse_vector(args.psi), _parse_vector(args.phi)
    if psi.is_zero() or phi.is_zero():
        raise UsageError("psi and phi must be nonzero")
    try:
        d, cert = localize(psi.to_float(), phi.to_float(), _epsilon(args))
    except DegenerateOverlap as exc:
        print(f"DEFINITE: {exc}")
        return 0
    out = Path(args.out or ".")
    _write_json(out / "diagram.json", _stamp(d.to_json(), args))
    _write_json(out / "certificate.json", _stamp(cert.to_json(), args))
    print(f"path: {cert.paths['branch1']}")
    print(f"branch 0 path: {cert.paths['branch0']}")
    print(f"overlap {cert.overlap:.12g}; {len(d)} observables, {len(d.contexts)} contexts")
    for b in cert.branches:
        print(f"  phi={b.assumption[1]}: contradiction at observable {b.contradiction.observable} "
              f"after {len(b.trace)} steps")
    print(f"wrote {out / 'diagram.json'} and {out / 'certificate.json'}")
    return 0


def cmd_check(args) -> int:
    d = Diagram.from_json(_read_json(args.diagram))
    cert = load_certificate_json(_read_json(args.certificate))
    eps = CHECK_EPSILON if args.epsilon is None else args.epsilon
    verdict = check_certificate(d, cert, eps)
    for w in verdict.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.out:
        _write_json(Path(args.out), _stamp(verdict.to_json(), args))
    if verdict.ok:
        print("OK: both branches replay to a contradiction")
        return 0
    print(f"FAILED ({len(verdict.failures)} problem{'s' if len(verdict.failures) != 1 else ''})")
    for stage, detail in verdict.failures:
        print(f"  [{stage}] {detail}")
    return 1


def _assignment_file(path: str, d: Diagram) -> dict:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise UsageError("assignment file must be a JSON object")
    if "trace" in data:
        values = assignment_from_trace(DeductionStep.from_json(s) for s in data["trace"])
    elif "assignment" in data:
        values = {d.resolve(k): int(v) for k, v in data["assignment"].items()}
    else:
        values = {d.resolve(k): int(v) for k, v in data.items()}
    if any(v not in (0, 1) for v in values.values()):
        raise UsageError("assignment values must be 0 or 1")
    return values


def cmd_export(args) -> int:
    d = _load_diagram(args.diagram, args)
    assignment = _assignment_file(args.assignment, d) if args.assignment else None
    text = export_dot(d, assignment)
    if not args.no_timestamp:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        text = f"// generated_at {stamp}\n" + text
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


# -- argument parsing -------------------------------------------------------


def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("exact", "float"), default=argparse.SUPPRESS,
                        help="numeric backend (default: exact for exact input, float for gadgets)")
    common.add_argument("--epsilon", type=_positive, default=argparse.SUPPRESS,
                        help=f"float tolerance (default {EPSILON:g}; check defaults to {CHECK_EPSILON:g})")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file, or directory for localize")
    common.add_argument("--no-timestamp", action="store_true", default=argparse.SUPPRESS,
                        help="omit the generated_at field so outputs are byte-identical")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="kslocal", parents=[common],
                                description="Localised value indefiniteness with checkable certificates.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build", parents=[common], help="build a diagram from a vectors file")
    s.add_argument("vectors")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("propagate", parents=[common], help="close a seed under the admissibility rules")
    s.add_argument("diagram")
    s.add_argument("--set", action="append", metavar="KEY=VAL", help="seed value; KEY is an id or label")
    s.add_argument("--expect", choices=("fixpoint", "contradiction"))
    s.set_defaults(func=cmd_propagate)

    s = sub.add_parser("search", parents=[common], help="enumerate total admissible assignments")
    s.add_argument("diagram")
    s.add_argument("--cap", type=int, default=16)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("localize", parents=[common], help="diagram and certificate for a (psi, phi) pair")
    s.add_argument("--psi", required=True, help='three coordinates, e.g. "1,0,0" or "1,sqrt2,1"')
    s.add_argument("--phi", required=True)
    s.set_defaults(func=cmd_localize)

    s = sub.add_parser("check", parents=[common], help="verify a certificate against its diagram")
    s.add_argument("diagram")
    s.add_argument("certificate")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("export", parents=[common], help="Graphviz DOT rendering")
    s.add_argument("diagram")
    s.add_argument("--format", choices=("dot",), default="dot")
    s.add_argument("--assignment", help="propagate trace file or {id: value} map")
    s.set_defaults(func=cmd_export)
    return p


_DEFAULTS = {"mode": None, "epsilon": None, "out": None, "no_timestamp": False, "verbose": 0}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, val in _DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, val)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnknownObservable as exc:
        print(f"error: unknown observable {exc.args[0]!r}", file=sys.stderr)
        return 2
    except (MalformedInput, ZeroVector) as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return 2
    except KSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
