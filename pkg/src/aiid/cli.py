"""``aiid`` command-line front end.

Exit codes: 0 success, 1 a check failed, 2 bad arguments or input files,
3 a size guard tripped, 4 the conic solver failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import classical, states, verify, w1
from .conic import SolverError
from .tensor import GuardError, HermitianObservable, load_operator, operator_to_json, trace_norm

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_GUARD, EXIT_SOLVER = 0, 1, 2, 3, 4

log = logging.getLogger("aiid")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-7, help="solver tolerance (default 1e-7)")
    p.add_argument("--out", type=Path, help="write the result here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="aiid", description="Quantum W1 / local-variation toolkit and verification suites.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("w1", parents=[common], help="quantum W1 distance between two operator files")
    p.add_argument("a", type=Path)
    p.add_argument("b", type=Path)
    p.add_argument("--dual", action="store_true", help="also solve the dual and report the gap")

    p = sub.add_parser("lv", parents=[common], help="local variation distance")
    p.add_argument("a", type=Path)
    p.add_argument("b", type=Path)
    p.add_argument("--samples", type=int, help="stratified sampling instead of exact enumeration")

    p = sub.add_parser("tracedist", parents=[common], help="trace distance")
    p.add_argument("a", type=Path)
    p.add_argument("b", type=Path)

    p = sub.add_parser("hamming-w1", parents=[common], help="Hamming-cost transport distance of two distributions")
    p.add_argument("p", type=Path)
    p.add_argument("q", type=Path)

    p = sub.add_parser("make-state", parents=[common], help="build a state and write it as JSON")
    p.add_argument("kind", choices=("iid", "defect", "xi", "paired", "five-qubit", "projector"))
    p.add_argument("--n", type=int)
    p.add_argument("--rho", type=Path, help="single-site state file (iid, defect)")
    p.add_argument("--omega", type=Path, help="defect block state file (defect)")
    p.add_argument("--p", type=str, default="0.5,0.5", help="single-symbol law for paired, comma separated")
    p.add_argument("--psi", type=str, help="reference vector: JSON file or comma-separated reals (projector)")
    p.add_argument("--r", type=int, help="number of defect slots (projector)")
    p.add_argument("--density", action="store_true", help="write xi/paired as diagonal density operators")

    p = sub.add_parser("tail", parents=[common], help="tail functional of an extension")
    p.add_argument("state", type=Path)
    p.add_argument("psi", type=str)
    p.add_argument("--weight", required=True, help="cutoff:R | indicator:R | linear | exp:LAMBDA")
    p.add_argument("--zero-defect-projector", action="store_true",
                   help="use the projector onto psi^n as Pi_0 instead of 0")

    p = sub.add_parser("suite", parents=[common], help="run a verification suite")
    p.add_argument("name", choices=tuple(verify.GROUPS))
    p.add_argument("--config", type=Path, help="JSON file overriding suite sizes")
    p.add_argument("--acceptance", action="store_true", help="use the full acceptance sizes")
    p.add_argument("--timings", action="store_true", help="record wall-clock time per group (not reproducible)")
    return parser


# -- helpers ---------------------------------------------------------------


def _load_psi(arg: str) -> np.ndarray:
    path = Path(arg)
    if path.exists():
        doc = json.loads(path.read_text())
        if isinstance(doc, dict):
            return np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc.get("im", [0.0] * len(doc["re"])))
        return np.asarray(doc, dtype=complex)
    return np.asarray([float(x) for x in arg.split(",")], dtype=complex)


def _emit(doc: dict, args, csv_rows: str | None = None):
    if args.format == "csv":
        if csv_rows is None:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["key", "value"])
            for k, v in _flatten(verify._clean(doc)):
                writer.writerow([k, json.dumps(v) if isinstance(v, (list, dict)) else v])
            csv_rows = buf.getvalue()
        text = csv_rows
    else:
        text = json.dumps(verify._clean(doc), indent=2, sort_keys=True) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _flatten(doc: dict, prefix: str = ""):
    for k in sorted(doc):
        v = doc[k]
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        else:
            yield key, v


# -- commands --------------------------------------------------------------


def _cmd_w1(args) -> int:
    a, b = load_operator(args.a), load_operator(args.b)
    cert = w1.w1_primal(a, b, args.tol)
    doc = {"command": "w1", "value": cert.value, "primal": cert.value, "site_weights": cert.weights,
           "n_sites": a.n_sites, "site_dim": a.site_dim, "tol": args.tol}
    if args.dual:
        wit = w1.w1_dual(a, b, args.tol)
        doc["dual"] = wit.value
        doc["gap"] = abs(cert.value - wit.value) / max(1.0, abs(cert.value))
    _emit(doc, args)
    return EXIT_OK


def _cmd_lv(args) -> int:
    a, b = load_operator(args.a), load_operator(args.b)
    if args.samples:
        est, err = w1.lv_norm_sampled(a, b, args.samples, args.seed)
        doc = {"command": "lv", "value": est, "stderr": err, "samples": args.samples, "seed": args.seed}
    else:
        doc = {"command": "lv", "value": w1.lv_norm(a, b)}
    _emit(doc, args)
    return EXIT_OK


def _cmd_tracedist(args) -> int:
    a, b = load_operator(args.a), load_operator(args.b)
    d = w1.trace_distance(a, b)
    _emit({"command": "tracedist", "value": d, "trace_norm": trace_norm(a.matrix - b.matrix)}, args)
    return EXIT_OK


def _cmd_hamming(args) -> int:
    p, q = classical.load_distribution(args.p), classical.load_distribution(args.q)
    val, coupling = classical.hamming_w1(p, q)
    e1, e2 = coupling.marginal_errors()
    _emit({"command": "hamming-w1", "value": val, "marginal_error": max(e1, e2), "n": p.n, "d": p.d}, args)
    return EXIT_OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise _UsageError(f"make-state {args.kind} needs " + ", ".join("--" + m for m in missing))


def _cmd_make_state(args) -> int:
    kind = args.kind
    if kind == "iid":
        _need(args, "rho", "n")
        doc = operator_to_json(states.iid_state(load_operator(args.rho), args.n), kind="iid")
    elif kind == "defect":
        _need(args, "rho", "omega", "n")
        op = states.defect_state(load_operator(args.rho), load_operator(args.omega), args.n)
        doc = operator_to_json(op, kind="defect")
    elif kind in ("xi", "paired"):
        _need(args, "n")
        if kind == "xi":
            dist = classical.xi_distribution(args.n)
        else:
            dist = classical.paired_source([float(x) for x in args.p.split(",")], args.n)
        if args.density:
            doc = operator_to_json(classical.classical_to_density(dist), kind=kind)
        else:
            doc = {**classical.distribution_to_json(dist), "kind": kind}
    elif kind == "five-qubit":
        doc = operator_to_json(states.five_qubit_code_state(), kind="five-qubit")
    else:
        _need(args, "psi", "n", "r")
        proj = states.v_span_projector(_load_psi(args.psi), args.n, args.r)
        op = HermitianObservable(proj.matrix, proj.site_dim)
        doc = operator_to_json(op, kind="projector", rank=proj.rank, r=proj.r)
    if args.format == "csv":
        raise _UsageError("make-state writes JSON only")
    _emit(doc, args)
    return EXIT_OK


def _cmd_tail(args) -> int:
    state = load_operator(args.state)
    psi = _load_psi(args.psi)
    weight = states.TailWeight.parse(args.weight)
    res = states.tail_functional(state, psi, weight, zero_defect_projector=args.zero_defect_projector)
    _emit({"command": "tail", "weight": args.weight, "value": res.value, "increments": res.increments,
           "f": res.weights}, args)
    return EXIT_OK


def _cmd_suite(args) -> int:
    cfg = verify.SuiteConfig.acceptance(args.seed) if args.acceptance else verify.SuiteConfig(seed=args.seed)
    if args.config:
        overrides = json.loads(args.config.read_text())
        base = {k: v for k, v in vars(cfg).items()}
        base.update(overrides)
        cfg = verify.SuiteConfig.from_dict(base)
    report = verify.run_suite(cfg, args.name, timings=args.timings)
    if args.format == "csv":
        _emit({}, args, csv_rows=report.to_csv())
    else:
        text = report.to_json()
        if args.out:
            args.out.write_text(text)
        else:
            sys.stdout.write(text)
    s = report.summary
    print(f"suite {args.name}: {s['pass']} pass, {s['fail']} fail, {s['skipped']} skipped", file=sys.stderr)
    for c in report.failures():
        print(f"FAIL {c.name}: lhs={c.lhs} rhs={c.rhs}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_CHECK


COMMANDS = {
    "w1": _cmd_w1,
    "lv": _cmd_lv,
    "tracedist": _cmd_tracedist,
    "hamming-w1": _cmd_hamming,
    "make-state": _cmd_make_state,
    "tail": _cmd_tail,
    "suite": _cmd_suite,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"aiid: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.tol <= 0 or not math.isfinite(args.tol):
        print("aiid: error: --tol must be positive", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"aiid: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GuardError as exc:
        print(f"aiid: size guard: {exc}. Reduce the number of sites or use a sampled mode.", file=sys.stderr)
        return EXIT_GUARD
    except SolverError as exc:
        print(f"aiid: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"aiid: error: cannot use input: {exc}", file=sys.stderr)
        return EXIT_PARSE


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
