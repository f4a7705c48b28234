"""Command-line entry point: ``kappa3 <command> ...``.

Exit codes: 0 success, 1 the packer finished without a packing, 2 bad flags
or input, 3 a size cap refused the request, 4 an internal assertion failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import _schemas
from .audit import run_audit
from .edgelist import read_edgelist, write_edgelist
from .errors import CapExceeded, Kappa3Error, OracleTooLarge, PackerFailure
from .graph import EDGE, INTERNAL, Graph
from .lab import PROPERTIES, SweepSpec, estimate_transition, parse_float_list, run_sweep
from .packer import PAPER_ARITY_N, PackerConfig, Transcript, pack
from .random_models import GNM, GNP, ModelSpec, threshold_p
from .selftest import run_selftest
from .steiner import DEFAULT_MAX_N, generalized_connectivity, max_packing

EXIT_OK = 0
EXIT_NO_RESULT = 1
EXIT_FLAGS = 2
EXIT_CAP = 3
EXIT_ASSERT = 4


class FlagError(Exception):
    pass


def _emit(data: dict, schema: str, out: str | None) -> None:
    _schemas.validate(data, schema)
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _model_spec(args: argparse.Namespace) -> ModelSpec:
    if args.model == GNP:
        if args.p is None:
            if args.k is None:
                raise FlagError("gnp needs --p (or --k to use threshold_p(n, k))")
            return ModelSpec(GNP, args.n, threshold_p(args.n, args.k), args.seed)
        return ModelSpec(GNP, args.n, args.p, args.seed)
    if args.m is None:
        raise FlagError("gnm needs --m")
    return ModelSpec(GNM, args.n, args.m, args.seed)


def cmd_sample(args: argparse.Namespace) -> int:
    spec = _model_spec(args)
    g = spec.sample()
    write_edgelist(g, args.out)
    print(json.dumps({**spec.to_json(), "m_sampled": g.m, "out": args.out}, sort_keys=True))
    return EXIT_OK


def _terminals(args: argparse.Namespace, g: Graph) -> tuple[int, int, int]:
    if args.terminals is None or len(args.terminals) != 3:
        raise FlagError("--terminals needs exactly three vertex ids")
    for t in args.terminals:
        g.check_vertex(t)
    return tuple(args.terminals)  # type: ignore[return-value]


def cmd_exact(args: argparse.Namespace) -> int:
    g = read_edgelist(args.graph)
    if args.all:
        try:
            res = generalized_connectivity(g, args.mode, max_n=args.max_n)
        except CapExceeded as exc:
            raise CapExceeded(f"{exc}; pass --max-n {g.n} to run anyway") from None
        data = {"mode": args.mode, **res.to_json()}
        _emit(data, "exact_all.schema.json", args.json)
        return EXIT_OK
    s = _terminals(args, g)
    p = max_packing(g, s, args.mode)
    data = {"mode": args.mode, "terminals": list(s), "value": len(p), "packing": p.to_json()}
    _emit(data, "exact_set.schema.json", args.json)
    return EXIT_OK


def _packer_config(args: argparse.Namespace, g: Graph) -> PackerConfig:
    if g.n < PAPER_ARITY_N:
        missing = [f for f in ("arity", "depth_uv", "depth_w") if getattr(args, f) is None]
        if missing:
            flags = ", ".join("--" + m.replace("_", "-") for m in missing)
            raise FlagError(
                f"the paper's constants degenerate below n = e^101; give {flags} explicitly"
            )
        tau = args.tau if args.tau is not None else math.log(max(g.n, 2)) / 100
        return PackerConfig(args.arity, tau, args.depth_uv, args.depth_w, k=args.k or 1)
    base = PackerConfig.paper_defaults(g.n, args.k or 1)  # pragma: no cover - needs n > e^101
    return base


def cmd_pack(args: argparse.Namespace) -> int:
    g = read_edgelist(args.graph)
    s = _terminals(args, g)
    cfg = _packer_config(args, g)
    tr = Transcript()
    try:
        p = pack(g, s, cfg, transcript=tr)
    except PackerFailure as exc:
        data = {"ok": False, "terminals": list(s), "config": cfg.to_json(), "stage": exc.stage,
                "message": str(exc), "achieved": exc.achieved, "detail": exc.detail}
        _emit(data, "pack_result.schema.json", args.json)
        return EXIT_NO_RESULT
    data = {"ok": True, "terminals": list(s), "config": cfg.to_json(), "size": len(p),
            "packing": p.to_json(), "cases": tr.cases}
    _emit(data, "pack_result.schema.json", args.json)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    props = tuple(x for x in args.properties.split(",") if x)
    packer = None
    if args.arity is not None or args.depth_uv is not None or args.depth_w is not None or args.tau is not None:
        d = PackerConfig.desk_defaults()
        packer = PackerConfig(
            args.arity or d.arity,
            d.tau if args.tau is None else args.tau,
            args.depth_uv or d.depth_uv,
            args.depth_w or d.depth_w,
        )
    spec = SweepSpec(tuple(args.n), args.k or 1, parse_float_list(args.c_list), args.trials, args.seed, props, packer)
    curve = run_sweep(spec, jobs=args.jobs)
    if args.csv:
        Path(args.csv).write_text(curve.to_csv())
    summary = curve.to_json()
    try:
        summary["transitions"] = [t.__dict__ for t in estimate_transition(curve, "connected")]
    except Kappa3Error:
        summary["transitions"] = None
    if args.json or not args.csv:
        _emit(summary, "sweep_summary.schema.json", args.json)
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    spec = _model_spec(args)
    report = run_audit(spec, args.trials, tau=args.tau, alpha=args.alpha, t=args.t, budget=args.budget)
    _emit(report.to_json(), "audit_report.schema.json", args.json)
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    summary = run_selftest(seed=args.seed, size=args.size)
    _emit(summary.to_json(), "selftest.schema.json", args.json)
    return EXIT_OK if summary.passed else EXIT_ASSERT


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse already exits 2; keep the usage line
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="kappa3", description="Generalized 3-connectivity of random graphs.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", choices=(GNP, GNM), default=GNP)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--p", type=float)
        p.add_argument("--m", type=int, help="edge count M for gnm")
        p.add_argument("--k", type=int, help="with gnp and no --p, use p = threshold_p(n, k)")
        p.add_argument("--seed", type=int, required=True)

    def packer_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--arity", type=int)
        p.add_argument("--tau", type=float)
        p.add_argument("--depth-uv", dest="depth_uv", type=int)
        p.add_argument("--depth-w", dest="depth_w", type=int)

    p = sub.add_parser("sample", help="write a seeded random graph as an edge list")
    model_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("exact", help="exact kappa(S)/lambda(S), or kappa3/lambda3 with --all")
    p.add_argument("--graph", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--terminals", type=int, nargs=3)
    g.add_argument("--all", action="store_true")
    p.add_argument("--mode", choices=(INTERNAL, EDGE), default=INTERNAL)
    p.add_argument("--max-n", dest="max_n", type=int, default=DEFAULT_MAX_N,
                   help=f"size cap for --all (default {DEFAULT_MAX_N})")
    p.add_argument("--json")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("pack", help="run the constructive packer")
    p.add_argument("--graph", required=True)
    p.add_argument("--terminals", type=int, nargs=3, required=True)
    packer_flags(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--json")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over c * threshold_p(n, k)")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--c-list", dest="c_list", required=True, help="comma separated multipliers")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--properties", default="connected",
                   help="comma separated subset of " + ",".join(PROPERTIES))
    packer_flags(p)
    p.add_argument("--csv")
    p.add_argument("--json")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("audit", help="empirical Lemma 4/5 and Remark 1/2 statistics")
    model_flags(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--tau", type=float)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--json")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("selftest", help="oracle equivalence, inequality chain and determinism checks")
    p.add_argument("--seed", type=int, default=20240601)
    p.add_argument("--size", type=int, default=60, help="number of oracle cases")
    p.add_argument("--json")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # bad flags or --help; report the code instead of exiting
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CapExceeded, OracleTooLarge) as exc:
        print(f"kappa3: {exc}", file=sys.stderr)
        return EXIT_CAP
    except AssertionError as exc:
        print(f"kappa3: internal assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except (FlagError, Kappa3Error, ValueError, OSError) as exc:
        print(f"kappa3: {exc}", file=sys.stderr)
        return EXIT_FLAGS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
