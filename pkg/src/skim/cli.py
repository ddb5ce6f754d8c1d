"""Command-line front end: ``skim <subcommand> [flags]``.

Exit codes: 0 ok, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import struct
import sys
import time

import numpy as np

from . import __version__
from .confidence import union_bound_curve
from .exact import brute_force_optimum, degree_baseline, exact_greedy, prefix_influences
from .graph import (
    EdgeListError,
    MultiInstanceGraph,
    assign_uniform,
    assign_weighted_cascade,
    is_migr,
    load_edge_list,
    read_instances,
    sample_instances,
    write_instances,
)
from .maximizer import skim_run
from .ranks import build_rank_assignment
from .results import SeedSequence, seed_csv
from .sketches import build_sketches, is_cske, read_sketches, write_sketches

SUBCOMMANDS = ("sample", "sketch", "skim", "greedy", "degree", "query", "eval", "optimum")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _scheme(text: str) -> tuple[str, float | None]:
    if text == "wc":
        return ("wc", None)
    if text.startswith("un:"):
        try:
            p = float(text[3:])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad probability in {text!r}") from None
        if not 0.0 <= p <= 1.0:
            raise argparse.ArgumentTypeError(f"probability {p} outside [0, 1]")
        return ("un", p)
    raise argparse.ArgumentTypeError(f"scheme must be 'wc' or 'un:<p>', got {text!r}")


def _seed_count(text: str) -> int | str:
    if text == "all":
        return "all"
    try:
        s = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--s must be an integer or 'all', got {text!r}") from None
    if s < 0:
        raise argparse.ArgumentTypeError("--s must be non-negative")
    return s


def _node_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad node list {text!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", help="edge list (text) or instance file (MIGR)")
    common.add_argument("--scheme", type=_scheme, default=("wc", None),
                        help="wc (1/in-degree) or un:<p> (constant); default wc")
    common.add_argument("--ell", type=_positive, default=64, help="number of sampled instances")
    common.add_argument("--k", type=_positive, default=64, help="sketch size")
    common.add_argument("--s", type=_seed_count, default=None, help="seed count or 'all'")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--eval", action="store_true", help="add held-out influence of every prefix")
    common.add_argument("--eval-ell", type=_positive, default=512, help="held-out instance count")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", help="output path (default stdout for text output)")
    common.add_argument("--naive-greedy", action="store_true", help="recompute all gains every round")
    common.add_argument("--undirected", action="store_true", help="each input line yields both arcs")
    common.add_argument("--relabel", action="store_true", help="compress sparse input ids to 0..n-1")
    common.add_argument("--timings", action="store_true", help="include wall-clock times in JSON")
    common.add_argument("--nodes", type=_node_list, help="seed nodes for query/eval, e.g. 3,17,42")
    common.add_argument("--sketches", help="CSKE sketch file for query")
    common.add_argument("--ledger", help="write the SKIM error ledger as JSON to this path")

    parser = _Parser(prog="skim", description="Sketch-based influence computation and maximization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    helps = {
        "sample": "sample propagation instances and write a MIGR file",
        "sketch": "build combined reachability sketches and write a CSKE file",
        "skim": "select seeds with SKIM",
        "greedy": "select seeds with exact (lazy) greedy",
        "degree": "select seeds by decreasing out-degree",
        "query": "estimate the influence of --nodes from sketches",
        "eval": "exact influence of every prefix of --nodes",
        "optimum": "exhaustive optimum of size --s",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


# -- inputs --------------------------------------------------------------------

def _base_and_model(args):
    if not args.input:
        raise UsageError("--input is required")
    if not os.path.isfile(args.input):
        raise DataError(f"{args.input}: no such file")
    try:
        base = load_edge_list(args.input, directed=not args.undirected, relabel=args.relabel)
    except EdgeListError as exc:
        raise DataError(f"{args.input}: {exc}") from None
    kind, p = args.scheme
    model = assign_weighted_cascade(base) if kind == "wc" else assign_uniform(base, p)
    return base, model


def _instances(args) -> tuple[MultiInstanceGraph, object]:
    """Training instances and the model they came from (None for MIGR input)."""
    if not args.input:
        raise UsageError("--input is required")
    if is_migr(args.input):
        return read_instances(args.input), None
    _, model = _base_and_model(args)
    return sample_instances(model, args.ell, args.seed), model


def _heldout(args, model, nodes) -> list[float] | None:
    if not args.eval:
        return None
    if model is None:
        raise UsageError("--eval needs an edge-list input so fresh instances can be sampled")
    held = sample_instances(model, args.eval_ell, args.seed, domain="eval")
    return [v.value for v in prefix_influences(held, nodes)]


def _require_s(args, n: int, allow_all: bool = True) -> int:
    if args.s is None:
        raise UsageError("--s is required")
    if args.s == "all":
        if not allow_all:
            raise UsageError("--s all is not accepted here")
        return n
    if args.s > n:
        raise DataError(f"--s {args.s} exceeds the number of nodes ({n})")
    return args.s


def _check_nodes(nodes, n):
    if not nodes:
        raise UsageError("--nodes is required")
    bad = sorted({u for u in nodes if not 0 <= u < n})
    if bad:
        raise DataError(f"unknown node ids: {bad}")


# -- outputs -------------------------------------------------------------------

def _envelope(args, payload: dict, timings: dict) -> str:
    config = {
        "command": args.command, "input": args.input, "scheme": _scheme_text(args.scheme),
        "ell": args.ell, "k": args.k, "s": args.s, "seed": args.seed,
        "eval": args.eval, "eval_ell": args.eval_ell, "naive_greedy": args.naive_greedy,
        "undirected": args.undirected, "relabel": args.relabel, "nodes": args.nodes,
    }
    doc = {
        "config": config,
        "versions": {"artifact": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
    }
    if args.timings:
        doc["timings"] = {k: round(v, 6) for k, v in timings.items()}
    doc.update(payload)
    return json.dumps(doc, indent=2) + "\n"


def _scheme_text(scheme) -> str:
    kind, p = scheme
    return "wc" if kind == "wc" else f"un:{p!r}"


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _seed_rows(seq: SeedSequence, heldout) -> list[dict]:
    rows = []
    cum = seq.cumulative
    for j, (node, gain) in enumerate(zip(seq.nodes, seq.gains)):
        row = {"position": j + 1, "node": node, "marginal": gain / seq.ell,
               "cumulative": cum[j], "marginal_num": gain}
        if heldout is not None:
            row["influence_heldout"] = heldout[j]
        rows.append(row)
    return rows


def _emit_seeds(args, seq, heldout, timings, extra=None):
    if args.format == "csv":
        _emit(args, seed_csv(seq, heldout))
    else:
        payload = {"ell": seq.ell, "seeds": _seed_rows(seq, heldout)}
        payload.update(extra or {})
        _emit(args, _envelope(args, payload, timings))


def _ledger_doc(led) -> dict:
    totals, conf = union_bound_curve(led)
    pts, cdf = led.curve()
    return {
        "epsilons": list(led.epsilons),
        "iterations": [
            {"k_prime": r.k_prime, "tau": r.tau, "gain_num": r.gain, "failure": list(f)}
            for r, f in zip(led.records, led.failures)
        ],
        "curve": [{"discrepancy": float(d), "confidence": float(c)} for d, c in zip(pts, cdf)],
        "union_bound": [{"discrepancy": float(d), "confidence": float(c)}
                        for d, c in zip(totals, conf)],
        "lost": led.lost,
    }


# -- subcommands ---------------------------------------------------------------

def cmd_sample(args):
    if not args.output:
        raise UsageError("sample writes a binary file; --output is required")
    t0 = time.perf_counter()
    _, model = _base_and_model(args)
    g = sample_instances(model, args.ell, args.seed)
    write_instances(args.output, g)
    _log(args, f"sampled {g.ell} instances, {int(g.arc_counts().sum())} arcs", t0)


def cmd_sketch(args):
    if not args.output:
        raise UsageError("sketch writes a binary file; --output is required")
    t0 = time.perf_counter()
    g, _ = _instances(args)
    ss = build_sketches(g, build_rank_assignment(g.n, g.ell, args.k, args.seed), args.k)
    write_sketches(args.output, ss)
    _log(args, f"built {g.n} sketches, k={args.k}", t0)


def cmd_skim(args):
    t0 = time.perf_counter()
    g, model = _instances(args)
    s = _require_s(args, g.n)
    t1 = time.perf_counter()
    seq, led = skim_run(g, args.k, s, seed=args.seed)
    t2 = time.perf_counter()
    heldout = _heldout(args, model, seq.nodes)
    timings = {"load": t1 - t0, "select": t2 - t1, "eval": time.perf_counter() - t2}
    if args.ledger:
        with open(args.ledger, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(_ledger_doc(led), indent=2) + "\n")
    _emit_seeds(args, seq, heldout, timings, {"ledger": _ledger_doc(led)})


def cmd_greedy(args):
    t0 = time.perf_counter()
    g, model = _instances(args)
    s = _require_s(args, g.n)
    t1 = time.perf_counter()
    seq = exact_greedy(g, s, lazy=not args.naive_greedy)
    t2 = time.perf_counter()
    heldout = _heldout(args, model, seq.nodes)
    _emit_seeds(args, seq, heldout, {"load": t1 - t0, "select": t2 - t1,
                                     "eval": time.perf_counter() - t2})


def cmd_degree(args):
    t0 = time.perf_counter()
    g, model = _instances(args)
    s = _require_s(args, g.n)
    t1 = time.perf_counter()
    seq = degree_baseline(g, s)
    t2 = time.perf_counter()
    heldout = _heldout(args, model, seq.nodes)
    _emit_seeds(args, seq, heldout, {"load": t1 - t0, "select": t2 - t1,
                                     "eval": time.perf_counter() - t2})


def cmd_query(args):
    t0 = time.perf_counter()
    if args.sketches:
        if not is_cske(args.sketches):
            raise DataError(f"{args.sketches}: not a CSKE sketch file")
        ss = read_sketches(args.sketches)
    else:
        g, _ = _instances(args)
        ss = build_sketches(g, build_rank_assignment(g.n, g.ell, args.k, args.seed), args.k)
    _check_nodes(args.nodes, ss.n)
    t1 = time.perf_counter()
    est = ss.query(args.nodes)
    t2 = time.perf_counter()
    print(f"query time: {t2 - t1:.6f} s", file=sys.stderr)
    if args.format == "csv":
        _emit(args, f"nodes,estimate\n{' '.join(map(str, args.nodes))},{est!r}\n")
    else:
        _emit(args, _envelope(args, {"n": ss.n, "ell": ss.ell, "k": ss.k, "estimate": est},
                              {"load": t1 - t0, "query": t2 - t1}))


def cmd_eval(args):
    t0 = time.perf_counter()
    g, model = _instances(args)
    _check_nodes(args.nodes, g.n)
    nodes = list(dict.fromkeys(args.nodes))
    seq = SeedSequence(g.ell)
    prev = 0
    for node, val in zip(nodes, prefix_influences(g, nodes)):
        seq.append(node, val.numerator - prev)
        prev = val.numerator
    heldout = _heldout(args, model, nodes)
    _emit_seeds(args, seq, heldout, {"eval": time.perf_counter() - t0})


def cmd_optimum(args):
    t0 = time.perf_counter()
    g, _ = _instances(args)
    s = _require_s(args, g.n, allow_all=False)
    try:
        best, val = brute_force_optimum(g, s)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    elapsed = time.perf_counter() - t0
    if args.format == "csv":
        _emit(args, "nodes,influence,influence_num\n"
                    f"{' '.join(map(str, best))},{val.value!r},{val.numerator}\n")
    else:
        _emit(args, _envelope(args, {"ell": g.ell, "nodes": list(best), "influence": val.value,
                                     "influence_num": val.numerator}, {"search": elapsed}))


def _log(args, message, t0):
    if args.timings:
        message += f" in {time.perf_counter() - t0:.3f} s"
    print(message, file=sys.stderr)


COMMANDS = {
    "sample": cmd_sample, "sketch": cmd_sketch, "skim": cmd_skim, "greedy": cmd_greedy,
    "degree": cmd_degree, "query": cmd_query, "eval": cmd_eval, "optimum": cmd_optimum,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"skim: usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, EdgeListError, struct.error, OSError) as exc:
        print(f"skim: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"skim: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
