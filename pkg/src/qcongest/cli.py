"""Experiment runner: ``qcongest run <app> --graph FILE [--inputs FILE] ...``.

Prints a JSON report on stdout and a one-line summary on stderr. Exit codes:
0 all invariants held, 2 bad graph or input file, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import apps
from .congest import Network, load_graph
from .errors import InvariantViolation, ParseError, QCongestError
from .pqalg import Verdict

EXIT_PARSE = 2
EXIT_INVARIANT = 3


def _jsonable(r):
    if isinstance(r, apps.Cycle):
        return {"length": r.length, "cycle": list(r.nodes)}
    if isinstance(r, Verdict):
        return r.value
    if isinstance(r, (tuple, list)):
        return [_jsonable(a) for a in r]
    if isinstance(r, (np.integer,)):
        return int(r)
    if isinstance(r, (float, np.floating)):
        return round(float(r), 12)
    return r


def _argmax_set(x: dict) -> set:
    sums = apps.brute_oracle_sums(x)
    return {i for i, s in enumerate(sums) if s == max(sums)}


def _app_table(args, net: Network, x) -> tuple:
    """(runner(rng) -> (result, AppRun), correct(result) -> bool) for the chosen app."""
    brute = apps.brute_oracle(net)
    p, reps = args.p, args.repetitions
    a = args.app
    if a in ("diameter", "radius"):
        mode = "max" if a == "diameter" else "min"
        want = brute["diameter" if a == "diameter" else "radius"]
        return (lambda g: apps.diameter_radius(net, mode, g, p, reps)), (lambda r: r == want)
    if a == "avg-ecc":
        want = brute["avgEccentricity"]
        return ((lambda g: apps.avg_eccentricity(net, args.eps, g, p, reps)),
                (lambda r: abs(r - want) <= args.eps))
    if a in ("cycle", "cycle-clustered"):
        fn = apps.find_short_cycle if a == "cycle" else apps.find_short_cycle_clustered
        girth = brute["girth"]
        want = girth if girth <= args.k else None

        def ok(r):
            if want is None:
                return r == Verdict.NOT_FOUND
            return isinstance(r, apps.Cycle) and r.length == want
        return (lambda g: fn(net, args.k, g, args.beta, reps)), ok
    if a == "girth":
        want = brute["girth"]
        return ((lambda g: apps.girth(net, args.mu, g, args.beta, reps)),
                (lambda r: r == (Verdict.ACYCLIC if math.isinf(want) else want)))
    if x is None:
        raise ParseError(f"app {a!r} needs --inputs")
    apps.attach_inputs(net, x)
    if a == "meeting":
        best = _argmax_set(x)
        return (lambda g: apps.meeting_schedule(net, x, g, p, reps)), (lambda r: r in best)
    if a == "ed":
        sums = apps.brute_oracle_sums(x)
        pairs = apps.collisions(sums)
        return ((lambda g: apps.ed_vector(net, x, g, p, reps)),
                (lambda r: (tuple(r) in pairs) if pairs else r == Verdict.NO_COLLISION))
    if a == "ed-nodes":
        if any(len(row) != 1 for row in x.values()):
            raise ParseError("ed-nodes expects one integer per node")
        vals = {v: row[0] for v, row in x.items()}
        groups = {}
        for v in net.nodes:
            groups.setdefault(vals[v], []).append(v)
        distinct = all(len(g) == 1 for g in groups.values())

        def ok(r):
            if distinct:
                return r == Verdict.ALL_DISTINCT
            return isinstance(r, tuple) and r[0] != r[1] and vals[r[0]] == vals[r[1]]
        return (lambda g: apps.ed_nodes(net, vals, g, p, args.debug, reps)), ok
    if a == "dj":
        k = len(next(iter(x.values())))
        tot = [0] * k
        for v in net.nodes:
            tot = [s ^ (b & 1) for s, b in zip(tot, x[v])]
        want = Verdict.CONSTANT if sum(tot) in (0, k) else Verdict.BALANCED
        return (lambda g: apps.distributed_dj(net, x, g, args.debug)), (lambda r: r == want)
    raise ParseError(f"unknown app {a!r}")


APPS = ("diameter", "radius", "avg-ecc", "meeting", "ed", "ed-nodes", "dj", "cycle",
        "cycle-clustered", "girth")
NEEDS_INPUTS = {"meeting": "bits", "ed": "ints", "ed-nodes": "ints", "dj": "bits"}


def _first_excess(run: apps.AppRun) -> str:
    i = int(math.floor(run.bound))
    label = run.ledger.rounds[i].label if i < len(run.ledger) else "?"
    return f"round {i} ({label})"


def run_trials(args, net: Network, x) -> dict:
    runner, correct = _app_table(args, net, x)
    seeds = np.random.SeedSequence(args.seed).spawn(args.trials)
    verdicts, used, bound, wins = [], 0, 0.0, 0
    k = p = None
    for t, ss in enumerate(seeds):
        res, run = runner(np.random.default_rng(ss))
        if run.rounds > run.bound:
            raise InvariantViolation(
                f"trial {t}: {run.rounds} rounds > bound {run.bound}; first excess at {_first_excess(run)}")
        run.ledger.audit()
        used, bound = max(used, run.rounds), max(bound, run.bound)
        k, p = run.k, run.p
        ok = bool(correct(res))
        wins += ok
        verdicts.append(_jsonable(res))
    return {
        "app": args.app,
        "n": net.n,
        "m": net.m,
        "D": net.D,
        "k": k,
        "p": p,
        "roundsUsed": used,
        "roundsBound": _jsonable(bound),
        "successRate": wins / args.trials,
        "trials": args.trials,
        "seed": args.seed,
        "verdicts": verdicts,
    }


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcongest", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an application for a number of seeded trials")
    r.add_argument("app", choices=APPS)
    r.add_argument("--graph", required=True, help="edge-list graph file")
    r.add_argument("--inputs", help="per-node input sidecar file")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trials", type=int, default=200)
    r.add_argument("--p", type=int, default=None, help="parallelism (default D)")
    r.add_argument("--json-out", help="also write the report to this file")
    r.add_argument("--debug", action="store_true", help="enable promise and oracle checks")
    r.add_argument("--k", type=int, default=6, help="cycle length bound")
    r.add_argument("--mu", type=float, default=1.0, help="girth search growth rate")
    r.add_argument("--eps", type=float, default=0.5, help="additive error for avg-ecc")
    r.add_argument("--beta", type=float, default=None, help="heaviness exponent override")
    r.add_argument("--repetitions", type=int, default=1, help="independent runs combined per trial")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.trials < 1:
        print("error: --trials must be positive", file=sys.stderr)
        return EXIT_PARSE
    try:
        net = load_graph(args.graph)
        x = apps.load_inputs(args.inputs, NEEDS_INPUTS.get(args.app, "auto")) if args.inputs else None
    except (QCongestError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        report = run_trials(args, net, x)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantViolation as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except QCongestError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    text = json.dumps(report, sort_keys=True)
    print(text)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text + "\n")
    print(f"{report['app']}: n={report['n']} D={report['D']} rounds {report['roundsUsed']}"
          f" <= {report['roundsBound']}, success {report['successRate']:.3f}"
          f" over {report['trials']} trials", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
