"""Command-line front end.

Exit codes: 0 success, 1 domain failure (infeasible mission, failed
verification), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from itertools import combinations
from pathlib import Path
from typing import Sequence

from .errors import MissionInfeasible, SchemaError, StapError, TickBudgetExceeded
from .ltl import LTLSyntaxError, build_nfa, parse, propositions
from .models import decomposition_set, letters_of, product, start_letters_of
from .models.ts import compose_ts
from .planning import build_team, project
from .sim import Metrics, Simulation, Trace, bundled, load_scenario, verify_trace
from .sim.batch import run_trials
from .sim.bench import DEFAULT_SIZES, linear_fit, run_bench
from .sim.report import bench_csv, bench_report, table_report

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class _Usage(Exception):
    pass


def _letters_arg(text: str) -> list[frozenset[str]]:
    """``"a,b;c;"`` is the letters {a,b}, {c} and the empty letter."""
    return [frozenset(p for p in part.split(",") if p.strip()) for part in text.split(";")]


def _scenario(path: str):
    p = Path(path)
    if not p.exists():
        candidate = bundled(p.stem)
        if p.parent == Path(".") and candidate.exists():
            p = candidate
        else:
            raise _Usage(f"no such scenario file: {path}")
    sc = load_scenario(p)
    seed = os.environ.get("STAP_SEED")
    if seed is not None:
        try:
            sc = replace(sc, seed=int(seed))
        except ValueError:
            raise _Usage(f"STAP_SEED must be an integer, got {seed!r}") from None
    return sc


def _emit(args, data, text: str) -> None:
    if args.json:
        print(json.dumps(data, sort_keys=True))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- subcommands ---------------------------------------------------------


def cmd_translate(args) -> int:
    f = parse(args.formula)
    if args.letters is not None:
        letters = _letters_arg(args.letters)
    else:
        props = sorted(propositions(f))
        letters = [frozenset(c) for k in range(len(props) + 1) for c in combinations(props, k)]
    nfa = build_nfa(f, letters)
    order = sorted(nfa.letters, key=lambda a: (len(a), sorted(a)))
    states = [{"id": q, "formula": nfa.describe(q), "accepting": nfa.is_accepting(q)} for q in range(len(nfa))]
    edges = [{"from": q, "letter": sorted(a), "to": nfa.step(q, a)} for q in range(len(nfa)) for a in order]
    lines = [f"{len(nfa)} states, initial {nfa.initial}"]
    for s in states:
        lines.append(f"  {s['id']}{' *' if s['accepting'] else '  '} {s['formula']}")
    for e in edges:
        lines.append(f"  {e['from']} --{{{','.join(e['letter'])}}}--> {e['to']}")
    _emit(args, {"initial": nfa.initial, "states": states, "edges": edges}, "\n".join(lines))
    return EXIT_OK


def cmd_plan(args) -> int:
    sc = _scenario(args.scenario)
    tss = [compose_ts(sc.topo, sc.opsms[a.opsm], a.start, a.kind) for a in sc.agents]
    nfa = build_nfa(parse(sc.formula), letters_of(tss))
    D = decomposition_set(nfa, start_letters_of(tss))
    pas = [product(nfa, ts, r) for r, ts in enumerate(tss)]
    try:
        beta = build_team(pas, D).plan()
    except MissionInfeasible as exc:
        _emit(args, {"error": "MissionInfeasible", "detail": str(exc)}, f"MissionInfeasible: {exc}")
        return EXIT_DOMAIN
    plans = project(beta)
    data = {"cost": beta.cost, "plans": [dict(p.to_json(pas[r]), name=sc.agents[r].name) for r, p in enumerate(plans)]}
    lines = [f"total cost {beta.cost:g}"]
    for r, p in enumerate(plans):
        route = " -> ".join(pas[r].ts.names[s] for _, s in p.states) or "(idle)"
        lines.append(f"{sc.agents[r].name}: {route}")
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = _scenario(args.scenario)
    if args.tick_budget is not None:
        sc = replace(sc, tick_budget=args.tick_budget)
    if args.trials:
        results = run_trials(sc, args.trials, per_trial=args.per_trial)
        metrics = [r.metrics for r in results]
        if args.metrics:
            Path(args.metrics).write_text(json.dumps([m.to_json() for m in metrics], sort_keys=True, indent=1) + "\n")
        _emit(args, {"trials": [dict(m.to_json(), verdict=r.verdict) for r, m in zip(results, metrics)]}, table_report(metrics))
        return EXIT_OK
    sim = Simulation(sc, log_ticks=args.log_ticks)
    try:
        trace, metrics = sim.run()
    except TickBudgetExceeded as exc:
        trace, metrics = sim.trace, sim.metrics
        print(f"TickBudgetExceeded: {exc}", file=sys.stderr)
    if args.trace:
        trace.write(args.trace)
    if args.metrics:
        Path(args.metrics).write_text(json.dumps(metrics.to_json(), sort_keys=True, indent=1) + "\n")
    c = metrics.counts
    text = (
        f"{metrics.verdict}: makespan {metrics.makespan} ticks; "
        f"R1 {c['R1']} R2 {c['R2']} R3 {c['R3']} R4 {c['R4']}; "
        f"offline {metrics.offline_time:.3f} s"
    )
    _emit(args, metrics.to_json(), text)
    return EXIT_OK if metrics.success else EXIT_DOMAIN


def cmd_verify(args) -> int:
    if not Path(args.trace).exists():
        raise _Usage(f"no such trace file: {args.trace}")
    try:
        trace = Trace.read(args.trace)
    except (json.JSONDecodeError, KeyError) as exc:
        raise SchemaError("<trace>", f"unreadable trace: {exc}") from None
    ok = verify_trace(trace, parse(args.formula))
    _emit(args, {"satisfied": ok}, "satisfied" if ok else "violated")
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_bench(args) -> int:
    try:
        sizes = [int(x) for x in args.agents.split(",") if x.strip()]
    except ValueError:
        raise _Usage(f"--agents expects comma-separated integers, got {args.agents!r}") from None
    if not sizes or min(sizes) < 1:
        raise _Usage("--agents needs positive team sizes")
    rows, fit = run_bench(_scenario(args.scenario), sizes, args.reps)
    if args.csv:
        Path(args.csv).write_text(bench_csv(rows))
    _emit(args, {"rows": rows, "fit": fit}, bench_report(rows, fit))
    return EXIT_OK


def cmd_report(args) -> int:
    items: list = []
    for path in args.metrics:
        if not Path(path).exists():
            raise _Usage(f"no such file: {path}")
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(path, f"invalid JSON: {exc}") from None
        items.extend(data if isinstance(data, list) else [data])
    if not items:
        raise _Usage("no metrics given")
    if args.mode == "bench":
        rows = [r for item in items for r in (item["rows"] if "rows" in item else [item])]
        fit = linear_fit([r["n"] for r in rows], [r["offline_s"] for r in rows])
        _emit(args, {"rows": rows, "fit": fit}, bench_report(rows, fit))
        return EXIT_OK
    metrics = [Metrics.from_json(m) for m in items]
    _emit(args, {"trials": [m.to_json() for m in metrics]}, table_report(metrics))
    return EXIT_OK


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stap", description="Multi-robot task allocation and planning under finite LTL.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("translate", cmd_translate, "dump the automaton of a formula")
    sp.add_argument("formula")
    sp.add_argument("--letters", help="letters as 'a,b;c;' (default: all subsets of the formula's propositions)")

    sp = add("plan", cmd_plan, "offline allocation for a scenario")
    sp.add_argument("scenario")

    sp = add("simulate", cmd_simulate, "run a scenario")
    sp.add_argument("scenario")
    sp.add_argument("--trace", help="write the JSON Lines trace here")
    sp.add_argument("--metrics", help="write metrics JSON here")
    sp.add_argument("--log-ticks", choices=["changes", "all", "none"], default="changes")
    sp.add_argument("--tick-budget", type=int)
    sp.add_argument("--trials", type=int, default=0, help="randomized disturbance trials instead of the scripted run")
    sp.add_argument("--per-trial", type=int, default=6, help="disturbances drawn per trial")

    sp = add("verify", cmd_verify, "check a trace against a formula")
    sp.add_argument("trace")
    sp.add_argument("formula")

    sp = add("bench", cmd_bench, "planning time against team size")
    sp.add_argument("--agents", default=",".join(map(str, DEFAULT_SIZES)))
    sp.add_argument("--scenario", default="hospital")
    sp.add_argument("--reps", type=int, default=5)
    sp.add_argument("--csv", help="also write rows as CSV")

    sp = add("report", cmd_report, "tabulate metrics files")
    sp.add_argument("metrics", nargs="+")
    sp.add_argument("--mode", choices=["table", "bench"], default="table")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.fn(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, LTLSyntaxError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StapError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
