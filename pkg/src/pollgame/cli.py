"""Command-line front end.

Exit codes: 0 success/PASS, 1 FAIL (or not a dynamo), 2 UNDECIDED/cap, 3 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis, dynamics, graph

EXIT_OK, EXIT_FAIL, EXIT_UNDECIDED, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required")


def _cap(args) -> int:
    if args.cap < 1:
        raise UsageError("--cap must be >= 1")
    return args.cap


def cmd_simulate(args) -> int:
    _need(args, "graph", "seed")
    g = graph.read_graph(args.graph)
    seed = graph.read_vertex_set(args.seed)
    t = dynamics.run(g, seed, dynamics.parse_rule(args.rule), _cap(args))
    if args.out:
        _write(args.out, dynamics.dump_trajectory_csv(t))
    print(t.terminal)
    if isinstance(t.terminal, dynamics.AllWhite):
        return EXIT_OK
    return EXIT_FAIL if isinstance(t.terminal, dynamics.Cycle) else EXIT_UNDECIDED


def cmd_construct(args) -> int:
    _need(args, "graph")
    g = graph.read_graph(args.graph)
    if args.kind == "dup":
        _need(args, "dset", "n")
        out = graph.duplicate(g, graph.read_vertex_set(args.dset), args.n)
    elif args.kind == "hat":
        out = graph.hat(g)
    elif args.kind == "tilde":
        out = graph.tilde_edit(g)
    else:
        _need(args, "roles", "levels")
        roles = graph.load_roles(Path(args.roles).read_text(encoding="utf-8"), g)
        result = graph.chain_construct(g, roles, args.levels)
        out = result.graph
        seed_path = args.seed or (f"{args.out}.seed" if args.out and args.out != "-" else None)
        if seed_path is None:
            raise UsageError("chain needs --out or --seed for the seed file")
        _write(seed_path, graph.dump_vertex_set(result.seed))
    _write(args.out, graph.dump_graph(out))
    return EXIT_OK


def _emit_report(args, text: str, csv_text: str | None = None) -> None:
    print(text, end="")
    if args.out and csv_text is not None:
        _write(args.out, csv_text)


def cmd_check(args) -> int:
    if args.kind == "table":
        table = analysis.bundled_table()
        if args.graph is None:
            rep = analysis.table_self_check(table)
            _emit_report(args, rep.format(), rep.to_csv())
            return EXIT_OK if rep.passed else EXIT_FAIL
        conf = analysis.check_table_conformance(graph.read_graph(args.graph), table, cap=_cap(args))
        rows = [f"{m.column},{m.round},{m.n},{m.expected},{m.got}\n" for m in conf.mismatches]
        _emit_report(args, conf.format(), "column,round,n,expected,got\n" + "".join(rows))
        return EXIT_OK if conf.passed else EXIT_FAIL

    _need(args, "graph", "seed")
    g = graph.read_graph(args.graph)
    if args.kind == "bounds":
        rule = dynamics.parse_rule(args.rule)
        if not isinstance(rule, dynamics.Rho):
            raise UsageError("check bounds needs --rule rho:<p>/<q>")
        t = dynamics.run(g, graph.read_vertex_set(args.seed), rule, _cap(args))
        rep = analysis.check_bounds(analysis.potential_trace(t, g), rule, t.terminal)
        _emit_report(args, rep.format() + f"outcome {t.terminal}\n", rep.to_csv())
        if not rep.passed:
            return EXIT_FAIL
        return EXIT_UNDECIDED if not t.decided else EXIT_OK

    seeds = [graph.read_vertex_set(p) for p in args.seed.split(",")]
    rep = analysis.no_tie_certificate(g, seeds, _cap(args))
    _emit_report(args, rep.format())
    return {"PASS": EXIT_OK, "FAIL": EXIT_FAIL, "UNDECIDED": EXIT_UNDECIDED}[rep.status]


def cmd_search(args) -> int:
    _need(args, "graph")
    g = graph.read_graph(args.graph)
    res = analysis.min_dynamo_search(
        g, dynamics.parse_rule(args.rule), args.kmax, cap=_cap(args), workers=args.workers
    )
    if res is None:
        kmax = len(g) if args.kmax is None else args.kmax
        print(f"NONE <= {kmax}")
        return EXIT_FAIL
    print(f"k={res.k} round={res.round} seed={' '.join(res.seed)}")
    if args.out:
        _write(args.out, graph.dump_vertex_set(res.seed))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pollgame", description="Repetitive polling games on finite graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--graph", help="edge-list file")
        sp.add_argument("--seed", help="white-vertex file")
        sp.add_argument("--rule", default="majority:retain", help="majority:retain|white|black or rho:P/Q")
        sp.add_argument("--cap", type=int, default=dynamics.DEFAULT_CAP, help="round cap")
        sp.add_argument("--out", help="output path ('-' for stdout)")

    sp = sub.add_parser("simulate", help="run the dynamics and write a trajectory CSV")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("construct", help="build a duplicated, hat, tilde or chained graph")
    sp.add_argument("kind", choices=["dup", "hat", "tilde", "chain"])
    common(sp)
    sp.add_argument("--n", type=int, help="duplication factor")
    sp.add_argument("--dset", help="vertex-set file of duplicated vertices")
    sp.add_argument("--levels", type=int, help="chain depth (> 5)")
    sp.add_argument("--roles", help="chain role file")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("check", help="table conformance, rho bounds or tie-free certificate")
    sp.add_argument("kind", choices=["table", "bounds", "notie"])
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("search", help="exhaustive minimum-dynamo search")
    common(sp)
    sp.add_argument("--kmax", type=int, help="largest seed size to try")
    sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sp.set_defaults(func=cmd_search)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except dynamics.UndecidedError as exc:
        print(f"UNDECIDED: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except dynamics.DynamicsError as exc:
        where = f" (round {exc.round})" if exc.round is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, graph.GraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
