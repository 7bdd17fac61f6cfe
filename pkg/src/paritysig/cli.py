"""Command-line entry point.

Exit codes: 0 success, 1 domain error or failed check, 2 usage, parse or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import List, Optional

from . import automaton as aut
from . import compare, fixtures, reduction, signatures
from .games import induced_game, solve_progress_measures, solve_zielonka
from .trees import (ANGP, ParseError, Player, RegularTree, TreeError, isomorphic,
                    parse_tree_spec, shave, to_dot, to_text)


class UsageError(Exception):
    pass


def _load(path: str) -> RegularTree:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    try:
        return parse_tree_spec(text)
    except ParseError as exc:
        raise UsageError(f"{path}:{exc.line}:{exc.col}: {exc.msg}") from exc


def _write(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc


def _sig_json(s):
    return "infinity" if s is signatures.INF else list(s)


class Out:
    def __init__(self, args):
        self.json = args.json
        self.quiet = args.quiet

    def emit(self, text: str, data: dict):
        if self.json:
            print(json.dumps(data, sort_keys=True))
        elif not self.quiet:
            print(text)


# ---------------------------------------------------------------------------
# commands

def cmd_solve(args, out: Out) -> int:
    t = _load(args.file)
    game = induced_game(shave(t) if t.alphabet == ANGP else t)
    sol = solve_progress_measures(game) if args.solver == "pm" else solve_zielonka(game)
    w = sol.winner[game.initial]
    rows = []
    for pos in sorted(game.edges, key=str):
        owner = game.owner[pos]
        move = sol.strategy[owner].move.get(pos) if sol.winner[pos] is owner and len(game.edges[pos]) > 1 else None
        rows.append({"node": pos[0], "bit": pos[1], "owner": int(owner), "priority": game.priority[pos],
                     "winner": int(sol.winner[pos]),
                     "move": None if move is None else {"node": move[0], "bit": move[1]}})
    lines = [f"winner: {int(w)}", "node       bit  prio  owner  winner  move"]
    for r in rows:
        mv = "-" if r["move"] is None else f"{r['move']['node']}/{r['move']['bit']}"
        lines.append(f"{r['node']:<10} {r['bit']:>3}  {r['priority']:>4}  {r['owner']:>5}  {r['winner']:>6}  {mv}")
    out.emit("\n".join(lines), {"winner": int(w), "solver": args.solver, "positions": rows})
    return 0


def cmd_sig(args, out: Out) -> int:
    t = _load(args.file)
    p = Player(args.player)
    s = signatures.signature(t, p, args.node)
    data = {"losing_indices": signatures.Indexing(t.i, t.k, p).losing, "signature": _sig_json(s)}
    text = f"sigma_{int(p)} = {signatures.sig_str(s)}"
    if args.oracle:
        o = signatures.oracle_signature(t.rooted_at(args.node) if args.node else t, p)
        data["oracle"] = _sig_json(o)
        text += f"\noracle  = {signatures.sig_str(o)}"
        if o != s:
            out.emit(text, data)
            return 1
    if args.all:
        table = signatures.compute_signatures(t)
        data["nodes"] = {v: _sig_json(table.at(p, v)) for v in sorted(t.labels)}
        text += "\n" + "\n".join(f"  {v}: {signatures.sig_str(table.at(p, v))}" for v in sorted(t.labels))
    out.emit(text, data)
    return 0


def cmd_compare(args, out: Out) -> int:
    p, s = _load(args.left), _load(args.right)
    player = Player(args.player)
    cg = compare.build_compare_game(p, s, player, args.ell)
    w = cg.winner()
    holds = cg.ctx.holds11(cg.initial)
    name = "EXISTS" if w is compare.EXISTS else "FORALL"
    sigs = {}
    for side, tree in (("left", p), ("right", s)):
        try:
            sigs[side] = signatures.signature(tree, player)
        except TreeError:
            sigs[side] = None
    if args.emit_tree or args.dot:
        c = compare.unravel_cp(p, s, player, args.ell)
        if args.emit_tree:
            _write(args.emit_tree, to_text(c))
        if args.dot:
            _write(args.dot, to_dot(c, "cp"))
    shown = {k: "n/a" if v is None else signatures.sig_str(v) for k, v in sigs.items()}
    out.emit(f"winner: {name}\nsigma_{int(player)}(left) = {shown['left']}\n"
             f"sigma_{int(player)}(right) = {shown['right']}\n"
             f"signature order holds: {holds}\npositions: {len(cg.game.edges)}",
             {"winner": name, "signature_order": holds, "positions": len(cg.game.edges),
              "left": None if sigs["left"] is None else _sig_json(sigs["left"]),
              "right": None if sigs["right"] is None else _sig_json(sigs["right"])})
    return 0 if (w is compare.EXISTS) == holds else 1


def cmd_cpgame(args, out: Out) -> int:
    p, s = _load(args.left), _load(args.right)
    c = compare.unravel_cp(p, s, Player(args.player), args.ell)
    if args.emit:
        _write(args.emit, to_text(c))
    if args.dot:
        _write(args.dot, to_dot(c, "cp"))
    w = induced_game(c)
    winner = solve_zielonka(w).winner[w.initial]
    out.emit(f"nodes: {len(c.labels)}\nwinner: {int(winner)}", {"nodes": len(c.labels), "winner": int(winner)})
    if not args.emit and not args.dot and not args.json and not args.quiet:
        print(to_text(c), end="")
    return 0


def cmd_automaton(args, out: Out) -> int:
    r = _load(args.file)
    if r.alphabet != ANGP:
        raise TreeError("the automaton reads trees over angp")
    u = aut.build_U(r.i, r.k)
    if args.action == "member":
        p = Player(args.player)
        m = aut.member_L(r, p, u)
        out.emit(f"member of L_{int(p)}: {m}", {"member": m, "player": int(p)})
        return 0
    if args.action == "ambiguity":
        witness = aut.ambiguity_witness(r, u)
        out.emit("unambiguous" if witness is None else f"ambiguous: {witness}",
                 {"unambiguous": witness is None, "witness": witness})
        return 0 if witness is None else 1
    run = aut.canonical_run(r, u)
    accepted = aut.check_run_accepting(r, run)
    if args.dot:
        _write(args.dot, aut.run_to_dot(run))
    rows = {f"{v}@{'root' if inc is None else f'{inc[0]}.{inc[1]}'}": str(st)
            for (v, inc), st in sorted(run.states().items(), key=lambda x: str(x[0]))}
    out.emit("\n".join(f"{k}: {v}" for k, v in rows.items()) + f"\naccepting: {accepted}",
             {"states": rows, "accepting": accepted})
    return 0 if accepted else 1


def cmd_reduce(args, out: Out) -> int:
    t = _load(args.file)
    if t.alphabet == ANGP:
        raise TreeError("reduce expects a tree over alp or ang")
    fp = reduction.f_prefix(t, args.depth, args.nesting)
    data = {"handles": len(fp.handles), "comparison_trees": len(fp.red.cp),
            "root_declared": int(fp.red.declared(fp.red.lazy.root))}
    text = (f"handles within depth {args.depth}: {len(fp.handles)}\n"
            f"comparison trees materialized: {len(fp.red.cp)}\n"
            f"root declared winner: {data['root_declared']}")
    code = 0
    if args.check_run:
        run = reduction.canonical_run_prefix(t, args.depth, prefix=fp)
        bad = reduction.run_prefix_violations(run)
        data["violations"] = bad
        text += f"\nrun violations: {len(bad)}" + "".join(f"\n  {b}" for b in bad[:10])
        code = 1 if bad else 0
    if args.emit:
        closure = reduction.regular_closure(t, args.nesting, fp.red)
        emitted = to_text(closure)
        if not isomorphic(parse_tree_spec(emitted), closure):
            raise AssertionError("emitted tree does not re-parse to the same graph")
        _write(args.emit, emitted)
        data["emitted_nodes"] = len(closure.labels)
    out.emit(text, data)
    return code


def cmd_dot(args, out: Out) -> int:
    t = _load(args.file)
    text = to_dot(t)
    if args.output:
        _write(args.output, text)
    elif not args.json:
        print(text, end="")
    if args.json:
        print(json.dumps({"dot": text}))
    return 0


def cmd_fixtures(args, out: Out) -> int:
    os.makedirs(args.out, exist_ok=True)
    names = []
    for name, text in fixtures.fixture_sources().items():
        _write(os.path.join(args.out, name), text)
        names.append(name)
    out.emit("\n".join(os.path.join(args.out, n) for n in names), {"written": names})
    return 0


def _check_battery(seed: int, count: int):
    rng = random.Random(seed)
    rows = []

    def row(name, cases, failures):
        rows.append((name, cases, failures))

    fx = [t for t in fixtures.all_fixture_trees().values()]
    rand = [fixtures.random_tree(rng, 6, *rng.choice(fixtures.INDEX_PAIRS)) for _ in range(count)]

    bad = sum(1 for t in fx + rand if signatures.verify_invariants(t))
    row("signature invariants", len(fx) + len(rand), bad)

    small = [fixtures.random_tree(rng, 5, *rng.choice(fixtures.INDEX_PAIRS)) for _ in range(count)]
    bad = sum(1 for t in small
              for p in Player if signatures.signature(t, p) != signatures.oracle_signature(t, p))
    row("signature oracle", 2 * len(small), bad)

    pairs = [(fixtures.fig7_t0(), fixtures.fig7_pri3_t0()), (fixtures.fig7_pri3_t0(), fixtures.fig7_t0())]
    for _ in range(count):
        i, k = rng.choice(fixtures.INDEX_PAIRS)
        pairs.append((fixtures.random_tree(rng, 5, i, k), fixtures.random_tree(rng, 5, i, k)))
    bad = sum(1 for a, b in pairs for p in Player if not compare.check_claim61(a, b, None, p))
    row("comparison game vs signatures", 2 * len(pairs), bad)

    angp = [fixtures.random_tree(rng, 6, *rng.choice(fixtures.INDEX_PAIRS), alphabet=ANGP, well_formed=None)
            for _ in range(count)]
    bad = sum(1 for r in angp if not aut.check_unambiguous(r))
    row("U unambiguous", len(angp), bad)

    gadget = parse_tree_spec("alphabet angp i=0 k=2\nlet a = p1x(b, b, b);\nlet b = pri0(b);\nroot a;\n")
    row("mutant U detected ambiguous", 1, int(aut.check_unambiguous(gadget, aut.mutant_U(0, 2))))

    trees = [fixtures.fig7()] + [fixtures.random_tree(rng, 5, *rng.choice(fixtures.INDEX_PAIRS))
                                 for _ in range(max(1, count // 4))]
    bad = 0
    for t in trees:
        run = reduction.canonical_run_prefix(t, 30, nesting=1)
        bad += bool(reduction.run_prefix_violations(run))
    row("reduction run prefix (depth 30)", len(trees), bad)
    return rows


def cmd_check(args, out: Out) -> int:
    rows = _check_battery(args.seed, args.count)
    failed = sum(1 for _, _, f in rows if f)
    width = max(len(r[0]) for r in rows)
    lines = [f"{'check'.ljust(width)}  cases  failures  status"]
    for name, cases, f in rows:
        lines.append(f"{name.ljust(width)}  {cases:5d}  {f:8d}  {'PASS' if not f else 'FAIL'}")
    out.emit("\n".join(lines), {"seed": args.seed, "checks": [
        {"name": n, "cases": c, "failures": f} for n, c, f in rows]})
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# parser

def _player(text: str) -> int:
    if text not in ("1", "2"):
        raise argparse.ArgumentTypeError("player must be 1 or 2")
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="suppress normal output")

    parser = argparse.ArgumentParser(prog="paritysig", parents=[common],
                                     description="Signatures, comparison games and the automaton U on regular trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve the game of a tree")
    s.add_argument("file")
    s.add_argument("--solver", choices=("zielonka", "pm"), default="zielonka")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sig", parents=[common], help="signature of a tree")
    s.add_argument("file")
    s.add_argument("--player", type=_player, default=1)
    s.add_argument("--node")
    s.add_argument("--oracle", action="store_true", help="also run the brute-force oracle")
    s.add_argument("--all", action="store_true", help="list every node")
    s.set_defaults(func=cmd_sig)

    for name, helptext, fn in (("compare", "solve the comparison game", cmd_compare),
                               ("cpgame", "unravel the comparison game into a tree", cmd_cpgame)):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("left")
        s.add_argument("right")
        s.add_argument("--player", type=_player, required=True)
        s.add_argument("--ell", type=int)
        if name == "cpgame":
            s.add_argument("--emit", metavar="OUT")
        else:
            s.add_argument("--emit-tree", metavar="OUT", help="write the unravelled comparison tree")
        s.add_argument("--dot", metavar="OUT")
        s.set_defaults(func=fn)

    s = sub.add_parser("automaton", parents=[common], help="the automaton U")
    s.add_argument("action", choices=("member", "ambiguity", "run"))
    s.add_argument("file")
    s.add_argument("--player", type=_player)
    s.add_argument("--dot", metavar="OUT")
    s.set_defaults(func=cmd_automaton)

    s = sub.add_parser("reduce", parents=[common], help="prefix of the reduction f")
    s.add_argument("file")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--nesting", type=int, default=1, help="third-child descents to materialize")
    s.add_argument("--emit", metavar="OUT", help="write a regular tree agreeing with f up to the nesting bound")
    s.add_argument("--check-run", action="store_true")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("check", parents=[common], help="run the invariant battery")
    s.add_argument("--count", type=int, default=20)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("fixtures", parents=[common], help="write the fixture trees")
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_fixtures)

    s = sub.add_parser("dot", parents=[common], help="Graphviz rendering of a tree")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_dot)
    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name, default in (("seed", 0), ("json", False), ("quiet", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.command == "automaton" and args.action == "member" and args.player is None:
        parser.print_usage(sys.stderr)
        print("paritysig: error: automaton member needs --player", file=sys.stderr)
        return 2
    if getattr(args, "depth", 0) < 0:
        print("paritysig: error: depth must be non-negative", file=sys.stderr)
        return 2
    out = Out(args)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"paritysig: {exc}", file=sys.stderr)
        return 2
    except (TreeError, ValueError) as exc:
        print(f"paritysig: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
