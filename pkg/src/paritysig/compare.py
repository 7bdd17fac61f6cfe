"""The comparison game C_P and its unravelling into a tree.

Player E (exists) is player 1 and A (forall) is player 2.  A component ``p``
of a position is ``(wrappers, node)``: the tree pri_w0(pri_w1(... node)),
since the index-lowering move of E prepends a priority to p.  The ``s``
component is a plain node.  Trees are never entered through a neg (that is an
immediate win), so switch bits are always 0 and are not stored.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Set, Tuple

import networkx as nx

from .games import ParityGame, node_winners, solve_zielonka
from .signatures import Indexing, Signature, compute_signatures, truncate
from .trees import (ANG, NEG_LETTER, Letter, Player, RegularTree, TreeError, choice,
                    is_losing, is_well_formed, losing_numbers, pri)

EXISTS, FORALL = Player.ONE, Player.TWO

ROUND, AFTER_EL, AFTER_AL, AFTER_EI, STEP = "RoundStart", "AfterEL", "AfterAL", "AfterEI", "Step"
WIN = "Win"

# step kinds
BOTH, LEFT, RIGHT = "down-both", "down-L", "down-R"


class ComparePosition(NamedTuple):
    phase: str
    p: Tuple[Tuple[int, ...], str]
    s: str
    ell: int

    def __str__(self):
        ws, v = self.p
        pdesc = "".join(f"pri{w}(" for w in ws) + v + ")" * len(ws)
        return f"{self.phase}[{pdesc}, {self.s}, {self.ell}]"


def win_position(player: Player) -> ComparePosition:
    return ComparePosition(WIN, ((), ""), "", int(player))


def canonical_twin_trees(i: int, k: int) -> Tuple[RegularTree, RegularTree]:
    """Self-loops on the least even and the least odd priority in [i,k]."""
    even = i if i % 2 == 0 else i + 1
    odd = i if i % 2 == 1 else i + 1
    t_e = RegularTree(ANG, i, k, {"e": pri(even)}, {"e": ("e",)}, "e")
    t_a = RegularTree(ANG, i, k, {"a": pri(odd)}, {"a": ("a",)}, "a")
    return t_e, t_a


class _Ctx:
    """Shared data for a pair of trees: heads, winners, signatures."""

    def __init__(self, p: RegularTree, s: RegularTree, player: Player):
        if (p.i, p.k) != (s.i, s.k):
            raise TreeError("both trees need the same index pair")
        for t in (p, s):
            if t.alphabet not in ("alp", "ang"):
                raise TreeError("comparison needs trees over alp or ang")
            if not is_well_formed(t):
                raise TreeError("tree is not well-formed")
        self.p, self.s, self.player = p, s, Player(player)
        self.i, self.k = p.i, p.k
        self.losing = losing_numbers(self.i, self.k, self.player)
        self._pw = None
        self._sw = None
        self._tables = None

    # heads
    def p_head(self, pc) -> Letter:
        ws, v = pc
        return pri(ws[0]) if ws else self.p.labels[v]

    def p_kids(self, pc):
        ws, v = pc
        if ws:
            return [(ws[1:], v)]
        return [((), c) for c in self.p.children[v]]

    def s_head(self, v) -> Letter:
        return self.s.labels[v]

    def s_kids(self, v):
        return list(self.s.children[v])

    # winners
    def p_wins(self, pc) -> bool:
        if self._pw is None:
            self._pw = node_winners(self.p)
        return self._pw[pc[1]] is self.player

    def s_wins(self, v) -> bool:
        if self._sw is None:
            self._sw = node_winners(self.s)
        return self._sw[v] is self.player

    # signatures
    def sig_p(self, pc) -> Signature:
        ws, v = pc
        if self._tables is None:
            self._tables = (compute_signatures(self.p), compute_signatures(self.s))
        ix = Indexing(self.i, self.k, self.player)
        val = self._tables[0].at(self.player, v)
        for w in reversed(ws):
            val = ix.bump(val, w) if is_losing(w, self.player) else ix.keep_below(val, w)
        return val

    def sig_s(self, v) -> Signature:
        if self._tables is None:
            self._tables = (compute_signatures(self.p), compute_signatures(self.s))
        return self._tables[1].at(self.player, v)

    def holds11(self, pos: ComparePosition) -> bool:
        tr = lambda x: truncate(x, pos.ell, self.i, self.k, self.player)
        return tr(self.sig_p(pos.p)) <= tr(self.sig_s(pos.s))


@dataclass(eq=False)
class CompareGame:
    game: ParityGame
    ctx: _Ctx
    step_kind: Dict[ComparePosition, str]
    initial: ComparePosition

    @property
    def player(self) -> Player:
        return self.ctx.player

    def solve(self):
        if "solution" not in self.game.memo:
            self.game.memo["solution"] = solve_zielonka(self.game)
        return self.game.memo["solution"]

    def winner(self, pos: Optional[ComparePosition] = None) -> Player:
        return self.solve().winner[self.initial if pos is None else pos]

    def round_starts(self) -> List[ComparePosition]:
        return [x for x in self.game.edges if x.phase == ROUND]


def _step(ctx: _Ctx, pos: ComparePosition):
    """Owner, priority, successors and kind of the step that ends a round."""
    P, k, ell = ctx.player, ctx.k, pos.ell
    hp, hs = ctx.p_head(pos.p), ctx.s_head(pos.s)
    rs = lambda p_, s_: ComparePosition(ROUND, p_, s_, ell)
    is_ell = lambda h: h.is_pri and h.arg == ell
    if is_ell(hp) and is_ell(hs):
        return EXISTS, k, [rs(ctx.p_kids(pos.p)[0], ctx.s_kids(pos.s)[0])], BOTH
    if not is_ell(hp):
        kids = ctx.p_kids(pos.p)
        if hp.is_choice:
            who = EXISTS if hp.player is P else FORALL
            return who, k, [rs(c, pos.s) for c in kids], LEFT
        if hp.is_pri and hp.arg > ell:
            return EXISTS, hp.arg + 1 - int(P), [rs(kids[0], pos.s)], LEFT
        return EXISTS, k, [win_position(EXISTS)], LEFT
    kids = ctx.s_kids(pos.s)
    if hs.is_choice:
        who = FORALL if hs.player is P else EXISTS
        return who, k, [rs(pos.p, c) for c in kids], RIGHT
    if hs.is_pri and hs.arg > ell:
        return EXISTS, hs.arg - 2 + int(P), [rs(pos.p, kids[0])], RIGHT
    return EXISTS, k, [win_position(FORALL)], RIGHT


def _successors(ctx: _Ctx, pos: ComparePosition):
    """(owner, priority, successors, step kind or None) for a non-terminal position."""
    k = ctx.k
    same = lambda phase: ComparePosition(phase, pos.p, pos.s, pos.ell)
    if pos.phase == ROUND:
        claim = win_position(EXISTS if not ctx.s_wins(pos.s) else FORALL)
        return EXISTS, k, [claim, same(AFTER_EL)], None
    if pos.phase == AFTER_EL:
        claim = win_position(FORALL if not ctx.p_wins(pos.p) else EXISTS)
        return FORALL, k, [claim, same(AFTER_AL)], None
    lower = [j for j in ctx.losing if j < pos.ell]
    if pos.phase == AFTER_AL:
        ws, v = pos.p
        moves = [ComparePosition(ROUND, ((j,) + ws, v), pos.s, j) for j in lower]
        return EXISTS, k, moves + [same(AFTER_EI)], None
    if pos.phase == AFTER_EI:
        moves = [ComparePosition(ROUND, pos.p, pos.s, j) for j in lower]
        return FORALL, k, moves + [same(STEP)], None
    owner, prio, succ, kind = _step(ctx, pos)
    return owner, prio, succ, kind


def build_compare_game(p: RegularTree, s: RegularTree, player: Player,
                       ell: Optional[int] = None) -> CompareGame:
    """Explicit finite game C_P from (p, s, ell); ell defaults to the largest P-losing number."""
    ctx = _Ctx(p, s, player)
    if ell is None:
        ell = ctx.losing[-1]
    if ell not in ctx.losing:
        raise ValueError(f"{ell} is not a {int(player)}-losing number")
    init = ComparePosition(ROUND, ((), p.root), s.root, ell)
    least_even = ctx.i if ctx.i % 2 == 0 else ctx.i + 1
    least_odd = ctx.i if ctx.i % 2 == 1 else ctx.i + 1
    owner, edges, prio, kinds = {}, {}, {}, {}
    for who, j in ((EXISTS, least_even), (FORALL, least_odd)):
        w = win_position(who)
        owner[w], edges[w], prio[w] = who, (w,), j
    queue = deque([init])
    seen = {init}
    while queue:
        pos = queue.popleft()
        o, pr, succ, kind = _successors(ctx, pos)
        owner[pos], edges[pos], prio[pos] = o, tuple(dict.fromkeys(succ)), pr
        if kind is not None:
            kinds[pos] = kind
        for n in succ:
            if n not in seen and n.phase != WIN:
                seen.add(n)
                queue.append(n)
    return CompareGame(ParityGame(owner, edges, prio, init), ctx, kinds, init)


def compare_signatures(p: RegularTree, s: RegularTree, player: Player, ell: Optional[int] = None) -> bool:
    """sigma_P(p)|ell <=lex sigma_P(s)|ell."""
    ctx = _Ctx(p, s, player)
    ell = ctx.losing[-1] if ell is None else ell
    return ctx.holds11(ComparePosition(ROUND, ((), p.root), s.root, ell))


def check_claim61(p: RegularTree, s: RegularTree, ell: Optional[int], player: Player) -> bool:
    """Solver winner of C_P from (p,s,ell) agrees with the signature comparison."""
    cg = build_compare_game(p, s, player, ell)
    return (cg.winner() is EXISTS) == cg.ctx.holds11(cg.initial)


def check_claim61_everywhere(cg: CompareGame) -> List[ComparePosition]:
    """Round positions where the solver and the signature comparison disagree."""
    sol = cg.solve()
    return [x for x in cg.round_starts() if (sol.winner[x] is EXISTS) != cg.ctx.holds11(x)]


# ---------------------------------------------------------------------------
# unravelling into a tree

def unravel_cp(p: RegularTree, s: RegularTree, player: Player, ell: Optional[int] = None) -> RegularTree:
    """The tree c_P(p, s, ell) over ang; player 1 wins it iff E wins C_P.

    Shared subtrees are shared graph nodes; the trees p and s are copied in
    for the claim exits.  No padding is added, because non-priority positions
    already carry the neutral priority k.
    """
    ctx = _Ctx(p, s, player)
    P, i, k = ctx.player, ctx.i, ctx.k
    if ell is None:
        ell = ctx.losing[-1]
    labels: Dict[str, Letter] = {}
    children: Dict[str, List[str]] = {}

    def add(name, letter, kids):
        labels[name] = letter
        children[name] = list(kids)
        return name

    for v in p.labels:
        add(f"P:{v}", p.labels[v], [f"P:{c}" for c in p.children[v]])
    for v in s.labels:
        add(f"S:{v}", s.labels[v], [f"S:{c}" for c in s.children[v]])
    t_e, t_a = canonical_twin_trees(i, k)
    add("tE", t_e.labels[t_e.root], ["tE"])
    add("tA", t_a.labels[t_a.root], ["tA"])

    def p_exit(pc):
        ws, v = pc
        name = f"P:{v}"
        for n in range(len(ws) - 1, -1, -1):
            wrapped = f"PW{ws[n:]}:{v}"
            if wrapped not in labels:
                add(wrapped, pri(ws[n]), [name])
            name = wrapped
        return name

    ids: Dict[Tuple, str] = {}
    queue = deque()

    def c(pc, sv, l):
        key = (pc, sv, l)
        if key not in ids:
            ids[key] = f"c{len(ids)}"
            queue.append(key)
        return ids[key]

    w_p = (lambda x: pri(k)) if P is Player.ONE else (lambda x: NEG_LETTER)
    w_notp = (lambda x: NEG_LETTER) if P is Player.ONE else (lambda x: pri(k))

    root = c(((), p.root), s.root, ell)
    while queue:
        key = queue.popleft()
        pc, sv, l = key
        me = ids[key]
        el = add(f"{me}.el", w_notp(None), [f"S:{sv}"])
        al = add(f"{me}.al", w_p(None), [p_exit(pc)])
        lower = [j for j in ctx.losing if j < l]
        tail = _c_prime(ctx, pc, sv, l, me, add, c)
        for j in reversed(lower):
            tail = add(f"{me}.ai{j}", choice(FORALL), [c(pc, sv, j), tail])
        for j in reversed(lower):
            ws, v = pc
            tail = add(f"{me}.ei{j}", choice(EXISTS), [c(((j,) + ws, v), sv, j), tail])
        rest = add(f"{me}.a", choice(FORALL), [al, tail])
        add(me, choice(EXISTS), [el, rest])
    return RegularTree.build(ANG, i, k, labels, children, root)


def _c_prime(ctx: _Ctx, pc, sv, l, me, add, c) -> str:
    P, k = ctx.player, ctx.k
    hp, hs = ctx.p_head(pc), ctx.s_head(sv)
    is_l = lambda h: h.is_pri and h.arg == l
    name = f"{me}.step"
    if is_l(hp) and is_l(hs):
        return add(name, pri(k), [c(ctx.p_kids(pc)[0], ctx.s_kids(sv)[0], l)])
    if not is_l(hp):
        kids = ctx.p_kids(pc)
        if hp.is_choice:
            who = EXISTS if hp.player is P else FORALL
            return add(name, choice(who), [c(x, sv, l) for x in kids])
        if hp.is_pri and hp.arg > l:
            return add(name, pri(hp.arg + 1 - int(P)), [c(kids[0], sv, l)])
        return "tE"
    kids = ctx.s_kids(sv)
    if hs.is_choice:
        who = FORALL if hs.player is P else EXISTS
        return add(name, choice(who), [c(pc, x, l) for x in kids])
    if hs.is_pri and hs.arg > l:
        return add(name, pri(hs.arg - 2 + int(P)), [c(pc, kids[0], l)])
    return "tA"


# ---------------------------------------------------------------------------
# quasi-strategies

def quasi_moves(cg: CompareGame, pos: ComparePosition, who: Player) -> Set[ComparePosition]:
    """Moves allowed by the quasi-strategy of ``who`` at a position it owns.

    E's quasi-strategy is defined where the signature inequality holds and
    A's where it fails; querying the wrong side raises ValueError.
    """
    ctx, game = cg.ctx, cg.game
    who = Player(who)
    if game.owner[pos] is not who or pos.phase == WIN:
        raise ValueError(f"{pos} is not a decision of player {int(who)}")
    ok = ctx.holds11(pos)
    if ok != (who is EXISTS):
        raise ValueError(f"quasi-strategy of player {int(who)} is not defined at {pos}")
    succ = game.edges[pos]
    P, i, k = ctx.player, ctx.i, ctx.k
    tr = lambda x, l: truncate(x, l, i, k, P)
    if pos.phase == ROUND:
        return {succ[0]} if not ctx.s_wins(pos.s) else {succ[1]}
    if pos.phase == AFTER_EL:
        return {succ[0]} if not ctx.p_wins(pos.p) else {succ[1]}
    if pos.phase in (AFTER_AL, AFTER_EI):
        sp, ss = ctx.sig_p(pos.p), ctx.sig_s(pos.s)
        for j in ctx.losing:
            if j >= pos.ell:
                break
            strict = tr(sp, j) < tr(ss, j) if who is EXISTS else tr(sp, j) > tr(ss, j)
            if strict:
                return {x for x in succ if x.phase == ROUND and x.ell == j}
        return {succ[-1]}
    # a step decision: a choice in p or in s
    kind = cg.step_kind[pos]
    if len(succ) == 1:
        return set(succ)
    if kind == LEFT:
        sig = [ctx.sig_p(x.p) for x in succ]
        if ctx.p_head(pos.p).player is P:  # E picks in p
            return {succ[0] if sig[0] <= sig[1] else succ[1]}
        bound = tr(ctx.sig_s(pos.s), pos.ell)
        return {x for x, g in zip(succ, sig) if tr(g, pos.ell) > bound}
    sig = [ctx.sig_s(x.s) for x in succ]
    if ctx.s_head(pos.s).player is P:  # A picks in s
        return {succ[0] if sig[0] <= sig[1] else succ[1]}
    bound = tr(ctx.sig_p(pos.p), pos.ell)
    return {x for x, g in zip(succ, sig) if tr(g, pos.ell) >= bound}


def _quasi_graph(cg: CompareGame, who: Player) -> Dict[ComparePosition, Tuple[ComparePosition, ...]]:
    """Edges of plays where ``who`` follows the quasi-strategy, from round starts on its side."""
    ctx, game = cg.ctx, cg.game
    side = lambda x: x.phase != WIN and ctx.holds11(x) == (who is EXISTS)
    starts = [x for x in game.edges if x.phase == ROUND and side(x)]
    out = {}
    stack = list(starts)
    while stack:
        x = stack.pop()
        if x in out:
            continue
        if x.phase == WIN:
            out[x] = game.edges[x]
            continue
        if game.owner[x] is who and len(game.edges[x]) > 1 and side(x):
            nxt = tuple(quasi_moves(cg, x, who))
        else:
            nxt = game.edges[x]
        out[x] = nxt
        stack.extend(n for n in nxt if n not in out)
    return out


def honest_safety_violations(cg: CompareGame) -> List[Tuple[ComparePosition, ComparePosition]]:
    """Edges of quasi-strategy plays that leave the player's side without an immediate win."""
    bad = []
    for who in (EXISTS, FORALL):
        for x, nxt in _quasi_graph(cg, who).items():
            if x.phase == WIN:
                continue
            for y in nxt:
                if y.phase == WIN:
                    if y != win_position(who):
                        bad.append((x, y))
                elif cg.ctx.holds11(y) != (who is EXISTS):
                    bad.append((x, y))
    return bad


def _cyclic_components(edges):
    g = nx.DiGraph()
    g.add_nodes_from(edges)
    g.add_edges_from((a, b) for a, nb in edges.items() for b in nb if b in edges)
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(x, x) for x in comp):
            yield comp


def quasi_progress_violations(cg: CompareGame) -> List[ComparePosition]:
    """Both-down steps on cycles of quasi-strategy plays (there should be none)."""
    bad = []
    for who in (EXISTS, FORALL):
        for comp in _cyclic_components(_quasi_graph(cg, who)):
            bad.extend(x for x in comp if cg.step_kind.get(x) == BOTH)
    return bad


def form_of_plays_violations(cg: CompareGame) -> List[Set[ComparePosition]]:
    """Cyclic components without a both-down step that mix left and right steps."""
    edges = {x: n for x, n in cg.game.edges.items() if cg.step_kind.get(x) != BOTH and x.phase != WIN}
    bad = []
    for comp in _cyclic_components(edges):
        kinds = {cg.step_kind[x] for x in comp if x in cg.step_kind}
        if LEFT in kinds and RIGHT in kinds:
            bad.append(comp)
    return bad


def ell_monotone(cg: CompareGame) -> bool:
    return all(y.phase == WIN or y.ell <= x.ell for x, nxt in cg.game.edges.items()
               if x.phase != WIN for y in nxt)
