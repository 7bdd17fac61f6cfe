"""Parity games, the game G(t) induced by a tree, and two solvers.

Winning condition throughout: player 1 wins an infinite play iff the least
priority seen infinitely often is even.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Set, Tuple

import networkx as nx

from .trees import ALP, ANG, Player, RegularTree, TreeError, is_well_formed

Position = Hashable


@dataclass(eq=False)
class ParityGame:
    owner: Dict[Position, Player]
    edges: Dict[Position, Tuple[Position, ...]]
    priority: Dict[Position, int]
    initial: Position
    memo: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for v, succ in self.edges.items():
            if not succ:
                raise ValueError(f"position {v!r} has no successor")
            for w in succ:
                if w not in self.edges:
                    raise ValueError(f"edge {v!r} -> {w!r} leaves the game")
        if set(self.owner) != set(self.edges) or set(self.priority) != set(self.edges):
            raise ValueError("owner, edges and priority must share one position set")
        if self.initial not in self.edges:
            raise ValueError("initial position is not a position")

    @property
    def positions(self) -> List[Position]:
        return list(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def reachable(self, roots: Iterable[Position] = None) -> Set[Position]:
        roots = [self.initial] if roots is None else list(roots)
        seen = set(roots)
        stack = list(roots)
        while stack:
            v = stack.pop()
            for w in self.edges[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def to_json(self) -> dict:
        index = {v: n for n, v in enumerate(self.edges)}
        return {
            "initial": index[self.initial],
            "positions": [
                {"id": index[v], "name": str(v), "owner": int(self.owner[v]),
                 "priority": self.priority[v],
                 "successors": [index[w] for w in self.edges[v]]}
                for v in self.edges
            ],
        }


@dataclass
class PositionalStrategy:
    player: Player
    move: Dict[Position, Position]


@dataclass
class Solution:
    winner: Dict[Position, Player]
    strategy: Dict[Player, PositionalStrategy]

    def region(self, p: Player) -> Set[Position]:
        return {v for v, w in self.winner.items() if w is p}


def winning_parity(p: Player) -> int:
    return 0 if p is Player.ONE else 1


# ---------------------------------------------------------------------------
# the game of a tree

def induced_game(t: RegularTree) -> ParityGame:
    """G(t) on positions (node, bit); the bit records an odd number of negs above.

    Non-priority positions get the neutral priority k+bit, which is what
    padding with pri_k would contribute; no extra padding is needed.
    """
    if t.alphabet not in (ALP, ANG):
        raise TreeError("induced_game needs a tree over alp or ang (shave first)")
    cached = t.memo.get("game")
    if cached is not None:
        return cached
    if not is_well_formed(t):
        raise TreeError("tree is not well-formed")
    owner, edges, prio = {}, {}, {}
    for v, a in t.labels.items():
        kids = t.children[v]
        for b in (0, 1):
            pos = (v, b)
            if a.is_choice:
                owner[pos] = a.player if b == 0 else a.player.opponent
                edges[pos] = tuple((c, b) for c in kids)
            elif a.is_neg:
                owner[pos] = Player.ONE
                edges[pos] = ((kids[0], 1 - b),)
            else:
                owner[pos] = Player.ONE
                edges[pos] = ((kids[0], b),)
            prio[pos] = (a.arg if a.is_pri else t.k) + b
    g = ParityGame(owner, edges, prio, (t.root, 0))
    t.memo["game"] = g
    return g


def tree_solution(t: RegularTree) -> Solution:
    cached = t.memo.get("solution")
    if cached is None:
        cached = solve_zielonka(induced_game(t))
        t.memo["solution"] = cached
    return cached


def node_winners(t: RegularTree) -> Dict[str, Player]:
    """Winner of G(t|v) for every node v (i.e. at position (v, 0))."""
    sol = tree_solution(t)
    return {v: sol.winner[(v, 0)] for v in t.labels}


def member_W(t: RegularTree, p: Player) -> bool:
    """t is in W^p: player p wins G(t) from the root."""
    return tree_solution(t).winner[(t.root, 0)] is Player(p)


def winner_of(t: RegularTree) -> Player:
    return tree_solution(t).winner[(t.root, 0)]


# ---------------------------------------------------------------------------
# Zielonka

def _attractor(game: ParityGame, arena: Set[Position], preds, target: Set[Position], p: Player):
    """Attractor of ``target`` for ``p`` inside ``arena`` with attractor strategy."""
    attr = set(target)
    strat: Dict[Position, Position] = {}
    count: Dict[Position, int] = {}
    queue = deque(attr)
    while queue:
        w = queue.popleft()
        for v in preds[w]:
            if v not in arena or v in attr:
                continue
            if game.owner[v] is p:
                attr.add(v)
                strat[v] = w
                queue.append(v)
            else:
                if v not in count:
                    count[v] = sum(1 for x in set(game.edges[v]) if x in arena)
                count[v] -= 1
                if count[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, strat


def _predecessors(game: ParityGame):
    preds = {v: [] for v in game.edges}
    for v, succ in game.edges.items():
        for w in set(succ):
            preds[w].append(v)
    return preds


def _zielonka(game, arena, preds):
    if not arena:
        return {Player.ONE: set(), Player.TWO: set()}, {Player.ONE: {}, Player.TWO: {}}
    low = min(game.priority[v] for v in arena)
    alpha = Player.ONE if low % 2 == 0 else Player.TWO
    beta = alpha.opponent
    top = {v for v in arena if game.priority[v] == low}
    a_set, a_strat = _attractor(game, arena, preds, top, alpha)
    win, strat = _zielonka(game, arena - a_set, preds)
    if not win[beta]:
        moves = dict(strat[alpha])
        moves.update(a_strat)
        for v in top:
            if game.owner[v] is alpha:
                moves[v] = next(w for w in game.edges[v] if w in arena)
        return {alpha: set(arena), beta: set()}, {alpha: moves, beta: {}}
    b_set, b_strat = _attractor(game, arena, preds, win[beta], beta)
    win2, strat2 = _zielonka(game, arena - b_set, preds)
    beta_moves = dict(strat2[beta])
    beta_moves.update({v: m for v, m in strat[beta].items() if v in win[beta]})
    beta_moves.update(b_strat)
    return ({alpha: win2[alpha], beta: win2[beta] | b_set},
            {alpha: dict(strat2[alpha]), beta: beta_moves})


def solve_zielonka(game: ParityGame) -> Solution:
    """Recursive attractor-based solver (reference implementation)."""
    preds = _predecessors(game)
    win, strat = _zielonka(game, set(game.edges), preds)
    winner = {v: p for p in Player for v in win[p]}
    strategies = {}
    for p in Player:
        moves = {v: strat[p][v] for v in win[p] if game.owner[v] is p}
        strategies[p] = PositionalStrategy(p, moves)
    return Solution(winner, strategies)


# ---------------------------------------------------------------------------
# small progress measures

_TOP = None


def _spm_even(game: ParityGame):
    """Progress measures for player 1 (even).  Returns (measure, player-1 moves)."""
    d = max(game.priority.values())
    odds = list(range(1, d + 1, 2))
    bound = {j: sum(1 for v in game.edges if game.priority[v] == j) for j in odds}
    zero = tuple(0 for _ in odds)
    rho: Dict[Position, Optional[tuple]] = {v: zero for v in game.edges}

    def prog(v, w):
        m = rho[w]
        if m is _TOP:
            return _TOP
        p = game.priority[v]
        cut = sum(1 for j in odds if j <= p)
        head = list(m[:cut])
        if p % 2 == 0:
            return tuple(head) + zero[cut:]
        # least tuple strictly above head in the bounded lexicographic order
        idx = cut - 1
        while idx >= 0:
            if head[idx] < bound[odds[idx]]:
                head[idx] += 1
                return tuple(head) + zero[cut:]
            head[idx] = 0
            idx -= 1
        return _TOP

    def key(m):
        return (1,) if m is _TOP else (0,) + m

    def lift(v):
        vals = [prog(v, w) for w in game.edges[v]]
        best = min(vals, key=key) if game.owner[v] is Player.ONE else max(vals, key=key)
        return best if key(best) > key(rho[v]) else rho[v]

    preds = _predecessors(game)
    queue = deque(game.edges)
    queued = set(game.edges)
    while queue:
        v = queue.popleft()
        queued.discard(v)
        new = lift(v)
        if new != rho[v]:
            rho[v] = new
            for u in preds[v]:
                if u not in queued:
                    queued.add(u)
                    queue.append(u)
    moves = {}
    for v in game.edges:
        if game.owner[v] is Player.ONE and rho[v] is not _TOP:
            moves[v] = min(game.edges[v], key=lambda w: key(prog(v, w)))
    return rho, moves


def progress_measures(game: ParityGame) -> Dict[Position, Optional[tuple]]:
    """Least progress measure for player 1; None marks the positions player 2 wins."""
    return _spm_even(game)[0]


def _dual(game: ParityGame) -> ParityGame:
    return ParityGame({v: p.opponent for v, p in game.owner.items()}, game.edges,
                      {v: q + 1 for v, q in game.priority.items()}, game.initial)


def solve_progress_measures(game: ParityGame) -> Solution:
    """Jurdzinski's lifting algorithm; player 2's strategy comes from the dual game."""
    rho, moves1 = _spm_even(game)
    winner = {v: (Player.ONE if rho[v] is not _TOP else Player.TWO) for v in game.edges}
    rho2, moves2 = _spm_even(_dual(game))
    moves2 = {v: w for v, w in moves2.items() if winner[v] is Player.TWO}
    return Solution(winner, {Player.ONE: PositionalStrategy(Player.ONE, moves1),
                             Player.TWO: PositionalStrategy(Player.TWO, moves2)})


# ---------------------------------------------------------------------------
# strategies

def restrict_to_strategy(game: ParityGame, strat: PositionalStrategy,
                         roots: Optional[Iterable[Position]] = None) -> ParityGame:
    """Subgame where the strategy's owner keeps only the chosen edge.

    Positions unreachable from ``roots`` (default: the initial position) are
    removed.  A reachable owned position without a move is an error.
    """
    roots = [game.initial] if roots is None else list(roots)
    keep = set(roots)
    stack = list(roots)
    edges = {}
    while stack:
        v = stack.pop()
        if game.owner[v] is strat.player and len(game.edges[v]) > 1:
            if v not in strat.move:
                raise ValueError(f"strategy has no move at {v!r}")
            w = strat.move[v]
            if w not in game.edges[v]:
                raise ValueError(f"dangling move {v!r} -> {w!r}")
            succ = (w,)
        elif game.owner[v] is strat.player and v in strat.move:
            w = strat.move[v]
            if w not in game.edges[v]:
                raise ValueError(f"dangling move {v!r} -> {w!r}")
            succ = (w,)
        else:
            succ = game.edges[v]
        edges[v] = succ
        for w in succ:
            if w not in keep:
                keep.add(w)
                stack.append(w)
    return ParityGame({v: game.owner[v] for v in edges}, edges,
                      {v: game.priority[v] for v in edges}, roots[0])


def losing_cycle_exists(game: ParityGame, p: Player, positions: Optional[Set[Position]] = None) -> bool:
    """Some cycle (within ``positions``) has a least priority losing for ``p``."""
    positions = set(game.edges) if positions is None else positions
    bad = 1 - winning_parity(p)
    for j in sorted({game.priority[v] for v in positions if game.priority[v] % 2 == bad}):
        sub = nx.DiGraph()
        allowed = {v for v in positions if game.priority[v] >= j}
        sub.add_nodes_from(allowed)
        sub.add_edges_from((v, w) for v in allowed for w in game.edges[v] if w in allowed)
        for comp in nx.strongly_connected_components(sub):
            if not any(game.priority[v] == j for v in comp):
                continue
            if len(comp) > 1 or any(sub.has_edge(v, v) for v in comp):
                return True
    return False


def check_strategy_winning(game: ParityGame, strat: PositionalStrategy,
                           roots: Optional[Iterable[Position]] = None) -> bool:
    """Every play consistent with ``strat`` from ``roots`` is won by its owner."""
    sub = restrict_to_strategy(game, strat, roots)
    return not losing_cycle_exists(sub, strat.player)


# ---------------------------------------------------------------------------
# random games

def random_game(rng: random.Random, n: int, max_priority: int = 6, max_out: int = 3,
                p_one: float = 0.5) -> ParityGame:
    positions = list(range(n))
    owner = {v: (Player.ONE if rng.random() < p_one else Player.TWO) for v in positions}
    prio = {v: rng.randint(0, max_priority) for v in positions}
    edges = {v: tuple(sorted(rng.sample(positions, rng.randint(1, min(max_out, n)))))
             for v in positions}
    return ParityGame(owner, edges, prio, 0)
