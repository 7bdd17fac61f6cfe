"""Canonical P-signatures of regular trees.

A signature is a tuple of naturals indexed by the P-losing priorities
(lower indices more significant), or ``INF``.  Tables are kept per graph
node: ``table[P][v]`` is sigma_P of the subtree rooted at ``v``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx

from .games import (ParityGame, PositionalStrategy, check_strategy_winning, induced_game,
                    node_winners, restrict_to_strategy)
from .trees import Player, RegularTree, TreeError, is_guarded, is_losing, losing_numbers


class _Infinity:
    """Greater than every finite signature."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("INF-signature")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = _Infinity()
Signature = Union[Tuple[int, ...], _Infinity]


def sig_str(s: Signature) -> str:
    return "inf" if s is INF else "(" + ",".join(map(str, s)) + ")"


class Indexing:
    """Positions of the P-losing numbers inside signature tuples."""

    def __init__(self, i: int, k: int, p: Player):
        self.i, self.k, self.player = i, k, Player(p)
        self.losing = losing_numbers(i, k, self.player)
        self.pos = {j: n for n, j in enumerate(self.losing)}
        self.zero = tuple(0 for _ in self.losing)

    def cut(self, j: int) -> int:
        """Number of components with index < j."""
        return sum(1 for x in self.losing if x < j)

    def keep_below(self, s: Signature, j: int) -> Signature:
        if s is INF:
            return INF
        c = self.cut(j)
        return s[:c] + self.zero[c:]

    def bump(self, s: Signature, j: int) -> Signature:
        if s is INF:
            return INF
        n = self.pos[j]
        return s[:n] + (s[n] + 1,) + self.zero[n + 1:]


def truncate(s: Signature, ell: int, i: int, k: int, p: Player) -> Signature:
    """sigma restricted to the components indexed up to the P-losing number ell."""
    if not is_losing(ell, Player(p)) or not i <= ell <= k:
        raise ValueError(f"{ell} is not a {int(p)}-losing number in [{i},{k}]")
    if s is INF:
        return INF
    return s[:Indexing(i, k, p).pos[ell] + 1]


def _require(t: RegularTree):
    if not is_guarded(t):
        raise TreeError("signatures need every cycle to pass a priority node")


# ---------------------------------------------------------------------------
# least fixpoint

@dataclass
class SignatureTable:
    tree: RegularTree
    values: Dict[Player, Dict[str, Signature]]
    caps: Dict[int, int] = field(default_factory=dict)

    def __getitem__(self, p) -> Dict[str, Signature]:
        return self.values[Player(p)]

    def at(self, p, v: str) -> Signature:
        return self.values[Player(p)][v]

    def root(self, p) -> Signature:
        return self.values[Player(p)][self.tree.root]


def _caps(t: RegularTree) -> Dict[int, int]:
    game = induced_game(t)
    caps = {}
    for j in range(t.i, t.k + 1):
        caps[j] = sum(1 for x in game.edges if game.priority[x] == j and t.labels[x[0]].is_pri)
    return caps


def _local(t: RegularTree, p: Player, v: str, vals, idx: Dict[Player, Indexing], caps) -> Signature:
    """Right-hand side of the signature equation at node ``v`` for player ``p``."""
    a = t.labels[v]
    kids = t.children[v]
    ix = idx[p]
    if a.is_pri:
        x = vals[p][kids[0]]
        if x is INF:
            return INF
        j = a.arg
        if not is_losing(j, p):
            return ix.keep_below(x, j)
        y = ix.bump(x, j)
        return INF if y[ix.pos[j]] > caps.get(j, 0) else y
    if a.is_neg:
        return ix.zero if vals[p.opponent][kids[0]] is not INF else INF
    left, right = vals[p][kids[0]], vals[p][kids[1]]
    return min(left, right) if a.player is p else max(left, right)


def compute_signatures(t: RegularTree) -> SignatureTable:
    """Least solution of the signature equations, for both players at once.

    Iterates from all-zero tables with a worklist; a counter exceeding its cap
    (number of positions with that priority) saturates to INF.
    """
    cached = t.memo.get("signatures")
    if cached is not None:
        return cached
    _require(t)
    if t.alphabet not in ("alp", "ang"):
        raise TreeError("signatures are defined for trees over alp or ang")
    from .trees import is_well_formed
    if not is_well_formed(t):
        raise TreeError("tree is not well-formed")
    caps = _caps(t)
    idx = {p: Indexing(t.i, t.k, p) for p in Player}
    vals = {p: {v: idx[p].zero for v in t.labels} for p in Player}
    preds: Dict[str, Set[str]] = {v: set() for v in t.labels}
    for v, kids in t.children.items():
        for c in kids:
            preds[c].add(v)
    queue = deque((p, v) for p in Player for v in t.labels)
    queued = set(queue)
    while queue:
        p, v = queue.popleft()
        queued.discard((p, v))
        new = _local(t, p, v, vals, idx, caps)
        if new != vals[p][v]:
            vals[p][v] = new
            for u in preds[v]:
                for q in Player:
                    if (q, u) not in queued:
                        queued.add((q, u))
                        queue.append((q, u))
    table = SignatureTable(t, vals, caps)
    t.memo["signatures"] = table
    return table


def signature(t: RegularTree, p: Player, node: Optional[str] = None) -> Signature:
    table = compute_signatures(t)
    return table.at(p, t.root if node is None else node)


# ---------------------------------------------------------------------------
# strategy values s(., Sigma)

NONE_ABOVE = None  # marker: no priority seen yet


@dataclass
class StrategyValue:
    """Values of s(., Sigma) on the graph of evaluation states.

    A state is ``(position, m)`` where ``m`` is the least priority strictly
    above (k+1 for none) or ``None`` once a neg has been passed.
    """

    tree: RegularTree
    player: Player
    strategy: PositionalStrategy
    root: tuple
    values: Dict[tuple, Signature]
    succ: Dict[tuple, Tuple[tuple, ...]]
    active: Set[tuple]

    def at(self, position: Sequence[int]) -> Signature:
        return self.values[self.state_at(position)]

    def state_at(self, position: Sequence[int]) -> tuple:
        st = self.root
        for d in position:
            nxt = _state_children(self.tree, self.player, self.strategy, st)
            if not nxt:
                raise TreeError("position leaves the strategy")
            options = _all_children(self.tree, st)
            target = options[d]
            if target not in nxt:
                raise TreeError(f"position {tuple(position)} is not played by the strategy")
            st = target
        return st


def _all_children(t: RegularTree, st) -> List[tuple]:
    (v, b), m = st
    a = t.labels[v]
    out = []
    for c in t.children[v]:
        if a.is_neg:
            out.append(((c, 1 - b), None))
        elif a.is_pri:
            out.append(((c, b), a.arg if m is not None and a.arg < m else m))
        else:
            out.append(((c, b), m))
    return out


def _state_children(t: RegularTree, p: Player, strat: PositionalStrategy, st) -> List[tuple]:
    (v, b), m = st
    a = t.labels[v]
    kids = _all_children(t, st)
    if a.is_choice and (a.player if b == 0 else a.player.opponent) is p:
        chosen = strat.move.get((v, b))
        if chosen is None:
            raise ValueError(f"strategy has no move at {(v, b)!r}")
        return [s for s in kids if s[0] == chosen]
    return kids


def _is_active(t: RegularTree, p: Player, st) -> bool:
    (v, b), m = st
    a = t.labels[v]
    return m is not None and a.is_pri and is_losing(a.arg, p) and a.arg <= m


def strategy_values(t: RegularTree, p: Player, strat: PositionalStrategy,
                    root: Optional[str] = None) -> StrategyValue:
    """Evaluate s(., Sigma) for a winning positional strategy ``strat``.

    Raises if an active state lies on a cycle (then Sigma is not winning).
    """
    p = Player(p)
    ix = Indexing(t.i, t.k, p)
    start = ((t.root if root is None else root, 0), t.k + 1)
    succ: Dict[tuple, Tuple[tuple, ...]] = {}
    stack = [start]
    while stack:
        st = stack.pop()
        if st in succ:
            continue
        if st[1] is None:
            succ[st] = ()  # below a neg nothing is active
            continue
        nxt = tuple(dict.fromkeys(_state_children(t, p, strat, st)))
        succ[st] = nxt
        stack.extend(n for n in nxt if n not in succ)
    active = {st for st in succ if _is_active(t, p, st)}
    g = nx.DiGraph()
    g.add_nodes_from(succ)
    g.add_edges_from((a, b) for a, nb in succ.items() for b in nb)
    cond = nx.condensation(g)
    values: Dict[tuple, Signature] = {}
    for comp in reversed(list(nx.topological_sort(cond))):
        members = cond.nodes[comp]["members"]
        cyclic = len(members) > 1 or any(g.has_edge(x, x) for x in members)
        if cyclic and members & active:
            raise ValueError("an active state lies on a cycle: the strategy is not winning")
        if cyclic:
            exits = [values[y] for x in members for y in succ[x] if y not in members]
            val = max(exits, default=ix.zero)
            for x in members:
                values[x] = val
            continue
        (x,) = members
        if x[1] is None:
            values[x] = ix.zero
        elif x in active:
            (child,) = succ[x]
            values[x] = ix.bump(values[child], t.labels[x[0][0]].arg)
        else:
            values[x] = max((values[y] for y in succ[x]), default=ix.zero)
    return StrategyValue(t, p, strat, start, values, succ, active)


def strategy_value(t: RegularTree, p: Player, strat: PositionalStrategy,
                   root: Optional[str] = None) -> Signature:
    sv = strategy_values(t, p, strat, root)
    return sv.values[sv.root]


def positional_strategies(game: ParityGame, p: Player, limit: int = 1 << 16):
    """All positional strategies of ``p`` that differ on reachable positions."""
    owned = sorted((x for x in game.reachable() if game.owner[x] is p and len(game.edges[x]) > 1),
                   key=repr)
    if 2 ** len(owned) > limit:
        raise ValueError(f"too many strategies to enumerate ({len(owned)} binary choices)")
    seen = set()
    for combo in itertools.product(*(game.edges[x] for x in owned)):
        strat = PositionalStrategy(p, dict(zip(owned, combo)))
        key = frozenset((x, strat.move[x]) for x in restrict_to_strategy(game, strat).edges
                        if x in strat.move)
        if key in seen:
            continue
        seen.add(key)
        yield strat


def oracle_signature(t: RegularTree, p: Player) -> Signature:
    """Brute force: minimum of s(root, Sigma) over all winning positional Sigma."""
    _require(t)
    p = Player(p)
    game = induced_game(t)
    best: Signature = INF
    for strat in positional_strategies(game, p):
        if not check_strategy_winning(game, strat):
            continue
        val = strategy_value(t, p, strat)
        if val < best:
            best = val
    return best


# ---------------------------------------------------------------------------
# active sets

@dataclass
class ActiveSet:
    states: Set[tuple]
    succ: Dict[tuple, Tuple[tuple, ...]]

    @property
    def nodes(self) -> Set[str]:
        return {st[0][0] for st in self.states}

    def __contains__(self, node) -> bool:
        return node in self.nodes

    def __len__(self) -> int:
        return len(self.states)


def _explore(t: RegularTree, p: Player, strat: PositionalStrategy, start) -> Dict[tuple, Tuple[tuple, ...]]:
    succ = {}
    stack = [start]
    while stack:
        st = stack.pop()
        if st in succ:
            continue
        nxt = tuple(dict.fromkeys(_state_children(t, p, strat, st))) if st[1] is not None else ()
        succ[st] = nxt
        stack.extend(n for n in nxt if n not in succ)
    return succ


def active_set(t: RegularTree, strat: PositionalStrategy, root_node: Optional[str] = None) -> ActiveSet:
    """Active states of ``strat`` relative to ``root_node`` (default: the root)."""
    p = strat.player
    start = ((t.root if root_node is None else root_node, 0), t.k + 1)
    succ = _explore(t, p, strat, start)
    return ActiveSet({st for st in succ if _is_active(t, p, st)}, succ)


def check_gg_wellfounded(t: RegularTree, strat: PositionalStrategy) -> bool:
    """No descending chain: no position is active relative to itself and lies on a cycle.

    For every position x reachable under ``strat`` with a losing priority, we
    ask whether the play can return to x while staying on priorities >= the
    one at x and without crossing a neg.
    """
    game = induced_game(t)
    p = strat.player
    sub = restrict_to_strategy(game, strat)
    bad = 1 if p is Player.ONE else 0
    for x in sub.edges:
        v, b = x
        if not t.labels[v].is_pri or sub.priority[x] % 2 != bad:
            continue
        floor = sub.priority[x]
        seen = set()
        stack = list(sub.edges[x]) if not t.labels[v].is_neg else []
        while stack:
            y = stack.pop()
            if y == x:
                return False
            if y in seen or sub.priority[y] < floor or t.labels[y[0]].is_neg:
                continue
            seen.add(y)
            stack.extend(sub.edges[y])
    return True


# ---------------------------------------------------------------------------
# optimal strategies

def optimal_strategy(t: RegularTree, p: Player) -> PositionalStrategy:
    """Move to a child of least signature; lower direction on ties.

    At switched positions the owner compares signatures of the opponent.
    """
    p = Player(p)
    table = compute_signatures(t)
    if table.root(p) is INF:
        raise ValueError(f"player {int(p)} loses G(t); no optimal strategy is winning")
    game = induced_game(t)
    moves = {}
    for x in game.edges:
        v, b = x
        a = t.labels[v]
        if not a.is_choice or game.owner[x] is not p:
            continue
        q = p if b == 0 else p.opponent
        kids = t.children[v]
        d = 0 if table.at(q, kids[0]) <= table.at(q, kids[1]) else 1
        moves[x] = (kids[d], b)
    return PositionalStrategy(p, moves)


# ---------------------------------------------------------------------------
# invariants

def verify_invariants(t: RegularTree, table: Optional[SignatureTable] = None,
                      oracle: bool = False, max_choices: int = 10) -> List[str]:
    """Check the signature equations node by node; return the violations.

    With ``oracle=True`` the strategy-level facts (monotonicity of s and the
    restriction law at active states) are checked on every winning positional
    strategy of both players, when there are at most ``max_choices`` choices.
    """
    table = compute_signatures(t) if table is None else table
    winners = node_winners(t)
    out: List[str] = []
    for p in Player:
        ix = Indexing(t.i, t.k, p)
        vals = table.values[p]
        for v, a in t.labels.items():
            here = vals[v]
            kids = t.children[v]
            if (here is INF) != (winners[v] is not p):
                out.append(f"item1 P={int(p)} node={v}: {sig_str(here)} but winner is {int(winners[v])}")
            if a.is_neg:
                if winners[v] is p and here != ix.zero:
                    out.append(f"item2 P={int(p)} node={v}: {sig_str(here)} != zeros")
            elif a.is_pri:
                x = vals[kids[0]]
                if x is INF or here is INF:
                    if (x is INF) != (here is INF):
                        out.append(f"item3/4 P={int(p)} node={v}: {sig_str(here)} vs child {sig_str(x)}")
                    continue
                j = a.arg
                want = ix.bump(x, j) if is_losing(j, p) else ix.keep_below(x, j)
                if here != want:
                    item = "item4" if is_losing(j, p) else "item3"
                    out.append(f"{item} P={int(p)} node={v}: {sig_str(here)} != {sig_str(want)}")
            elif a.is_choice:
                l, r = vals[kids[0]], vals[kids[1]]
                want = min(l, r) if a.player is p else max(l, r)
                if here != want:
                    item = "item5" if a.player is p else "item6"
                    out.append(f"{item} P={int(p)} node={v}: {sig_str(here)} != {sig_str(want)}")
    if oracle:
        out.extend(verify_strategy_facts(t, max_choices=max_choices))
    return out


def verify_strategy_facts(t: RegularTree, max_choices: int = 10) -> List[str]:
    """s-monotonicity and s(u,Sigma) = s(root, Sigma|u) at active u, for all winning Sigma."""
    out = []
    game = induced_game(t)
    for p in Player:
        try:
            strategies = list(positional_strategies(game, p, limit=1 << max_choices))
        except ValueError:
            continue
        for strat in strategies:
            if not check_strategy_winning(game, strat):
                continue
            sv = strategy_values(t, p, strat)
            for st, nxt in sv.succ.items():
                for n in nxt:
                    if not sv.values[st] >= sv.values[n]:
                        out.append(f"monotone P={int(p)} {st} -> {n}")
            for st in sv.active:
                (v, b), _ = st
                again = strategy_value(t, p, strat, root=v)
                if again != sv.values[st]:
                    out.append(f"restriction P={int(p)} at {st}: {sig_str(sv.values[st])} != {sig_str(again)}")
    return out
