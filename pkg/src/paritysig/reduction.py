"""The continuous reduction f from binary trees to trees over the extended alphabet.

f keeps priorities and negations and turns every Choice(P)(tL, tR) into
ChoicePlus(P)(f(tL), f(tR), f(c_P(tL, tR))).  The comparison trees c_P are
regular, so f is presented lazily: a handle is a pair (regular tree, node)
and every c_P call materializes a fresh regular tree, cached per argument
pair.  f(t) itself is not regular in general, hence the depth-bounded checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .automaton import D, L, R, UAutomaton, UState, build_U
from .compare import canonical_twin_trees, unravel_cp
from .signatures import compute_signatures, truncate
from .games import (PositionalStrategy, check_strategy_winning, induced_game, node_winners,
                    progress_measures)
from .trees import (ALP, ANG, ANGP, LazyTree, Player, PrefixNode, RegularTree, TreeError,
                    choice, choice_plus, expand_prefix, is_guarded, is_well_formed,
                    losing_numbers, pri, prefix_handles)

@dataclass(frozen=True)
class ThirdRoot:
    """Root of c_P(tree|L, tree|R) below the choice node ``node``, before materializing it."""

    tree: RegularTree
    node: str


Handle = Union[Tuple[RegularTree, str], ThirdRoot]


class FReduction:
    """Lazy f(t) with a shared cache of materialized comparison trees.

    Third children start out as ThirdRoot handles.  Their winner is read
    from the signature comparison until the comparison tree is
    materialized, after which it is read from the solved tree and the two
    are checked to agree.
    """

    def __init__(self, t: RegularTree):
        if t.alphabet != ANG and t.alphabet != ALP:
            raise TreeError("f is defined on binary trees (alp or ang)")
        if not is_well_formed(t):
            raise TreeError("tree is not well-formed")
        if not is_guarded(t):
            raise TreeError("comparison trees need a priority on every cycle")
        self.source = t
        self.cp: Dict[Tuple[RegularTree, str, str, Player], RegularTree] = {}
        self.level: Dict[RegularTree, int] = {t: 0}
        self.lazy = LazyTree((t, t.root), self._expand, ANGP, t.i, t.k)

    def _key(self, tree: RegularTree, v: str):
        a = tree.labels[v]
        if not a.is_choice:
            raise TreeError(f"{v} is not a choice node")
        left, right = tree.children[v]
        return tree, left, right, a.player

    def third(self, tree: RegularTree, v: str) -> RegularTree:
        """The comparison tree hanging below a choice node, materialized once."""
        key = self._key(tree, v)
        hit = self.cp.get(key)
        if hit is None:
            _, left, right, p = key
            hit = unravel_cp(tree.rooted_at(left), tree.rooted_at(right), p)
            if not is_well_formed(hit):
                raise AssertionError("comparison tree is not well-formed")
            self.cp[key] = hit
            self.level[hit] = self.level[tree] + 1
        return hit

    def is_materialized(self, h: ThirdRoot) -> bool:
        return self._key(h.tree, h.node) in self.cp

    def resolve(self, h: Handle) -> Tuple[RegularTree, str]:
        if isinstance(h, ThirdRoot):
            cp = self.third(h.tree, h.node)
            return cp, cp.root
        return h

    def _expand(self, h: Handle):
        tree, v = self.resolve(h)
        a = tree.labels[v]
        kids = [(tree, c) for c in tree.children[v]]
        if a.is_choice:
            return choice_plus(a.player), kids + [ThirdRoot(tree, v)]
        return a, kids

    def nesting(self, h: Handle) -> int:
        if isinstance(h, ThirdRoot):
            return self.level[h.tree] + 1
        return self.level[h[0]]

    def signature_winner(self, h: ThirdRoot) -> Player:
        """Player 1 wins c_P(tL, tR) iff sigma_P(tL) <=lex sigma_P(tR), truncated at the top losing number."""
        tree = h.tree
        _, left, right, p = self._key(tree, h.node)
        table = compute_signatures(tree)
        ell = losing_numbers(tree.i, tree.k, p)[-1]
        tr = lambda x: truncate(x, ell, tree.i, tree.k, p)
        return Player.ONE if tr(table.at(p, left)) <= tr(table.at(p, right)) else Player.TWO

    def declared(self, h: Handle) -> Player:
        """Winner of G(shave(f(t)|h)); shave(f(x)) = x makes this the winner of the source node."""
        if isinstance(h, ThirdRoot) and not self.is_materialized(h):
            return self.signature_winner(h)
        tree, v = self.resolve(h)
        return node_winners(tree)[v]


def f_lazy(t: RegularTree) -> LazyTree:
    return FReduction(t).lazy


@dataclass
class FPrefix:
    """The handles of f(t) within ``depth`` steps, third-child descents capped at ``nesting``.

    Handles whose nesting level equals the cap are still expanded (their
    third child is materialized) but the walk does not enter that child.
    """

    red: FReduction
    depth: int
    nesting: Optional[int]
    handles: Dict[Handle, int]

    def expanded(self) -> List[Handle]:
        return [h for h, d in self.handles.items() if d < self.depth]

    def trees(self) -> List[RegularTree]:
        return list(self.red.level)


def f_prefix(t: RegularTree, depth: int, nesting: Optional[int] = None,
             red: Optional[FReduction] = None) -> FPrefix:
    red = FReduction(t) if red is None else red

    def follow(h, d):
        return not (d == 2 and nesting is not None and red.nesting(h) >= nesting)

    handles = prefix_handles(red.lazy, depth, follow)
    for h, d in handles.items():
        if d < depth:
            red.lazy.query(h)
    return FPrefix(red, depth, nesting, handles)


def f_prefix_tree(t: RegularTree, depth: int) -> PrefixNode:
    """Nested-node prefix of f(t); exponential in depth, for small depths only."""
    return expand_prefix(f_lazy(t), depth)


def f_prefix_direct(t: RegularTree, depth: int) -> PrefixNode:
    """Straight recursion on the defining equations, without handles or sharing."""

    def f(tree: RegularTree, v: str, d: int) -> PrefixNode:
        a = tree.labels[v]
        if d == depth:
            letter = choice_plus(a.player) if a.is_choice else a
            return PrefixNode(letter, None, None)
        if a.is_choice:
            tl, tr = (tree.rooted_at(c) for c in tree.children[v])
            cp = unravel_cp(tl, tr, a.player)
            kids = [f(tl, tl.root, d + 1), f(tr, tr.root, d + 1), f(cp, cp.root, d + 1)]
            return PrefixNode(choice_plus(a.player), None, kids)
        return PrefixNode(a, None, [f(tree, c, d + 1) for c in tree.children[v]])

    return f(t, t.root, 0)


def source_prefix(t: RegularTree, depth: int) -> PrefixNode:
    def go(v, d):
        return PrefixNode(t.labels[v], v, None if d == depth else [go(c, d + 1) for c in t.children[v]])
    return go(t.root, 0)


def shave_prefix(p: PrefixNode) -> PrefixNode:
    letter = choice(p.letter.player) if p.letter.is_choice_plus else p.letter
    if p.children is None:
        return PrefixNode(letter, p.handle, None)
    kids = p.children[:2] if p.letter.is_choice_plus else p.children
    return PrefixNode(letter, p.handle, [shave_prefix(c) for c in kids])


# ---------------------------------------------------------------------------
# runs on prefixes

@dataclass
class RunPrefix:
    """The canonical run restricted to the expanded handles.

    Second and third coordinates live on handles; first coordinates on
    (handle, incoming edge) pairs, as in RunLabeling.
    """

    prefix: FPrefix
    automaton: UAutomaton
    declared: Dict[Handle, Player]
    direction: Dict[Handle, str]
    states: Dict[Tuple, UState] = field(default_factory=dict)


def _direction(red: FReduction, h: Handle, declared: Player) -> str:
    tree, v = red.resolve(h)
    a = tree.labels[v]
    if a.is_choice and a.player is declared:
        return L if red.declared(ThirdRoot(tree, v)) is Player.ONE else R
    return D


def canonical_run_prefix(t: RegularTree, depth: int, nesting: Optional[int] = None,
                         prefix: Optional[FPrefix] = None) -> RunPrefix:
    fp = f_prefix(t, depth, nesting) if prefix is None else prefix
    red = fp.red
    u = build_U(t.i, t.k)
    declared, direction = {}, {}
    for h in fp.handles:
        declared[h] = red.declared(h)
    for h in fp.expanded():
        direction[h] = _direction(red, h, declared[h])
    run = RunPrefix(fp, u, declared, direction)
    # first coordinates along the prefix edges
    run.states[(red.lazy.root, None)] = UState(0, declared[red.lazy.root], direction[red.lazy.root])
    for h in fp.expanded():
        for d, c in enumerate(red.lazy.kids(h)):
            if c in fp.handles and c in direction:
                run.states[(c, (h, d))] = UState(_entry(u, red, h, d, declared[h], direction[h]),
                                                 declared[c], direction[c])
    return run


def _entry(u: UAutomaton, red: FReduction, h: Handle, d: int, p: Player, dr: str) -> int:
    a = red.lazy.letter(h)
    if a.is_neg:
        return 1
    if a.is_pri:
        return u.prio(a.arg, p)
    if d == 2:
        return 0
    if a.player is not p:
        return u.kept_choice(p)
    return u.kept_choice(p) if d == (0 if dr == L else 1) else 2


def run_prefix_violations(run: RunPrefix, strategies: bool = True,
                          pm_limit: Optional[int] = 400) -> List[str]:
    """Shave identity, the declared-winner equation and transition validity at every expanded handle.

    Declared winners (Zielonka) are re-derived with progress measures on
    trees of at most ``pm_limit`` nodes (None: all trees).  Lifting is
    exponential in the number of odd priorities, so large comparison trees
    rely on the strategy certificate instead.

    With ``strategies`` the strategy read off the directions of each source
    tree is checked to win for the declared winner, from every node.  Both
    players' strategies winning on complementary regions certifies the
    declared winners of the whole tree.
    """
    fp, u, red = run.prefix, run.automaton, run.prefix.red
    lazy = red.lazy
    bad = []
    for h in fp.expanded():
        tree, v = red.resolve(h)
        a, kids = lazy.query(h)
        src = tree.labels[v]
        if isinstance(h, ThirdRoot) and red.signature_winner(h) is not node_winners(tree)[v]:
            bad.append(f"comparison tree below {h.node} disagrees with the signatures")
        # shave identity
        if (a.is_choice_plus and not (src.is_choice and src.player is a.player)) or \
                (not a.is_choice_plus and a != src) or \
                [c[1] for c in kids[:2 if a.is_choice_plus else len(kids)]] != list(tree.children[v]) or \
                any(c[0] is not tree for c in kids[:2]):
            bad.append(f"shave identity fails at {v}")
        if (pm_limit is None or len(tree.labels) <= pm_limit) and _pm_winners(tree)[v] is not run.declared[h]:
            bad.append(f"declared winner wrong at {v}")
        # local transition validity
        st = UState(0, run.declared[h], run.direction[h])
        kid_decl = [red.declared(c) for c in kids]
        if not any(all(any(x.declared is kd for x in allowed) for kd, allowed in zip(kid_decl, shape))
                   for shape in u.shapes(st, a)):
            bad.append(f"no transition at {v} in {st}")
    if strategies:
        for tree in {red.resolve(h)[0] for h in fp.expanded()}:
            bad.extend(_strategy_violations(run, tree))
    return bad


def _pm_winners(tree: RegularTree) -> Dict[str, Player]:
    """Node winners from the progress-measure solver, independent of the declared ones."""
    hit = tree.memo.get("pm_winners")
    if hit is None:
        rho = progress_measures(induced_game(tree))
        hit = tree.memo["pm_winners"] = {v: Player.TWO if rho[(v, 0)] is None else Player.ONE
                                         for v in tree.labels}
    return hit


def _strategy_violations(run: RunPrefix, tree: RegularTree) -> List[str]:
    """Each player's direction strategy must stay consistent with the winners and win."""
    red = run.prefix.red
    game = induced_game(tree)
    winners = node_winners(tree)
    out = []
    for p in Player:
        moves = {}
        for x, succ in game.edges.items():
            a = tree.labels[x[0]]
            if game.owner[x] is p and a.is_choice and winners[x[0]] is a.player:
                moves[x] = succ[0 if _direction(red, (tree, x[0]), a.player) == L else 1]
        roots = [(v, 0) for v, w in winners.items() if w is p]
        region = set(roots)
        stack = list(roots)
        while stack:
            x = stack.pop()
            if winners[x[0]] is not (p if x[1] == 0 else p.opponent):
                out.append(f"position {x} breaks the kept/switched invariant for {int(p)}")
            for y in ((moves[x],) if x in moves else game.edges[x]):
                if y not in region:
                    region.add(y)
                    stack.append(y)
        if out:
            continue
        strat = PositionalStrategy(p, {x: m for x, m in moves.items() if x in region})
        if roots and not check_strategy_winning(game, strat, roots):
            out.append(f"direction strategy of {int(p)} loses in a tree of nesting {red.level[tree]}")
    return out


# ---------------------------------------------------------------------------
# a regular stand-in

def regular_closure(t: RegularTree, nesting: int = 1, red: Optional[FReduction] = None) -> RegularTree:
    """A regular tree over angp agreeing with f(t) up to ``nesting`` third-child descents.

    Deeper third children are replaced by a twin loop with the same winner,
    so shaved winners and canonical directions are those of f(t).
    """
    red = FReduction(t) if red is None else red
    t_e, t_a = canonical_twin_trees(t.i, t.k)
    labels, children = {}, {}
    names: Dict[Handle, str] = {}

    def name(h):
        if h not in names:
            names[h] = f"n{len(names)}"
        return names[h]

    for loop, nm in ((t_e, "winE"), (t_a, "winA")):
        labels[nm] = loop.labels[loop.root]
        children[nm] = [nm]
    stack = [(t, t.root)]
    seen = set()
    while stack:
        h = stack.pop()
        if h in seen:
            continue
        seen.add(h)
        a, kids = red.lazy.query(h)
        out = []
        for d, c in enumerate(kids):
            if d == 2 and red.nesting(h) >= nesting:
                out.append("winE" if red.declared(c) is Player.ONE else "winA")
            else:
                out.append(name(c))
                stack.append(c)
        labels[name(h)] = a
        children[name(h)] = out
    return RegularTree.build(ANGP, t.i, t.k, labels, children, name((t, t.root)))


# ---------------------------------------------------------------------------
# the counterexample without negation

def build_counterexample_r(t: RegularTree) -> Tuple[RegularTree, RegularTree]:
    """The pair (tL, tR) whose signature order encodes whether player 1 wins t."""
    if t.alphabet != ALP or t.i != 0:
        raise TreeError("need a tree over alp with i = 0")
    if t.k < 1:
        raise TreeError("need k >= 1")
    labels = {f"t.{v}": a for v, a in t.labels.items()}
    children = {f"t.{v}": [f"t.{c}" for c in kids] for v, kids in t.children.items()}
    labels["one"], children["one"] = pri(0), ["one"]

    def chain(prefix, letters, end):
        nxt = end
        for n in range(len(letters) - 1, -1, -1):
            nm = f"{prefix}{n}"
            labels[nm], children[nm] = letters[n], [nxt]
            nxt = nm
        return nxt

    left = chain("l", [pri(1), pri(0)], "one")
    a = chain("a", [pri(1), pri(1), pri(0)], "one")
    b = chain("b", [pri(0)], f"t.{t.root}")
    labels["r"], children["r"] = choice(1), [a, b]
    tl = RegularTree.build(ALP, 0, t.k, dict(labels), dict(children), left)
    tr = RegularTree.build(ALP, 0, t.k, labels, children, "r")
    return tl, tr
