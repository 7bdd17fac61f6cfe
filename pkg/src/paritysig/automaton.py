"""The unambiguous automaton U over the extended alphabet.

A state is (priority, declared winner, direction).  Runs are decided on
finite product games.  Runs over a regular tree are presented per graph
node: the declared winner and the direction depend on the node, and the
priority is fixed by the parent's transition, i.e. by the incoming edge.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, NamedTuple, Optional, Tuple

from .games import (ParityGame, PositionalStrategy, check_strategy_winning, induced_game,
                    losing_cycle_exists, node_winners, solve_zielonka)
from .trees import (ANGP, Letter, Player, RegularTree, TreeError, is_well_formed, shave)

D, L, R = "D", "L", "R"
DIRS = (D, L, R)

# priority arithmetic for the pri_j transition and the kept choice children
SHIFTED = "shifted"   # j+P+1 and k+P+1 (default; see README)
SPEC = "spec"         # j+2 for player 1, j+1 for player 2; k+2 for choices
LITERAL = "literal"   # j+P+1 and k+2


class UState(NamedTuple):
    prio: int
    declared: Player
    dir: str

    def __str__(self):
        return f"({self.prio},{int(self.declared)},{self.dir})"


Shape = Tuple[FrozenSet[UState], ...]


@dataclass(frozen=True)
class UAutomaton:
    i: int
    k: int
    arithmetic: str = SHIFTED
    free_third: bool = False  # mutation: third child no longer observed

    def __post_init__(self):
        if not 0 <= self.i < self.k:
            raise ValueError("need 0 <= i < k")
        if self.arithmetic not in (SHIFTED, SPEC, LITERAL):
            raise ValueError(f"unknown arithmetic {self.arithmetic!r}")

    @property
    def max_priority(self) -> int:
        return self.k + 2 if self.arithmetic == SPEC else self.k + 3

    @property
    def states(self) -> List[UState]:
        return [UState(q, p, d) for q in range(self.max_priority + 1) for p in Player for d in DIRS]

    def initial_states(self, p: Optional[Player] = None) -> List[UState]:
        players = list(Player) if p is None else [Player(p)]
        return [UState(0, q, d) for q in players for d in DIRS]

    def prio(self, j: int, p: Player) -> int:
        if self.arithmetic == SPEC:
            return j + 2 if p is Player.ONE else j + 1
        return j + int(p) + 1

    def kept_choice(self, p: Player) -> int:
        return self.k + int(p) + 1 if self.arithmetic == SHIFTED else self.k + 2

    def _any(self, prio: int, p: Optional[Player] = None) -> FrozenSet[UState]:
        players = list(Player) if p is None else [p]
        return frozenset(UState(prio, q, d) for q in players for d in DIRS)

    def shapes(self, state: UState, letter: Letter) -> List[Shape]:
        """Transitions from ``state`` over ``letter``, one set of child states per direction.

        Every transition of the automaton is a choice of one state from each set.
        """
        q, p, d = state
        if letter.is_neg:
            return [(self._any(1, p.opponent),)] if d == D else []
        if letter.is_pri:
            return [(self._any(self.prio(letter.arg, p), p),)] if d == D else []
        if not letter.is_choice_plus:
            return []
        kc = self._any(self.kept_choice(p), p)
        if letter.player is not p:
            return [(kc, kc, self._any(0))] if d == D else []
        if d == L:
            third = self._any(0) if self.free_third else self._any(0, Player.ONE)
            return [(kc, self._any(2), third)]
        if d == R:
            third = self._any(0) if self.free_third else self._any(0, Player.TWO)
            return [(self._any(2), kc, third)]
        return []

    def transitions(self, state: UState, letter: Letter) -> Iterator[Tuple[UState, ...]]:
        for shape in self.shapes(state, letter):
            for combo in itertools.product(*(sorted(x) for x in shape)):
                yield combo


def build_U(i: int, k: int, arithmetic: str = SHIFTED) -> UAutomaton:
    return UAutomaton(i, k, arithmetic)


def mutant_U(i: int, k: int) -> UAutomaton:
    """U with the direction no longer tied to the third child's declared winner."""
    return UAutomaton(i, k, SHIFTED, free_third=True)


# ---------------------------------------------------------------------------
# acceptance

def _automaton_for(r: RegularTree, u: Optional[UAutomaton]) -> UAutomaton:
    if r.alphabet != ANGP:
        raise TreeError("the automaton reads trees over angp")
    return build_U(r.i, r.k) if u is None else u


def acceptance_game(r: RegularTree, u: Optional[UAutomaton] = None) -> ParityGame:
    """Product game: player 1 picks transitions and child states, player 2 picks directions.

    Positions ('s', v, q) carry the state priority; the intermediate
    positions copy it, so the least priority on a cycle is a state priority.
    """
    u = _automaton_for(r, u)
    key = ("acceptance", u)
    if key in r.memo:
        return r.memo[key]
    owner, edges, prio = {}, {}, {}
    sink = ("sink",)
    owner[sink], edges[sink], prio[sink] = Player.ONE, (sink,), 1
    for v in r.labels:
        letter = r.labels[v]
        kids = r.children[v]
        for q in u.states:
            s = ("s", v, q)
            owner[s], prio[s] = Player.ONE, q.prio
            shapes = u.shapes(q, letter)
            succ = []
            for n, shape in enumerate(shapes):
                tpos = ("t", v, q, n)
                owner[tpos], prio[tpos] = Player.TWO, q.prio
                tsucc = []
                for d, allowed in enumerate(shape):
                    cpos = ("c", v, q, n, d)
                    owner[cpos], prio[cpos] = Player.ONE, q.prio
                    edges[cpos] = tuple(("s", kids[d], x) for x in sorted(allowed))
                    tsucc.append(cpos)
                edges[tpos] = tuple(tsucc)
                succ.append(tpos)
            edges[s] = tuple(succ) if succ else (sink,)
    game = ParityGame(owner, edges, prio, ("s", r.root, u.initial_states()[0]))
    r.memo[key] = game
    return game


def accepting_states(r: RegularTree, u: Optional[UAutomaton] = None) -> Dict[Tuple[str, UState], bool]:
    """For every (node, state): does an accepting run of r|node start in that state?"""
    u = _automaton_for(r, u)
    key = ("accepting", u)
    if key not in r.memo:
        game = acceptance_game(r, u)
        sol = solve_zielonka(game)
        r.memo[key] = {(v, q): sol.winner[("s", v, q)] is Player.ONE
                       for v in r.labels for q in u.states}
    return r.memo[key]


def accepting_run_exists(r: RegularTree, q0: UState, u: Optional[UAutomaton] = None,
                         node: Optional[str] = None) -> bool:
    return accepting_states(r, u)[(r.root if node is None else node, UState(*q0))]


def member_L(r: RegularTree, p: Player, u: Optional[UAutomaton] = None) -> bool:
    """r is accepted by U with initial states restricted to (0, P, *)."""
    u = _automaton_for(r, u)
    return any(accepting_run_exists(r, q, u) for q in u.initial_states(p))


# ---------------------------------------------------------------------------
# runs

@dataclass
class RunLabeling:
    """A run over a regular tree: per-node declared winner and direction.

    The priority of a node is determined by the parent's state and the
    direction taken; ``root_priority`` covers the root.
    """

    tree: RegularTree
    automaton: UAutomaton
    declared: Dict[str, Player]
    direction: Dict[str, str]
    root_priority: int = 0

    def entry_priority(self, parent: str, d: int) -> int:
        u = self.automaton
        a = self.tree.labels[parent]
        p = self.declared[parent]
        if a.is_neg:
            return 1
        if a.is_pri:
            return u.prio(a.arg, p)
        if d == 2:
            return 0
        if a.player is not p:
            return u.kept_choice(p)
        chosen = 0 if self.direction[parent] == L else 1
        return u.kept_choice(p) if d == chosen else 2

    def state(self, node: str, incoming: Optional[Tuple[str, int]]) -> UState:
        q = self.root_priority if incoming is None else self.entry_priority(*incoming)
        return UState(q, self.declared[node], self.direction[node])

    def run_graph(self) -> Dict[Tuple, Tuple[Tuple, ...]]:
        """Edges between (node, incoming edge) run positions reachable from the root."""
        start = (self.tree.root, None)
        out = {}
        stack = [start]
        while stack:
            x = stack.pop()
            if x in out:
                continue
            v = x[0]
            nxt = tuple((c, (v, d)) for d, c in enumerate(self.tree.children[v]))
            out[x] = nxt
            stack.extend(n for n in nxt if n not in out)
        return out

    def violations(self) -> List[str]:
        """Nodes where the labelling does not follow a transition."""
        bad = []
        for x in self.run_graph():
            v, inc = x
            st = self.state(v, inc)
            kids = tuple(self.state(c, (v, d)) for d, c in enumerate(self.tree.children[v]))
            if not any(all(kid in allowed for kid, allowed in zip(kids, shape))
                       for shape in self.automaton.shapes(st, self.tree.labels[v])):
                bad.append(f"node {v} in state {st}: no transition to {', '.join(map(str, kids))}")
        return bad

    def is_valid(self) -> bool:
        return not self.violations()

    def states(self) -> Dict[Tuple, UState]:
        return {x: self.state(*x) for x in self.run_graph()}


def shaved_winners(r: RegularTree) -> Dict[str, Player]:
    """Winner of G(shave(r|v)) for every node v of r."""
    key = "shaved_winners"
    if key in r.memo:
        return r.memo[key]
    out: Dict[str, Player] = {}
    for v in r.labels:
        if v in out:
            continue
        out.update(node_winners(shave(r.rooted_at(v))))
    r.memo[key] = out
    return out


def canonical_run(r: RegularTree, u: Optional[UAutomaton] = None) -> RunLabeling:
    """Declare the shaved winner everywhere; steer by the third child's winner."""
    u = _automaton_for(r, u)
    if not is_well_formed(r):
        raise TreeError("tree is not well-formed")
    declared = shaved_winners(r)
    direction = {}
    for v, a in r.labels.items():
        if a.is_choice_plus and a.player is declared[v]:
            third = r.children[v][2]
            direction[v] = L if declared[third] is Player.ONE else R
        else:
            direction[v] = D
    run = RunLabeling(r, u, declared, direction)
    bad = run.violations()
    if bad:
        raise ValueError("the canonical labelling is not a run: " + bad[0])
    return run


def rederive_runs(r: RegularTree, declared: Dict[str, Player], u: Optional[UAutomaton] = None) -> List[RunLabeling]:
    """Every valid run with the given declared winners (at most one is expected)."""
    u = _automaton_for(r, u)
    options = {}
    for v, a in r.labels.items():
        kids = r.children[v]
        ok = []
        for d in DIRS:
            for shape in u.shapes(UState(0, declared[v], d), a):
                if all(any(s.declared is declared[c] for s in allowed) for c, allowed in zip(kids, shape)):
                    ok.append(d)
                    break
        options[v] = ok
    nodes = list(r.labels)
    out = []
    for combo in itertools.product(*(options[v] for v in nodes)):
        run = RunLabeling(r, u, dict(declared), dict(zip(nodes, combo)))
        if run.is_valid():
            out.append(run)
    return out


def check_run_accepting(r: RegularTree, run: RunLabeling, cross_check: bool = True) -> bool:
    """Parity check on the run graph, optionally cross-checked against the strategies it encodes."""
    bad = run.violations()
    if bad:
        raise ValueError("invalid run labelling: " + bad[0])
    graph = run.run_graph()
    states = run.states()
    game = ParityGame({x: Player.TWO for x in graph}, graph,
                      {x: states[x].prio for x in graph}, (r.root, None))
    accepted = not losing_cycle_exists(game, Player.ONE)
    if cross_check:
        by_strategies = is_well_formed(r) and all(
            _rho_strategy_wins(r, run, v) for v in {x[0] for x in graph})
        if by_strategies != accepted:
            raise AssertionError("run acceptance disagrees with the strategy characterisation")
    return accepted


def _rho_strategy_wins(r: RegularTree, run: RunLabeling, v: str) -> bool:
    try:
        strat, tree = extract_rho_strategy(r, run, v, with_tree=True)
    except ValueError:
        return False
    return check_strategy_winning(induced_game(tree), strat)


def extract_rho_strategy(r: RegularTree, run: RunLabeling, u: str, with_tree: bool = False):
    """Strategy of the declared winner at ``u`` in G(shave(r|u)) read off the directions.

    Checks along the way that kept positions carry the declared winner and
    switched ones its opponent.
    """
    tree = shave(r.rooted_at(u))
    if not is_well_formed(tree):
        raise ValueError("shaved subtree is not well-formed")
    game = induced_game(tree)
    p = run.declared[u]
    moves = {}
    stack = [game.initial]
    seen = set()
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        v, b = x
        want = p if b == 0 else p.opponent
        if run.declared[v] is not want:
            raise ValueError(f"position {x} declares {int(run.declared[v])}, expected {int(want)}")
        nxt = game.edges[x]
        if game.owner[x] is p and len(nxt) > 1:
            dr = run.direction[v]
            if dr not in (L, R):
                raise ValueError(f"no direction at controlled position {x}")
            nxt = (nxt[0 if dr == L else 1],)
            moves[x] = nxt[0]
        stack.extend(nxt)
    strat = PositionalStrategy(p, moves)
    return (strat, tree) if with_tree else strat


# ---------------------------------------------------------------------------
# unambiguity

def ambiguity_witness(r: RegularTree, u: Optional[UAutomaton] = None) -> Optional[str]:
    """Describe where two accepting runs split, or None if there is at most one.

    Two distinct accepting runs agree down to some node where the same state
    admits two different transitions with accepting continuations (or they
    already differ at the root).  We search the (node, state) pairs that lie
    on some accepting run.
    """
    u = _automaton_for(r, u)
    acc = accepting_states(r, u)
    roots = [q for q in u.initial_states() if acc[(r.root, q)]]
    if len(roots) > 1:
        return f"root admits accepting runs from {', '.join(map(str, roots))}"
    usable = {(r.root, q) for q in roots}
    stack = list(usable)
    while stack:
        v, q = stack.pop()
        kids = r.children[v]
        good = 0
        for shape in u.shapes(q, r.labels[v]):
            options = [[x for x in allowed if acc[(c, x)]] for c, allowed in zip(kids, shape)]
            count = 1
            for o in options:
                count *= len(o)
            good += count
            if count:
                for c, o in zip(kids, options):
                    for x in o:
                        if (c, x) not in usable:
                            usable.add((c, x))
                            stack.append((c, x))
        if good > 1:
            return f"node {v} in state {q} has {good} accepting transitions"
    return None


def check_unambiguous(r: RegularTree, u: Optional[UAutomaton] = None) -> bool:
    return ambiguity_witness(r, u) is None


def run_to_dot(run: RunLabeling) -> str:
    lines = ["digraph run {"]
    names = {}
    for n, (x, st) in enumerate(run.states().items()):
        names[x] = f"r{n}"
        lines.append(f'  r{n} [label="{x[0]}: {run.tree.labels[x[0]]}\\n{st}"];')
    for x, nxt in run.run_graph().items():
        for d, y in enumerate(nxt):
            lines.append(f'  {names[x]} -> {names[y]} [label="{d}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
