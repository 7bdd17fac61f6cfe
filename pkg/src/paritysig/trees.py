"""Ranked alphabets, regular trees and the structural operations on them.

A regular tree is a finite labelled graph with a root; the infinite tree it
presents is the unravelling from the root.  Node identifiers are strings.
"""

from __future__ import annotations

import enum
import re
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx


class Player(enum.IntEnum):
    ONE = 1
    TWO = 2

    @property
    def opponent(self) -> "Player":
        return Player.TWO if self is Player.ONE else Player.ONE

    def __str__(self) -> str:
        return str(int(self))


def player(value) -> Player:
    """Coerce 1/2, '1'/'2' or a Player into a Player."""
    return Player(int(value))


ALP, ANG, ANGP = "alp", "ang", "angp"
ALPHABETS = (ALP, ANG, ANGP)

PRI, CHOICE, NEG, CHOICE_PLUS = "pri", "choice", "neg", "choice+"
_ARITY = {PRI: 1, CHOICE: 2, NEG: 1, CHOICE_PLUS: 3}


@dataclass(frozen=True, order=True)
class Letter:
    """A letter of the ranked alphabet.

    ``arg`` is the priority for ``pri`` letters and the player numeral for the
    two choice kinds; it is 0 for ``neg``.
    """

    kind: str
    arg: int = 0

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ValueError(f"unknown letter kind {self.kind!r}")
        if self.kind in (CHOICE, CHOICE_PLUS) and self.arg not in (1, 2):
            raise ValueError(f"choice letter needs player 1 or 2, got {self.arg}")

    @property
    def arity(self) -> int:
        return _ARITY[self.kind]

    @property
    def player(self) -> Player:
        return Player(self.arg)

    @property
    def is_pri(self) -> bool:
        return self.kind == PRI

    @property
    def is_choice(self) -> bool:
        return self.kind == CHOICE

    @property
    def is_neg(self) -> bool:
        return self.kind == NEG

    @property
    def is_choice_plus(self) -> bool:
        return self.kind == CHOICE_PLUS

    def __str__(self) -> str:
        if self.kind == PRI:
            return f"pri{self.arg}"
        if self.kind == CHOICE:
            return f"p{self.arg}"
        if self.kind == CHOICE_PLUS:
            return f"p{self.arg}x"
        return "neg"


def pri(j: int) -> Letter:
    return Letter(PRI, j)


def choice(p) -> Letter:
    return Letter(CHOICE, int(p))


def choice_plus(p) -> Letter:
    return Letter(CHOICE_PLUS, int(p))


NEG_LETTER = Letter(NEG)


def letter_allowed(letter: Letter, alphabet: str, i: int, k: int) -> Optional[str]:
    """Return an error message if ``letter`` is not in the alphabet, else None."""
    if letter.kind == PRI and not i <= letter.arg <= k:
        return f"priority {letter.arg} out of range [{i},{k}]"
    if letter.kind == NEG and alphabet == ALP:
        return "neg is not allowed over alp"
    if letter.kind == CHOICE_PLUS and alphabet != ANGP:
        return "ternary choice is only allowed over angp"
    if letter.kind == CHOICE and alphabet == ANGP:
        return "binary choice is not allowed over angp"
    return None


def losing_numbers(i: int, k: int, p: Player) -> List[int]:
    """Priorities in [i,k] that are losing for ``p`` (odd for 1, even for 2)."""
    parity = 1 if p is Player.ONE else 0
    return [j for j in range(i, k + 1) if j % 2 == parity]


def is_losing(j: int, p: Player) -> bool:
    return j % 2 == (1 if p is Player.ONE else 0)


class TreeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RegularTree:
    alphabet: str
    i: int
    k: int
    labels: Mapping[str, Letter]
    children: Mapping[str, Tuple[str, ...]]
    root: str
    # scratch space for derived data (game solutions, signatures, ...)
    memo: Dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.alphabet not in ALPHABETS:
            raise TreeError(f"unknown alphabet {self.alphabet!r}")
        if not 0 <= self.i < self.k:
            raise TreeError(f"need 0 <= i < k, got i={self.i} k={self.k}")
        if set(self.labels) != set(self.children):
            raise TreeError("labels and children must have the same nodes")
        if self.root not in self.labels:
            raise TreeError(f"root {self.root!r} is not a node")
        for v, a in self.labels.items():
            msg = letter_allowed(a, self.alphabet, self.i, self.k)
            if msg:
                raise TreeError(f"node {v!r}: {msg}")
            kids = self.children[v]
            if len(kids) != a.arity:
                raise TreeError(f"node {v!r}: {a} needs {a.arity} children, got {len(kids)}")
            for c in kids:
                if c not in self.labels:
                    raise TreeError(f"node {v!r}: unknown child {c!r}")
        if len(self._reach(self.root)) != len(self.labels):
            raise TreeError("every node must be reachable from the root")

    @classmethod
    def build(cls, alphabet, i, k, labels, children, root) -> "RegularTree":
        """Build a tree keeping only nodes reachable from ``root``."""
        seen = {root}
        stack = [root]
        while stack:
            v = stack.pop()
            for c in children[v]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return cls(alphabet, i, k,
                   {v: labels[v] for v in labels if v in seen},
                   {v: tuple(children[v]) for v in children if v in seen},
                   root)

    def _reach(self, start: str) -> set:
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    @property
    def nodes(self) -> List[str]:
        return list(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def label(self, v: str) -> Letter:
        return self.labels[v]

    def child(self, v: str, d: int = 0) -> str:
        return self.children[v][d]

    def rooted_at(self, v: str) -> "RegularTree":
        """The subtree t|v as its own (pruned) regular tree."""
        if v == self.root:
            return self
        cache = self.memo.setdefault("rooted", {})
        if v not in cache:
            cache[v] = RegularTree.build(self.alphabet, self.i, self.k,
                                         self.labels, self.children, v)
        return cache[v]

    def node_at(self, position: Sequence[int]) -> str:
        """Graph node reached by walking ``position`` from the root."""
        v = self.root
        for d in position:
            kids = self.children[v]
            if not 0 <= d < len(kids):
                raise TreeError(f"position {tuple(position)} is not in the domain")
            v = kids[d]
        return v

    def label_at(self, position: Sequence[int]) -> Letter:
        return self.labels[self.node_at(position)]

    def graph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.labels)
        for v, kids in self.children.items():
            for d, c in enumerate(kids):
                g.add_edge(v, c, key=d, direction=d)
        return g

    def with_alphabet(self, alphabet: str) -> "RegularTree":
        return RegularTree(alphabet, self.i, self.k, dict(self.labels),
                           dict(self.children), self.root)

    def __repr__(self) -> str:
        return f"RegularTree({self.alphabet}, i={self.i}, k={self.k}, nodes={len(self)}, root={self.root!r})"


def isomorphic(a: RegularTree, b: RegularTree) -> bool:
    """Rooted, ordered, labelled graph isomorphism (deterministic walk)."""
    if (a.alphabet, a.i, a.k) != (b.alphabet, b.i, b.k) or len(a) != len(b):
        return False
    m = {a.root: b.root}
    stack = [a.root]
    while stack:
        v = stack.pop()
        w = m[v]
        if a.labels[v] != b.labels[w]:
            return False
        for c, d in zip(a.children[v], b.children[w]):
            if c in m:
                if m[c] != d:
                    return False
            else:
                m[c] = d
                stack.append(c)
    return len(set(m.values())) == len(m)


# ---------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*) |
    (?P<nl>\n) |
    (?P<int>\d+) |
    (?P<name>[A-Za-z_][A-Za-z0-9_.']*) |
    (?P<sym>[=;(),])
""", re.VERBOSE)

_KEYWORDS = {"let", "root", "alphabet", "neg", "p1", "p2", "p1x", "p2x"}
_PRI_NAME = re.compile(r"pri(\d+)$")
_HEADER_KEY = re.compile(r"([ik])$")


class ParseError(TreeError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


def _tokenize(text: str):
    line, col, pos = 1, 1, 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        elif kind != "ws":
            out.append((kind, val, line, col))
            col += len(val)
        else:
            col += len(val)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text: str, i: Optional[int], k: Optional[int], alphabet: Optional[str]):
        self.toks = _tokenize(text)
        self.pos = 0
        self.i, self.k, self.alphabet = i, k, alphabet
        # name -> expression tree: ("ref", name, tok) or (letter, [sub], tok)
        self.defs: Dict[str, tuple] = {}
        self.root: Optional[Tuple[str, tuple]] = None

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, val):
        t = self.next()
        if t[1] != val:
            raise ParseError(f"expected {val!r}, found {t[1] or 'end of input'!r}", t[2], t[3])
        return t

    def parse(self):
        if self.peek()[1] == "alphabet":
            self.header()
        if self.i is None or self.k is None:
            t = self.peek()
            raise ParseError("missing header 'alphabet <alp|ang|angp> i=INT k=INT'", t[2], t[3])
        if self.alphabet is None:
            self.alphabet = ANG
        while self.peek()[1] == "let":
            self.decl()
        t = self.peek()
        if t[1] != "root":
            raise ParseError(f"expected 'let' or 'root', found {t[1] or 'end of input'!r}", t[2], t[3])
        self.next()
        name = self.next()
        if name[0] != "name":
            raise ParseError("expected a name after 'root'", name[2], name[3])
        if self.peek()[1] == ";":
            self.next()
        t = self.peek()
        if t[0] != "eof":
            raise ParseError(f"unexpected {t[1]!r} after root declaration", t[2], t[3])
        self.root = name

    def header(self):
        self.next()
        t = self.next()
        if t[1] not in ALPHABETS:
            raise ParseError(f"unknown alphabet {t[1]!r}", t[2], t[3])
        self.alphabet = t[1]
        for key in ("i", "k"):
            t = self.next()
            if t[1] != key:
                raise ParseError(f"expected '{key}='", t[2], t[3])
            self.expect("=")
            n = self.next()
            if n[0] != "int":
                raise ParseError(f"expected an integer for {key}", n[2], n[3])
            setattr(self, key, int(n[1]))
        if not 0 <= self.i < self.k:
            raise ParseError(f"need 0 <= i < k, got i={self.i} k={self.k}", t[2], t[3])

    def decl(self):
        self.next()
        name = self.next()
        if name[0] != "name" or name[1] in _KEYWORDS or _PRI_NAME.match(name[1]):
            raise ParseError(f"bad definition name {name[1]!r}", name[2], name[3])
        if name[1] in self.defs:
            raise ParseError(f"duplicate definition of {name[1]!r}", name[2], name[3])
        self.expect("=")
        self.defs[name[1]] = self.expr()
        self.expect(";")

    def expr(self):
        t = self.next()
        if t[0] != "name":
            raise ParseError(f"expected an expression, found {t[1] or 'end of input'!r}", t[2], t[3])
        word = t[1]
        m = _PRI_NAME.match(word)
        if m:
            letter, n = pri(int(m.group(1))), 1
        elif word == "neg":
            letter, n = NEG_LETTER, 1
        elif word in ("p1", "p2"):
            letter, n = choice(int(word[1])), 2
        elif word in ("p1x", "p2x"):
            letter, n = choice_plus(int(word[1])), 3
        elif word in _KEYWORDS:
            raise ParseError(f"unexpected keyword {word!r}", t[2], t[3])
        else:
            return ("ref", word, t)
        msg = letter_allowed(letter, self.alphabet, self.i, self.k)
        if msg:
            raise ParseError(msg, t[2], t[3])
        self.expect("(")
        subs = [self.expr()]
        while self.peek()[1] == ",":
            self.next()
            subs.append(self.expr())
        self.expect(")")
        if len(subs) != n:
            raise ParseError(f"{word} takes {n} argument(s), got {len(subs)}", t[2], t[3])
        return (letter, subs, t)


def parse_tree_spec(text: str, i: Optional[int] = None, k: Optional[int] = None,
                    alphabet: Optional[str] = None) -> RegularTree:
    """Parse the equation-system text format into a RegularTree.

    ``i``/``k``/``alphabet`` act as defaults when the source has no header.
    Definitions unreachable from the root are dropped with a warning.
    """
    p = _Parser(text, i, k, alphabet)
    p.parse()
    labels: Dict[str, Letter] = {}
    children: Dict[str, List[str]] = {}

    def resolve(name, tok, trail=()):
        if name not in p.defs:
            raise ParseError(f"undefined name {name!r}", tok[2], tok[3])
        e = p.defs[name]
        if e[0] == "ref":
            if name in trail:
                raise ParseError(f"definition {name!r} is an unguarded alias cycle", tok[2], tok[3])
            return resolve(e[1], e[2], trail + (name,))
        return name

    def emit(node_id, e):
        letter, subs, _ = e
        labels[node_id] = letter
        kids = []
        for idx, sub in enumerate(subs):
            if sub[0] == "ref":
                kids.append(resolve(sub[1], sub[2]))
            else:
                cid = f"{node_id}.{idx}"
                emit(cid, sub)
                kids.append(cid)
        children[node_id] = kids

    for name, e in p.defs.items():
        if e[0] == "ref":
            resolve(name, e[2])
        else:
            emit(name, e)
    root = resolve(p.root[1], p.root)
    tree = RegularTree.build(p.alphabet, p.i, p.k, labels, children, root)
    dropped = [n for n in p.defs if p.defs[n][0] != "ref" and n not in tree.labels]
    if dropped:
        warnings.warn(f"unreachable definitions ignored: {', '.join(dropped)}", stacklevel=2)
    return tree


def to_text(t: RegularTree) -> str:
    """Serialize ``t`` so that parse_tree_spec returns an isomorphic graph."""
    order = _bfs_order(t)
    names = {v: f"n{idx}" for idx, v in enumerate(order)}
    lines = [f"alphabet {t.alphabet} i={t.i} k={t.k}"]
    for v in order:
        args = ", ".join(names[c] for c in t.children[v])
        lines.append(f"let {names[v]} = {t.labels[v]}({args});")
    lines.append(f"root {names[t.root]};")
    return "\n".join(lines) + "\n"


def _bfs_order(t: RegularTree) -> List[str]:
    order, seen = [t.root], {t.root}
    for v in order:
        for c in t.children[v]:
            if c not in seen:
                seen.add(c)
                order.append(c)
    return order


def to_dot(t: RegularTree, name: str = "tree") -> str:
    lines = [f"digraph {name} {{"]
    for v in _bfs_order(t):
        shape = "doublecircle" if v == t.root else "circle"
        lines.append(f'  "{v}" [label="{t.labels[v]}", shape={shape}];')
    for v in _bfs_order(t):
        for d, c in enumerate(t.children[v]):
            lines.append(f'  "{v}" -> "{c}" [label="{d}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# structural operations

def shave(r: RegularTree) -> RegularTree:
    """Replace every ternary choice by the binary one on its first two children."""
    labels, children = {}, {}
    for v, a in r.labels.items():
        if a.is_choice_plus:
            labels[v] = choice(a.arg)
            children[v] = r.children[v][:2]
        else:
            labels[v] = a
            children[v] = r.children[v]
    alphabet = ANG if r.alphabet == ANGP else r.alphabet
    return RegularTree.build(alphabet, r.i, r.k, labels, children, r.root)


def _cyclic_nodes(adj: Dict[str, List[str]]) -> set:
    g = nx.DiGraph()
    g.add_nodes_from(adj)
    g.add_edges_from((v, c) for v, kids in adj.items() for c in kids)
    out = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1:
            out |= comp
        else:
            (v,) = comp
            if g.has_edge(v, v):
                out.add(v)
    return out


def is_well_formed(t: RegularTree) -> bool:
    """No branch carries infinitely many neg (ignoring branches through infinitely many third children)."""
    hit = t.memo.get("well_formed")
    if hit is not None:
        return hit
    if t.alphabet == ANGP:
        adj = {v: [c for d, c in enumerate(kids) if not (t.labels[v].is_choice_plus and d == 2)]
               for v, kids in t.children.items()}
    else:
        adj = {v: list(kids) for v, kids in t.children.items()}
    hit = t.memo["well_formed"] = not any(t.labels[v].is_neg for v in _cyclic_nodes(adj))
    return hit


def is_guarded(t: RegularTree) -> bool:
    """Every cycle of the graph passes through a priority node."""
    adj = {v: ([] if t.labels[v].is_pri else list(kids)) for v, kids in t.children.items()}
    return not (_cyclic_nodes(adj) - {v for v in t.labels if t.labels[v].is_pri})


def switched(t: RegularTree, position: Sequence[int]) -> bool:
    """Odd number of neg letters strictly above ``position``."""
    v = t.root
    count = 0
    for d in position:
        kids = t.children[v]
        if not 0 <= d < len(kids):
            raise TreeError(f"position {tuple(position)} is not in the domain")
        if t.labels[v].is_neg:
            count += 1
        v = kids[d]
    return count % 2 == 1


def pad_priorities(t: RegularTree) -> RegularTree:
    """Insert pri_k between any two adjacent non-priority nodes.

    One padding node is shared per target so the graph stays small.
    """
    labels = dict(t.labels)
    children = {v: list(kids) for v, kids in t.children.items()}
    pads: Dict[str, str] = {}
    for v in t.labels:
        if t.labels[v].is_pri:
            continue
        for d, c in enumerate(children[v]):
            if t.labels[c].is_pri:
                continue
            if c not in pads:
                pid = f"{c}^pad"
                while pid in labels:
                    pid += "'"
                pads[c] = pid
                labels[pid] = pri(t.k)
                children[pid] = [c]
            children[v][d] = pads[c]
    return RegularTree.build(t.alphabet, t.i, t.k, labels, children, t.root)


# ---------------------------------------------------------------------------
# lazy trees

class LazyTree:
    """A possibly non-regular tree given by a handle-expansion function.

    ``expand(handle)`` must return ``(letter, child_handles)`` and be
    deterministic.  Results are memoized per handle.
    """

    def __init__(self, root, expand, alphabet: str, i: int, k: int):
        self.root = root
        self._expand = expand
        self.alphabet, self.i, self.k = alphabet, i, k
        self._memo: Dict = {}

    def query(self, handle):
        hit = self._memo.get(handle)
        if hit is None:
            hit = self._expand(handle)
            hit = (hit[0], tuple(hit[1]))
            self._memo[handle] = hit
        return hit

    def letter(self, handle) -> Letter:
        return self.query(handle)[0]

    def kids(self, handle) -> Tuple:
        return self.query(handle)[1]

    def handle_at(self, position: Sequence[int]):
        h = self.root
        for d in position:
            kids = self.kids(h)
            if not 0 <= d < len(kids):
                raise TreeError(f"position {tuple(position)} is not in the domain")
            h = kids[d]
        return h

    def label_at(self, position: Sequence[int]) -> Letter:
        return self.letter(self.handle_at(position))

    def memo_size(self) -> int:
        return len(self._memo)


def lazy_of(t: RegularTree) -> LazyTree:
    return LazyTree(t.root, lambda v: (t.labels[v], t.children[v]), t.alphabet, t.i, t.k)


@dataclass
class PrefixNode:
    """Node of a finite prefix.  ``children`` is None at the depth cut-off."""

    letter: Letter
    handle: object
    children: Optional[List["PrefixNode"]]

    def positions(self, prefix: Tuple[int, ...] = ()) -> Iterator[Tuple[Tuple[int, ...], "PrefixNode"]]:
        yield prefix, self
        if self.children:
            for d, c in enumerate(self.children):
                yield from c.positions(prefix + (d,))

    def shape(self):
        """Hashable (letter, children-shapes) view, without handles."""
        if self.children is None:
            return (str(self.letter), None)
        return (str(self.letter), tuple(c.shape() for c in self.children))


def expand_prefix(t: LazyTree, depth: int) -> PrefixNode:
    """Restriction of ``t`` to positions of length <= depth, as nested nodes."""

    def go(h, d):
        letter, kids = t.query(h)
        if d == depth:
            return PrefixNode(letter, h, None)
        return PrefixNode(letter, h, [go(c, d + 1) for c in kids])

    return go(t.root, 0)


def prefix_handles(t: LazyTree, depth: int, follow=None) -> Dict[object, int]:
    """Distinct handles within ``depth`` steps of the root, with their least depth.

    This is the shared (DAG) form of expand_prefix, which keeps large depths
    tractable.  ``follow(handle, direction)`` may veto edges.
    """
    best = {t.root: 0}
    frontier = [t.root]
    for d in range(depth):
        nxt = []
        for h in frontier:
            for idx, c in enumerate(t.kids(h)):
                if follow is not None and not follow(h, idx):
                    continue
                if c not in best:
                    best[c] = d + 1
                    nxt.append(c)
        frontier = nxt
        if not frontier:
            break
    return best


def positions_up_to(t: RegularTree, depth: int) -> Iterator[Tuple[int, ...]]:
    stack = [((), t.root)]
    while stack:
        pos, v = stack.pop()
        yield pos
        if len(pos) < depth:
            for d, c in enumerate(t.children[v]):
                stack.append((pos + (d,), c))
