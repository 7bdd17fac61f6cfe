"""Golden example trees and seeded random tree generators."""

from __future__ import annotations

import random
from typing import Dict, Optional, Tuple

from .trees import (ALP, ANG, ANGP, NEG_LETTER, Letter, RegularTree, choice,
                    choice_plus, is_guarded, is_well_formed, parse_tree_spec, pri)

# The example tree for active sets (i=0, k=5).  The node names follow the
# figure: w is the first binary choice, u1/u2/u3 head the three branches.
FIG4 = """\
alphabet ang i=0 k=5
let t  = pri5(pri4(pri5(pri3(w))));
let w  = p2(x, y);
let x  = p2(u1, u2);
let y  = pri4(u3);
let u1 = pri3(pri1(pri3(pri0(pri5(pri3(pri0(t1)))))));
let u2 = pri2(pri3(pri1(pri1(neg(pri1(pri0(t2)))))));
let u3 = pri3(pri3(pri1(pri4(pri2(pri3(pri0(t1)))))));
let t1 = pri0(t1);
let t2 = pri1(t2);
root t;
"""

# Signatures against ranks (i=1, k=3).
FIG7 = """\
alphabet ang i=1 k=3
let t  = p1(l, t0);
let l  = pri3(t);
let t0 = pri2(pri3(pri3(t1)));
let t1 = pri2(t1);
root t;
"""

FIG7_T0 = """\
alphabet ang i=1 k=3
let t0 = pri2(pri3(pri3(t1)));
let t1 = pri2(t1);
root t0;
"""

FIG7_PRI3_T0 = """\
alphabet ang i=1 k=3
let s  = pri3(t0);
let t0 = pri2(pri3(pri3(t1)));
let t1 = pri2(t1);
root s;
"""

FIG4_EXPECTED = {
    "s": {"u1": (1, 0, 0), "u2": (2, 0, 0), "u3": (1, 2, 0), "w": (2, 0, 0), "root": (2, 1, 1)},
    "sigma": {"t": (2, 1, 1), "u1": (1, 1, 0), "u2": (2, 0, 0)},
}

# tree positions of the named nodes of FIG4
FIG4_POSITIONS = {
    "root": (),
    "w": (0, 0, 0, 0),
    "u1": (0, 0, 0, 0, 0, 0),
    "u2": (0, 0, 0, 0, 0, 1),
    "u3": (0, 0, 0, 0, 1, 0),
}


def fig4() -> RegularTree:
    return parse_tree_spec(FIG4)


def fig7() -> RegularTree:
    return parse_tree_spec(FIG7)


def fig7_t0() -> RegularTree:
    return parse_tree_spec(FIG7_T0)


def fig7_pri3_t0() -> RegularTree:
    return parse_tree_spec(FIG7_PRI3_T0)


def fig6(t: RegularTree) -> Tuple[RegularTree, RegularTree]:
    from .reduction import build_counterexample_r
    return build_counterexample_r(t)


# a winning and a losing tree over alp(0,2) used for the counterexample fixture
FIG6_SOURCES = {
    "win": "alphabet alp i=0 k=2\nlet a = p1(b, c);\nlet b = pri1(b);\nlet c = pri2(a);\nroot a;\n",
    "lose": "alphabet alp i=0 k=2\nlet a = p2(b, c);\nlet b = pri1(b);\nlet c = pri2(a);\nroot a;\n",
}


def fixture_sources() -> Dict[str, str]:
    """All fixture files written by the ``fixtures`` command."""
    from .trees import to_text
    out = {
        "fig4.tree": FIG4,
        "fig7.tree": FIG7,
        "fig7_t0.tree": FIG7_T0,
        "fig7_pri3t0.tree": FIG7_PRI3_T0,
    }
    for name, src in FIG6_SOURCES.items():
        t = parse_tree_spec(src)
        tl, tr = fig6(t)
        out[f"fig6_{name}_t.tree"] = src
        out[f"fig6_{name}_tL.tree"] = to_text(tl)
        out[f"fig6_{name}_tR.tree"] = to_text(tr)
    return out


def all_fixture_trees() -> Dict[str, RegularTree]:
    return {name[:-5]: parse_tree_spec(src) for name, src in fixture_sources().items()}


# ---------------------------------------------------------------------------
# random generators

def _random_letter(rng: random.Random, alphabet: str, i: int, k: int, neg_rate: float,
                   choice_rate: float) -> Letter:
    x = rng.random()
    if alphabet != ALP and x < neg_rate:
        return NEG_LETTER
    if x < neg_rate + choice_rate:
        p = rng.choice((1, 2))
        return choice_plus(p) if alphabet == ANGP else choice(p)
    return pri(rng.randint(i, k))


def random_tree(rng: random.Random, n: int, i: int, k: int, alphabet: str = ANG,
                neg_rate: float = 0.12, choice_rate: float = 0.35,
                well_formed: Optional[bool] = True, guarded: bool = True,
                tries: int = 10000) -> RegularTree:
    """Random regular tree with at most ``n`` nodes (rejection sampling).

    ``well_formed=None`` accepts either; ``guarded`` asks for a priority on
    every cycle (needed for signatures).
    """
    for _ in range(tries):
        size = rng.randint(1, n)
        names = [f"v{m}" for m in range(size)]
        labels = {v: _random_letter(rng, alphabet, i, k, neg_rate, choice_rate) for v in names}
        children = {}
        for m, v in enumerate(names):
            kids = []
            for d in range(labels[v].arity):
                # bias edges forward so larger graphs stay connected
                if m + 1 < size and d == 0 and rng.random() < 0.6:
                    kids.append(names[m + 1])
                else:
                    kids.append(rng.choice(names))
            children[v] = kids
        t = RegularTree.build(alphabet, i, k, labels, children, names[0])
        if well_formed is not None and is_well_formed(t) != well_formed:
            continue
        if guarded and not is_guarded(t):
            continue
        return t
    raise RuntimeError("could not sample a tree with the requested properties")


INDEX_PAIRS = [(0, 2), (1, 3), (0, 3), (0, 5)]
