import warnings

import pytest
from hypothesis import given, strategies as st

from conftest import tree_from_seed
from paritysig.fixtures import fig4, fig7
from paritysig.trees import (ALP, ANG, ANGP, LazyTree, ParseError, Player, RegularTree, TreeError,
                             choice, choice_plus, expand_prefix, is_guarded, is_well_formed,
                             isomorphic, lazy_of, losing_numbers, pad_priorities, parse_tree_spec,
                             positions_up_to, prefix_handles, pri, shave, switched, to_dot, to_text,
                             NEG_LETTER)


def test_losing_numbers():
    assert losing_numbers(0, 5, Player.ONE) == [1, 3, 5]
    assert losing_numbers(0, 5, Player.TWO) == [0, 2, 4]
    assert losing_numbers(1, 3, Player.TWO) == [2]


def test_letters():
    assert str(pri(3)) == "pri3"
    assert str(choice(1)) == "p1" and choice(1).arity == 2
    assert str(choice_plus(2)) == "p2x" and choice_plus(2).arity == 3
    assert NEG_LETTER.arity == 1 and str(NEG_LETTER) == "neg"


def test_parse_fig7():
    t = fig7()
    assert (t.alphabet, t.i, t.k) == (ANG, 1, 3)
    assert t.labels[t.root] == choice(1)
    left, right = t.children[t.root]
    assert t.labels[left] == pri(3) and t.children[left] == (t.root,)
    assert len(t) == 6


def test_anonymous_and_alias():
    t = parse_tree_spec("alphabet ang i=0 k=2\nlet a = p1(b, pri2(a));\nlet b = c;\nlet c = pri1(c);\nroot a;")
    assert len(t) == 3
    assert t.labels[t.children["a"][0]] == pri(1)


def test_header_defaults():
    t = parse_tree_spec("let a = pri0(a);\nroot a;", i=0, k=2, alphabet=ALP)
    assert (t.alphabet, t.i, t.k) == (ALP, 0, 2)


@pytest.mark.parametrize("text, line", [
    ("alphabet ang i=0 k=2\nlet a = pri7(a);\nroot a;", 2),
    ("alphabet ang i=0 k=2\nlet a = p1(a);\nroot a;", 2),
    ("alphabet ang i=0 k=2\nlet a = pri1(b);\nroot a;", 2),
    ("alphabet alp i=0 k=2\nlet a = neg(a);\nroot a;", 2),
    ("alphabet ang i=0 k=2\nlet a = b;\nlet b = a;\nroot a;", 3),
    ("alphabet ang i=0 k=2\nlet a = pri1(a)\nroot a;", 3),
])
def test_parse_errors_have_positions(text, line):
    with pytest.raises(ParseError) as exc:
        parse_tree_spec(text)
    assert exc.value.line == line and exc.value.col >= 1


def test_unreachable_definitions_warn():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        t = parse_tree_spec("alphabet ang i=0 k=2\nlet a = pri0(a);\nlet z = pri1(z);\nroot a;")
    assert len(t) == 1 and any("unreachable" in str(w.message) for w in caught)


def test_constructor_validation():
    with pytest.raises(TreeError):
        RegularTree(ANG, 0, 2, {"a": pri(0)}, {"a": ("a", "a")}, "a")
    with pytest.raises(TreeError):
        RegularTree(ANG, 0, 2, {"a": pri(0), "b": pri(0)}, {"a": ("a",), "b": ("b",)}, "a")
    with pytest.raises(TreeError):
        RegularTree(ANG, 2, 2, {"a": pri(2)}, {"a": ("a",)}, "a")


@given(st.integers(0, 10**6), st.sampled_from([ALP, ANG, ANGP]))
def test_text_round_trip(seed, alphabet):
    t = tree_from_seed(seed, alphabet=alphabet, well_formed=None, guarded=False)
    assert isomorphic(parse_tree_spec(to_text(t)), t)


def test_isomorphic_rejects_relabel():
    a = parse_tree_spec("alphabet ang i=0 k=2\nlet a = p1(a, b);\nlet b = pri0(b);\nroot a;")
    b = parse_tree_spec("alphabet ang i=0 k=2\nlet a = p1(b, a);\nlet b = pri0(b);\nroot a;")
    assert not isomorphic(a, b) and isomorphic(a, a)


def test_well_formed_and_guarded():
    neg_cycle = parse_tree_spec("alphabet ang i=0 k=2\nlet a = neg(pri0(a));\nroot a;")
    assert not is_well_formed(neg_cycle) and is_guarded(neg_cycle)
    choice_cycle = parse_tree_spec("alphabet ang i=0 k=2\nlet a = p1(a, b);\nlet b = pri0(b);\nroot a;")
    assert is_well_formed(choice_cycle) and not is_guarded(choice_cycle)
    # neg cycle through third children is allowed
    r = parse_tree_spec("alphabet angp i=0 k=2\nlet a = p1x(b, b, neg(a));\nlet b = pri0(b);\nroot a;")
    assert is_well_formed(r)
    assert not is_well_formed(parse_tree_spec(
        "alphabet angp i=0 k=2\nlet a = p1x(neg(a), b, b);\nlet b = pri0(b);\nroot a;"))


def test_shave():
    r = parse_tree_spec("alphabet angp i=0 k=2\nlet a = p1x(b, c, d);\nlet b = pri0(b);\n"
                        "let c = pri1(c);\nlet d = pri2(d);\nroot a;")
    s = shave(r)
    assert s.alphabet == ANG and s.labels["a"] == choice(1) and s.children["a"] == ("b", "c")
    assert "d" not in s.labels


def test_switched():
    t = parse_tree_spec("alphabet ang i=0 k=2\nlet a = neg(b);\nlet b = p1(a, c);\nlet c = pri0(c);\nroot a;")
    assert not switched(t, ())
    assert switched(t, (0,))
    assert not switched(t, (0, 0, 0))
    with pytest.raises(TreeError):
        switched(t, (1,))


def test_pad_priorities_keeps_winner_and_guards():
    from paritysig.games import node_winners
    t = parse_tree_spec("alphabet ang i=0 k=3\nlet a = p1(a, b);\nlet b = neg(c);\nlet c = p2(c, d);\n"
                        "let d = pri2(d);\nroot a;")
    p = pad_priorities(t)
    assert is_guarded(p)
    assert all(not (p.labels[v].is_pri is False and p.labels[c].is_pri is False)
               for v in p.labels for c in p.children[v])
    assert node_winners(p)[p.root] is node_winners(t)[t.root]


@given(st.integers(0, 10**6))
def test_padding_preserves_winner(seed):
    from paritysig.games import winner_of
    t = tree_from_seed(seed, guarded=False)
    assert winner_of(pad_priorities(t)) is winner_of(t)


def test_lazy_tree_and_prefixes():
    t = fig7()
    lazy = lazy_of(t)
    assert lazy.label_at(()) == choice(1)
    assert lazy.label_at((0,)) == pri(3)
    p = expand_prefix(lazy, 3)
    assert sum(1 for _ in p.positions()) == len(list(positions_up_to(t, 3)))
    h = prefix_handles(lazy, 50)
    assert set(h) == set(t.labels) and h[t.root] == 0


def test_lazy_tree_memoizes():
    calls = []

    def expand(n):
        calls.append(n)
        return pri(0), [n + 1]

    lazy = LazyTree(0, expand, ANG, 0, 2)
    lazy.label_at((0, 0, 0))
    lazy.label_at((0, 0, 0))
    assert calls == [0, 1, 2, 3] and lazy.memo_size() == 4


def test_dot():
    out = to_dot(fig4())
    assert out.startswith("digraph") and "->" in out
