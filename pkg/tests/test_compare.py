import random

import pytest
from hypothesis import given, strategies as st

from paritysig.compare import (AFTER_EL, EXISTS, FORALL, ComparePosition, build_compare_game,
                               canonical_twin_trees, check_claim61, check_claim61_everywhere,
                               compare_signatures, ell_monotone, form_of_plays_violations,
                               honest_safety_violations, quasi_moves, quasi_progress_violations,
                               unravel_cp)
from paritysig.fixtures import INDEX_PAIRS, fig7_pri3_t0, fig7_t0, random_tree
from paritysig.games import member_W, winner_of
from paritysig.trees import ANG, Player, TreeError, is_well_formed, parse_tree_spec


def pair_from_seed(seed, n=5):
    rng = random.Random(seed)
    i, k = INDEX_PAIRS[seed % len(INDEX_PAIRS)]
    return random_tree(rng, n, i, k), random_tree(rng, n, i, k), Player(rng.choice((1, 2)))


def test_twin_trees():
    for i, k in INDEX_PAIRS:
        e, a = canonical_twin_trees(i, k)
        assert winner_of(e) is Player.ONE and winner_of(a) is Player.TWO


def test_fig7_pair():
    t0, s = fig7_t0(), fig7_pri3_t0()
    cg = build_compare_game(t0, s, Player.ONE)
    assert cg.winner() is EXISTS and compare_signatures(t0, s, Player.ONE)
    cg = build_compare_game(s, t0, Player.ONE)
    assert cg.winner() is FORALL and not compare_signatures(s, t0, Player.ONE)


def test_index_checks():
    t0 = fig7_t0()
    with pytest.raises(ValueError):
        build_compare_game(t0, t0, Player.ONE, ell=2)
    other = parse_tree_spec("alphabet ang i=0 k=2\nlet a = pri0(a);\nroot a;")
    with pytest.raises(TreeError):
        build_compare_game(t0, other, Player.ONE)


@given(st.integers(0, 10**6))
def test_winner_matches_signature_order(seed):
    p, s, player = pair_from_seed(seed)
    assert check_claim61(p, s, None, player)


@given(st.integers(0, 10**6))
def test_claim_at_every_round_start(seed):
    p, s, player = pair_from_seed(seed)
    assert check_claim61_everywhere(build_compare_game(p, s, player)) == []


@given(st.integers(0, 10**6))
def test_unravel_equivalence(seed):
    p, s, player = pair_from_seed(seed)
    c = unravel_cp(p, s, player)
    assert c.alphabet == ANG and is_well_formed(c)
    assert member_W(c, Player.ONE) == (build_compare_game(p, s, player).winner() is EXISTS)


@given(st.integers(0, 10**6))
def test_quasi_strategy_properties(seed):
    p, s, player = pair_from_seed(seed)
    cg = build_compare_game(p, s, player)
    assert honest_safety_violations(cg) == []
    assert quasi_progress_violations(cg) == []
    assert form_of_plays_violations(cg) == []
    assert ell_monotone(cg)


def test_quasi_moves_wrong_side():
    t0, s = fig7_t0(), fig7_pri3_t0()
    cg = build_compare_game(t0, s, Player.ONE)
    assert cg.ctx.holds11(cg.initial)
    with pytest.raises(ValueError):
        quasi_moves(cg, cg.initial, FORALL)
    after = ComparePosition(AFTER_EL, cg.initial.p, cg.initial.s, cg.initial.ell)
    with pytest.raises(ValueError):
        quasi_moves(cg, after, EXISTS)
    assert quasi_moves(cg, cg.initial, EXISTS)


def test_unravel_root_shape():
    t0, s = fig7_t0(), fig7_pri3_t0()
    c = unravel_cp(t0, s, Player.ONE)
    root = c.labels[c.root]
    assert root.is_choice and root.player is EXISTS
    el, rest = c.children[c.root]
    # player 1 gives up the s side through a neg
    assert c.labels[el].is_neg
    assert c.labels[rest].is_choice and c.labels[rest].player is FORALL
