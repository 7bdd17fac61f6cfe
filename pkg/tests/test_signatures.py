import pytest
from hypothesis import given, strategies as st

from conftest import tree_from_seed
from paritysig.fixtures import (FIG4_EXPECTED, FIG4_POSITIONS, all_fixture_trees, fig4, fig7,
                                fig7_pri3_t0, fig7_t0)
from paritysig.games import check_strategy_winning, induced_game, member_W
from paritysig.signatures import (INF, Indexing, active_set, check_gg_wellfounded, compute_signatures,
                                  optimal_strategy, oracle_signature, positional_strategies, signature,
                                  sig_str, strategy_value, strategy_values, truncate, verify_invariants)
from paritysig.trees import Player, TreeError, parse_tree_spec


def test_infinity_order():
    assert (5, 5) < INF and not INF < (0,) and INF <= INF and INF == INF
    assert sorted([INF, (1, 0), (0, 3)]) == [(0, 3), (1, 0), INF]
    assert sig_str(INF) == "inf" and sig_str((2, 1, 1)) == "(2,1,1)"


def test_indexing():
    ix = Indexing(0, 5, Player.ONE)
    assert ix.losing == [1, 3, 5]
    assert ix.bump((1, 2, 3), 3) == (1, 3, 0)
    assert ix.keep_below((1, 2, 3), 2) == (1, 0, 0)
    assert ix.keep_below((1, 2, 3), 0) == (0, 0, 0)
    assert truncate((1, 2, 3), 3, 0, 5, Player.ONE) == (1, 2)
    with pytest.raises(ValueError):
        truncate((1, 2, 3), 2, 0, 5, Player.ONE)


def test_fig4_sigma():
    t = fig4()
    table = compute_signatures(t)
    assert table.root(1) == FIG4_EXPECTED["sigma"]["t"]
    assert table.at(1, "u1") == (1, 1, 0)
    assert table.at(1, "u2") == (2, 0, 0)


def test_fig4_strategy_values():
    t = fig4()
    (strat,) = list(positional_strategies(induced_game(t), Player.ONE))
    sv = strategy_values(t, Player.ONE, strat)
    got = {name: sv.at(pos) for name, pos in FIG4_POSITIONS.items()}
    assert got["root"] == (2, 1, 1)
    assert got["w"] == (2, 0, 0)
    assert got["u2"] == (2, 0, 0)
    assert got["u3"] == (1, 2, 0)
    # pri3 at u1 is active (the least priority above it is 3), so theta_3 counts
    assert got["u1"] == (1, 1, 0)
    assert oracle_signature(t, Player.ONE) == (2, 1, 1)


def test_fig7():
    assert signature(fig7_t0(), 1) == (0, 0)
    assert signature(fig7_pri3_t0(), 1) == (0, 1)
    t = fig7()
    strat = optimal_strategy(t, 1)
    left, right = t.children[t.root]
    assert strat.move[(t.root, 0)] == (right, 0)
    assert check_strategy_winning(induced_game(t), strat)


def test_losing_player_gets_inf():
    t = fig7()
    assert signature(t, 2) is INF
    with pytest.raises(ValueError):
        optimal_strategy(t, 2)


def test_requires_guarded():
    t = parse_tree_spec("alphabet ang i=0 k=2\nlet a = p1(a, b);\nlet b = pri0(b);\nroot a;")
    with pytest.raises(TreeError):
        compute_signatures(t)


def test_neg_node_is_zero_when_winning():
    t = parse_tree_spec("alphabet ang i=0 k=3\nlet a = pri1(neg(b));\nlet b = pri1(b);\nroot a;")
    assert signature(t, 1) == (1, 0)
    assert signature(t, 1, t.children[t.root][0]) == (0, 0)


def test_fixture_invariants():
    for name, t in all_fixture_trees().items():
        assert verify_invariants(t) == [], name


def test_fixture_strategy_facts():
    for name in ("fig4", "fig7", "fig7_t0", "fig7_pri3t0"):
        t = all_fixture_trees()[name]
        assert verify_invariants(t, oracle=True) == [], name


@given(st.integers(0, 10**6))
def test_random_invariants(seed):
    t = tree_from_seed(seed)
    assert verify_invariants(t, oracle=True, max_choices=8) == []


@given(st.integers(0, 10**6))
def test_oracle_matches_fixpoint(seed):
    t = tree_from_seed(seed, n=5)
    for p in Player:
        assert oracle_signature(t, p) == signature(t, p)


@given(st.integers(0, 10**6))
def test_optimal_strategy_wins(seed):
    t = tree_from_seed(seed)
    game = induced_game(t)
    for p in Player:
        if member_W(t, p):
            strat = optimal_strategy(t, p)
            assert check_strategy_winning(game, strat)
            assert strategy_value(t, p, strat) == signature(t, p)


@given(st.integers(0, 10**6))
def test_gg_wellfounded_iff_winning(seed):
    t = tree_from_seed(seed, n=5)
    game = induced_game(t)
    for p in Player:
        for strat in positional_strategies(game, p):
            assert check_gg_wellfounded(t, strat) == check_strategy_winning(game, strat)


def test_active_set_fig4():
    t = fig4()
    (strat,) = list(positional_strategies(induced_game(t), Player.ONE))
    act = active_set(t, strat)
    assert "u1" in act and t.root in act
    assert len(act) > 0
