import itertools
import random

import pytest
from hypothesis import given, strategies as st

from conftest import tree_from_seed
from paritysig.fixtures import fig4, fig7
from paritysig.games import (ParityGame, PositionalStrategy, check_strategy_winning, induced_game,
                             losing_cycle_exists, member_W, node_winners, random_game,
                             restrict_to_strategy, solve_progress_measures, solve_zielonka, winner_of)
from paritysig.trees import Player, TreeError, parse_tree_spec


def brute_force_winner(game, v):
    """Player 1 wins from v iff one of its positional strategies does."""
    owned = [x for x in game.edges if game.owner[x] is Player.ONE and len(game.edges[x]) > 1]
    for combo in itertools.product(*(game.edges[x] for x in owned)):
        if check_strategy_winning(game, PositionalStrategy(Player.ONE, dict(zip(owned, combo))), [v]):
            return Player.ONE
    return Player.TWO


@given(st.integers(0, 10**6), st.integers(1, 7))
def test_solvers_agree_with_brute_force(seed, n):
    game = random_game(random.Random(seed), n, max_priority=5, max_out=2)
    z = solve_zielonka(game)
    pm = solve_progress_measures(game)
    for v in game.edges:
        assert z.winner[v] is pm.winner[v] is brute_force_winner(game, v)


@given(st.integers(0, 10**6), st.integers(1, 25))
def test_solver_strategies_win(seed, n):
    game = random_game(random.Random(seed), n)
    for sol in (solve_zielonka(game), solve_progress_measures(game)):
        for p in Player:
            region = sol.region(p)
            if region:
                assert check_strategy_winning(game, sol.strategy[p], region)
                assert all(sol.strategy[p].move[v] in region for v in region
                           if v in sol.strategy[p].move)


def test_duplicate_edges():
    game = ParityGame({0: Player.TWO, 1: Player.ONE}, {0: (1, 1), 1: (0,)}, {0: 2, 1: 3}, 0)
    assert solve_zielonka(game).winner[0] is Player.ONE


def test_game_validation():
    with pytest.raises(ValueError):
        ParityGame({0: Player.ONE}, {0: ()}, {0: 0}, 0)
    with pytest.raises(ValueError):
        ParityGame({0: Player.ONE}, {0: (1,)}, {0: 0}, 0)


def test_restrict_errors():
    game = ParityGame({0: Player.ONE, 1: Player.ONE}, {0: (0, 1), 1: (1,)}, {0: 0, 1: 1}, 0)
    with pytest.raises(ValueError):
        restrict_to_strategy(game, PositionalStrategy(Player.ONE, {}))
    with pytest.raises(ValueError):
        restrict_to_strategy(game, PositionalStrategy(Player.ONE, {0: 5}))
    assert check_strategy_winning(game, PositionalStrategy(Player.ONE, {0: 0}))
    assert not check_strategy_winning(game, PositionalStrategy(Player.ONE, {0: 1}))


def test_losing_cycle():
    game = ParityGame({0: Player.ONE, 1: Player.ONE}, {0: (1,), 1: (0,)}, {0: 3, 1: 2}, 0)
    assert not losing_cycle_exists(game, Player.ONE)
    assert losing_cycle_exists(game, Player.TWO)


def test_induced_game_semantics():
    t = parse_tree_spec("alphabet ang i=0 k=3\nlet a = neg(b);\nlet b = p1(c, d);\n"
                        "let c = pri1(c);\nlet d = pri2(d);\nroot a;")
    g = induced_game(t)
    assert g.edges[("a", 0)] == (("b", 1),)
    assert g.owner[("b", 1)] is Player.TWO and g.owner[("b", 0)] is Player.ONE
    assert g.priority[("c", 1)] == 2 and g.priority[("c", 0)] == 1
    # below the neg player 2 picks; c gives 2 (even) and d gives 3 (odd)
    assert winner_of(t) is Player.TWO


def test_neutral_priority_decides_choice_cycles():
    even = parse_tree_spec("alphabet ang i=0 k=2\nlet a = p2(a, a);\nroot a;")
    odd = parse_tree_spec("alphabet ang i=1 k=3\nlet a = p1(a, a);\nroot a;")
    assert winner_of(even) is Player.ONE and winner_of(odd) is Player.TWO


def test_induced_game_errors():
    with pytest.raises(TreeError):
        induced_game(parse_tree_spec("alphabet ang i=0 k=2\nlet a = neg(pri0(a));\nroot a;"))
    with pytest.raises(TreeError):
        induced_game(parse_tree_spec("alphabet angp i=0 k=2\nlet a = p1x(a, a, a);\nroot a;"))


def test_fixture_winners():
    assert member_W(fig4(), Player.ONE)
    assert member_W(fig7(), Player.ONE)
    assert not member_W(fig7(), Player.TWO)


@given(st.integers(0, 10**6))
def test_tree_winners_complement(seed):
    t = tree_from_seed(seed, guarded=False)
    w = node_winners(t)
    pm = solve_progress_measures(induced_game(t))
    for v in t.labels:
        assert pm.winner[(v, 0)] is w[v]
        # the switched copy is the dual game
        assert pm.winner[(v, 1)] is w[v].opponent


def test_to_json():
    g = induced_game(fig7())
    data = g.to_json()
    assert len(data["positions"]) == len(g)
