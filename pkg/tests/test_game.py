from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brdyn.game import (
    Game,
    GameError,
    State,
    TieViolation,
    best_response,
    is_nash,
    is_satisfied,
    load_game,
    random_game,
    rank_reduce,
    recount,
    unsatisfied_players,
    validate_game,
)
from brdyn.graphs import PlayerType, circle_game, two_block_state


def two_player_game() -> Game:
    # both players: d_a = (1, 4), d_b = (2, 5)
    return Game.from_mappings(2, [{0: (1, 4), 1: (2, 5)}, {0: (1, 4), 1: (2, 5)}])


def single_player_game() -> Game:
    return Game.from_mappings(2, [{0: (1,), 1: (2,)}])


@st.composite
def games(draw, max_players=5, max_resources=4):
    seed = draw(st.integers(0, 2**32 - 1))
    players = draw(st.integers(1, max_players))
    resources = draw(st.integers(1, max_resources))
    return random_game(players, resources, np.random.default_rng(seed))


def all_states(game: Game):
    for idx in itertools.product(*(range(len(s)) for s in game.strategies)):
        yield State.from_indices(game, idx)


class TestValidate:
    def test_distinct_increasing_is_valid(self):
        g = Game.from_mappings(2, [{0: (1, 4), 1: (2, 5)}, {0: (1, 2), 1: (3, 6)}])
        assert validate_game(g).ok

    def test_duplicate_value_is_tie(self):
        g = Game.from_mappings(2, [{0: (1, 4), 1: (4, 5)}, {0: (1, 2), 1: (3, 6)}])
        res = validate_game(g)
        assert not res
        assert any(v.player == 0 for v in res.violations)

    def test_not_strictly_increasing(self):
        g = Game.from_mappings(1, [{0: (3, 3)}, {0: (1, 2)}])
        res = validate_game(g)
        assert not res.ok
        assert res.violations[0].player == 0

    def test_bad_resource_and_table_length(self):
        assert not validate_game(Game(1, ((0, 1),), (((1,), (2,)),)))
        assert not validate_game(Game(2, ((0, 1),), (((1, 2), (3,)),)))

    def test_cross_player_ties_are_allowed(self):
        assert validate_game(two_player_game()).ok


class TestBestResponse:
    def test_shared_resource_moves_away(self):
        g = two_player_game()
        s = State(g, (0, 0))
        assert best_response(g, s, 1) == 1
        assert not is_satisfied(g, s, 1)

    def test_single_player_stays_on_cheaper(self):
        g = single_player_game()
        s = State(g, (0,))
        assert best_response(g, s, 0) == 0
        assert is_satisfied(g, s, 0)
        assert is_nash(g, s)

    def test_single_player_leaves_dearer(self):
        g = single_player_game()
        s = State(g, (1,))
        assert best_response(g, s, 0) == 0
        assert not is_satisfied(g, s, 0)

    def test_invalid_player(self):
        g = single_player_game()
        with pytest.raises(GameError):
            best_response(g, State(g, (0,)), 3)

    def test_tie_raises(self):
        g = Game.from_mappings(2, [{0: (1, 3), 1: (3, 4)}, {0: (1, 2)}])
        with pytest.raises(TieViolation):
            best_response(g, State(g, (0, 0)), 0)

    def test_contenders_both_unsatisfied(self):
        g = two_player_game()
        assert unsatisfied_players(g, State(g, (1, 1))) == [0, 1]
        assert unsatisfied_players(g, State(g, (0, 1))) == []

    def test_circle_two_block(self):
        gg = circle_game([PlayerType.T3] * 6)
        assert len(unsatisfied_players(gg.base, two_block_state(gg, 3))) == 2
        assert not is_nash(gg.base, two_block_state(gg, 3))
        assert is_nash(gg.base, gg.state_from_bits([0] * 6))

    @given(games())
    @settings(max_examples=60, deadline=None)
    def test_unique_and_consistent(self, game):
        for s in all_states(game):
            unsat = unsatisfied_players(game, s)
            assert is_nash(game, s) == (not unsat)
            for p in range(game.player_count):
                assert best_response(game, s, p) in game.strategies[p]


class TestState:
    def test_rejects_foreign_resource(self):
        with pytest.raises(GameError):
            State(single_player_game(), (5,))

    @given(games(), st.data())
    @settings(max_examples=60, deadline=None)
    def test_congestion_bookkeeping(self, game, data):
        s = State.from_indices(game, [0] * game.player_count)
        for _ in range(10):
            p = data.draw(st.integers(0, game.player_count - 1))
            r = data.draw(st.sampled_from(game.strategies[p]))
            s.move(p, r)
            assert list(s.congestion) == recount(game.resource_count, s.choice)
            assert sum(s.congestion) == game.player_count


class TestRankReduce:
    def test_ranks_positions(self):
        g = Game.from_mappings(2, [{0: (3, 9), 1: (7, 12)}, {0: (1, 2), 1: (3, 4)}])
        r = rank_reduce(g)
        assert r.delays[0] == ((1, 3), (2, 4))

    def test_idempotent_on_rank_form(self):
        g = Game.from_mappings(2, [{0: (1, 3), 1: (2, 4)}, {0: (1, 2), 1: (3, 4)}])
        assert rank_reduce(g) == g

    @given(games(max_players=6))
    @settings(max_examples=60, deadline=None)
    def test_best_responses_invariant(self, game):
        red = rank_reduce(game)
        assert validate_game(red).ok
        for s in all_states(game):
            s2 = State(red, s.choice)
            for p in range(game.player_count):
                assert best_response(game, s, p) == best_response(red, s2, p)


class TestJson:
    def test_round_trip(self, tmp_path):
        g = two_player_game()
        path = tmp_path / "g.json"
        path.write_text(json.dumps(g.to_json()))
        assert load_game(path) == g

    def test_loader_rejects_invalid(self, tmp_path):
        doc = {"resources": 1, "players": [{"strategies": [0], "delays": {"0": [3, 3]}}, {"strategies": [0], "delays": {"0": [1, 2]}}]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(GameError):
            load_game(path)

    def test_loader_rejects_malformed(self):
        with pytest.raises(GameError):
            Game.from_json({"players": []})
