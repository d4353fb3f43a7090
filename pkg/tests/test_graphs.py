from __future__ import annotations

import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brdyn.game import Game, GameError, State, best_response, validate_game
from brdyn.gadget import build_gadget_game
from brdyn.graphs import (
    CIRCLE,
    GENERAL,
    TREE,
    PlayerType,
    as_graph_game,
    circle_game,
    circle_types,
    classify_player_type,
    is_common_delay,
    random_tree_game,
    threshold_delays,
    tree_to_standard,
)


def pair_game(m: int, pairs) -> Game:
    # odd values on the first resource, even on the second: tie-free
    n = len(pairs)
    a = tuple(1 + 2 * j for j in range(n))
    b = tuple(2 + 2 * j for j in range(n))
    return Game(m, tuple(tuple(p) for p in pairs), ((a, b),) * n)


def oracle_topology(m, pairs) -> str:
    g = nx.MultiGraph()
    g.add_nodes_from(range(m))
    g.add_edges_from(pairs)
    if nx.is_connected(g) and len(pairs) == m - 1 and nx.is_forest(nx.Graph(g)):
        return TREE
    if nx.is_connected(g) and len(pairs) == m and all(d == 2 for _, d in g.degree()):
        return CIRCLE
    return GENERAL


class TestTopology:
    def test_ring(self):
        gg = as_graph_game(pair_game(3, [(0, 1), (1, 2), (2, 0)]))
        assert gg.topology == CIRCLE
        assert gg.canonical_circle

    def test_path(self):
        assert as_graph_game(pair_game(3, [(0, 1), (1, 2)])).topology == TREE

    def test_gadget_is_general(self):
        assert build_gadget_game(2).graph.topology == GENERAL

    def test_needs_two_strategies(self):
        g = Game(2, ((0,),), (((1,),),))
        with pytest.raises(GameError):
            as_graph_game(g)

    def test_hint_checked(self):
        with pytest.raises(GameError):
            as_graph_game(pair_game(3, [(0, 1), (1, 2)]), topology_hint=CIRCLE)

    def test_non_circle_orientation_by_id(self):
        gg = as_graph_game(pair_game(3, [(1, 0), (2, 1)]))
        assert gg.edges == ((0, 1), (1, 2))

    @given(st.integers(2, 6), st.data())
    @settings(max_examples=100, deadline=None)
    def test_matches_graph_oracle(self, m, data):
        k = data.draw(st.integers(1, 7))
        pairs = []
        for _ in range(k):
            a = data.draw(st.integers(0, m - 1))
            b = data.draw(st.integers(0, m - 1).filter(lambda x: x != a))
            pairs.append((a, b))
        assert as_graph_game(pair_game(m, pairs)).topology == oracle_topology(m, pairs)


class TestTypes:
    @pytest.mark.parametrize(
        "d0,d1,expected",
        [
            ((1, 2), (3, 4), PlayerType.T1),
            ((1, 3), (2, 4), PlayerType.T2),
            ((1, 4), (2, 3), PlayerType.T3),
            ((3, 4), (1, 2), PlayerType.T1P),
            ((2, 4), (1, 3), PlayerType.T2P),
            ((2, 3), (1, 4), PlayerType.T3P),
        ],
    )
    def test_orderings(self, d0, d1, expected):
        # padding for congestions 3 and 4 never matters on a circle
        tables = ((d0[0], d0[1], 11, 13), (d1[0], d1[1], 12, 14))
        game = Game(4, tuple((i, (i + 1) % 4) for i in range(4)), (tables,) * 4)
        gg = as_graph_game(game)
        assert classify_player_type(gg, 0) is expected

    @given(st.lists(st.sampled_from(list(PlayerType)), min_size=2, max_size=7), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_builder_round_trip(self, types, seed):
        gg = circle_game(types, np.random.default_rng(seed))
        assert validate_game(gg.base).ok
        assert circle_types(gg) == types

    def test_parse(self):
        assert PlayerType.parse("2'") is PlayerType.T2P
        assert PlayerType.parse("3p") is PlayerType.T3P
        with pytest.raises(ValueError):
            PlayerType.parse("4")


class TestTreeConversion:
    def test_single_player(self):
        gg = as_graph_game(Game(2, ((0, 1),), (((1,), (2,)),)))
        conv = tree_to_standard(gg)
        assert conv.table(0, 0)[0] < conv.table(0, 1)[0]

    def test_two_players_prefer_middle(self):
        # path r0 - r1 - r2, both players like r1 best when alone
        game = Game(3, ((0, 1), (1, 2)), (((3, 4), (1, 5)), ((2, 6), (1, 7))))
        gg = as_graph_game(game)
        conv = tree_to_standard(gg)
        assert is_common_delay(conv)
        for p in range(2):
            for a, b in itertools.product(range(1, 3), repeat=2):
                ra, rb = game.strategies[p]
                orig = game.delay(p, ra, a) < game.delay(p, rb, b)
                new = conv.delay(p, ra, a) < conv.delay(p, rb, b)
                assert orig == new

    def test_rejects_non_tree(self):
        with pytest.raises(GameError):
            tree_to_standard(circle_game([PlayerType.T2] * 3))

    @given(st.integers(2, 7), st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_best_responses_preserved(self, m, seed):
        gg = random_tree_game(m, np.random.default_rng(seed))
        conv = tree_to_standard(gg)
        assert validate_game(conv).ok
        assert is_common_delay(conv)
        for bits in itertools.product((0, 1), repeat=gg.player_count):
            s = State.from_indices(gg.base, bits)
            s2 = State.from_indices(conv, bits)
            for p in range(gg.player_count):
                assert best_response(gg.base, s, p) == best_response(conv, s2, p)


class TestThreshold:
    def test_zero_threshold(self):
        zero, one = threshold_delays(0, 5)
        assert zero[0] < one[4]
        assert zero[1] > one[0]

    def test_full_threshold(self):
        zero, one = threshold_delays(5, 5)
        assert all(zero[c] < one[0] for c in range(5))

    def test_out_of_range(self):
        with pytest.raises(GameError):
            threshold_delays(6, 5)

    @pytest.mark.parametrize("n", [1, 2, 5, 17, 40])
    def test_exhaustive_predicate(self, n):
        for t in range(n + 1):
            zero, one = threshold_delays(t, n)
            assert all(a < b for a, b in zip(zero, zero[1:]))
            assert all(a < b for a, b in zip(one, one[1:]))
            assert not set(zero) & set(one)
            for c0 in range(n):
                for c1 in range(n):
                    # comparing 0-strategy at c0+1 against 1-strategy at c1+1
                    assert (zero[c0] < one[c1]) == (c0 <= t)
