from __future__ import annotations

import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from brdyn.dynamics import (
    MIN_INDEX,
    RANDOM,
    ROUND_ROBIN,
    ReplayError,
    Schedule,
    SplitMix64,
    replay_forced,
    run,
    run_many,
    write_trace_csv,
)
from brdyn.game import Game, State, best_response, is_nash, random_game, unsatisfied_players
from brdyn.graphs import PlayerType, circle_game, random_circle_game, random_tree_game, two_block_state


def spread_game(n: int) -> Game:
    # n players crowd resource 0 and each has a private cheap exit
    strategies, delays = [], []
    for i in range(n):
        strategies.append((0, i + 1))
        delays.append((tuple(10 + 2 * k for k in range(n)), tuple(1 + 2 * k for k in range(n))))
    return Game(n + 1, tuple(strategies), tuple(delays))


class TestSplitMix:
    def test_reference_values(self):
        # first outputs for seed 1234567 from the published reference implementation
        g = SplitMix64(1234567)
        assert [g.next() for _ in range(3)] == [
            6457827717110365317, 3203168211198807973, 9817491932198370423,
        ]

    def test_index_uniform(self):
        g = SplitMix64(99)
        k = 7
        counts = np.bincount([g.index(k) for _ in range(70000)], minlength=k)
        assert chisquare(counts).pvalue > 1e-4


class TestRun:
    def test_nash_start(self):
        gg = circle_game([PlayerType.T3] * 4)
        start = gg.state_from_bits([0] * 4)
        rec = run(gg.base, start, seed=5)
        assert rec.steps == 0 and rec.terminated

    def test_negative_cap(self):
        gg = circle_game([PlayerType.T3] * 4)
        with pytest.raises(ValueError):
            run(gg.base, gg.state_from_bits([0] * 4), max_steps=-1)

    def test_cap_reported(self):
        gg = circle_game([PlayerType.T3] * 20)
        rec = run(gg.base, two_block_state(gg, 10), seed=1, max_steps=3)
        assert rec.steps == 3 and not rec.terminated

    def test_circle_walk_mean(self):
        gg = circle_game([PlayerType.T3] * 4)
        steps, done = run_many(gg.base, two_block_state(gg, 2), Schedule(), range(10_000))
        assert done.all()
        se = steps.std(ddof=1) / math.sqrt(len(steps))
        assert abs(steps.mean() - 4) <= 3 * se

    @pytest.mark.parametrize("policy", [RANDOM, ROUND_ROBIN, MIN_INDEX])
    def test_tree_bound(self, policy):
        rng = np.random.default_rng(11)
        for _ in range(30):
            m = int(rng.integers(2, 9))
            gg = random_tree_game(m, rng)
            start = State.from_indices(gg.base, rng.integers(0, 2, gg.player_count).tolist())
            rec = run(gg.base, start, Schedule(policy), seed=int(rng.integers(1 << 30)))
            assert rec.terminated and rec.steps <= 2 * m * m

    def test_min_index_picks_smallest(self):
        g = spread_game(4)
        rec = run(g, State(g, (0, 0, 0, 0)), Schedule(MIN_INDEX), trace=True)
        assert [p for p, _, _ in rec.trace] == [0, 1, 2, 3]

    def test_round_robin_starts_after_zero(self):
        g = spread_game(4)
        rec = run(g, State(g, (0, 0, 0, 0)), Schedule(ROUND_ROBIN), trace=True)
        assert [p for p, _, _ in rec.trace] == [1, 2, 3, 0]

    def test_uniform_first_mover(self):
        g = spread_game(5)
        start = State(g, (0,) * 5)
        firsts = [run(g, start, seed=s, max_steps=1, trace=True).trace[0][0] for s in range(5000)]
        assert chisquare(np.bincount(firsts, minlength=5)).pvalue > 1e-4

    def test_scripted(self):
        g = spread_game(3)
        rec = run(g, State(g, (0, 0, 0)), Schedule.scripted([2, 0]))
        assert rec.steps == 2 and list(rec.final_state.choice) == [1, 0, 3]

    def test_trace_csv(self, tmp_path):
        g = spread_game(3)
        rec = run(g, State(g, (0, 0, 0)), seed=2, trace=True)
        path = tmp_path / "t.csv"
        write_trace_csv(rec, path)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["step", "player", "from", "to"]
        assert len(rows) == rec.steps + 1


@st.composite
def circle_cases(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(2, 10))
    gg = random_circle_game(n, rng)
    start = gg.state_from_bits(rng.integers(0, 2, n).tolist())
    return gg, start, draw(st.sampled_from([RANDOM, ROUND_ROBIN, MIN_INDEX])), seed


class TestProperties:
    @given(circle_cases())
    @settings(max_examples=80, deadline=None)
    def test_engines_agree(self, case):
        gg, start, policy, seed = case
        a = run(gg.base, start, Schedule(policy), seed, max_steps=500, trace=True, engine="python")
        b = run(gg.base, start, Schedule(policy), seed, max_steps=500, trace=True, engine="kernel")
        assert (a.steps, a.terminated, a.trace) == (b.steps, b.terminated, b.trace)
        assert a.final_state == b.final_state

    @given(circle_cases())
    @settings(max_examples=80, deadline=None)
    def test_moves_improve_and_record_is_consistent(self, case):
        gg, start, policy, seed = case
        rec = run(gg.base, start, Schedule(policy), seed, max_steps=300, trace=True, debug=True)
        s = start.copy()
        for p, a, b in rec.trace:
            assert p in unsatisfied_players(gg.base, s)
            before = gg.base.delay(p, a, s.congestion[a])
            s.move(p, b)
            assert gg.base.delay(p, b, s.congestion[b]) < before
        assert s == rec.final_state
        assert rec.terminated == is_nash(gg.base, s)
        assert rec.steps <= 300

    @given(circle_cases())
    @settings(max_examples=40, deadline=None)
    def test_deterministic(self, case):
        gg, start, policy, seed = case
        a = run(gg.base, start, Schedule(policy), seed, max_steps=300, trace=True)
        b = run(gg.base, start, Schedule(policy), seed, max_steps=300, trace=True)
        assert a == b

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_many_strategy_games_use_python_engine(self, seed):
        rng = np.random.default_rng(seed)
        g = random_game(4, 4, rng)
        start = State.from_indices(g, [0] * 4)
        rec = run(g, start, seed=seed, max_steps=200)
        steps, done = run_many(g, start, Schedule(), [seed], 200)
        assert (rec.steps, rec.terminated) == (steps[0], done[0])

    def test_run_many_matches_run(self):
        gg = circle_game([PlayerType.T3] * 8)
        start = two_block_state(gg, 3)
        steps, done = run_many(gg.base, start, Schedule(), range(50))
        for s in range(50):
            assert run(gg.base, start, seed=s).steps == steps[s]


class TestReplay:
    def test_empty(self):
        g = spread_game(2)
        start = State(g, (0, 0))
        assert replay_forced(g, start, []) == [start]

    def test_satisfied_player_rejected(self):
        g = spread_game(2)
        with pytest.raises(ReplayError) as exc:
            replay_forced(g, State(g, (1, 2)), [0])
        assert exc.value.index == 0

    def test_states_follow_best_responses(self):
        g = spread_game(3)
        states = replay_forced(g, State(g, (0, 0, 0)), [1, 2])
        assert len(states) == 3
        assert states[1].choice[1] == best_response(g, states[0], 1)
