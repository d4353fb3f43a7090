from __future__ import annotations

import math
import statistics

import pytest
from hypothesis import given, settings, strategies as st

from brdyn.dynamics import ROUND_ROBIN, Schedule
from brdyn.experiment import (
    ExperimentSummary,
    RunRow,
    build_circle,
    build_gadget,
    build_tree,
    format_csv,
    read_csv,
    simulate_batch,
)
from brdyn.game import GameError


class TestBuilders:
    def test_circle_two_block(self):
        b = build_circle(6, all_type="3", k=2)
        assert b.descriptor == "circle-3"
        assert b.game.player_count == 6

    def test_circle_type_list(self):
        b = build_circle(3, types=["2", "2'", "3"], init="all-zero")
        assert b.descriptor == "circle-mixed"

    def test_circle_bad_args(self):
        with pytest.raises(GameError):
            build_circle(3, types=["2"], all_type="3")
        with pytest.raises(GameError):
            build_circle(3, types=["2", "3"])

    def test_gadget_without_start(self):
        assert build_gadget(2).initial is None
        with pytest.raises(GameError):
            simulate_batch(build_gadget(2), runs=1)

    def test_tree(self):
        assert build_tree(5, 1).game.player_count == 4


class TestBatch:
    def test_seeds_are_base_plus_index(self):
        rows, _ = simulate_batch(build_circle(8, all_type="3"), seed=40, runs=5)
        assert [r.seed for r in rows] == [40, 41, 42, 43, 44]

    def test_empty_batch(self):
        rows, s = simulate_batch(build_circle(8, all_type="3"), runs=0)
        assert rows == [] and s.runs == 0 and s.censored == 0
        assert math.isnan(s.mean_steps)

    def test_censoring(self):
        rows, s = simulate_batch(build_circle(20, all_type="3"), runs=30, max_steps=20)
        censored = [r for r in rows if not r.terminated]
        assert s.censored == len(censored) > 0
        done = [r.steps for r in rows if r.terminated]
        assert s.mean_steps == pytest.approx(statistics.fmean(done))

    def test_jobs_do_not_change_rows(self):
        built = build_circle(10, all_type="3")
        a, _ = simulate_batch(built, seed=7, runs=40, jobs=1)
        b, _ = simulate_batch(built, seed=7, runs=40, jobs=3)
        assert a == b

    def test_walk_mean(self):
        _, s = simulate_batch(build_circle(20, all_type="3"), runs=10_000)
        assert abs(s.mean_steps - 100) <= 3 * s.standard_error

    def test_gadget_batch(self):
        _, s = simulate_batch(build_gadget(4), runs=400)
        assert s.runs == 400 and s.censored == 0 and s.mean_steps > 0


class TestCsv:
    def test_deterministic(self):
        built = build_circle(12, all_type="3")
        one = format_csv(*simulate_batch(built, Schedule(ROUND_ROBIN), 3, 20))
        two = format_csv(*simulate_batch(built, Schedule(ROUND_ROBIN), 3, 20))
        assert one == two
        assert one.splitlines()[0] == "game,n,schedule,seed,steps,terminated"
        assert one.splitlines()[-1].startswith("#summary,circle-3,12,round-robin,20,")

    @given(st.lists(st.tuples(st.integers(0, 10**6), st.booleans()), max_size=30))
    @settings(max_examples=60, deadline=None)
    def test_summary_recomputes_from_rows(self, data):
        rows = [RunRow(i, k, d) for i, (k, d) in enumerate(data)]
        summary = ExperimentSummary.from_rows("g", 3, "random-uniform", rows)
        parsed, fields = read_csv(format_csv(rows, summary))
        assert parsed == rows
        again = ExperimentSummary.from_rows("g", 3, "random-uniform", parsed)
        assert format_csv(parsed, again) == format_csv(rows, summary)
        assert int(fields["runs"]) == len(rows)
        assert int(fields["censored"]) == sum(1 for r in rows if not r.terminated)
        done = [r.steps for r in rows if r.terminated]
        if len(done) >= 2:
            assert float(fields["mean_steps"]) == statistics.fmean(done)
            assert float(fields["stddev_steps"]) == pytest.approx(statistics.stdev(done), rel=1e-12)
            assert (int(fields["min"]), int(fields["max"])) == (min(done), max(done))
