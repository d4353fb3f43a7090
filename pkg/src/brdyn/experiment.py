"""Seeded experiment batches, summaries and CSV output."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import DEFAULT_MAX_STEPS, Schedule, run_many
from .gadget import build_gadget_game, initial_configuration
from .game import Game, GameError, State, load_game
from .graphs import PlayerType, circle_game, random_tree_game, two_block_state

CSV_HEADER = ("game", "n", "schedule", "seed", "steps", "terminated")
SUMMARY_HEADER = (
    "#summary", "game", "n", "schedule", "runs",
    "mean_steps", "stddev_steps", "min", "max", "censored",
)


@dataclass(frozen=True)
class Built:
    """A game plus the start state a batch runs from (None if it has none)."""

    descriptor: str
    n: int
    game: Game
    initial: State | None


def build_circle(
    n: int,
    types: Sequence[str] | None = None,
    all_type: str | None = None,
    init: str = "two-block",
    k: int | None = None,
    delay_seed: int | None = None,
) -> Built:
    if (types is None) == (all_type is None):
        raise GameError("give exactly one of types / all_type")
    if types is None:
        types = [all_type] * n
    if len(types) != n:
        raise GameError(f"{len(types)} types for {n} players")
    parsed = [PlayerType.parse(t) for t in types]
    rng = np.random.default_rng(delay_seed) if delay_seed is not None else None
    gg = circle_game(parsed, rng)
    if init == "two-block":
        k = n // 2 if k is None else k
        state = two_block_state(gg, k)
    elif init == "all-zero":
        state = gg.state_from_bits([0] * n)
    else:
        raise GameError(f"unknown circle init {init!r}")
    name = "circle-" + (str(parsed[0]) if all_type is not None else "mixed")
    return Built(name, n, gg.base, state)


def build_gadget(n: int) -> Built:
    spec = build_gadget_game(n)
    initial = initial_configuration(spec) if n >= 4 and n % 2 == 0 else None
    return Built("gadget", n, spec.game, initial)


def build_tree(n: int, game_seed: int = 0) -> Built:
    gg = random_tree_game(n, np.random.default_rng(game_seed))
    return Built("tree", n, gg.base, State.from_indices(gg.base, [0] * gg.player_count))


def build_json(path: str | Path) -> Built:
    game = load_game(path)
    return Built(
        Path(path).name, game.player_count, game,
        State.from_indices(game, [0] * game.player_count),
    )


@dataclass(frozen=True)
class RunRow:
    seed: int
    steps: int
    terminated: bool


@dataclass(frozen=True)
class ExperimentSummary:
    game: str
    n: int
    schedule: str
    runs: int
    mean_steps: float
    stddev_steps: float
    min: int
    max: int
    censored: int

    @classmethod
    def from_rows(cls, game: str, n: int, schedule: str, rows: Sequence[RunRow]) -> ExperimentSummary:
        done = np.array([r.steps for r in rows if r.terminated], dtype=np.float64)
        censored = sum(1 for r in rows if not r.terminated)
        if done.size:
            mean = float(done.mean())
            sd = float(done.std(ddof=1)) if done.size > 1 else 0.0
            lo, hi = int(done.min()), int(done.max())
        else:
            mean, sd, lo, hi = math.nan, math.nan, 0, 0
        return cls(game, n, schedule, len(rows), mean, sd, lo, hi, censored)

    @property
    def standard_error(self) -> float:
        k = self.runs - self.censored
        return self.stddev_steps / math.sqrt(k) if k > 1 else math.nan


def _chunk(args):
    game, initial, schedule, seeds, max_steps = args
    steps, done = run_many(game, initial, schedule, seeds, max_steps)
    return steps.tolist(), done.tolist()


def simulate_batch(
    built: Built,
    schedule: Schedule = Schedule(),
    seed: int = 0,
    runs: int = 100,
    max_steps: int = DEFAULT_MAX_STEPS,
    jobs: int = 1,
) -> tuple[list[RunRow], ExperimentSummary]:
    """``runs`` independent runs with seeds ``seed + index``, rows in index order."""
    if runs < 0:
        raise ValueError("runs must be >= 0")
    if built.initial is None:
        raise GameError(f"{built.descriptor} with n={built.n} has no start state")
    seeds = [seed + i for i in range(runs)]
    if jobs > 1 and runs > 1:
        size = -(-runs // jobs)
        parts = [seeds[i : i + size] for i in range(0, runs, size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                _chunk, [(built.game, built.initial, schedule, p, max_steps) for p in parts]
            ))
        steps = [s for r in results for s in r[0]]
        done = [d for r in results for d in r[1]]
    elif runs:
        steps, done = _chunk((built.game, built.initial, schedule, seeds, max_steps))
    else:
        steps, done = [], []
    rows = [RunRow(s, int(k), bool(d)) for s, k, d in zip(seeds, steps, done)]
    return rows, ExperimentSummary.from_rows(built.descriptor, built.n, str(schedule), rows)


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def format_csv(rows: Sequence[RunRow], summary: ExperimentSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow((summary.game, summary.n, summary.schedule, r.seed, r.steps, int(r.terminated)))
    w.writerow(SUMMARY_HEADER)
    s = summary
    w.writerow((
        "#summary", s.game, s.n, s.schedule, s.runs,
        _fmt(s.mean_steps), _fmt(s.stddev_steps), s.min, s.max, s.censored,
    ))
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[RunRow], dict[str, str]]:
    """Per-run rows and the summary fields of a CSV written by :func:`format_csv`."""
    rows, summary = [], {}
    lines = list(csv.reader(io.StringIO(text)))
    for rec in lines[1:]:
        if rec[0] == "#summary":
            if rec[1] != "game":
                summary = dict(zip(SUMMARY_HEADER[1:], rec[1:]))
            continue
        rows.append(RunRow(int(rec[3]), int(rec[4]), rec[5] == "1"))
    return rows, summary
