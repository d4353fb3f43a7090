"""Best-response dynamics under pluggable schedules.

Randomness comes from a SplitMix64 stream seeded directly with the run seed
(``run_seed = base_seed + run_index`` in batch use). The random-uniform policy
draws ``u = (x >> 11) / 2**53`` and picks the ``floor(u * k)``-th smallest id
among the ``k`` unsatisfied players, so runs are reproducible bit for bit on
any machine and identical between the compiled and the pure-Python engine.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .game import Game, GameError, State, TieViolation, best_response, recount

RANDOM = "random-uniform"
ROUND_ROBIN = "round-robin"
MIN_INDEX = "min-index"
SCRIPTED = "scripted"
POLICIES = (RANDOM, ROUND_ROBIN, MIN_INDEX, SCRIPTED)
DEFAULT_MAX_STEPS = 10**9

_MASK = (1 << 64) - 1
_CHUNK = 1 << 20


class ReplayError(GameError):
    """A scripted move was not a genuine best response at its turn."""

    def __init__(self, index: int, player: int):
        super().__init__(f"move {index}: player {player} is satisfied")
        self.index = index
        self.player = player


@dataclass(frozen=True)
class Schedule:
    policy: str = RANDOM
    sequence: tuple[int, ...] = ()

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.policy == SCRIPTED and not self.sequence:
            raise ValueError("scripted schedule needs a non-empty sequence")

    @classmethod
    def scripted(cls, moves: Sequence[int]) -> Schedule:
        return cls(SCRIPTED, tuple(int(p) for p in moves))

    def __str__(self) -> str:
        return self.policy


@dataclass
class RunRecord:
    seed: int
    steps: int
    terminated: bool
    final_state: State
    trace: list[tuple[int, int, int]] | None = None
    initial: State | None = field(default=None, repr=False)


class SplitMix64:
    """Steele/Lea/Flood SplitMix64; the state starts at the seed itself."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def index(self, k: int) -> int:
        u = float(self.next() >> 11) * (1.0 / 9007199254740992.0)
        return int(u * k)


class _Fenwick:
    def __init__(self, n: int):
        self.n = n
        self.tree = [0] * (n + 1)
        self.log = 1 << max(n.bit_length() - 1, 0) if n else 0

    def add(self, i: int, delta: int) -> None:
        i += 1
        while i <= self.n:
            self.tree[i] += delta
            i += i & -i

    def prefix(self, i: int) -> int:
        s = 0
        i += 1
        while i > 0:
            s += self.tree[i]
            i -= i & -i
        return s

    def select(self, k: int) -> int:
        pos, step = 0, self.log
        while step:
            nxt = pos + step
            if nxt <= self.n and self.tree[nxt] <= k:
                pos = nxt
                k -= self.tree[nxt]
            step >>= 1
        return pos


class _PyEngine:
    """Reference engine: incremental bookkeeping over interested players."""

    def __init__(self, game: Game, state: State, debug: bool = False):
        self.game = game
        self.state = state
        self.debug = debug
        self.interested = game.interested()
        n = game.player_count
        self.unsat = [False] * n
        self.fen = _Fenwick(n)
        self.count = 0
        for p in range(n):
            if best_response(game, state, p) != state.choice[p]:
                self.unsat[p] = True
                self.fen.add(p, 1)
                self.count += 1

    def pick(self, policy: str, rng: SplitMix64 | None, last: int) -> int:
        if policy == RANDOM:
            k = rng.index(self.count)
        elif policy == ROUND_ROBIN:
            before = self.fen.prefix(last)
            k = before if before < self.count else 0
        else:
            k = 0
        return self.fen.select(k)

    def move(self, p: int) -> tuple[int, int]:
        game, state = self.game, self.state
        a = state.choice[p]
        b = best_response(game, state, p)
        state.move(p, b)
        for r in (a, b):
            for q in self.interested[r]:
                s = best_response(game, state, q) != state.choice[q]
                if s != self.unsat[q]:
                    self.unsat[q] = s
                    self.fen.add(q, 1 if s else -1)
                    self.count += 1 if s else -1
        if self.debug and state.congestion != recount(game.resource_count, state.choice):
            raise AssertionError("incremental congestion diverged from recount")
        return a, b


def _kernel_arrays(game: Game):
    """Flat arrays for the compiled kernel, or None if the game does not fit it."""
    if any(len(s) != 2 for s in game.strategies):
        return None
    n, m = game.player_count, game.resource_count
    interested = game.interested()
    width = max(len(x) for x in interested) + 2
    res0 = np.array([s[0] for s in game.strategies], dtype=np.int64)
    res1 = np.array([s[1] for s in game.strategies], dtype=np.int64)
    tab0 = np.zeros((n, width), dtype=np.int64)
    tab1 = np.zeros((n, width), dtype=np.int64)
    limit = min(n, width - 1)
    cache: dict[int, np.ndarray] = {}
    for p, (t0, t1) in enumerate(game.delays):
        for tab, t in ((tab0, t0), (tab1, t1)):
            row = cache.get(id(t))
            if row is None:
                if t[limit - 1] >= 1 << 63:
                    return None
                row = np.array(t[:limit], dtype=np.int64)
                cache[id(t)] = row
            tab[p, 1 : limit + 1] = row
    ptr = np.zeros(m + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(x) for x in interested])
    idx = np.array([p for x in interested for p in x], dtype=np.int64)
    return res0, res1, tab0, tab1, ptr, idx


_POLICY_CODE = {RANDOM: 0, ROUND_ROBIN: 1, MIN_INDEX: 2}


def _logn(n: int) -> int:
    return 1 << max(n.bit_length() - 1, 0) if n else 0


def run(
    game: Game,
    initial: State,
    schedule: Schedule = Schedule(),
    seed: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
    trace: bool = False,
    engine: str = "auto",
    debug: bool = False,
) -> RunRecord:
    """Let unsatisfied players best-respond until Nash or ``max_steps``.

    ``engine`` is ``"auto"`` (compiled kernel when the game has two strategies
    per player), ``"python"`` or ``"kernel"``. ``debug`` forces the Python engine
    and recounts congestion after every move.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    state = State(game, initial.choice)
    start = state.copy()
    if schedule.policy == SCRIPTED:
        return _run_scripted(game, state, start, schedule, seed, max_steps, trace)
    arrays = None
    if engine != "python" and not debug:
        arrays = _kernel_arrays(game)
        if arrays is None and engine == "kernel":
            raise GameError("kernel engine needs two strategies per player and int64 delays")
    if arrays is not None:
        return _run_kernel(game, state, start, schedule, seed, max_steps, trace, arrays)
    return _run_python(game, state, start, schedule, seed, max_steps, trace, debug)


def _run_python(game, state, start, schedule, seed, max_steps, trace, debug):
    eng = _PyEngine(game, state, debug)
    rng = SplitMix64(seed) if schedule.policy == RANDOM else None
    steps, last = 0, 0
    moves: list[tuple[int, int, int]] | None = [] if trace else None
    while eng.count and steps < max_steps:
        p = eng.pick(schedule.policy, rng, last)
        a, b = eng.move(p)
        if moves is not None:
            moves.append((p, a, b))
        last = p
        steps += 1
    return RunRecord(seed, steps, eng.count == 0, state, moves, start)


def _run_kernel(game, state, start, schedule, seed, max_steps, trace, arrays):
    from . import _kernel as K

    res0, res1, tab0, tab1, ptr, idx = arrays
    n = game.player_count
    bit = np.array([0 if c == s[0] else 1 for c, s in zip(state.choice, game.strategies)],
                   dtype=np.int64)
    cong = np.array(state.congestion, dtype=np.int64)
    unsat = np.zeros(n, dtype=np.int64)
    tree = np.zeros(n + 1, dtype=np.int64)
    count = K.init_unsat(bit, res0, res1, tab0, tab1, cong, unsat, tree)
    if count < 0:
        raise TieViolation("tie in initial state")
    rng_state = np.uint64(seed & _MASK)
    last, steps, status = np.int64(0), 0, 0 if count == 0 else 1
    policy = _POLICY_CODE[schedule.policy]
    logn = _logn(n)
    players: list[np.ndarray] = []
    while count and steps < max_steps:
        budget = min(_CHUNK, max_steps - steps)
        buf = np.zeros(budget if trace else 1, dtype=np.int64)
        status, done, count, rng_state, last = K.advance(
            bit, res0, res1, tab0, tab1, cong, ptr, idx, unsat, tree, count,
            policy, rng_state, last, budget, logn, trace, buf,
        )
        steps += done
        if trace:
            players.append(buf[:done])
        if status == 2:
            raise TieViolation("tie encountered during run")
    final = State(game, (s[b] for s, b in zip(game.strategies, bit)))
    moves = None
    if trace:
        moves = []
        choice = list(start.choice)
        for p in (np.concatenate(players) if players else []):
            p = int(p)
            a = choice[p]
            s = game.strategies[p]
            b = s[1] if a == s[0] else s[0]
            choice[p] = b
            moves.append((p, a, b))
    return RunRecord(seed, steps, count == 0, final, moves, start)


def _run_scripted(game, state, start, schedule, seed, max_steps, trace):
    moves: list[tuple[int, int, int]] | None = [] if trace else None
    steps = 0
    for k, p in enumerate(schedule.sequence):
        if steps >= max_steps or is_nash_fast(game, state):
            break
        b = best_response(game, state, p)
        a = state.choice[p]
        if a == b:
            raise ReplayError(k, p)
        state.move(p, b)
        if moves is not None:
            moves.append((p, a, b))
        steps += 1
    return RunRecord(seed, steps, is_nash_fast(game, state), state, moves, start)


def is_nash_fast(game: Game, state: State) -> bool:
    return all(best_response(game, state, p) == state.choice[p] for p in range(game.player_count))


def run_many(
    game: Game,
    initial: State,
    schedule: Schedule,
    seeds: Sequence[int],
    max_steps: int = DEFAULT_MAX_STEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Step counts and termination flags of independent runs, one per seed."""
    seeds = [int(s) & _MASK for s in seeds]
    steps = np.zeros(len(seeds), dtype=np.int64)
    done = np.zeros(len(seeds), dtype=np.bool_)
    if schedule.policy == SCRIPTED:
        raise ValueError("run_many does not take scripted schedules")
    arrays = _kernel_arrays(game)
    if arrays is None:
        for j, s in enumerate(seeds):
            rec = run(game, initial, schedule, s, max_steps, engine="python")
            steps[j], done[j] = rec.steps, rec.terminated
        return steps, done
    from . import _kernel as K

    res0, res1, tab0, tab1, ptr, idx = arrays
    bit0 = np.array(
        [0 if c == s[0] else 1 for c, s in zip(initial.choice, game.strategies)], dtype=np.int64
    )
    cong0 = np.array(recount(game.resource_count, initial.choice), dtype=np.int64)
    bad = K.run_batch(
        bit0, res0, res1, tab0, tab1, cong0, ptr, idx, _POLICY_CODE[schedule.policy],
        np.array(seeds, dtype=np.uint64), np.int64(max_steps), _logn(game.player_count),
        steps, done,
    )
    if bad >= 0:
        raise TieViolation(f"tie encountered in run with seed {seeds[bad]}")
    return steps, done


def replay_forced(game: Game, initial: State, moves: Sequence[int]) -> list[State]:
    """Apply each listed player's best response in turn; every move must be a real change."""
    state = State(game, initial.choice)
    out = [state.copy()]
    for k, p in enumerate(moves):
        b = best_response(game, state, p)
        if b == state.choice[p]:
            raise ReplayError(k, p)
        state.move(p, b)
        out.append(state.copy())
    return out


def write_trace_csv(record: RunRecord, path: str | Path) -> None:
    if record.trace is None:
        raise ValueError("run was executed without trace capture")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "player", "from", "to"])
        for step, (p, a, b) in enumerate(record.trace, start=1):
            w.writerow([step, p, a, b])
