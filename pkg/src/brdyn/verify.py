"""Invariant suites shared by the command line and the acceptance tests.

Each check returns a :class:`Check`; a suite is a named list of checks.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import circle as C
from .dynamics import Schedule, run, run_many
from .experiment import build_gadget, simulate_batch
from .gadget import (
    build_gadget_game,
    brute_force_equilibria,
    equilibrium_profile,
    group_zero_counts,
    initial_configuration,
    place_equilibrium_tokens,
    replay_overload_generation,
    replay_underload_generation,
)
from .game import State, random_game, rank_reduce
from .graphs import (
    PlayerType,
    circle_game,
    is_common_delay,
    random_circle_game,
    random_tree_game,
    tree_to_standard,
    two_block_state,
)
from .transition import (
    build_tg,
    check_cycle_player_counts,
    find_cycle,
    longest_path,
    simple_cycles,
    verify_potential,
)

NO_TYPE1 = (PlayerType.T2, PlayerType.T2P, PlayerType.T3, PlayerType.T3P)


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""
    seconds: float = 0.0
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        return f"{tag} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn: Callable[..., Check]) -> Callable[..., Check]:
    def wrapper(*args, **kwargs):
        t = time.perf_counter()
        c = fn(*args, **kwargs)
        c.seconds = time.perf_counter() - t
        return c

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _same_tg(a, b) -> bool:
    return (
        a.node_count == b.node_count
        and np.array_equal(a.src, b.src)
        and np.array_equal(a.label, b.label)
        and np.array_equal(a.dst, b.dst)
    )


# --- trees and circles ------------------------------------------------------


@_timed
def tree_bound(games: int = 200, max_resources: int = 8, runs: int = 10**4, seed: int = 0) -> Check:
    """Acyclic TG, longest path and sampled run lengths within 2n^2 (n = resources)."""
    rng = np.random.default_rng(seed)
    worst_path = worst_run = 0.0
    for g in range(games):
        m = int(rng.integers(2, max_resources + 1))
        gg = random_tree_game(m, rng)
        bound = 2 * m * m
        tg = build_tg(gg.base)
        if find_cycle(tg) is not None:
            return Check("tree-bound", False, f"game {g}: cycle in tree TG")
        lp = longest_path(tg)
        worst_path = max(worst_path, lp / bound)
        if lp > bound:
            return Check("tree-bound", False, f"game {g}: longest path {lp} > {bound}")
        if runs:
            start = State.from_indices(gg.base, rng.integers(0, 2, gg.player_count).tolist())
            steps, done = run_many(gg.base, start, Schedule(), range(g * runs, (g + 1) * runs), bound + 1)
            if not done.all() or steps.max() > bound:
                return Check("tree-bound", False, f"game {g}: a run exceeded {bound} steps")
            worst_run = max(worst_run, steps.max() / bound)
    return Check(
        "tree-bound", True,
        f"{games} trees, max longest-path/2n^2 = {worst_path:.3f}, max run/2n^2 = {worst_run:.3f}",
    )


@_timed
def type1_acyclic(games: int = 200, max_n: int = 6, seed: int = 1) -> Check:
    """Circles with at least one type-1/1' player: acyclic, longest path <= 4n^2."""
    rng = np.random.default_rng(seed)
    worst = 0
    for g in range(games):
        n = int(rng.integers(2, max_n + 1))
        types = [PlayerType(rng.choice([t.value for t in PlayerType])) for _ in range(n)]
        j = int(rng.integers(0, n))
        types[j] = (PlayerType.T1, PlayerType.T1P)[int(rng.integers(0, 2))]
        gg = circle_game(types, rng)
        tg = build_tg(gg.base)
        if find_cycle(tg) is not None:
            return Check("type1-acyclic", False, f"game {g} {[str(t) for t in types]}: cycle")
        lp = longest_path(tg)
        if lp > 4 * n * n:
            return Check("type1-acyclic", False, f"game {g}: longest path {lp} > {4 * n * n}")
        worst = max(worst, lp)
    return Check("type1-acyclic", True, f"{games} circles, longest path at most {worst}")


@_timed
def type3_cycles(ns=(3, 4, 5, 6)) -> Check:
    """All-type-3 circles have cycles; every player labels >= 2 edges of every simple cycle."""
    counts = {}
    for n in ns:
        gg = circle_game([PlayerType.T3] * n)
        tg = build_tg(gg.base)
        witness = find_cycle(tg)
        if witness is None:
            return Check("type3-cycles", False, f"n={n}: no cycle found")
        if not check_cycle_player_counts(tg, witness):
            return Check("type3-cycles", False, f"n={n}: witness has a player used < 2 times")
        k = 0
        for cyc in simple_cycles(tg):
            k += 1
            if not check_cycle_player_counts(tg, cyc):
                return Check("type3-cycles", False, f"n={n}: simple cycle {cyc} fails")
        counts[n] = k
    return Check("type3-cycles", True, f"simple cycles checked per n: {counts}", data=counts)


def _case_games(case: C.CaseTag, count: int, max_n: int, rng) -> list:
    out = []
    if case is C.CaseTag.CASE3:
        # only the uniform type-2 / type-2' circles are in this case; vary delay values
        while len(out) < count:
            n = int(rng.integers(2, max_n + 1))
            t = (PlayerType.T2, PlayerType.T2P)[len(out) % 2]
            out.append(circle_game([t] * n, rng))
        return out
    while len(out) < count:
        n = int(rng.integers(2, max_n + 1))
        gg = random_circle_game(n, rng, NO_TYPE1)
        if C.classify_case(gg) is case:
            out.append(gg)
    return out


@_timed
def potentials(per_case: int = 20, max_n: int = 6, seed: int = 2) -> Check:
    """Case 1-3 potentials strictly decrease on every TG edge; case-2 increments are bounded."""
    rng = np.random.default_rng(seed)
    tally = {}
    for case, phi in C.POTENTIALS.items():
        games = _case_games(case, per_case, max_n, rng)
        for gg in games:
            tg = build_tg(gg.base)
            f = lambda s, gg=gg, phi=phi: phi(gg, s)  # noqa: E731
            if not verify_potential(tg, f):
                types = [str(t) for t in C.circle_types(gg)]
                return Check("potentials", False, f"{case.name} potential fails on {types}")
            if case is C.CaseTag.CASE2:
                vals = {}
                for s, _, d in tg.edges():
                    a = vals.setdefault(s, f(tg.decode(s)))
                    b = vals.setdefault(d, f(tg.decode(d)))
                    if b[1] > a[1] and not (b[0] < a[0] and b[1] <= a[1] + 1):
                        return Check("potentials", False, f"case-2 phi2 jump {a} -> {b}")
        tally[case.name] = len(games)
    return Check("potentials", True, f"games per case {tally}")


@_timed
def case3_linear(ns=(4, 6, 8)) -> Check:
    paths = {}
    for n in ns:
        lp = longest_path(build_tg(circle_game([PlayerType.T2] * n).base))
        paths[n] = lp
        if lp > 3 * n:
            return Check("case3-linear", False, f"n={n}: longest path {lp} > {3 * n}")
    return Check("case3-linear", True, f"longest paths {paths}", data=paths)


@_timed
def random_walk(ns=(10, 20), runs: int = 10**4, seed: int = 0) -> Check:
    """All-type-3 circle from a half/half two-block start: mean steps vs k(n-k)."""
    out, ok = [], True
    for n in ns:
        k = n // 2
        gg = circle_game([PlayerType.T3] * n)
        steps, done = run_many(gg.base, two_block_state(gg, k), Schedule(), range(seed, seed + runs))
        mean = float(steps.mean())
        se = float(steps.std(ddof=1)) / math.sqrt(runs)
        expect = float(C.walk_expected_steps(n, k))
        good = bool(done.all()) and abs(mean - expect) <= 3 * se
        ok &= good
        out.append(f"n={n}: mean {mean:.2f} vs {expect:g} (3se={3 * se:.2f})")
    return Check("random-walk", ok, "; ".join(out))


@_timed
def block_balance(max_n: int = 8) -> Check:
    """All-type-3 circles: balanced directed unsatisfied counts, one unsatisfied head per block."""
    checked = 0
    for n in range(2, max_n + 1):
        gg = circle_game([PlayerType.T3] * n)
        for bits in itertools.product((0, 1), repeat=n):
            s = gg.state_from_bits(bits)
            up, down = C.directed_unsatisfied_counts(gg, s)
            if up + down == 0:
                continue
            checked += 1
            if up != down:
                return Check("block-balance", False, f"n={n} bits={bits}: {up} vs {down}")
            for block, unsat in zip(C.maximal_blocks(gg, s), C.unsatisfied_per_block(gg, s)):
                if unsat != [block[0]]:
                    return Check("block-balance", False, f"n={n} bits={bits}: block {block} has {unsat}")
    return Check("block-balance", True, f"{checked} non-Nash states")


@_timed
def token_monotone(runs: int = 1000, max_n: int = 12, seed: int = 3) -> Check:
    """Token counts along random circle runs never rise and fall in steps of two."""
    rng = np.random.default_rng(seed)
    collisions = 0
    for r in range(runs):
        n = int(rng.integers(3, max_n + 1))
        gg = random_circle_game(n, rng, NO_TYPE1)
        start = gg.state_from_bits(rng.integers(0, 2, n).tolist())
        rec = run(gg.base, start, Schedule(), seed=r, max_steps=50 * n * n, trace=True)
        counts = C.token_count_trace(gg, rec)
        diffs = np.diff(counts)
        if np.any((diffs != 0) & (diffs != -2)):
            return Check("token-monotone", False, f"run {r}: counts {counts}")
        collisions += int(np.sum(diffs == -2))
    return Check("token-monotone", True, f"{runs} runs, {collisions} collisions, all drops exactly 2")


@_timed
def token_roundtrip(max_n: int = 8) -> Check:
    """Every legal non-empty placement survives tokens_to_state then place_tokens."""
    total = 0
    for n in range(2, max_n + 1):
        gg = circle_game([PlayerType.T2] * n)
        for bits in itertools.product((0, 1), repeat=n):
            s = gg.state_from_bits(bits)
            tm = C.place_tokens(gg, s)
            if tm.overload != tm.underload:
                return Check("token-roundtrip", False, f"n={n}: unbalanced {tm.tokens}")
            if not tm.positions():
                continue
            total += 1
            if C.tokens_to_state(gg, tm) != s:
                return Check("token-roundtrip", False, f"n={n}: {tm.tokens} does not round-trip")
    return Check("token-roundtrip", True, f"{total} placements")


@_timed
def rank_and_tree(games: int = 100, max_n: int = 6, seed: int = 4) -> Check:
    rng = np.random.default_rng(seed)
    for g in range(games):
        players = int(rng.integers(1, max_n + 1))
        game = random_game(players, int(rng.integers(1, max_n + 1)), rng)
        if not _same_tg(build_tg(game), build_tg(rank_reduce(game))):
            return Check("rank-and-tree", False, f"game {g}: rank reduction changes the TG")
    for g in range(games):
        gg = random_tree_game(int(rng.integers(2, max_n + 2)), rng)
        conv = tree_to_standard(gg)
        if not is_common_delay(conv):
            return Check("rank-and-tree", False, f"tree {g}: delays still player-specific")
        if not _same_tg(build_tg(gg.base), build_tg(conv)):
            return Check("rank-and-tree", False, f"tree {g}: conversion changes the TG")
    return Check("rank-and-tree", True, f"{games} random games, {games} random trees")


# --- gadget family ----------------------------------------------------------


@_timed
def gadget_oracle() -> Check:
    spec = build_gadget_game(2)
    eqs = brute_force_equilibria(spec)
    if not eqs:
        return Check("gadget-oracle", False, "no equilibrium found")
    profiles = {tuple(equilibrium_profile(spec, s)) for s in eqs}
    if profiles != {((6, 2, 2), (6, 2, 2))}:
        return Check("gadget-oracle", False, f"equilibrium congestions {profiles}")
    for s in eqs:
        for i in range(spec.n):
            c = group_zero_counts(spec, s, i)
            if c[0] != c[1] or c[2] != c[3]:
                return Check("gadget-oracle", False, f"group pairing broken: {c}")
        if place_equilibrium_tokens(spec, s).total:
            return Check("gadget-oracle", False, "equilibrium carries tokens")
    return Check("gadget-oracle", True, f"{len(eqs)} equilibria in 2^20 states, all (6,2,2)")


def replay_counts(n: int) -> dict[str, tuple[int, int]]:
    """Token totals (before, after) of both replays on the n-gadget game; raises on illegal moves."""
    spec = build_gadget_game(n)
    over = replay_overload_generation(spec)
    under = replay_underload_generation(spec)
    return {
        "overload": (over.panels[0].total, over.panels[-1].total),
        "underload": (under.panels[0].total, under.panels[-1].total),
    }


@_timed
def gadget_replay(n: int = 4) -> Check:
    """Both replays are legal and match every panel annotation."""
    try:
        counts = replay_counts(n)
    except Exception as exc:  # any failed assertion is a failed check
        return Check("gadget-replay", False, f"n={n}: {exc}")
    return Check("gadget-replay", True, f"n={n}: all moves legal, panels match, totals {counts}", data=counts)


@_timed
def gadget_token_growth(n: int) -> Check:
    counts = replay_counts(n)
    ok = all(v == (4, 6) for v in counts.values())
    return Check(f"gadget-token-growth-n{n}", ok, f"token totals {counts}", data=counts)


@_timed
def gadget_scaling(ns=(4, 8, 10, 12, 16, 20), runs: int = 400, seed: int = 0,
                   max_steps: int = 10**9, ratio_ns=(4, 8, 10), monotone_ns=(4, 8, 12, 16, 20)) -> Check:
    means, censored = {}, {}
    for n in ns:
        _, summary = simulate_batch(build_gadget(n), Schedule(), seed, runs, max_steps)
        means[n] = summary.mean_steps
        censored[n] = summary.censored
    mono = [means[n] for n in monotone_ns]
    increasing = all(a < b for a, b in zip(mono, mono[1:]))
    ratios = {n: means[2 * n] / means[n] for n in ratio_ns}
    ok = increasing and all(r > 4 for r in ratios.values())
    detail = (
        "means " + ", ".join(f"{n}:{m:.1f}" for n, m in means.items())
        + "; ratios " + ", ".join(f"m({2 * n})/m({n})={r:.2f}" for n, r in ratios.items())
        + f"; censored {censored}"
    )
    return Check("gadget-scaling", ok, detail, data={"means": means, "ratios": ratios, "censored": censored})


def gadget_terminal_tokens(n: int = 4, runs: int = 20, seed: int = 0) -> Check:
    spec = build_gadget_game(n)
    start = initial_configuration(spec)
    for s in range(seed, seed + runs):
        rec = run(spec.game, start, Schedule(), seed=s)
        if rec.terminated and place_equilibrium_tokens(spec, rec.final_state).total:
            return Check("gadget-terminal-tokens", False, f"seed {s}: tokens left at Nash")
    return Check("gadget-terminal-tokens", True, f"{runs} runs end token-free")


SUITES: dict[str, Callable[[], list[Check]]] = {
    "trees": lambda: [tree_bound(runs=100), rank_and_tree()],
    "circle-cases": lambda: [type1_acyclic(), type3_cycles(), potentials(), case3_linear(), block_balance()],
    "tokens": lambda: [token_roundtrip(), token_monotone()],
    "gadget-oracle": lambda: [gadget_oracle()],
    "gadget-replay": lambda: [gadget_replay(4), gadget_replay(6), gadget_token_growth(6)],
}
