"""Two-strategy games viewed as multigraphs (resources = nodes, players = edges)."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .game import UINT64_LIMIT, Game, GameError, State

TREE = "tree"
CIRCLE = "circle"
GENERAL = "general-multigraph"


class PlayerType(enum.Enum):
    """Ordering of a circle player's four values d0(1), d0(2), d1(1), d1(2)."""

    T1 = "1"
    T2 = "2"
    T3 = "3"
    T1P = "1'"
    T2P = "2'"
    T3P = "3'"

    @classmethod
    def parse(cls, text: str) -> PlayerType:
        text = str(text).strip().replace("p", "'").replace("P", "'")
        for t in cls:
            if t.value == text or t.name == text:
                return t
        raise ValueError(f"unknown player type {text!r}")

    def __str__(self) -> str:
        return self.value


# ranks of (d0(1), d0(2)) and (d1(1), d1(2)) among the four values
_TYPE_RANKS = {
    PlayerType.T1: ((1, 2), (3, 4)),
    PlayerType.T2: ((1, 3), (2, 4)),
    PlayerType.T3: ((1, 4), (2, 3)),
    PlayerType.T1P: ((3, 4), (1, 2)),
    PlayerType.T2P: ((2, 4), (1, 3)),
    PlayerType.T3P: ((2, 3), (1, 4)),
}
_RANKS_TYPE = {v: k for k, v in _TYPE_RANKS.items()}


@dataclass(frozen=True)
class GraphGame:
    base: Game
    edges: tuple[tuple[int, int], ...]  # per player: (0-strategy, 1-strategy)
    topology: str
    canonical_circle: bool = False

    @property
    def player_count(self) -> int:
        return self.base.player_count

    @property
    def resource_count(self) -> int:
        return self.base.resource_count

    def bit(self, state: State, player: int) -> int:
        """0 or 1: which of its two strategies ``player`` plays."""
        return 0 if state.choice[player] == self.edges[player][0] else 1

    def state_from_bits(self, bits: Sequence[int]) -> State:
        return State(self.base, (self.edges[i][b] for i, b in enumerate(bits)))


def _components(m: int, pairs) -> int:
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = m
    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            count -= 1
    return count


def detect_topology(m: int, pairs: Sequence[tuple[int, int]]) -> str:
    connected = _components(m, pairs) == 1
    if connected and len(pairs) == m - 1:
        return TREE
    degree = [0] * m
    for a, b in pairs:
        degree[a] += 1
        degree[b] += 1
    if connected and len(pairs) == m and m >= 2 and all(d == 2 for d in degree):
        return CIRCLE
    return GENERAL


def as_graph_game(game: Game, topology_hint: str | None = None) -> GraphGame:
    """View a game where every player has exactly two strategies as a multigraph.

    A ``topology_hint`` is checked against the detected topology and a mismatch
    raises :class:`GameError`.
    """
    pairs = []
    for i, strat in enumerate(game.strategies):
        if len(strat) != 2:
            raise GameError(f"player {i} has {len(strat)} strategies, need exactly 2")
        pairs.append(tuple(strat))
    m = game.resource_count
    topology = detect_topology(m, pairs)
    if topology_hint is not None and topology_hint != topology:
        raise GameError(f"topology hint {topology_hint!r} but game is {topology!r}")
    canonical = topology == CIRCLE and all(
        set(p) == {i, (i + 1) % m} for i, p in enumerate(pairs)
    )
    if canonical:
        edges = tuple((i, (i + 1) % m) for i in range(m))
    else:
        # id-based orientation off the circle: the lower resource id is the 0-strategy
        edges = tuple((min(p), max(p)) for p in pairs)
    return GraphGame(game, edges, topology, canonical)


def _four_values(gg: GraphGame, player: int) -> tuple[int, int, int, int]:
    r0, r1 = gg.edges[player]
    a = gg.base.table(player, r0)
    b = gg.base.table(player, r1)
    return a[0], a[1], b[0], b[1]


def classify_player_type(gg: GraphGame, player: int) -> PlayerType:
    if gg.topology != CIRCLE or not gg.canonical_circle:
        raise GameError("player types are defined for canonically labelled circle games")
    a1, a2, b1, b2 = _four_values(gg, player)
    order = sorted([(a1, "a"), (a2, "a"), (b1, "b"), (b2, "b")])
    ranks_a = tuple(k for k, (_, tag) in enumerate(order, start=1) if tag == "a")
    ranks_b = tuple(k for k, (_, tag) in enumerate(order, start=1) if tag == "b")
    key = (ranks_a, ranks_b)
    if len({a1, a2, b1, b2}) != 4 or key not in _RANKS_TYPE:
        raise GameError(f"player {player}: values {a1, a2, b1, b2} match no type")
    return _RANKS_TYPE[key]


def circle_types(gg: GraphGame) -> list[PlayerType]:
    return [classify_player_type(gg, i) for i in range(gg.player_count)]


def circle_game(
    types: Sequence[PlayerType | str], rng: np.random.Generator | None = None
) -> GraphGame:
    """Canonical circle game where player ``i`` has the requested type.

    Without ``rng`` the four relevant values are the ranks 1..4; with ``rng``
    they are four random distinct integers in the same order. Entries for
    congestion >= 3 never matter on a circle and are padded above them.
    """
    types = [t if isinstance(t, PlayerType) else PlayerType.parse(t) for t in types]
    n = len(types)
    if n < 2:
        raise GameError("a circle needs at least 2 players")
    strategies, delays = [], []
    for i, t in enumerate(types):
        if rng is None:
            vals = [1, 2, 3, 4]
        else:
            vals = sorted(int(v) for v in rng.choice(1000, size=4, replace=False) + 1)
        ra, rb = _TYPE_RANKS[t]
        a = [vals[k - 1] for k in ra]
        b = [vals[k - 1] for k in rb]
        top = vals[-1]
        for k in range(3, n + 1):
            a.append(top + 2 * k - 1)
            b.append(top + 2 * k)
        strategies.append((i, (i + 1) % n))
        delays.append((tuple(a[:n]), tuple(b[:n])))
    game = Game(n, tuple(strategies), tuple(delays))
    return as_graph_game(game)


def two_block_state(gg: GraphGame, k: int) -> State:
    """Players ``0..k-1`` on their 0-strategy, the remaining ones on their 1-strategy."""
    n = gg.player_count
    if not 0 <= k <= n:
        raise GameError(f"k={k} outside [0, {n}]")
    return gg.state_from_bits([0] * k + [1] * (n - k))


def random_tie_free_tables(
    rng: np.random.Generator, k: int, length: int
) -> tuple[tuple[int, ...], ...]:
    values = rng.choice(10 * k * length + 10, size=k * length, replace=False) + 1
    return tuple(
        tuple(int(v) for v in sorted(values[j * length : (j + 1) * length])) for j in range(k)
    )


def random_tree_game(resources: int, rng: np.random.Generator) -> GraphGame:
    """Random labelled tree on ``resources`` nodes with random tie-free delays."""
    if resources < 2:
        raise GameError("a tree game needs at least 2 resources")
    order = [int(x) for x in rng.permutation(resources)]
    pairs = []
    for pos in range(1, resources):
        parent = order[int(rng.integers(0, pos))]
        pair = (parent, order[pos])
        if rng.random() < 0.5:
            pair = pair[::-1]
        pairs.append(pair)
    n = len(pairs)
    delays = tuple(random_tie_free_tables(rng, 2, n) for _ in pairs)
    return as_graph_game(Game(resources, tuple(pairs), delays))


def random_circle_game(
    n: int, rng: np.random.Generator, allowed: Sequence[PlayerType] = tuple(PlayerType)
) -> GraphGame:
    types = [allowed[int(rng.integers(0, len(allowed)))] for _ in range(n)]
    return circle_game(types, rng)


# --- tree -> common delays --------------------------------------------------


def _insert_relative(
    ref_common: list[int], ref_own: Sequence[int], new_own: Sequence[int]
) -> list[int]:
    """Common table for a new resource whose interleaving with ``ref_common``
    reproduces the interleaving of ``new_own`` with ``ref_own``."""
    out = []
    prev_c, offset = -1, 0
    for v in new_own:
        c = sum(1 for w in ref_own if w < v)
        offset = offset + 1 if c == prev_c else 1
        prev_c = c
        base = ref_common[c - 1] if c > 0 else 0
        out.append(base + offset)
    return out


def tree_to_standard(gg: GraphGame) -> Game:
    """Replace player-specific delays of a tree game by common per-resource tables.

    Resources are added in BFS order from resource 0; each new resource gets a
    table placed into the gaps of its already-fixed neighbour, after scaling
    every fixed table so that all gaps (including the one below the first
    value) exceed the player count.
    """
    if gg.topology != TREE:
        raise GameError("tree_to_standard needs a tree game")
    game = gg.base
    n, m = game.player_count, game.resource_count
    incident: list[list[int]] = [[] for _ in range(m)]
    for i, (a, b) in enumerate(gg.edges):
        incident[a].append(i)
        incident[b].append(i)
    common: dict[int, list[int]] = {0: [(n + 1) * k for k in range(1, n + 1)]}
    queue = deque([0])
    while queue:
        r = queue.popleft()
        for i in incident[r]:
            a, b = gg.edges[i]
            other = b if a == r else a
            if other in common:
                continue
            ref = common[r]
            if min(x - y for x, y in zip(ref, [0] + ref[:-1])) <= n:
                # gaps of at least n + 1 so that n values fit strictly inside one
                for t in common.values():
                    t[:] = [(n + 1) * v for v in t]
            common[other] = _insert_relative(
                common[r], game.table(i, r), game.table(i, other)
            )
            queue.append(other)
    top = max(max(t) for t in common.values())
    if top >= UINT64_LIMIT:
        raise OverflowError(f"common delays need {top.bit_length()} bits, more than 64")
    delays = tuple(tuple(tuple(common[r]) for r in strat) for strat in game.strategies)
    return Game(m, game.strategies, delays)


def is_common_delay(game: Game) -> bool:
    """True if all players interested in a resource use the same table for it."""
    seen: dict[int, tuple[int, ...]] = {}
    for strat, tables in zip(game.strategies, game.delays):
        for r, t in zip(strat, tables):
            if seen.setdefault(r, t) != t:
                return False
    return True


# --- threshold delays -------------------------------------------------------


def threshold_delays(t: int, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Tables (0-resource, 1-resource) for ``n`` total players with threshold ``t``.

    The 0-strategy is the best response iff at most ``t`` other players use the
    0-resource, whatever the load on the 1-resource. Even values go to the
    0-resource, odd values to the 1-resource.
    """
    if not 0 <= t <= n:
        raise GameError(f"threshold {t} outside [0, {n}]")
    zero = tuple(2 * k if k <= t + 1 else 2 * (n + k) for k in range(1, n + 1))
    one = tuple(2 * (t + 1) + 2 * k - 1 for k in range(1, n + 1))
    return zero, one
