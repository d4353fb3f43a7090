"""The gadget family: ``n`` threshold gadgets arranged on a circle.

Gadget ``G_i`` owns resources ``r_{i,0}, r_{i,1}, r_{i,2}`` and shares
``r_{i,3} = r_{i+1,0}`` with its successor. Five edge groups of ``n`` players
each connect them; a group-``j`` player prefers its 0-strategy exactly while
at most ``t_j`` other players sit on its 0-resource.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle import TokenMap
from .dynamics import replay_forced
from .game import Game, GameError, State, is_satisfied
from .graphs import GraphGame, as_graph_game, threshold_delays
from .transition import DEFAULT_NODE_CAP, nash_codes, state_count

# (0-strategy slot, 1-strategy slot) within a gadget; slot 3 is the next gadget's slot 0
GROUP_ENDPOINTS = ((0, 1), (1, 3), (0, 2), (2, 3), (0, 3))


class ReplayMismatch(AssertionError):
    """A replay panel does not show the expected token annotation."""


def thresholds(n: int) -> tuple[int, int, int, int, int]:
    return (3 * n, n - 1, 3 * n - 2, n - 1, 3 * n - 1)


@dataclass(frozen=True)
class GadgetGameSpec:
    n: int
    game: Game
    graph: GraphGame | None
    thresholds: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]  # per player (0-resource, 1-resource)
    group_of: tuple[tuple[int, int], ...]  # per player (gadget i, group j)

    def resource(self, i: int, j: int) -> int:
        """Resource id of ``r_{i,j}``."""
        if j == 3:
            return 3 * ((i + 1) % self.n)
        return 3 * (i % self.n) + j

    def players(self, i: int, j: int) -> range:
        start = (5 * (i % self.n) + j) * self.n
        return range(start, start + self.n)

    def bit(self, state: State, player: int) -> int:
        return 0 if state.choice[player] == self.edges[player][0] else 1

    def state_from_bits(self, bits) -> State:
        return State(self.game, (self.edges[p][b] for p, b in enumerate(bits)))

    def count_zero(self, state: State, i: int, j: int) -> int:
        """Number of group-``j`` players of gadget ``i`` on their 0-strategy."""
        return sum(1 for p in self.players(i, j) if self.bit(state, p) == 0)

    def degree(self, resource: int) -> int:
        """Number of player edge endpoints at ``resource`` (self-loops count twice)."""
        return sum((a == resource) + (b == resource) for a, b in self.edges)


def build_gadget_game(n: int) -> GadgetGameSpec:
    if n < 1:
        raise GameError("gadget family needs n >= 1")
    total = 5 * n * n
    ts = thresholds(n)
    tables = [threshold_delays(t, total) for t in ts]
    spec = GadgetGameSpec(n, None, None, ts, (), ())  # type: ignore[arg-type]
    strategies, delays, edges, groups = [], [], [], []
    for i in range(n):
        for j, (lo, hi) in enumerate(GROUP_ENDPOINTS):
            r0, r1 = spec.resource(i, lo), spec.resource(i, hi)
            for _ in range(n):
                edges.append((r0, r1))
                groups.append((i, j))
                if r0 == r1:
                    # n = 1 only: group 4 joins r_{0,0} with itself
                    strategies.append((r0,))
                    delays.append((tables[j][0],))
                else:
                    strategies.append((r0, r1))
                    delays.append(tables[j])
    game = Game(3 * n, tuple(strategies), tuple(delays))
    graph = as_graph_game(game) if n > 1 else None
    return GadgetGameSpec(n, game, graph, ts, tuple(edges), tuple(groups))


@dataclass(frozen=True)
class EquilibriumReference:
    congestion: tuple[int, ...]


def equilibrium_reference(spec: GadgetGameSpec) -> EquilibriumReference:
    n = spec.n
    ref = [0] * (3 * n)
    for i in range(n):
        ref[spec.resource(i, 0)] = 3 * n
        ref[spec.resource(i, 1)] = n
        ref[spec.resource(i, 2)] = n
    return EquilibriumReference(tuple(ref))


def place_equilibrium_tokens(spec: GadgetGameSpec, state: State) -> TokenMap:
    ref = equilibrium_reference(spec).congestion
    return TokenMap(tuple(c - r for c, r in zip(state.congestion, ref)), ref)


def brute_force_equilibria(spec: GadgetGameSpec, state_cap: int = DEFAULT_NODE_CAP) -> list[State]:
    """Every Nash equilibrium, by exhaustive enumeration of all states."""
    total = state_count(spec.game)
    if total > state_cap:
        raise GameError(f"{total} states exceed cap {state_cap}")
    game = spec.game
    out = []
    for code in nash_codes(game, node_cap=state_cap).tolist():
        digits = [(code >> p) & 1 if len(s) == 2 else 0 for p, s in enumerate(game.strategies)]
        out.append(State.from_indices(game, digits))
    return out


def initial_configuration(spec: GadgetGameSpec) -> State:
    """Two overload tokens on ``r_{0,0}``, two underload tokens on ``r_{n/2,0}``."""
    n = spec.n
    if n % 2 or n < 4:
        raise GameError("initial configuration needs an even n >= 4")
    bits = [0] * spec.game.player_count
    for i in range(n):
        for j in (2, 3):
            for p in spec.players(i, j):
                bits[p] = 1
        ones = n // 2 if i < n // 2 else n // 2 + 2
        for p in list(spec.players(i, 4))[:ones]:
            bits[p] = 1
    return spec.state_from_bits(bits)


def _first_mover(spec: GadgetGameSpec, state: State, i: int, j: int, from_bit: int) -> int:
    for p in spec.players(i, j):
        if spec.bit(state, p) == from_bit and not is_satisfied(spec.game, state, p):
            return p
    raise ReplayMismatch(f"no unsatisfied group-{j} player of gadget {i} on strategy {from_bit}")


def _local(spec: GadgetGameSpec, tokens: TokenMap, i: int) -> tuple[int, int, int, int]:
    return tuple(tokens[spec.resource(i, j)] for j in range(4))  # type: ignore[return-value]


# (group, gadget offset, from-bit) per scripted move; offset 1 = next gadget
_OVERLOAD_SCRIPT = ((0, 0, 0), (1, 0, 0), (4, 1, 0), (4, 0, 0), (4, 1, 0), (0, 0, 1))
_UNDERLOAD_SCRIPT = ((2, 0, 1), (3, 0, 1), (4, 1, 1), (4, 0, 1), (4, 1, 1), (2, 0, 0))

# moves completed at panels A..F; panel F follows the second hand-over and the return move
PANEL_STEPS = (0, 1, 2, 3, 4, 6)

# token annotations on (r_{i,0}, r_{i,1}, r_{i,2}, r_{i,3}) for panels A..F
OVERLOAD_PANELS = ((2, 0, 0, 0), (1, 1, 0, 0), (1, 0, 0, 1), (1, 0, 0, 0), (0, 0, 0, 1), (1, -1, 0, 0))
UNDERLOAD_PANELS = (
    (-2, 0, 0, 0), (-1, 0, -1, 0), (-1, 0, 0, -1), (-1, 0, 0, 0), (0, 0, 0, -1), (-1, 0, 1, 0),
)


def overload_labels(n: int) -> tuple[tuple[int, ...], ...]:
    """Players on the 0-strategy per group of the replayed gadget, panels A..F."""
    h = n // 2
    return (
        (n, n, 0, 0, h), (n - 1, n, 0, 0, h), (n - 1, n - 1, 0, 0, h),
        (n - 1, n - 1, 0, 0, h), (n - 1, n - 1, 0, 0, h - 1), (n, n - 1, 0, 0, h - 1),
    )


def underload_labels(n: int) -> tuple[tuple[int, ...], ...]:
    h = n // 2
    return (
        (n, n, 0, 0, h - 2), (n, n, 1, 0, h - 2), (n, n, 1, 1, h - 2),
        (n, n, 1, 1, h - 2), (n, n, 1, 1, h - 1), (n, n, 0, 1, h - 1),
    )


@dataclass
class Replay:
    gadget: int
    moves: list[int]
    states: list[State]
    panels: list[TokenMap]  # A..F

    def local(self, spec: GadgetGameSpec, k: int) -> tuple[int, int, int, int]:
        return _local(spec, self.panels[k], self.gadget)


def _replay(spec: GadgetGameSpec, gadget: int, script, expected, labels) -> Replay:
    state = initial_configuration(spec)
    moves = []
    for j, offset, from_bit in script:
        p = _first_mover(spec, state, gadget + offset, j, from_bit)
        moves.append(p)
        state = replay_forced(spec.game, state, [p])[-1]
    states = replay_forced(spec.game, initial_configuration(spec), moves)
    shown = [states[k] for k in PANEL_STEPS]
    panels = [place_equilibrium_tokens(spec, st) for st in shown]
    for k, (tm, want) in enumerate(zip(panels, expected)):
        got = _local(spec, tm, gadget)
        if got != want:
            raise ReplayMismatch(f"panel {'ABCDEF'[k]}: tokens {got}, expected {want}")
        counts = group_zero_counts(spec, shown[k], gadget)
        if counts != labels[k]:
            raise ReplayMismatch(f"panel {'ABCDEF'[k]}: group counts {counts}, expected {labels[k]}")
    return Replay(gadget, moves, states, panels)


def replay_overload_generation(spec: GadgetGameSpec) -> Replay:
    """Two overload tokens at ``r_{0,0}`` split over the upper path and spawn a new pair."""
    return _replay(spec, 0, _OVERLOAD_SCRIPT, OVERLOAD_PANELS, overload_labels(spec.n))


def replay_underload_generation(spec: GadgetGameSpec) -> Replay:
    """Mirror image at gadget ``n/2``: underload tokens detour over the lower path."""
    return _replay(spec, spec.n // 2, _UNDERLOAD_SCRIPT, UNDERLOAD_PANELS, underload_labels(spec.n))


def interest_census(spec: GadgetGameSpec) -> list[tuple[int, int, int]]:
    """Per gadget: endpoint counts at (r_{i,0}, r_{i,1}, r_{i,2})."""
    return [tuple(spec.degree(spec.resource(i, j)) for j in range(3)) for i in range(spec.n)]


def group_zero_counts(spec: GadgetGameSpec, state: State, i: int) -> tuple[int, ...]:
    return tuple(spec.count_zero(state, i, j) for j in range(5))


def equilibrium_profile(spec: GadgetGameSpec, state: State) -> list[tuple[int, int, int]]:
    return [
        tuple(state.congestion[spec.resource(i, j)] for j in range(3)) for i in range(spec.n)
    ]


def states_as_bits(spec: GadgetGameSpec, states) -> np.ndarray:
    return np.array([[spec.bit(s, p) for p in range(spec.game.player_count)] for s in states])
