"""Player-specific singleton congestion games.

A game assigns every player a set of resources to choose from and, for each
of those resources, a player-specific delay table indexed by congestion
``1..n`` (``n`` = number of players). Tables are stored fully materialized and
aligned with the player's strategy tuple: ``delays[i][j]`` is the table of
resource ``strategies[i][j]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

UINT64_LIMIT = 1 << 64


class GameError(ValueError):
    """Raised for malformed games, states or player ids."""


class TieViolation(GameError):
    """A best-response comparison hit two equal delay values."""


@dataclass(frozen=True)
class Game:
    resource_count: int
    strategies: tuple[tuple[int, ...], ...]
    delays: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def player_count(self) -> int:
        return len(self.strategies)

    def table(self, player: int, resource: int) -> tuple[int, ...]:
        try:
            j = self.strategies[player].index(resource)
        except ValueError:
            raise GameError(f"resource {resource} is not a strategy of player {player}") from None
        return self.delays[player][j]

    def delay(self, player: int, resource: int, congestion: int) -> int:
        """Delay of ``player`` on ``resource`` when ``congestion`` players share it."""
        return self.table(player, resource)[congestion - 1]

    def interested(self) -> list[list[int]]:
        """Players per resource that have the resource in their strategy set."""
        out: list[list[int]] = [[] for _ in range(self.resource_count)]
        for i, strat in enumerate(self.strategies):
            for r in strat:
                out[r].append(i)
        return out

    @classmethod
    def from_mappings(
        cls, resource_count: int, players: Sequence[dict[int, Sequence[int]]]
    ) -> Game:
        """Build a game from one ``{resource: table}`` mapping per player."""
        strategies = tuple(tuple(int(r) for r in p) for p in players)
        delays = tuple(tuple(tuple(int(v) for v in p[r]) for r in p) for p in players)
        return cls(resource_count, strategies, delays)

    # JSON document: {"resources": m, "players": [{"strategies": [...], "delays": {"<rid>": [...]}}]}

    def to_json(self) -> dict:
        return {
            "resources": self.resource_count,
            "players": [
                {
                    "strategies": list(strat),
                    "delays": {str(r): list(t) for r, t in zip(strat, tables)},
                }
                for strat, tables in zip(self.strategies, self.delays)
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> Game:
        """Parse and validate a game document; raises :class:`GameError` if invalid."""
        try:
            m = int(doc["resources"])
            strategies = []
            delays = []
            for p in doc["players"]:
                strat = tuple(int(r) for r in p["strategies"])
                tables = tuple(tuple(int(v) for v in p["delays"][str(r)]) for r in strat)
                strategies.append(strat)
                delays.append(tables)
        except (KeyError, TypeError, ValueError) as exc:
            raise GameError(f"malformed game document: {exc!r}") from exc
        game = cls(m, tuple(strategies), tuple(delays))
        result = validate_game(game)
        if not result:
            raise GameError("invalid game: " + "; ".join(str(v) for v in result.violations[:5]))
        return game


def load_game(path: str | Path) -> Game:
    with open(path) as fh:
        return Game.from_json(json.load(fh))


def dump_game(game: Game, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(game.to_json(), fh)


@dataclass(frozen=True)
class Violation:
    kind: str
    player: int
    resource: int | None = None
    congestion: int | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = f"player {self.player}"
        if self.resource is not None:
            where += f", resource {self.resource}"
        if self.congestion is not None:
            where += f", congestion {self.congestion}"
        return f"{self.kind} ({where}){': ' + self.detail if self.detail else ''}"


@dataclass
class ValidationResult:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _check_tables(player: int, strat, tables, n: int) -> list[Violation]:
    out = []
    seen: dict[int, tuple[int, int]] = {}
    for r, table in zip(strat, tables):
        if len(table) != n:
            out.append(Violation("table-length", player, r, detail=f"{len(table)} != {n}"))
        for k, v in enumerate(table, start=1):
            if not (0 < v < UINT64_LIMIT):
                out.append(Violation("value-range", player, r, k, f"{v} not in [1, 2^64)"))
            if k > 1 and v <= table[k - 2]:
                out.append(Violation("not-increasing", player, r, k, f"{table[k - 2]} >= {v}"))
            if v in seen and seen[v][0] != r:
                r0, k0 = seen[v]
                out.append(
                    Violation("tie", player, r, k, f"equals value at resource {r0}, congestion {k0}")
                )
            seen.setdefault(v, (r, k))
    return out


def validate_game(game: Game) -> ValidationResult:
    """Check strict monotonicity, per-player tie-freeness and resource ids."""
    result = ValidationResult()
    n, m = game.player_count, game.resource_count
    if m < 1:
        result.violations.append(Violation("no-resources", -1))
    if len(game.delays) != n:
        result.violations.append(Violation("shape", -1, detail="delays/strategies length mismatch"))
        return result
    checked: dict[tuple, list[Violation]] = {}
    for i, (strat, tables) in enumerate(zip(game.strategies, game.delays)):
        if not strat:
            result.violations.append(Violation("empty-strategy-set", i))
            continue
        if len(set(strat)) != len(strat):
            result.violations.append(Violation("duplicate-strategy", i))
        for r in strat:
            if not (0 <= r < m):
                result.violations.append(Violation("bad-resource", i, r))
        if len(tables) != len(strat):
            result.violations.append(Violation("shape", i, detail="one table per strategy required"))
            continue
        # gadget games share table objects across thousands of players
        key = (strat, tuple(id(t) for t in tables))
        if key not in checked:
            checked[key] = _check_tables(0, strat, tables, n)
        for v in checked[key]:
            result.violations.append(Violation(v.kind, i, v.resource, v.congestion, v.detail))
    return result


class State:
    """One chosen resource per player plus the derived congestion vector."""

    __slots__ = ("choice", "congestion")

    def __init__(self, game: Game, choice: Iterable[int]):
        self.choice = [int(r) for r in choice]
        if len(self.choice) != game.player_count:
            raise GameError(f"state has {len(self.choice)} entries for {game.player_count} players")
        for i, r in enumerate(self.choice):
            if r not in game.strategies[i]:
                raise GameError(f"player {i} cannot choose resource {r}")
        self.congestion = recount(game.resource_count, self.choice)

    @classmethod
    def from_indices(cls, game: Game, indices: Iterable[int]) -> State:
        """State from per-player strategy indices (0 = first strategy)."""
        return cls(game, (game.strategies[i][j] for i, j in enumerate(indices)))

    def move(self, player: int, resource: int) -> None:
        old = self.choice[player]
        self.congestion[old] -= 1
        self.congestion[resource] += 1
        self.choice[player] = resource

    def copy(self) -> State:
        new = State.__new__(State)
        new.choice = list(self.choice)
        new.congestion = list(self.congestion)
        return new

    def key(self) -> tuple[int, ...]:
        return tuple(self.choice)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, State) and self.choice == other.choice

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"State({self.choice})"


def recount(resource_count: int, choice: Sequence[int]) -> list[int]:
    cong = [0] * resource_count
    for r in choice:
        cong[r] += 1
    return cong


def _check_player(game: Game, player: int) -> None:
    if not (0 <= player < game.player_count):
        raise GameError(f"invalid player id {player}")


def best_response(game: Game, state: State, player: int) -> int:
    """The unique best response of ``player`` to ``state``.

    Staying is compared against every alternative at congestion + 1; ties are
    excluded by validation, so any equality raises :class:`TieViolation`.
    """
    _check_player(game, player)
    cur = state.choice[player]
    strat = game.strategies[player]
    tables = game.delays[player]
    cong = state.congestion
    stay = tables[strat.index(cur)][cong[cur] - 1]
    best_r, best_v = cur, stay
    for r, t in zip(strat, tables):
        if r == cur:
            continue
        v = t[cong[r]]
        if v == best_v:
            raise TieViolation(f"player {player}: delay {v} on resources {best_r} and {r}")
        if v < best_v:
            best_r, best_v = r, v
    return best_r


def is_satisfied(game: Game, state: State, player: int) -> bool:
    return best_response(game, state, player) == state.choice[player]


def unsatisfied_players(game: Game, state: State) -> list[int]:
    return [i for i in range(game.player_count) if not is_satisfied(game, state, i)]


def is_nash(game: Game, state: State) -> bool:
    return all(is_satisfied(game, state, i) for i in range(game.player_count))


def rank_reduce(game: Game) -> Game:
    """Replace every delay by its 1-based rank among the player's own delay values."""
    delays = []
    for tables in game.delays:
        values = sorted(v for t in tables for v in t)
        rank = {v: k for k, v in enumerate(values, start=1)}
        delays.append(tuple(tuple(rank[v] for v in t) for t in tables))
    return Game(game.resource_count, game.strategies, tuple(delays))


def random_game(
    players: int, resources: int, rng: np.random.Generator, max_strategies: int = 3
) -> Game:
    """Random tie-free game; each player picks 1..max_strategies distinct resources."""
    strategies = []
    delays = []
    for _ in range(players):
        k = int(rng.integers(1, min(max_strategies, resources) + 1))
        strat = tuple(int(r) for r in rng.choice(resources, size=k, replace=False))
        values = rng.choice(10 * k * players + 10, size=k * players, replace=False) + 1
        tables = tuple(
            tuple(int(v) for v in sorted(values[j * players : (j + 1) * players]))
            for j in range(k)
        )
        strategies.append(strat)
        delays.append(tables)
    return Game(resources, tuple(strategies), tuple(delays))
