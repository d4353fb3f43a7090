"""Token framework for circle games.

Resources ``r_0..r_{n-1}`` run clockwise and player ``i`` chooses between
``r_i`` (0-strategy) and ``r_{i+1}`` (1-strategy). A resource used by two
players carries an overload token, an unused one an underload token.

A token on ``r_k`` may move clockwise through player ``k`` and anticlockwise
through player ``k-1``; whether it does depends only on that player's type.
Directions are encoded as +1 (clockwise) and -1 (anticlockwise).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .dynamics import RunRecord
from .game import GameError, State, is_satisfied, unsatisfied_players
from .graphs import CIRCLE, GraphGame, PlayerType, circle_types

CW, ACW = 1, -1


class Direction(enum.Enum):
    CLOCKWISE = CW
    ANTICLOCKWISE = ACW


class CaseTag(enum.Enum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4


# (overload direction, underload direction)
_DIRECTIONS = {
    PlayerType.T2: (ACW, CW),
    PlayerType.T2P: (CW, ACW),
    PlayerType.T3: (CW, CW),
    PlayerType.T3P: (ACW, ACW),
}


@dataclass(frozen=True)
class TokenMap:
    """Signed token multiplicity per resource relative to ``reference``."""

    tokens: tuple[int, ...]
    reference: tuple[int, ...]

    @property
    def overload(self) -> int:
        return sum(t for t in self.tokens if t > 0)

    @property
    def underload(self) -> int:
        return -sum(t for t in self.tokens if t < 0)

    @property
    def total(self) -> int:
        return self.overload + self.underload

    def __getitem__(self, resource: int) -> int:
        return self.tokens[resource]

    def positions(self) -> list[int]:
        return [r for r, t in enumerate(self.tokens) if t]


def token_directions(t: PlayerType) -> tuple[Direction, Direction]:
    """Movement directions (overload, underload) inside a run of type-``t`` players."""
    if t not in _DIRECTIONS:
        raise GameError(f"type {t} has no token directions (types 1 and 1' are excluded)")
    o, u = _DIRECTIONS[t]
    return Direction(o), Direction(u)


def _require_circle(gg: GraphGame) -> None:
    if gg.topology != CIRCLE or not gg.canonical_circle:
        raise GameError("expected a canonically labelled circle game")


def place_tokens(gg: GraphGame, state: State) -> TokenMap:
    _require_circle(gg)
    tokens = []
    for r, c in enumerate(state.congestion):
        if c > 2:
            raise GameError(f"congestion {c} on resource {r} is impossible on a circle")
        tokens.append(c - 1)
    return TokenMap(tuple(tokens), (1,) * gg.resource_count)


def tokens_to_state(gg: GraphGame, tokens: TokenMap) -> State:
    """The unique state realizing a legal, non-empty token placement."""
    _require_circle(gg)
    n = gg.resource_count
    t = tokens.tokens
    if len(t) != n or any(x not in (-1, 0, 1) for x in t):
        raise GameError("circle tokens must be -1, 0 or +1 per resource")
    pos = [r for r in range(n) if t[r]]
    if not pos:
        raise GameError("the empty placement is realized by two states")
    for a, b in zip(pos, pos[1:] + pos[:1]):
        if t[a] == t[b]:
            raise GameError("tokens must alternate in kind around the circle")
    bits = []
    last = t[pos[-1]]  # token preceding r_0 anticlockwise
    for i in range(n):
        if t[i]:
            last = t[i]
        bits.append(1 if last < 0 else 0)
    return gg.state_from_bits(bits)


@dataclass(frozen=True)
class _Frame:
    n: int
    types: tuple[PlayerType, ...]
    over: tuple[int, ...]
    under: tuple[int, ...]
    term_over: frozenset[int]
    term_under: frozenset[int]


def _terminals(dirs: Sequence[int]) -> frozenset[int]:
    n = len(dirs)
    return frozenset(k for k in range(n) if dirs[k - 1] == CW and dirs[k] == ACW)


@lru_cache(maxsize=256)
def _frame(gg: GraphGame) -> _Frame:
    _require_circle(gg)
    types = tuple(circle_types(gg))
    bad = [i for i, t in enumerate(types) if t not in _DIRECTIONS]
    if bad:
        raise GameError(f"players {bad} are of type 1 or 1'")
    over = tuple(_DIRECTIONS[t][0] for t in types)
    under = tuple(_DIRECTIONS[t][1] for t in types)
    return _Frame(len(types), types, over, under, _terminals(over), _terminals(under))


def termination_points(gg: GraphGame) -> tuple[set[int], set[int]]:
    """Resources where overload / underload tokens get stuck."""
    f = _frame(gg)
    return set(f.term_over), set(f.term_under)


def classify_case(gg: GraphGame) -> CaseTag:
    f = _frame(gg)
    if f.term_over and f.term_under:
        return CaseTag.CASE1
    if f.term_over or f.term_under:
        return CaseTag.CASE2
    # without termination points each kind moves uniformly
    return CaseTag.CASE3 if f.over[0] != f.under[0] else CaseTag.CASE4


def _moves(dirs: Sequence[int], k: int) -> list[int]:
    out = []
    if dirs[k] == CW:
        out.append(CW)
    if dirs[k - 1] == ACW:
        out.append(ACW)
    return out


def _stop_distance(dirs: Sequence[int], k: int, d: int) -> int | None:
    """Edges a token at ``r_k`` travels in direction ``d`` before it must stop."""
    n = len(dirs)
    for s in range(1, n + 1):
        nxt = dirs[(k + s) % n] if d == CW else dirs[(k - s - 1) % n]
        if nxt == -d:
            return s
    return None


def _reach(dirs: Sequence[int], k: int) -> int:
    """Distance to the termination point ahead; max over both ways at a fork."""
    return max((_stop_distance(dirs, k, d) for d in _moves(dirs, k)), default=0)


def _next_token(tokens: Sequence[int], k: int, d: int) -> tuple[int, int]:
    n = len(tokens)
    for s in range(1, n + 1):
        r = (k + d * s) % n
        if tokens[r]:
            return r, s
    raise GameError("no other token on the circle")


def _tokens(gg: GraphGame, state: State) -> tuple[int, ...]:
    return place_tokens(gg, state).tokens


def potential_case1(gg: GraphGame, state: State) -> int:
    """Sum over tokens of (1 + distance to the termination point ahead).

    The extra 1 per token makes collisions of two tokens that already sit on
    termination points strictly decrease the value.
    """
    f = _frame(gg)
    if not (f.term_over and f.term_under):
        raise GameError("potential_case1 needs termination points for both kinds")
    t = _tokens(gg, state)
    return sum(1 + _reach(f.over if x > 0 else f.under, k) for k, x in enumerate(t) if x)


def edge_distance_sum(gg: GraphGame, state: State) -> int:
    """Plain sum of edge distances to the termination points ahead (no per-token offset)."""
    f = _frame(gg)
    t = _tokens(gg, state)
    return sum(_reach(f.over if x > 0 else f.under, k) for k, x in enumerate(t) if x)


def potential_case2(gg: GraphGame, state: State) -> tuple[int, int]:
    """(number of overload tokens, summed distances).

    Tokens of the kind with termination points count their distance to the
    termination point ahead. Each token of the other kind, which moves
    uniformly in one direction, counts the gap to the next token ahead plus,
    if that token can also move that way, its distance to where it stops.
    """
    f = _frame(gg)
    if bool(f.term_over) == bool(f.term_under):
        raise GameError("potential_case2 needs termination points for exactly one kind")
    t = _tokens(gg, state)
    stuck_sign = 1 if f.term_over else -1
    stuck_dirs, free_dirs = (f.over, f.under) if f.term_over else (f.under, f.over)
    d = free_dirs[0]
    total = 0
    for k, x in enumerate(t):
        if not x:
            continue
        if x == stuck_sign:
            total += _reach(stuck_dirs, k)
        else:
            partner, gap = _next_token(t, k, d)
            total += gap
            if d in _moves(stuck_dirs, partner):
                total += _stop_distance(stuck_dirs, partner, d)
    return sum(1 for x in t if x > 0), total


def potential_case3(gg: GraphGame, state: State) -> tuple[int, int]:
    """(number of overload tokens, summed gaps of overload/underload pairs).

    Every overload token is paired with the next underload token in the
    overload movement direction.
    """
    f = _frame(gg)
    if classify_case(gg) is not CaseTag.CASE3:
        raise GameError("potential_case3 needs a case-3 game")
    t = _tokens(gg, state)
    d = f.over[0]
    gaps = sum(_next_token(t, k, d)[1] for k, x in enumerate(t) if x > 0)
    return sum(1 for x in t if x > 0), gaps


POTENTIALS = {
    CaseTag.CASE1: potential_case1,
    CaseTag.CASE2: potential_case2,
    CaseTag.CASE3: potential_case3,
}


def walk_expected_steps(n: int, k: int) -> Fraction:
    """Expected absorption time of the symmetric +-1 walk on ``0..n`` started at ``k``.

    Solves ``T(0) = T(n) = 0``, ``T(j) = 1 + (T(j-1) + T(j+1)) / 2`` exactly
    by forward elimination over the tridiagonal system.
    """
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside [0, {n}]")
    if n < 2:
        return Fraction(0)
    # unknowns T(1..n-1): -T(j-1)/2 + T(j) - T(j+1)/2 = 1
    m = n - 1
    c = [Fraction(0)] * m
    r = [Fraction(0)] * m
    half = Fraction(1, 2)
    for j in range(m):
        denom = 1 - (-half) * (c[j - 1] if j else 0)
        c[j] = -half / denom
        r[j] = (1 - (-half) * (r[j - 1] if j else 0)) / denom
    t = [Fraction(0)] * m
    for j in range(m - 1, -1, -1):
        t[j] = r[j] - c[j] * (t[j + 1] if j + 1 < m else 0)
    return Fraction(0) if k in (0, n) else t[k - 1]


def token_count_trace(gg: GraphGame, run: RunRecord) -> list[int]:
    """Total token count before the first step and after every step."""
    if run.trace is None:
        raise GameError("run has no trace")
    if run.initial is not None:
        state = run.initial.copy()
    else:
        state = run.final_state.copy()
        for p, a, b in reversed(run.trace):
            state.move(p, a)
    counts = [place_tokens(gg, state).total]
    for p, a, b in run.trace:
        state.move(p, b)
        counts.append(place_tokens(gg, state).total)
    return counts


def maximal_blocks(gg: GraphGame, state: State) -> list[list[int]]:
    """Maximal runs of consecutive players on the same strategy, each listed clockwise.

    Empty if all players are synchronized.
    """
    n = gg.player_count
    bits = [gg.bit(state, i) for i in range(n)]
    starts = [i for i in range(n) if bits[i] != bits[i - 1]]
    blocks = []
    for a, b in zip(starts, starts[1:] + starts[:1]):
        length = (b - a) % n or n
        blocks.append([(a + s) % n for s in range(length)])
    return blocks


def directed_unsatisfied_counts(gg: GraphGame, state: State) -> tuple[int, int]:
    """(unsatisfied players on their 0-strategy, unsatisfied players on their 1-strategy)."""
    up = down = 0
    for p in unsatisfied_players(gg.base, state):
        if gg.bit(state, p) == 0:
            up += 1
        else:
            down += 1
    return up, down


def unsatisfied_per_block(gg: GraphGame, state: State) -> list[list[int]]:
    """For each maximal block (clockwise order), its unsatisfied members."""
    return [[p for p in b if not is_satisfied(gg.base, state, p)] for b in maximal_blocks(gg, state)]
