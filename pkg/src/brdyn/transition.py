"""Exhaustive transition graphs of small games.

Nodes are mixed-radix codes of per-player strategy indices (player 0 is the
least significant digit; for two-strategy games the code is a bitstring).
Edges carry the moving player as label and are built with vectorized
best-response evaluation over all states at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .game import Game, GameError, State, TieViolation

DEFAULT_NODE_CAP = 1 << 21

Edge = tuple[int, int, int]  # (source code, player, target code)


class CycleError(GameError):
    """An operation that needs an acyclic transition graph met a cycle."""


@dataclass
class TransitionGraph:
    game: Game
    radices: np.ndarray
    weights: np.ndarray
    src: np.ndarray
    label: np.ndarray
    dst: np.ndarray

    @property
    def node_count(self) -> int:
        return int(np.prod(self.radices, dtype=np.int64))

    @property
    def edge_count(self) -> int:
        return int(self.src.shape[0])

    def encode(self, state: State) -> int:
        digits = [s.index(c) for s, c in zip(self.game.strategies, state.choice)]
        return int(np.dot(digits, self.weights)) if digits else 0

    def decode(self, code: int) -> State:
        digits = (code // self.weights) % self.radices
        return State.from_indices(self.game, (int(d) for d in digits))

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.node_count)

    def sinks(self) -> np.ndarray:
        return np.flatnonzero(self.out_degree() == 0)

    def edges(self) -> Iterator[Edge]:
        for s, p, d in zip(self.src.tolist(), self.label.tolist(), self.dst.tolist()):
            yield s, p, d

    def edge_set(self) -> set[Edge]:
        return set(self.edges())

    def adjacency(self) -> csr_matrix:
        n = self.node_count
        data = np.ones(self.edge_count, dtype=np.int8)
        return csr_matrix((data, (self.src, self.dst)), shape=(n, n))

    def successors(self, code: int) -> list[tuple[int, int]]:
        lo, hi = np.searchsorted(self.src, [code, code + 1])
        return list(zip(self.label[lo:hi].tolist(), self.dst[lo:hi].tolist()))

    def to_dot(self, names: Callable[[int], str] | None = None) -> str:
        names = names or (lambda c: format(c, "b").zfill(len(self.radices)))
        lines = ["digraph TG {"]
        for code in range(self.node_count):
            lines.append(f'  n{code} [label="{names(code)}"];')
        for s, p, d in self.edges():
            lines.append(f'  n{s} -> n{d} [label="{p}"];')
        lines.append("}")
        return "\n".join(lines)


def _digit_layout(game: Game) -> tuple[np.ndarray, np.ndarray]:
    radices = np.array([len(s) for s in game.strategies], dtype=np.int64)
    weights = np.ones_like(radices)
    if len(radices) > 1:
        weights[1:] = np.cumprod(radices[:-1])
    return radices, weights


def state_count(game: Game) -> int:
    total = 1
    for s in game.strategies:
        total *= len(s)
    return total


def _block_edges(game: Game, codes: np.ndarray, radices, weights):
    n, m = game.player_count, game.resource_count
    digits = (codes[:, None] // weights[None, :]) % radices[None, :]
    res = [np.asarray(s, dtype=np.int64)[digits[:, i]] for i, s in enumerate(game.strategies)]
    cong = np.zeros((codes.shape[0], m), dtype=np.int64)
    rows = np.arange(codes.shape[0])
    for i in range(n):
        cong[rows, res[i]] += 1
    out = []
    for i, (strat, tables) in enumerate(zip(game.strategies, game.delays)):
        k = len(strat)
        if k == 1:
            continue
        # table[j, c] = delay of strategy j at congestion c (index 0 unused)
        table = np.zeros((k, n + 2), dtype=object if _big(tables) else np.int64)
        for j, t in enumerate(tables):
            table[j, 1 : n + 1] = t
        d = digits[:, i]
        stay = table[d, cong[rows, res[i]]]
        best = np.full(codes.shape[0], -1, dtype=np.int64)
        best_v = stay.copy()
        for j, r in enumerate(strat):
            cand = table[j, cong[:, r] + 1]
            mask = d != j
            if np.any(mask & (cand == best_v)):
                raise TieViolation(f"player {i}: equal delays in some state")
            better = mask & (cand < best_v)
            best_v = np.where(better, cand, best_v)
            best = np.where(better, j, best)
        moving = best >= 0
        src = codes[moving]
        dst = src + (best[moving] - d[moving]) * weights[i]
        out.append((src, np.full(src.shape[0], i, dtype=np.int64), dst))
    return out


def _big(tables) -> bool:
    return any(t[-1] >= 1 << 62 for t in tables)


def build_tg(game: Game, node_cap: int = DEFAULT_NODE_CAP, block: int = 1 << 16) -> TransitionGraph:
    """Transition graph over every state with one edge per available best response."""
    total = state_count(game)
    if total > node_cap:
        raise GameError(f"{total} states exceed node cap {node_cap}")
    radices, weights = _digit_layout(game)
    parts = []
    for lo in range(0, total, block):
        codes = np.arange(lo, min(total, lo + block), dtype=np.int64)
        parts.extend(_block_edges(game, codes, radices, weights))
    if parts:
        src = np.concatenate([p[0] for p in parts])
        lab = np.concatenate([p[1] for p in parts])
        dst = np.concatenate([p[2] for p in parts])
        order = np.lexsort((lab, src))
        src, lab, dst = src[order], lab[order], dst[order]
    else:
        src = lab = dst = np.zeros(0, dtype=np.int64)
    return TransitionGraph(game, radices, weights, src, lab, dst)


def nash_codes(game: Game, node_cap: int = DEFAULT_NODE_CAP, block: int = 1 << 16) -> np.ndarray:
    """Codes of all Nash equilibria, without materializing the edge list."""
    total = state_count(game)
    if total > node_cap:
        raise GameError(f"{total} states exceed node cap {node_cap}")
    radices, weights = _digit_layout(game)
    found = []
    for lo in range(0, total, block):
        codes = np.arange(lo, min(total, lo + block), dtype=np.int64)
        has_edge = np.zeros(codes.shape[0], dtype=bool)
        for src, _, _ in _block_edges(game, codes, radices, weights):
            has_edge[src - lo] = True
        found.append(codes[~has_edge])
    return np.concatenate(found) if found else np.zeros(0, dtype=np.int64)


def find_cycle(tg: TransitionGraph) -> list[Edge] | None:
    """A simple directed cycle as a list of labelled edges, or None if acyclic."""
    n = tg.node_count
    if tg.edge_count == 0:
        return None
    ncomp, comp = connected_components(tg.adjacency(), directed=True, connection="strong")
    sizes = np.bincount(comp, minlength=ncomp)
    big = np.flatnonzero(sizes[comp] >= 2)
    if big.size == 0:
        return None
    start = int(big[0])
    target = comp[start]
    seen: dict[int, int] = {}
    path: list[Edge] = []
    node = start
    while node not in seen:
        seen[node] = len(path)
        for p, d in tg.successors(node):
            if comp[d] == target:
                path.append((node, p, d))
                node = d
                break
    return path[seen[node]:]


def longest_path(tg: TransitionGraph) -> int:
    """Length of the longest directed path; raises :class:`CycleError` on cycles.

    Sources are peeled off layer by layer; the number of layers minus one is
    the longest path length.
    """
    n = tg.node_count
    indeg = np.bincount(tg.dst, minlength=n)
    starts = np.searchsorted(tg.src, np.arange(n + 1))
    frontier = np.flatnonzero(indeg == 0)
    removed, layers = 0, 0
    while frontier.size:
        layers += 1
        removed += frontier.size
        lo, hi = starts[frontier], starts[frontier + 1]
        lengths = hi - lo
        if lengths.sum() == 0:
            frontier = np.zeros(0, dtype=np.int64)
            continue
        idx = np.repeat(lo - np.cumsum(np.r_[0, lengths[:-1]]), lengths) + np.arange(lengths.sum())
        targets = tg.dst[idx]
        dec = np.bincount(targets, minlength=n)
        touched = np.flatnonzero(dec)
        indeg[touched] -= dec[touched]
        frontier = touched[indeg[touched] == 0]
    if removed != n:
        raise CycleError("transition graph has a cycle")
    return layers - 1


def is_acyclic(tg: TransitionGraph) -> bool:
    return find_cycle(tg) is None


def check_cycle_player_counts(tg: TransitionGraph, cycle: Sequence[Edge]) -> bool:
    """True iff every player labels at least two edges of the given cycle."""
    if not cycle:
        raise GameError("empty edge list is not a cycle")
    for k, (s, p, d) in enumerate(cycle):
        if (p, d) not in tg.successors(s):
            raise GameError(f"edge {k} {(s, p, d)} is not in the transition graph")
        if d != cycle[(k + 1) % len(cycle)][0]:
            raise GameError(f"edge {k} does not connect to edge {(k + 1) % len(cycle)}")
    counts = np.bincount([p for _, p, _ in cycle], minlength=tg.game.player_count)
    return bool(np.all(counts >= 2))


def simple_cycles(tg: TransitionGraph, limit: int | None = None) -> Iterator[list[Edge]]:
    """Enumerate simple cycles (node count must be small)."""
    import networkx as nx

    if tg.node_count > 1 << 12:
        raise GameError("simple cycle enumeration is limited to 2^12 nodes")
    g = nx.DiGraph()
    labels = {}
    for s, p, d in tg.edges():
        g.add_edge(s, d)
        labels[s, d] = p
    for k, nodes in enumerate(nx.simple_cycles(g)):
        if limit is not None and k >= limit:
            return
        yield [(u, labels[u, v], v) for u, v in zip(nodes, nodes[1:] + nodes[:1])]


def verify_potential(tg: TransitionGraph, phi: Callable[[State], tuple | int]) -> bool:
    """True iff ``phi`` strictly decreases (lexicographically) along every edge."""
    return first_potential_violation(tg, phi) is None


def first_potential_violation(tg: TransitionGraph, phi) -> Edge | None:
    values = {}

    def val(code):
        if code not in values:
            v = phi(tg.decode(code))
            values[code] = v if isinstance(v, tuple) else (v,)
        return values[code]

    for s, p, d in tg.edges():
        if not val(d) < val(s):
            return s, p, d
    return None
