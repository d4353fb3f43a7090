"""Compiled inner loop for best-response dynamics on two-strategy games.

The kernel mirrors ``dynamics._PyEngine`` step for step: same random stream,
same order-statistic selection, same tie handling. Status codes:
0 = Nash reached, 1 = step budget of this call used up, 2 = tie encountered.
"""

import numpy as np
from numba import njit

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV53 = 1.0 / 9007199254740992.0

POLICY_RANDOM = 0
POLICY_ROUND_ROBIN = 1
POLICY_MIN_INDEX = 2


@njit(cache=True)
def _next(state):
    state = state + np.uint64(GOLDEN)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def _fen_add(tree, i, delta):
    i += 1
    n = tree.shape[0] - 1
    while i <= n:
        tree[i] += delta
        i += i & (-i)


@njit(cache=True)
def _fen_prefix(tree, i):
    # number of marked ids in [0, i]
    s = 0
    i += 1
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@njit(cache=True)
def _fen_select(tree, k, logn):
    # smallest id whose prefix count exceeds k (k is 0-based)
    pos = 0
    n = tree.shape[0] - 1
    step = logn
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= k:
            pos = nxt
            k -= tree[nxt]
        step >>= 1
    return pos


@njit(cache=True)
def _status(p, bit, res0, res1, tab0, tab1, cong):
    # 1 = unsatisfied, 0 = satisfied, -1 = tie
    if bit[p] == 0:
        stay = tab0[p, cong[res0[p]]]
        alt = tab1[p, cong[res1[p]] + 1]
    else:
        stay = tab1[p, cong[res1[p]]]
        alt = tab0[p, cong[res0[p]] + 1]
    if alt == stay:
        return -1
    return 1 if alt < stay else 0


@njit(cache=True)
def init_unsat(bit, res0, res1, tab0, tab1, cong, unsat, tree):
    n = bit.shape[0]
    count = 0
    for p in range(n):
        s = _status(p, bit, res0, res1, tab0, tab1, cong)
        if s < 0:
            return -1
        unsat[p] = s
        if s == 1:
            _fen_add(tree, p, 1)
            count += 1
    return count


@njit(cache=True)
def advance(
    bit, res0, res1, tab0, tab1, cong, adj_ptr, adj_idx, unsat, tree, count,
    policy, rng_state, last, budget, logn, want_trace, trace_p,
):
    """Run at most ``budget`` steps; returns (status, steps, count, rng_state, last)."""
    steps = 0
    while True:
        if count == 0:
            return 0, steps, count, rng_state, last
        if steps >= budget:
            return 1, steps, count, rng_state, last
        if policy == POLICY_RANDOM:
            rng_state, z = _next(rng_state)
            u = np.float64(z >> np.uint64(11)) * INV53
            k = np.int64(u * count)
        elif policy == POLICY_ROUND_ROBIN:
            before = _fen_prefix(tree, last)
            k = before if before < count else 0
        else:
            k = 0
        p = _fen_select(tree, k, logn)
        if bit[p] == 0:
            a = res0[p]
            b = res1[p]
        else:
            a = res1[p]
            b = res0[p]
        bit[p] = 1 - bit[p]
        cong[a] -= 1
        cong[b] += 1
        if want_trace:
            trace_p[steps] = p
        steps += 1
        last = p
        for r in (a, b):
            for j in range(adj_ptr[r], adj_ptr[r + 1]):
                q = adj_idx[j]
                s = _status(q, bit, res0, res1, tab0, tab1, cong)
                if s < 0:
                    return 2, steps, count, rng_state, last
                if s != unsat[q]:
                    unsat[q] = s
                    if s == 1:
                        _fen_add(tree, q, 1)
                        count += 1
                    else:
                        _fen_add(tree, q, -1)
                        count -= 1


@njit(cache=True)
def run_batch(
    bit0, res0, res1, tab0, tab1, cong0, adj_ptr, adj_idx, policy, seeds, max_steps, logn,
    out_steps, out_done,
):
    """Independent runs from the same initial state, one per seed (no traces)."""
    n = bit0.shape[0]
    dummy = np.zeros(1, dtype=np.int64)
    for s in range(seeds.shape[0]):
        bit = bit0.copy()
        cong = cong0.copy()
        unsat = np.zeros(n, dtype=np.int64)
        tree = np.zeros(n + 1, dtype=np.int64)
        count = init_unsat(bit, res0, res1, tab0, tab1, cong, unsat, tree)
        if count < 0:
            return s
        status, steps, count, st, last = advance(
            bit, res0, res1, tab0, tab1, cong, adj_ptr, adj_idx, unsat, tree, count,
            policy, seeds[s], np.int64(0), max_steps, logn, False, dummy,
        )
        if status == 2:
            return s
        out_steps[s] = steps
        out_done[s] = status == 0
    return -1
