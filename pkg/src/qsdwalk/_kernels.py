"""Jitted primitives shared by the engine and the pure-Python step path.

Everything numerical that both paths execute lives here exactly once:
the per-agent RNG, the Fenwick-tree measure operations, weight
evaluation, and the acceptance-bound formulas. Routing both paths
through the same compiled functions is what makes their trajectories
bitwise identical, which the tests rely on.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# Raw accumulated mass is renormalized past this point; the factored-out
# scale lives separately as a power of two. The threshold leaves enough
# headroom that a single scheduled weight cannot overflow before the
# rescale that would have absorbed it (ratios up to 2**423 are safe).
_RESCALE_AT = 2.0**600


@njit(cache=True, inline="always")
def rng_next(state):
    """Advance a splitmix64 state; returns (new_state, uniform in [0, 1))."""
    s = state + _GOLDEN
    z = s
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    z = z ^ (z >> U64(31))
    return s, (z >> U64(11)) * _INV53


@njit(cache=True, inline="always")
def pick_index(u, size):
    """Uniform index in [0, size) from one uniform draw."""
    k = int(u * size)
    if k >= size:
        k = size - 1
    return k


@njit(cache=True, inline="always")
def fenwick_add(tree, n, i, w):
    j = i + 1
    while j <= n:
        tree[j] += w
        j += j & (-j)


@njit(cache=True)
def fenwick_build(tree, masses):
    n = masses.size
    for i in range(n + 1):
        tree[i] = 0.0
    for i in range(1, n + 1):
        tree[i] += masses[i - 1]
        j = i + (i & (-i))
        if j <= n:
            tree[j] += tree[i]


@njit(cache=True, inline="always")
def fenwick_pick(tree, n, masses, u):
    """Index whose cumulative mass interval contains u.

    Walks the implicit binary decomposition, so cost is O(log n). The
    final guard hunts for a positive-mass neighbor in case rounding in
    the tree sums parked u on a zero-mass slot; it terminates because
    callers guarantee positive total mass.
    """
    bit = 1
    while (bit << 1) <= n:
        bit <<= 1
    idx = 0
    while bit > 0:
        nxt = idx + bit
        if nxt <= n and tree[nxt] <= u:
            u -= tree[nxt]
            idx = nxt
        bit >>= 1
    if idx >= n:
        idx = n - 1
    if masses[idx] == 0.0:
        k = idx - 1
        while k >= 0 and masses[k] == 0.0:
            k -= 1
        if k >= 0:
            idx = k
        else:
            k = idx + 1
            while masses[k] == 0.0:
                k += 1
            idx = k
    return idx


@njit(cache=True, inline="always")
def scaled_weight(kind, alpha, k, log2_scale):
    """Record weight for index k, divided by 2**log2_scale.

    kind 0 is constant 1, kind 1 is (k+1)**alpha (shifted so the very
    first record carries mass), kind 2 is 2**sqrt(k). The growing kinds
    are evaluated in log2 space: their raw weights overflow a double
    (kind 2 near k = 1e6, kind 1 for large alpha) while the rescaled
    value stays representable.
    """
    if kind == 0:
        return 2.0 ** (-log2_scale)
    if kind == 1:
        return 2.0 ** (alpha * np.log2(k + 1.0) - log2_scale)
    return 2.0 ** (np.sqrt(k * 1.0) - log2_scale)


@njit(cache=True)
def measure_record(masses, trees, totals, log2s, a, node, w):
    """Add mass w at node for agent a, renormalizing on overflow risk."""
    m = masses[a]
    t = trees[a]
    n = m.size
    m[node] += w
    fenwick_add(t, n, node, w)
    tot = totals[a] + w
    if tot > _RESCALE_AT:
        for i in range(n):
            m[i] = m[i] / tot
        fenwick_build(t, m)
        s = 0.0
        for i in range(n):
            s += m[i]
        totals[a] = s
        log2s[a] = log2s[a] + np.log2(tot)
    else:
        totals[a] = tot


@njit(cache=True)
def measure_seed(masses, trees, totals, a, values):
    """Load a starting measure for agent a and rebuild its tree."""
    m = masses[a]
    n = m.size
    for i in range(n):
        m[i] = values[i]
    fenwick_build(trees[a], m)
    s = 0.0
    for i in range(n):
        s += m[i]
    totals[a] = s


@njit(cache=True, inline="always")
def measure_sample(tree, masses, total, u01):
    return fenwick_pick(tree, masses.size, masses, u01 * total)


@njit(cache=True, inline="always")
def edge_position(indptr, indices, i, j):
    """Position of edge (i, j) in the CSR arrays, or -1."""
    lo = indptr[i]
    hi = indptr[i + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        if indices[mid] < j:
            lo = mid + 1
        else:
            hi = mid
    if lo < indptr[i + 1] and indices[lo] == j:
        return lo
    return np.int64(-1)


@njit(cache=True, inline="always")
def teleport_q(indptr, indices, seed_mask, n_seeds, p_follow, i, j):
    """Transition probability of the teleporting walk from i to j."""
    deg = indptr[i + 1] - indptr[i]
    if deg == 0:
        if seed_mask[j]:
            return 1.0 / n_seeds
        return 0.0
    q = 0.0
    if seed_mask[j]:
        q = (1.0 - p_follow) / n_seeds
    if edge_position(indptr, indices, i, j) >= 0:
        q += p_follow / deg
    return q


# Acceptance-bound evaluation modes. Mode 0 reads a precomputed per-edge
# table (exact in-degrees, plain walk). Modes 1-3 recompute from the
# shared in-degree estimates: uniform target, in-degree target, explicit
# target vector. Mode 4 is the teleporting walk with exact quantities.
BOUND_TABLE = 0
BOUND_ONLINE_UNIFORM = 1
BOUND_ONLINE_INDEGREE = 2
BOUND_ONLINE_CUSTOM = 3
BOUND_TELEPORT = 4


@njit(cache=True, inline="always")
def eval_bound(
    b_mode,
    b_edge,
    pi,
    supp,
    dhat,
    out_indptr,
    out_indices,
    seed_mask,
    n_seeds,
    p_follow,
    i,
    j,
    epos,
):
    if b_mode == 0:
        return b_edge[epos]
    deg = out_indptr[i + 1] - out_indptr[i]
    if b_mode == 1:
        dj = dhat[j]
        if dj < 1:
            dj = 1
        return deg / dj
    if b_mode == 2:
        di = dhat[i]
        if di < 1:
            di = 1
        return deg / di
    if b_mode == 3:
        dj = dhat[j]
        if dj < 1:
            dj = 1
        return pi[j] / pi[i] * deg / dj
    q = teleport_q(out_indptr, out_indices, seed_mask, n_seeds, p_follow, i, j)
    # Same operation order as the model builder so the two routes agree
    # to the last bit.
    ratio = pi[j] / pi[i]
    alpha = 1.0 / supp[j]
    return ratio * alpha / q


@njit(cache=True)
def advance(
    t0,
    t1,
    chain_kind,
    out_indptr,
    out_indices,
    seeds,
    seed_mask,
    p_follow,
    b_mode,
    b_edge,
    pi,
    supp,
    dynamic,
    p_update,
    shared_ceiling,
    ceilings,
    use_online,
    dhat,
    edge_seen,
    sched_kind,
    alpha,
    positions,
    rng_states,
    masses,
    trees,
    totals,
    log2s,
    visited,
    unique_count,
    absorb_counts,
):
    """Advance every agent through record indices [t0, t1).

    Agents move in lockstep: within each tick they are processed in
    index order, so runs are reproducible for fixed inputs. All arrays
    are mutated in place.
    """
    n_agents = positions.size
    for t in range(t0, t1):
        for a in range(n_agents):
            i = positions[a]
            s = rng_states[a]
            epos = np.int64(-1)
            if chain_kind == 0:
                lo = out_indptr[i]
                deg = out_indptr[i + 1] - lo
                s, u = rng_next(s)
                epos = lo + pick_index(u, deg)
                j = out_indices[epos]
            else:
                lo = out_indptr[i]
                deg = out_indptr[i + 1] - lo
                if deg == 0:
                    s, u = rng_next(s)
                    j = seeds[pick_index(u, seeds.size)]
                else:
                    s, u = rng_next(s)
                    if u < p_follow:
                        s, u2 = rng_next(s)
                        epos = lo + pick_index(u2, deg)
                        j = out_indices[epos]
                    else:
                        s, u2 = rng_next(s)
                        j = seeds[pick_index(u2, seeds.size)]
            if use_online and epos >= 0:
                if edge_seen[epos] == 0:
                    edge_seen[epos] = 1
                    dhat[j] += 1
            b = eval_bound(
                b_mode,
                b_edge,
                pi,
                supp,
                dhat,
                out_indptr,
                out_indices,
                seed_mask,
                seeds.size,
                p_follow,
                i,
                j,
                epos,
            )
            ci = 0 if shared_ceiling else a
            if dynamic:
                s, u1 = rng_next(s)
                if u1 <= p_update and ceilings[ci] < b:
                    ceilings[ci] = b
            s, u2 = rng_next(s)
            if u2 <= b / ceilings[ci]:
                z = j
                if visited[z] == 0:
                    visited[z] = 1
                    unique_count[0] += 1
            else:
                s, u3 = rng_next(s)
                z = measure_sample(trees[a], masses[a], totals[a], u3)
                absorb_counts[a] += 1
            w = scaled_weight(sched_kind, alpha, t, log2s[a])
            measure_record(masses, trees, totals, log2s, a, z, w)
            positions[a] = z
            rng_states[a] = s
