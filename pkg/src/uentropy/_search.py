"""Exact and greedy kernels for maximum clique and minimum set cover.

Vertex and element sets are Python ints used as bitsets.  Both exact
solvers are deterministic: the same input always yields the same witness.
Set cover hands its hard cases to the HiGHS integer solver in scipy.
"""

import sys
from dataclasses import dataclass

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix

DEFAULT_NODE_BUDGET = 10 ** 7
#: Branch-and-bound nodes tried on a set cover before handing it to HiGHS.
QUICK_NODES = 2000


@dataclass
class SearchResult:
    witness: list       # chosen vertices / set indices, sorted
    exact: bool
    bound: int          # upper bound (clique) or lower bound (cover)
    nodes: int = 0


def bits_from_matrix(mat):
    """Row-wise bitsets of a boolean matrix (bit j of row i is mat[i, j])."""
    packed = np.packbits(np.asarray(mat, dtype=bool), axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def iter_bits(x):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def popcount(x):
    return x.bit_count()


# -- maximum clique ---------------------------------------------------------

def greedy_clique(adj, n):
    """Lowest-index-first maximal clique."""
    chosen = []
    cand = (1 << n) - 1
    while cand:
        low = cand & -cand
        v = low.bit_length() - 1
        chosen.append(v)
        cand &= adj[v]
    return chosen


def _color_sort(adj, P):
    order, colors = [], []
    U = P
    k = 0
    while U:
        k += 1
        Q = U
        while Q:
            low = Q & -Q
            v = low.bit_length() - 1
            Q &= ~(adj[v] | low)
            U &= ~low
            order.append(v)
            colors.append(k)
    return order, colors


def coloring_bound(adj, n):
    """Number of colors used by sequential greedy coloring (a clique bound)."""
    _, colors = _color_sort(adj, (1 << n) - 1)
    return colors[-1] if colors else 0


def max_clique(adj, n, budget=DEFAULT_NODE_BUDGET):
    """Maximum clique of the graph with neighbor bitsets ``adj`` (no self loops).

    Branch and bound with greedy-coloring bounds, run with an explicit
    stack.  When ``budget`` search nodes are exhausted the best clique found
    so far is returned with ``exact=False`` and the root coloring bound.
    """
    if n == 0:
        return SearchResult([], True, 0)
    best = greedy_clique(adj, n)
    order, colors = _color_sort(adj, (1 << n) - 1)
    root_bound = colors[-1]
    if root_bound <= len(best):
        return SearchResult(sorted(best), True, root_bound)
    nodes = 0
    # frame: [R, P, order, colors, i]
    stack = [[[], (1 << n) - 1, order, colors, len(order) - 1]]
    while stack:
        fr = stack[-1]
        i = fr[4]
        if i < 0:
            stack.pop()
            continue
        v, c = fr[2][i], fr[3][i]
        fr[4] = i - 1
        if len(fr[0]) + c <= len(best):
            stack.pop()
            continue
        nodes += 1
        if nodes > budget:
            return SearchResult(sorted(best), False, root_bound, nodes)
        newP = fr[1] & adj[v]
        R = fr[0] + [v]
        fr[1] &= ~(1 << v)
        if not newP:
            if len(R) > len(best):
                best = R
        else:
            o2, c2 = _color_sort(adj, newP)
            if len(R) + c2[-1] > len(best):
                stack.append([R, newP, o2, c2, len(o2) - 1])
    return SearchResult(sorted(best), True, len(best), nodes)


# -- set cover ----------------------------------------------------------------

def greedy_cover(universe, sets):
    """Largest-uncovered-first greedy cover; ties go to the lowest index."""
    unc = universe
    chosen = []
    while unc:
        best_i, best_c = -1, 0
        for i, s in enumerate(sets):
            c = popcount(s & unc)
            if c > best_c:
                best_i, best_c = i, c
        if best_i < 0:
            raise ValueError("sets do not cover the universe")
        chosen.append(best_i)
        unc &= ~sets[best_i]
    return chosen


def _masks(bitsets, size):
    nbytes = max(1, (size + 7) // 8)
    raw = np.frombuffer(b"".join(b.to_bytes(nbytes, "little") for b in bitsets),
                        dtype=np.uint8).reshape(len(bitsets), nbytes)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :size]


def undominated(bitsets, size, chunk=2048, max_cells=1 << 25):
    """Positions of the sets not strictly inside another one (inputs distinct).

    Small inputs use a direct scan; larger ones count ``|A - B|`` for all
    pairs with chunked matrix products.
    """
    m = len(bitsets)
    if m <= 96:
        order = sorted(range(m), key=lambda i: -popcount(bitsets[i]))
        kept = []
        for i in order:
            if not any((bitsets[i] & ~bitsets[j]) == 0 for j in kept):
                kept.append(i)
        return sorted(kept)
    chunk = max(1, min(chunk, max_cells // m))
    M = _masks(bitsets, size).astype(np.float32)
    outside = (1.0 - M).T
    keep = np.ones(m, dtype=bool)
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        inside = (M[lo:hi] @ outside) == 0
        inside[np.arange(hi - lo), np.arange(lo, hi)] = False
        keep[lo:hi] = ~inside.any(axis=1)
    return [int(i) for i in np.flatnonzero(keep)]


def _reduce(universe, sets):
    """Drop empty, duplicate and dominated sets; keep lowest indices."""
    seen = {}
    for i, s in enumerate(sets):
        s &= universe
        if s and s not in seen:
            seen[s] = i
    items = list(seen.items())
    kept = [items[j] for j in undominated([s for s, _ in items], universe.bit_length())]
    kept.sort(key=lambda kv: kv[1])
    return [s for s, _ in kept], [i for _, i in kept]


def packing_bound(universe, sets):
    """Greedy lower bound: elements no two of which share a set."""
    elem_union = {}
    for s in sets:
        for e in iter_bits(s):
            elem_union[e] = elem_union.get(e, 0) | s
    blocked = 0
    count = 0
    for e in iter_bits(universe):
        if not (blocked >> e) & 1:
            count += 1
            blocked |= elem_union.get(e, 0)
    return count


def _cover_branch_and_bound(unc, red, elem_sets, best, n_forced, budget):
    """Small exhaustive search; the optimum (forced sets first) or None past budget."""
    reach = {e: 0 for e in elem_sets}
    for e, ks in elem_sets.items():
        for k in ks:
            reach[e] |= red[k]
    by_rarity = sorted(elem_sets, key=lambda e: (len(elem_sets[e]), e))
    state = {"best": list(best), "nodes": 0}
    seen = {}          # uncovered set -> fewest choices it was fully explored with

    def lb(u):
        m = max(popcount(s & u) for s in red)
        packed, blocked = 0, 0
        for e in by_rarity:
            if (u >> e) & 1 and not (blocked >> e) & 1:
                packed += 1
                blocked |= reach[e]
        return max(-(-popcount(u) // m), packed)

    def rec(u, chosen):
        if not u:
            if len(chosen) < len(state["best"]):
                state["best"] = list(chosen)
            return True
        if seen.get(u, len(chosen) + 1) <= len(chosen):
            return True
        state["nodes"] += 1
        if state["nodes"] > budget:
            return False
        if len(chosen) + lb(u) >= len(state["best"]):
            return True
        e = min(iter_bits(u), key=lambda x: (len(elem_sets[x]), x))
        for k in sorted(elem_sets[e], key=lambda k: (-popcount(red[k] & u), k)):
            chosen.append(k)
            ok = rec(u & ~red[k], chosen)
            chosen.pop()
            if not ok:
                return False
            if len(chosen) + 1 >= len(state["best"]):
                break
        seen[u] = len(chosen)
        return True

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * popcount(unc) + 1000))
    try:
        done = rec(unc, list(best[:n_forced]))
    finally:
        sys.setrecursionlimit(limit)
    return state["best"] if done else None


def min_set_cover(universe, sets, budget=DEFAULT_NODE_BUDGET):
    """Minimum number of ``sets`` (bitsets) whose union contains ``universe``.

    Returns original set indices.  Duplicate and dominated sets are dropped
    and forced choices (elements covered by one set) taken up front; if the
    greedy cover does not already meet the packing bound, a short branch
    and bound runs first and anything it cannot close is solved as a 0/1
    program with HiGHS, limited to ``budget`` branch nodes.
    """
    total = 0
    for s in sets:
        total |= s
    if universe & ~total:
        raise ValueError("sets do not cover the universe")
    if not universe:
        return SearchResult([], True, 0)
    red, idx = _reduce(universe, sets)
    elem_sets = {}
    for k, s in enumerate(red):
        for e in iter_bits(s):
            elem_sets.setdefault(e, []).append(k)

    forced = sorted({elem_sets[e][0] for e in iter_bits(universe)
                     if len(elem_sets[e]) == 1})
    unc = universe
    for k in forced:
        unc &= ~red[k]

    greedy = greedy_cover(unc, red) if unc else []
    best = forced + greedy
    lower = len(forced) + (packing_bound(unc, red) if unc else 0)
    if lower >= len(best):
        return SearchResult(sorted(idx[k] for k in best), True, len(best))

    quick = _cover_branch_and_bound(unc, red, elem_sets, forced + greedy,
                                    len(forced), min(budget, QUICK_NODES))
    if quick is not None:
        return SearchResult(sorted(idx[k] for k in quick), True, len(quick))

    cols = [k for k in range(len(red)) if red[k] & unc]
    rows = list(iter_bits(unc))
    row_of = {e: i for i, e in enumerate(rows)}
    ri, ci = [], []
    for j, k in enumerate(cols):
        for e in iter_bits(red[k] & unc):
            ri.append(row_of[e])
            ci.append(j)
    A = csr_matrix((np.ones(len(ri)), (ri, ci)), shape=(len(rows), len(cols)))
    res = milp(np.ones(len(cols)), constraints=LinearConstraint(A, lb=1, ub=np.inf),
               integrality=np.ones(len(cols)), bounds=Bounds(0, 1),
               options={"node_limit": int(budget), "presolve": True})
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.x is not None:
        pick = [cols[j] for j in np.flatnonzero(res.x > 0.5)]
        covered = 0
        for k in pick:
            covered |= red[k]
        if unc & ~covered == 0 and len(forced) + len(pick) <= len(best):
            best = forced + pick
    chosen = sorted(idx[k] for k in best)
    if res.status == 0:
        return SearchResult(chosen, True, len(chosen), nodes)
    dual = getattr(res, "mip_dual_bound", None)
    if dual is not None and np.isfinite(dual):
        lower = max(lower, len(forced) + int(np.ceil(dual - 1e-6)))
    return SearchResult(chosen, lower >= len(chosen), min(lower, len(chosen)), nodes)
