"""Separated and spanning sets, growth rates and uniform entropy.

All rates are in nats.  A maximum ``(n, E)``-separated set is a maximum
clique of the graph whose edges are the pairs *outside* the Bowen
relation; a minimum ``(n, E)``-spanning set is a minimum set cover of the
carrier by Bowen cross sections.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import _search
from .errors import PreconditionError
from .uniform import Entourage, bowen_relations

#: ``auto`` mode runs the exact solvers up to this many points.
AUTO_EXACT_MAX = 1024
#: Tolerance at which the separated and spanning suprema must agree.
AGREEMENT_TOL = 1e-6


@dataclass
class ExtremalSetResult:
    kind: str              # "separated" | "spanning" | "cover"
    n: int
    scale: str
    cardinality: int
    witness: list
    exact: bool
    bound_gap: int = 0

    def __post_init__(self):
        if self.exact and self.bound_gap != 0:
            raise PreconditionError("exact results carry no bound gap")

    @property
    def interval(self):
        """Range known to contain the true extremal count."""
        if self.kind == "separated":
            return self.cardinality, self.cardinality + self.bound_gap
        return self.cardinality - self.bound_gap, self.cardinality


@dataclass
class Rate:
    slope: float
    limsup: float


@dataclass
class EntropyEstimate:
    counts: dict                    # (n, scale) -> ExtremalSetResult
    fitted_rate: float
    fit_window: tuple
    lower_bound: float
    upper_bound: float
    method: str
    limsup: float = 0.0
    scale: Optional[str] = None     # scale attaining the supremum
    per_scale: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def exact(self):
        return all(r.exact for r in self.counts.values())

    def series(self, scale=None):
        """``{n: cardinality}`` at one scale (default: the best scale)."""
        scale = self.scale if scale is None else scale
        return {n: r.cardinality for (n, s), r in sorted(self.counts.items())
                if s == scale}


def default_window(size, n_max):
    """``(1, floor(log2 N))`` capped at n_max, but at least two points when possible
    (a one-point window would read a constant count as growth)."""
    top = max(2, int(math.floor(math.log2(size)))) if size > 1 else 2
    return 1, max(1, min(n_max, top))


def _window_points(counts, window):
    lo, hi = window
    if lo < 1 or hi < lo:
        raise PreconditionError(f"bad window {window}")
    missing = [n for n in range(lo, hi + 1) if n not in counts]
    if missing:
        raise PreconditionError(f"window {window} exceeds available n (missing {missing})")
    return list(range(lo, hi + 1))


def _slope_weights(ns):
    ns = np.asarray(ns, dtype=float)
    if ns.size == 1:
        return np.array([1.0 / ns[0]])
    centered = ns - ns.mean()
    return centered / float((centered ** 2).sum())


def growth_rate(counts, window=None):
    """Least-squares slope of ``log count`` against n, and ``max log(count)/n``.

    ``counts`` maps n to a positive count (a list is read as n = 1, 2, ...).
    A one-point window has no slope; ``log(count)/n`` is used instead.
    """
    if not isinstance(counts, dict):
        counts = {i + 1: c for i, c in enumerate(counts)}
    if window is None:
        window = (min(counts), max(counts))
    ns = _window_points(counts, window)
    vals = [counts[n] for n in ns]
    if any(v <= 0 for v in vals):
        raise PreconditionError("counts must be positive")
    limsup = max(math.log(v) / n for n, v in zip(ns, vals))
    if len(ns) == 1:
        return Rate(math.log(vals[0]) / ns[0], limsup)
    if all(v == vals[0] for v in vals):
        return Rate(0.0, limsup)
    base = math.log(vals[0])
    y = np.array([math.log(v) - base for v in vals])
    return Rate(float(_slope_weights(ns) @ y), limsup)


def _slope_bounds(intervals, ns):
    """Exact range of the least-squares slope when each count lies in an interval."""
    w = _slope_weights(ns)
    lo = hi = 0.0
    for wi, (a, b) in zip(w, intervals):
        la, lb = math.log(a), math.log(b)
        lo += wi * (la if wi > 0 else lb)
        hi += wi * (lb if wi > 0 else la)
    return lo, hi


def _scale_rate(results, window):
    """Rate and bounds for one scale from ``{n: ExtremalSetResult}``."""
    counts = {n: r.cardinality for n, r in results.items()}
    rate = growth_rate(counts, window)
    ns = _window_points(counts, window)
    if all(results[n].exact for n in ns):
        return rate, rate.slope, rate.slope
    lo, hi = _slope_bounds([results[n].interval for n in ns], ns)
    return rate, min(lo, rate.slope), max(hi, rate.slope)


def _resolve_mode(mode, size):
    if mode == "auto":
        return "exact" if size <= AUTO_EXACT_MAX else "greedy"
    if mode not in ("exact", "greedy"):
        raise PreconditionError(f"unknown mode {mode!r}")
    return mode


def _subset_index(size, subset):
    if subset is None:
        return np.arange(size)
    idx = np.array(sorted(set(int(x) for x in subset)), dtype=np.int64)
    if idx.size == 0:
        raise PreconditionError("subset must be nonempty")
    return idx


def separated_from_relation(rel, idx, n, scale, mode, budget):
    """Maximum (or greedy maximal) separated subset of ``idx`` under ``rel``."""
    sub = rel[np.ix_(idx, idx)]
    apart = ~sub
    np.fill_diagonal(apart, False)
    adj = _search.bits_from_matrix(apart)
    k = len(idx)
    if mode == "exact":
        res = _search.max_clique(adj, k, budget=budget)
        if res.exact:
            return ExtremalSetResult("separated", n, scale, len(res.witness),
                                     [int(idx[v]) for v in res.witness], True)
        chosen, ub = res.witness, res.bound
    else:
        chosen = _search.greedy_clique(adj, k)
        ub = _search.coloring_bound(adj, k)
    chosen = sorted(chosen)
    return ExtremalSetResult("separated", n, scale, len(chosen),
                             [int(idx[v]) for v in chosen], False,
                             max(0, ub - len(chosen)))


def spanning_from_relation(rel, idx, n, scale, mode, budget):
    """Minimum (or greedy) spanning subset of ``idx`` for ``idx`` under ``rel``."""
    sub = rel[np.ix_(idx, idx)]
    sets = _search.bits_from_matrix(sub)
    k = len(idx)
    universe = (1 << k) - 1
    if mode == "exact":
        res = _search.min_set_cover(universe, sets, budget=budget)
        if res.exact:
            return ExtremalSetResult("spanning", n, scale, len(res.witness),
                                     [int(idx[v]) for v in res.witness], True)
        chosen, lb = res.witness, res.bound
    else:
        chosen = sorted(_search.greedy_cover(universe, sets))
        lb = max(_search.packing_bound(universe, sets),
                 -(-k // max(s.bit_count() for s in sets)))
    return ExtremalSetResult("spanning", n, scale, len(chosen),
                             [int(idx[v]) for v in chosen], False,
                             max(0, len(chosen) - lb))


def max_separated(sys, E, n, mode="exact", budget=_search.DEFAULT_NODE_BUDGET,
                  subset=None):
    """Largest ``(n, E)``-separated set (within ``subset`` when given)."""
    if n < 1:
        raise PreconditionError("window n must be >= 1")
    idx = _subset_index(sys.size, subset)
    mode = _resolve_mode(mode, len(idx))
    rel = None
    for _, rel in bowen_relations(E, sys, n):
        pass
    return separated_from_relation(rel, idx, n, E.tag, mode, budget)


def min_spanning(sys, E, n, mode="exact", budget=_search.DEFAULT_NODE_BUDGET,
                 subset=None):
    """Smallest ``(n, E)``-spanning set (for ``subset`` when given)."""
    if n < 1:
        raise PreconditionError("window n must be >= 1")
    idx = _subset_index(sys.size, subset)
    mode = _resolve_mode(mode, len(idx))
    rel = None
    for _, rel in bowen_relations(E, sys, n):
        pass
    return spanning_from_relation(rel, idx, n, E.tag, mode, budget)


def count_table(sys, E, n_max, kinds=("separated", "spanning"), mode="exact",
                budget=_search.DEFAULT_NODE_BUDGET, subset=None):
    """``{kind: {n: ExtremalSetResult}}`` for n = 1..n_max at one scale."""
    idx = _subset_index(sys.size, subset)
    mode = _resolve_mode(mode, len(idx))
    out = {k: {} for k in kinds}
    for n, rel in bowen_relations(E, sys, n_max):
        if "separated" in kinds:
            out["separated"][n] = separated_from_relation(rel, idx, n, E.tag, mode, budget)
        if "spanning" in kinds:
            out["spanning"][n] = spanning_from_relation(rel, idx, n, E.tag, mode, budget)
    return out


def estimate_from_tables(tables, window, method):
    """Supremum over scales of per-scale fitted rates.

    ``tables`` maps a scale tag to ``{n: ExtremalSetResult}``.
    """
    counts, per_scale = {}, {}
    best = None
    lower = upper = -math.inf
    limsup = -math.inf
    for tag, results in tables.items():
        rate, lo, hi = _scale_rate(results, window)
        per_scale[tag] = rate.slope
        for n, r in results.items():
            counts[(n, tag)] = r
        if best is None or rate.slope > per_scale[best]:
            best = tag
        lower, upper = max(lower, lo), max(upper, hi)
        limsup = max(limsup, rate.limsup)
    fitted = per_scale[best]
    return EntropyEstimate(counts, fitted, tuple(window), min(lower, fitted),
                           max(upper, fitted), method, limsup, best, per_scale)


@dataclass
class UniformEntropy:
    """Separated- and spanning-based uniform entropy over a base."""

    separated: EntropyEstimate
    spanning: EntropyEstimate
    discrepancy: float
    tolerance: float = AGREEMENT_TOL

    @property
    def rate(self):
        return self.separated.fitted_rate

    @property
    def agree(self):
        return self.discrepancy <= self.tolerance

    @property
    def exact(self):
        return self.separated.exact and self.spanning.exact


def uniform_entropy(sys, base, n_max=None, mode="exact", window=None,
                    budget=_search.DEFAULT_NODE_BUDGET, subset=None,
                    tolerance=AGREEMENT_TOL):
    """Supremum over the base of the separated and spanning growth rates."""
    size = sys.size if subset is None else len(set(subset))
    if n_max is None:
        n_max = default_window(size, 64)[1]
    window = default_window(size, n_max) if window is None else tuple(window)
    n_max = max(n_max, window[1])
    sep_tables, span_tables = {}, {}
    for E in base:
        t = count_table(sys, E, n_max, mode=mode, budget=budget, subset=subset)
        sep_tables[E.tag] = t["separated"]
        span_tables[E.tag] = t["spanning"]
    sep = estimate_from_tables(sep_tables, window, "separated")
    span = estimate_from_tables(span_tables, window, "spanning")
    return UniformEntropy(sep, span, abs(sep.fitted_rate - span.fitted_rate),
                          tolerance)


@dataclass
class MonotonicityReport:
    holds: bool
    rows: list                       # (n, sep_V, sep_U, span_V, span_U)
    first_violation: Optional[tuple] = None
    exact: bool = True


def check_monotonicity(sys, U, V, n_max, budget=_search.DEFAULT_NODE_BUDGET):
    """For ``U`` inside ``V`` check, for every n <= n_max,

    ``sep(n,V) <= sep(n,U)``, ``span(n,V) <= span(n,U)`` and
    ``span(n,V) <= sep(n,U)``, all with exact counts.
    """
    if not U <= V:
        raise PreconditionError("monotonicity check needs U inside V")
    tu = count_table(sys, U, n_max, mode="exact", budget=budget)
    tv = count_table(sys, V, n_max, mode="exact", budget=budget)
    rows, first = [], None
    exact = True
    for n in range(1, n_max + 1):
        su, sv = tu["separated"][n], tv["separated"][n]
        pu, pv = tu["spanning"][n], tv["spanning"][n]
        exact = exact and all(r.exact for r in (su, sv, pu, pv))
        row = (n, sv.cardinality, su.cardinality, pv.cardinality, pu.cardinality)
        rows.append(row)
        if first is None:
            if sv.cardinality > su.cardinality:
                first = (n, "sep(n,V) <= sep(n,U)", sv.cardinality, su.cardinality)
            elif pv.cardinality > pu.cardinality:
                first = (n, "span(n,V) <= span(n,U)", pv.cardinality, pu.cardinality)
            elif pv.cardinality > su.cardinality:
                first = (n, "span(n,V) <= sep(n,U)", pv.cardinality, su.cardinality)
    return MonotonicityReport(first is None, rows, first, exact)


# -- metric-based greedy for carriers too large for dense relations ----------

def greedy_net(sys, eps, n, chunk=4096):
    """Lowest-index-first maximal ``(n, eps)``-separated set via the metric.

    The result is simultaneously a maximal separated set and a spanning set
    (every point lies within Bowen distance ``< eps`` of a chosen point), so
    its size bounds ``sep`` from below and ``span`` from above.  Only metric
    rows are evaluated; no dense relation is built.
    """
    metric = sys.metric
    if metric is None:
        raise PreconditionError("greedy_net needs a metric")
    eps = Fraction(eps)
    thresh_num, thresh_den = eps.numerator * metric.denom, eps.denominator
    orbits = sys.orbit_matrix(n)
    covered = np.zeros(sys.size, dtype=bool)
    centers = []
    nxt = 0
    while True:
        rest = np.flatnonzero(~covered[nxt:])
        if rest.size == 0:
            break
        c = nxt + int(rest[0])
        centers.append(c)
        dmax = np.zeros(sys.size, dtype=np.int64)
        for i in range(n):
            dmax = np.maximum(dmax, metric.values(orbits[c, i], orbits[:, i]))
        covered |= dmax * thresh_den < thresh_num
        nxt = c + 1
    return centers


def greedy_net_counts(sys, eps, n_max):
    return {n: len(greedy_net(sys, eps, n)) for n in range(1, n_max + 1)}


def net_entropy(sys, grid, n_max, window=None):
    """Supremum over metric scales of the growth rate of greedy net sizes.

    Net sizes are flagged inexact: each one bounds the maximum separated
    count from below and the minimum spanning count from above.
    """
    window = default_window(sys.size, n_max) if window is None else tuple(window)
    tables = {}
    for eps in grid:
        eps = Fraction(eps)
        tag = f"eps={eps}"
        tables[tag] = {n: ExtremalSetResult("net", n, tag, c, [], False)
                       for n, c in greedy_net_counts(sys, eps, n_max).items()}
    return estimate_from_tables(tables, window, "net")
