"""Covers, joins, minimal subcovers and cover entropy.

Cover members are stored as Python-int bitsets (bit x set when point x is
in the member).
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _search
from .errors import DomainMismatchError, NotFoundError, PreconditionError, PropertyViolation
from .spanning import (ExtremalSetResult, EntropyEstimate, _resolve_mode,
                       default_window, estimate_from_tables)
from .uniform import Carrier, map_table


MAX_JOIN_MEMBERS = 20_000


def mask_to_bits(mask):
    mask = np.asarray(mask, dtype=bool)
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


def bits_to_mask(bits, size):
    nbytes = (size + 7) // 8
    raw = np.frombuffer(bits.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size].astype(bool)


def _full(size):
    return (1 << size) - 1


@dataclass(frozen=True)
class Cover:
    """A family of nonempty subsets of the carrier whose union is the carrier.

    ``universe`` restricts the covering requirement to a subset (used for
    covers of a compact piece K); by default it is the whole carrier.
    """

    carrier: Carrier
    members: tuple
    name: Optional[str] = None
    universe: Optional[int] = None
    multiplicity: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if isinstance(self.carrier, int):
            object.__setattr__(self, "carrier", Carrier(self.carrier))
        members = tuple(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        full = _full(self.carrier.size)
        universe = full if self.universe is None else int(self.universe)
        object.__setattr__(self, "universe", universe)
        if any(m == 0 for m in members):
            raise PreconditionError("cover members must be nonempty")
        union = 0
        for m in members:
            if m & ~full:
                raise PreconditionError("cover member leaves the carrier")
            union |= m
        if universe & ~union:
            missing = (universe & ~union).bit_length() - 1
            raise PreconditionError(f"members do not cover point {missing}")

    @classmethod
    def from_sets(cls, carrier, sets, name=None):
        if isinstance(carrier, int):
            carrier = Carrier(carrier)
        members = []
        for s in sets:
            bits = 0
            for x in s:
                bits |= 1 << int(x)
            members.append(bits)
        return cls(carrier, tuple(members), name=name)

    @property
    def size(self):
        return self.carrier.size

    def __len__(self):
        return len(self.members)

    def sets(self):
        return [tuple(_search.iter_bits(m)) for m in self.members]

    @property
    def duplicates(self):
        """Number of members repeating an earlier member."""
        return len(self.members) - len(set(self.members))

    def deduplicated(self):
        seen = list(dict.fromkeys(self.members))
        return Cover(self.carrier, tuple(seen), self.name, self.universe)

    def maximal(self):
        """Members not strictly contained in another member (deduplicated)."""
        uniq = sorted(set(self.members))
        kept = [uniq[i] for i in _search.undominated(uniq, self.size)]
        return Cover(self.carrier, tuple(kept), self.name, self.universe)

    def restricted(self, subset_bits):
        """Members intersected with a subset, which becomes the universe."""
        members = tuple(dict.fromkeys(m & subset_bits for m in self.members
                                      if m & subset_bits))
        return Cover(self.carrier, members, self.name, subset_bits)

    def __eq__(self, other):
        if not isinstance(other, Cover):
            return NotImplemented
        return (self.carrier == other.carrier and self.universe == other.universe
                and set(self.members) == set(other.members))

    def __hash__(self):
        return hash((self.carrier.size, frozenset(self.members), self.universe))


def _check(a, b):
    if a.carrier.size != b.carrier.size:
        raise DomainMismatchError("covers live on different carriers")


def join(a, b):
    """All nonempty pairwise intersections, deduplicated, sorted by bitmask."""
    _check(a, b)
    out = {x & y for x in set(a.members) for y in set(b.members)}
    out.discard(0)
    universe = a.universe & b.universe
    name = f"{a.name}v{b.name}" if a.name and b.name else None
    return Cover(a.carrier, tuple(sorted(out)), name, universe)


def preimage_members(members, table, size):
    out = []
    for m in members:
        pre = bits_to_mask(m, size)[table]
        if pre.any():
            out.append(mask_to_bits(pre))
    return out


def preimage_cover(sys, a, check=False):
    """``f^{-1}(a)``: member-wise preimages, empty ones dropped."""
    table = map_table(sys)
    if table.size != a.size:
        raise DomainMismatchError("map and cover carriers differ")
    if a.universe != _full(a.size):
        raise PreconditionError("preimage needs a cover of the whole carrier")
    members = preimage_members(a.members, table, a.size)
    out = Cover(a.carrier, tuple(members), f"f^-1({a.name})" if a.name else None)
    if check:
        n_pre = min_subcover_cardinality(out).count
        n_a = min_subcover_cardinality(a).count
        if n_pre > n_a:
            raise PropertyViolation(
                f"N(f^-1 a) = {n_pre} exceeds N(a) = {n_a}", (n_pre, n_a))
    return out


@dataclass
class SubcoverResult:
    count: int
    witness: list          # member indices into the cover
    exact: bool
    lower_bound: int

    def members(self, cover):
        return [cover.members[i] for i in self.witness]


def min_subcover_cardinality(a, mode="exact", budget=_search.DEFAULT_NODE_BUDGET):
    """``N(a)``: fewest members covering the universe, with the chosen members."""
    mode = _resolve_mode(mode, len(a.members))
    if mode == "exact":
        res = _search.min_set_cover(a.universe, list(a.members), budget=budget)
        return SubcoverResult(len(res.witness), res.witness, res.exact,
                              res.bound if not res.exact else len(res.witness))
    chosen = sorted(_search.greedy_cover(a.universe, list(a.members)))
    largest = max(m.bit_count() for m in a.members)
    lb = max(_search.packing_bound(a.universe, list(a.members)),
             -(-a.universe.bit_count() // largest))
    return SubcoverResult(len(chosen), chosen, lb == len(chosen), lb)


def refinement_check(b, a):
    """True iff every member of ``b`` lies inside some member of ``a``."""
    _check(a, b)
    amem = set(a.members)
    return all(any(m & ~x == 0 for x in amem) for m in set(b.members))


def dynamical_join_counts(sys, a, n_max, mode="exact",
                          budget=_search.DEFAULT_NODE_BUDGET, universe=None,
                          max_members=MAX_JOIN_MEMBERS):
    """``{n: SubcoverResult}`` for ``N(a v f^-1 a v ... v f^-(n-1) a)``.

    Only maximal members are carried between steps; the maximal members of
    a join come from maximal members of its factors and N depends only on
    them, so the counts are unchanged. ``universe`` (a bitset) counts only
    the members needed to cover that subset; joins are still formed on the
    whole carrier, since preimages must see points outside the subset.

    Once a join would exceed ``max_members`` members, later counts are
    inexact brackets ``N_{n-1} <= N_n <= N_{n-1} N_1`` with no witness.
    """
    table = map_table(sys)
    size = a.size
    if universe is None:
        universe = a.universe
    elif a.universe != _full(size):
        raise PreconditionError("restrict either the cover or the count, not both")
    base = a.maximal().members
    current = set(base)
    f_i = np.arange(size, dtype=np.int64)
    out = {}
    for n in range(1, n_max + 1):
        if n > 1 and current is not None:
            f_i = table[f_i]
            pre = preimage_members(base, f_i, size)
            joined = None
            if len(current) * len(pre) <= 100 * max_members:
                joined = {x & y for x in current for y in pre}
                joined = {m for m in joined if m & a.universe}
            if joined is None or len(joined) > max_members:
                current = None
            else:
                current = set(Cover(a.carrier, tuple(joined), universe=a.universe)
                              .maximal().members)
        if current is None:
            prev, first = out[n - 1], out[1]
            out[n] = SubcoverResult(prev.count * first.count, [], False, prev.lower_bound)
            continue
        cov = Cover(a.carrier, tuple(sorted(current)), universe=a.universe)
        if universe != a.universe:
            cov = cov.restricted(universe).maximal()
        out[n] = min_subcover_cardinality(cov, mode=mode, budget=budget)
    return out


def check_subadditivity(counts):
    """First ``(n, m)`` with ``N_{n+m} > N_n * N_m`` or None."""
    for n in counts:
        for m in counts:
            if n + m in counts and counts[n + m] > counts[n] * counts[m]:
                return n, m
    return None


def _to_results(subs, tag, kind="cover"):
    return {n: ExtremalSetResult(kind, n, tag, r.count, list(r.witness), r.exact,
                                 0 if r.exact else r.count - r.lower_bound)
            for n, r in subs.items()}


def cover_entropy(sys, a, n_max=None, mode="exact", window=None,
                  budget=_search.DEFAULT_NODE_BUDGET):
    """Growth rate of ``log N`` of the dynamical joins of ``a``.

    Raises :class:`PropertyViolation` if exact counts break
    ``N_{n+m} <= N_n N_m``.
    """
    if n_max is None:
        n_max = default_window(sys.size, 64)[1]
    window = default_window(sys.size, n_max) if window is None else tuple(window)
    subs = dynamical_join_counts(sys, a, max(n_max, window[1]), mode, budget)
    if all(r.exact for r in subs.values()):
        bad = check_subadditivity({n: r.count for n, r in subs.items()})
        if bad is not None:
            raise PropertyViolation(f"subadditivity fails at (n, m) = {bad}", bad)
    tag = a.name or "cover"
    return estimate_from_tables({tag: _to_results(subs, tag)}, window, "cover")


def uniform_cover(E):
    """``C(E) = {E[x]}``, deduplicated; ``multiplicity`` counts repeats."""
    members = [mask_to_bits(row) for row in E.relation]
    counts = Counter(members)
    uniq = tuple(dict.fromkeys(members))
    return Cover(E.carrier, uniq, name=f"C({E.tag})",
                 multiplicity={m: counts[m] for m in uniq})


def uniform_cover_entropy(sys, base, n_max=None, mode="exact", window=None,
                          subset=None, budget=_search.DEFAULT_NODE_BUDGET):
    """Supremum over the base of the cover-count growth rate of ``C(E)``.

    On a finite carrier the only compact set needed is the carrier itself;
    ``subset`` restricts the counts to a piece K instead.
    """
    size = sys.size if subset is None else len(set(subset))
    if n_max is None:
        n_max = default_window(size, 64)[1]
    window = default_window(size, n_max) if window is None else tuple(window)
    k_bits = None
    if subset is not None:
        k_bits = mask_to_bits(np.isin(np.arange(sys.size),
                                      np.fromiter(subset, dtype=np.int64)))
    tables = {}
    for E in base:
        cov = uniform_cover(E)
        subs = dynamical_join_counts(sys, cov, max(n_max, window[1]), mode, budget,
                                     universe=k_bits)
        tables[E.tag] = _to_results(subs, E.tag)
    est = estimate_from_tables(tables, window, "cover")
    est.notes["compact_set"] = "X" if subset is None else f"K ({size} points)"
    return est


def lebesgue_entourage(a, base):
    """Largest base member D whose cross sections each lie in a member of ``a``."""
    last = None
    for D in base:
        last = D
        if refinement_check(uniform_cover(D), a):
            return D
    raise NotFoundError(
        f"no base member refines the cover; smallest tested scale {last.tag}",
        evidence=last.tag)
