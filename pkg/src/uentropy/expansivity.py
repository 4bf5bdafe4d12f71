"""Gamma sets, expansivity, sensitivity, uniform generators and contractions.

On a finite carrier the closure of a set is the set itself, so no closure
operations appear below.  Scales whose cross sections are all singletons
are called trivial: every notion here becomes vacuous at such scales and
they are reported separately instead of counted as positives.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .covers import (bits_to_mask, cover_entropy, mask_to_bits, uniform_cover,
                     uniform_cover_entropy)
from .errors import NotFoundError, PreconditionError, PropertyViolation
from .spanning import count_table, default_window, growth_rate, uniform_entropy
from .uniform import Entourage, compose, map_table, pullback_relation


def _sided(sys, sided):
    if sided is None:
        return "two_sided" if sys.invertible else "forward"
    if sided not in ("forward", "two_sided"):
        raise PreconditionError(f"unknown side {sided!r}")
    if sided == "two_sided" and not sys.invertible:
        raise PreconditionError("two-sided Gamma sets need an invertible map")
    return sided


def gamma_relation(sys, D, sided=None):
    """``(relation, horizon)`` for the saturated intersection of pullbacks of D.

    Forward: ``⋂_{i>=0} F^{-i}(D)``; two-sided adds the pullbacks under the
    inverse.  The horizon is the number of pullback steps after which the
    relation stopped changing (at most N^2 on N points).
    """
    sided = _sided(sys, sided)
    maps = [map_table(sys)]
    if sided == "two_sided":
        maps.append(sys.inverse)
    rel = D.relation.copy()
    step = 0
    limit = D.size * D.size + 1
    while step <= limit:
        nxt = rel.copy()
        for table in maps:
            nxt &= pullback_relation(rel, table)
        if np.array_equal(nxt, rel):
            return rel, step
        rel = nxt
        step += 1
    raise PropertyViolation("Gamma intersection failed to saturate", step)


@dataclass
class GammaSet:
    center: int
    scale: str
    horizon: int
    members: tuple
    sided: str

    def __post_init__(self):
        if self.center not in self.members:
            raise PropertyViolation("Gamma set lost its center", self.center)

    @property
    def is_singleton(self):
        return len(self.members) == 1


def gamma_set(sys, x, D, sided=None):
    sided = _sided(sys, sided)
    rel, horizon = gamma_relation(sys, D, sided)
    x = sys.carrier.index(x)
    members = tuple(int(y) for y in np.flatnonzero(rel[x]))
    return GammaSet(x, D.tag, horizon, members, sided)


@dataclass
class ScaleProfile:
    scale: str
    all_gamma_singleton: bool
    trivial: bool
    horizon: int
    generator_pass: Optional[bool] = None


@dataclass
class ExpansivityResult:
    scale: Optional[Entourage]          # largest passing base member
    profile: list
    sided: str

    @property
    def nontrivial(self):
        return self.scale is not None and not self.scale.is_trivial()

    def largest_nontrivial(self):
        for row in self.profile:
            if row.all_gamma_singleton and not row.trivial:
                return row.scale
        return None


def expansivity_search(sys, base, sided=None, with_generators=False):
    """Largest base member D with every Gamma set a singleton, plus a per-scale profile."""
    sided = _sided(sys, sided)
    profile = []
    best = None
    for D in base:
        rel, horizon = gamma_relation(sys, D, sided)
        ok = not (rel & ~np.eye(D.size, dtype=bool)).any()
        row = ScaleProfile(D.tag, ok, D.is_trivial(), horizon)
        if with_generators and sys.invertible:
            row.generator_pass = generator_check(sys, D).passed
        profile.append(row)
        if ok and best is None:
            best = D
    return ExpansivityResult(best, profile, sided)


@dataclass
class SensitivityResult:
    sen_v: tuple                 # points sensitive at the requested V
    sen: tuple                   # union over nontrivial base members
    per_scale: dict = field(default_factory=dict)   # tag -> tuple of points
    sided: str = "forward"


def _sensitive_mask(sys, V, neighborhoods, sided):
    if not neighborhoods:
        return np.zeros(sys.size, dtype=bool)
    gamma, _ = gamma_relation(sys, V, sided)
    mask = np.ones(sys.size, dtype=bool)
    for U in neighborhoods:
        mask &= (U.relation & ~gamma).any(axis=1)
    return mask


def sensitivity_set(sys, V, neighborhood_base, sided=None):
    """``x`` is V-sensitive iff every nontrivial neighborhood U[x] leaves Gamma(x, V).

    Gamma is two-sided for invertible maps and forward otherwise.
    """
    sided = _sided(sys, sided)
    nbhd = neighborhood_base.nontrivial()
    sen_v = _sensitive_mask(sys, V, nbhd, sided)
    union = np.zeros(sys.size, dtype=bool)
    per = {}
    for W in nbhd:
        m = sen_v if W == V else _sensitive_mask(sys, W, nbhd, sided)
        per[W.tag] = tuple(int(x) for x in np.flatnonzero(m))
        union |= m
    if not V.is_trivial():
        union |= sen_v
    return SensitivityResult(tuple(int(x) for x in np.flatnonzero(sen_v)),
                             tuple(int(x) for x in np.flatnonzero(union)), per, sided)


def first_sensitive_point(sys, base, sided=None):
    """Lowest-index sensitive point and the largest nontrivial V it is sensitive at."""
    sided = _sided(sys, sided)
    nbhd = base.nontrivial()
    masks = [(V, _sensitive_mask(sys, V, nbhd, sided)) for V in nbhd]
    for x in range(sys.size):
        for V, m in masks:
            if m[x]:
                return x, V
    return None


@dataclass
class GeneratorResult:
    passed: bool
    window: int
    witness: Optional[tuple] = None      # (x, y) sharing every itinerary member
    itinerary: Optional[dict] = None     # time -> index of a shared cross section


def _two_sided_bowen(rel, table, inv, window):
    out = rel.copy()
    fwd = bwd = rel
    for _ in range(window):
        fwd = pullback_relation(fwd, table)
        bwd = pullback_relation(bwd, inv)
        out &= fwd & bwd
    return out


def generator_check(sys, U, window=None):
    """Do the cross sections of U pin down points from their itineraries on [-W, W]?

    Two points share a member of C(U) at time n iff their n-th iterates are
    related by ``U o U``, so the check is that the two-sided Bowen relation
    of ``U o U`` over the window is the diagonal.
    """
    if not sys.invertible:
        raise PreconditionError("generator check needs an invertible map")
    uu = compose(U, U)
    if window is None:
        _, window = gamma_relation(sys, uu, "two_sided")
    table, inv = map_table(sys), sys.inverse
    rel = _two_sided_bowen(uu.relation, table, inv, window)
    off = rel & ~np.eye(sys.size, dtype=bool)
    if not off.any():
        return GeneratorResult(True, window)
    x, y = (int(v) for v in np.argwhere(off)[0])
    itinerary = {}
    for t in range(-window, window + 1):
        fx = sys.iterate(t)[x] if t >= 0 else _inverse_iterate(inv, -t)[x]
        fy = sys.iterate(t)[y] if t >= 0 else _inverse_iterate(inv, -t)[y]
        z = int(np.flatnonzero(U.relation[fx] & U.relation[fy])[0])
        itinerary[t] = z
    return GeneratorResult(False, window, (x, y), itinerary)


def _inverse_iterate(inv, i):
    out = np.arange(inv.size, dtype=np.int64)
    for _ in range(i):
        out = inv[out]
    return out


@dataclass
class HorizonResult:
    n: int
    witnesses: list          # (member bitmask, point x with member inside E[x])


def _small_members(members, E, size):
    wit = []
    for m in members:
        pts = np.flatnonzero(bits_to_mask(m, size))
        inside = E.relation[np.ix_(pts, pts)].all(axis=1)
        hits = np.flatnonzero(inside)
        if hits.size == 0:
            return None
        wit.append((m, int(pts[hits[0]])))
    return wit


def generator_horizon(sys, alpha, E):
    """Smallest n such that every member of the join over ``-n..n`` of
    ``f^{-i}(alpha)`` lies in ``E[x]`` for one of its own points x."""
    if not sys.invertible:
        raise PreconditionError("generator horizon needs an invertible map")
    size = alpha.size
    table, inv = map_table(sys), sys.inverse
    base = list(dict.fromkeys(alpha.members))
    current = set(base)
    fwd = np.arange(size, dtype=np.int64)
    bwd = fwd.copy()
    n = 0
    while True:
        wit = _small_members(sorted(current), E, size)
        if wit is not None:
            return HorizonResult(n, wit)
        n += 1
        fwd, bwd = table[fwd], inv[bwd]
        pre = [mask_to_bits(bits_to_mask(m, size)[fwd]) for m in base]
        post = [mask_to_bits(bits_to_mask(m, size)[bwd]) for m in base]
        nxt = {a & b & c for a in current for b in pre for c in post}
        nxt.discard(0)
        if nxt == current:
            raise NotFoundError(
                f"joins saturated at n = {n - 1} without fitting inside {E.tag}",
                evidence=n - 1)
        current = nxt


@dataclass
class ExpansivityEntropyReport:
    scale: str
    sep_rate: float
    uniform_rate: float
    gap: float
    trivial: bool
    exact: bool


def expansivity_entropy_check(sys, base, D, n_max=None, mode="exact", window=None):
    """Fitted separated rate at the single scale D next to the full sweep over the base.

    Both directions are reported numerically; equality is not assumed.
    """
    if n_max is None:
        n_max = default_window(sys.size, 64)[1]
    window = default_window(sys.size, n_max) if window is None else tuple(window)
    table = count_table(sys, D, max(n_max, window[1]), kinds=("separated",),
                        mode=mode)["separated"]
    rate = growth_rate({n: r.cardinality for n, r in table.items()}, window).slope
    ue = uniform_entropy(sys, base, n_max=n_max, mode=mode, window=window)
    exact = ue.exact and all(r.exact for r in table.values())
    return ExpansivityEntropyReport(D.tag, rate, ue.rate, abs(rate - ue.rate),
                                    D.is_trivial(), exact)


@dataclass
class GeneratorEntropyReport:
    scale: str
    cover_rate: float          # cov(f, U): cover entropy of C(U)
    uniform_cover_rate: float  # h_uc over the base
    gap: float
    exact: bool


def generator_entropy_check(sys, base, U, n_max=None, mode="exact", window=None):
    """Cover entropy of the generator cover C(U) against h_uc over the base."""
    if n_max is None:
        n_max = default_window(sys.size, 64)[1]
    cov = cover_entropy(sys, uniform_cover(U), n_max=n_max, mode=mode, window=window)
    huc = uniform_cover_entropy(sys, base, n_max=n_max, mode=mode, window=window)
    return GeneratorEntropyReport(U.tag, cov.fitted_rate, huc.fitted_rate,
                                  abs(cov.fitted_rate - huc.fitted_rate),
                                  cov.exact and huc.exact)


@dataclass
class ContractionReport:
    is_contraction: bool
    witnesses: dict                  # scale tag -> witness tag
    failing_scale: Optional[str] = None
    entropy: Optional[float] = None


def _maps_into_itself(U, table):
    """``f(U[x]) ⊆ U[f(x)]`` for every x, i.e. ``U ⊆ F^{-1}(U)``."""
    return not (U.relation & ~pullback_relation(U.relation, table)).any()


def contraction_check(sys, base, n_max=None, mode="exact"):
    """Every nontrivial base member must contain a nontrivial U with
    ``f(U[x]) ⊆ U[f(x)]``.  When that holds the uniform entropy is
    computed and must be exactly 0."""
    table = map_table(sys)
    nontrivial = base.nontrivial()
    good = [U for U in nontrivial if _maps_into_itself(U, table)]
    witnesses, failing = {}, None
    for D in nontrivial:
        w = next((U for U in good if U <= D), None)
        if w is None:
            failing = D.tag
            break
        witnesses[D.tag] = w.tag
    if failing is not None or not nontrivial:
        return ContractionReport(False, witnesses, failing)
    ue = uniform_entropy(sys, base, n_max=n_max, mode=mode)
    if ue.exact and (ue.separated.fitted_rate != 0 or ue.spanning.fitted_rate != 0):
        raise PropertyViolation(
            f"contraction with nonzero entropy {ue.rate}", ue.rate)
    return ContractionReport(True, witnesses, None, ue.rate)
