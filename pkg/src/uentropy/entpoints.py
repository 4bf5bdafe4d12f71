"""Local entropy and the set of entropy points.

A point x is an entropy point when the separated-set growth rate restricted
to ``E[x]`` is positive for every nontrivial base scale E ("every" mode) or
for at least one ("some" mode).  "Positive" means above a numeric floor,
since fitted rates on short windows carry discretization noise.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import PreconditionError
from .spanning import default_window, uniform_entropy
from .systems import default_base, is_conjugacy
from .uniform import map_table

#: Floor for fitted rates.
RATE_THRESHOLD = 0.05
#: Floor for rates from exact counts when no fitting noise is present.
EXACT_FLOOR = 1e-9


def _window(sys, n_max, window):
    if n_max is None:
        n_max = default_window(sys.size, 64)[1]
    window = default_window(sys.size, n_max) if window is None else tuple(window)
    return max(n_max, window[1]), window


class _LocalCache:
    """Restricted estimates keyed by the set K, shared across points."""

    def __init__(self, sys, base, n_max, mode, window):
        self.sys, self.base, self.mode = sys, base, mode
        self.n_max, self.window = _window(sys, n_max, window)
        self.store = {}

    def __call__(self, K):
        K = tuple(sorted(int(p) for p in K))
        if K not in self.store:
            self.store[K] = uniform_entropy(self.sys, self.base, n_max=self.n_max,
                                            mode=self.mode, window=self.window,
                                            subset=K).separated
        return self.store[K]


def local_entropy(sys, x, E, base, n_max=None, mode="exact", window=None):
    """Uniform entropy (separated counts) restricted to ``K = E[x]``.

    The fit window defaults to the one used on the whole carrier so that
    rates on different K are comparable.
    """
    x = sys.carrier.index(x)
    K = np.flatnonzero(E.relation[x])
    return _LocalCache(sys, base, n_max, mode, window)(K)


@dataclass
class LocalEntropyProfile:
    point: int
    per_scale: dict                 # scale tag -> EntropyEstimate on E[x]
    is_entropy_point: bool
    threshold: float

    def __post_init__(self):
        if not self.per_scale:
            raise PreconditionError("profile needs at least one scale")


@dataclass
class EntropyPointSet:
    points: tuple
    profiles: list
    threshold: float
    membership: str                 # every | some
    notes: dict = field(default_factory=dict)

    def __contains__(self, x):
        return x in self.points


def entropy_point_set(sys, base, n_max=None, threshold=RATE_THRESHOLD, mode="exact",
                      membership="every", window=None):
    """Points whose local rate exceeds ``threshold`` at every (or some) nontrivial scale."""
    if membership not in ("every", "some"):
        raise PreconditionError(f"unknown membership rule {membership!r}")
    scales = base.nontrivial()
    if not scales:
        raise PreconditionError("base has no nontrivial scale")
    local = _LocalCache(sys, base, n_max, mode, window)
    profiles, members = [], []
    combine = all if membership == "every" else any
    for x in range(sys.size):
        per = {E.tag: local(np.flatnonzero(E.relation[x])) for E in scales}
        is_ent = combine(est.fitted_rate > threshold for est in per.values())
        profiles.append(LocalEntropyProfile(x, per, is_ent, threshold))
        if is_ent:
            members.append(x)
    notes = {"closed": "every subset of a finite discrete carrier is closed"}
    return EntropyPointSet(tuple(members), profiles, threshold, membership, notes)


def check_forward_invariant(sys, ent):
    """``(True, None)`` if f maps ``ent`` into itself, else ``(False, x)``."""
    pts = ent.points if isinstance(ent, EntropyPointSet) else tuple(ent)
    table = map_table(sys)
    inside = set(pts)
    for x in pts:
        if int(table[x]) not in inside:
            return False, x
    return True, None


@dataclass
class ConjugacyImageReport:
    equal: bool
    image: tuple                    # phi(Ent(X))
    target: tuple                   # Ent(Y)


def check_conjugacy_image(sys_x, sys_y, phi, n_max=None, threshold=RATE_THRESHOLD,
                          mode="exact", base=None):
    """Compare ``phi(Ent(X, f))`` with ``Ent(Y, g)``, scales transported by phi."""
    phi = np.asarray(phi, dtype=np.int64)
    if phi.shape != (sys_x.size,) or sys_x.size != sys_y.size or \
            np.unique(phi).size != sys_x.size:
        raise PreconditionError("phi must be a bijection between the carriers")
    bad = is_conjugacy(sys_x, sys_y, phi)
    if bad is not None:
        raise PreconditionError(f"phi does not conjugate the maps at point {bad}")
    base_x = default_base(sys_x) if base is None else base
    base_y = base_x.transported(phi)
    ent_x = entropy_point_set(sys_x, base_x, n_max, threshold, mode)
    ent_y = entropy_point_set(sys_y, base_y, n_max, threshold, mode)
    image = tuple(sorted(int(phi[x]) for x in ent_x.points))
    return ConjugacyImageReport(image == ent_y.points, image, ent_y.points)


@dataclass
class FullEntropyReport:
    restricted: float
    global_rate: float
    gap: float
    exact: bool


def check_full_entropy_on_ent(sys, ent, base, n_max=None, mode="exact", window=None):
    """Uniform entropy restricted to ``ent`` next to the global value."""
    pts = ent.points if isinstance(ent, EntropyPointSet) else tuple(ent)
    ok, bad = check_forward_invariant(sys, pts)
    if not ok:
        raise PreconditionError(f"entropy point set not forward invariant at {bad}")
    n_max, window = _window(sys, n_max, window)
    glob = uniform_entropy(sys, base, n_max=n_max, mode=mode, window=window)
    if pts:
        rest = uniform_entropy(sys, base, n_max=n_max, mode=mode, window=window,
                               subset=pts)
        r, exact = rest.rate, rest.exact and glob.exact
    else:
        r, exact = 0.0, glob.exact
    return FullEntropyReport(r, glob.rate, abs(r - glob.rate), exact)


@dataclass
class IntersectionWitness:
    precondition_met: bool
    rate: float                      # restricted entropy on K
    witness: Optional[int] = None    # a point of K inside Ent


def intersection_witness(sys, K, base, n_max=None, mode="exact",
                         threshold=RATE_THRESHOLD, floor=EXACT_FLOOR, window=None):
    """A point of ``K ∩ Ent`` when the entropy restricted to K is positive."""
    K = tuple(sorted(set(int(p) for p in K)))
    if not K:
        raise PreconditionError("K must be nonempty")
    n_max, window = _window(sys, n_max, window)
    rate = uniform_entropy(sys, base, n_max=n_max, mode=mode, window=window,
                           subset=K).rate
    if rate <= floor:
        return IntersectionWitness(False, rate)
    local = _LocalCache(sys, base, n_max, mode, window)
    scales = base.nontrivial()
    for x in K:
        if all(local(np.flatnonzero(E.relation[x])).fitted_rate > threshold
               for E in scales):
            return IntersectionWitness(True, rate, x)
    return IntersectionWitness(True, rate, None)
