"""Finite entourage algebra.

An entourage on a finite carrier is stored as a dense boolean ``N x N``
matrix.  Entourages built through the public constructor are made
reflexive and symmetric; relations produced by :func:`compose` (which need
not be symmetric) and relations read back for validation are kept raw.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainMismatchError, PreconditionError

#: Largest carrier for which dense relations are allowed.
MAX_CARRIER = 65536


@dataclass(frozen=True)
class Carrier:
    """Points ``0..size-1`` with optional human-readable labels."""

    size: int
    labels: Optional[tuple] = None

    def __post_init__(self):
        if self.size < 1:
            raise PreconditionError("carrier must be nonempty")
        if self.size > MAX_CARRIER:
            raise PreconditionError(
                f"carrier of {self.size} points exceeds cap {MAX_CARRIER}")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.size:
                raise PreconditionError("one label per point required")
            if len(set(labels)) != len(labels):
                raise PreconditionError("labels must be unique")
            object.__setattr__(self, "labels", labels)

    @property
    def points(self):
        return range(self.size)

    def __len__(self):
        return self.size

    def label(self, x):
        return str(x) if self.labels is None else self.labels[x]

    def index(self, point):
        """Resolve a label or index to an index."""
        if isinstance(point, (int, np.integer)) and not isinstance(point, bool):
            if 0 <= point < self.size:
                return int(point)
            raise PreconditionError(f"unknown point {point!r}")
        if self.labels is not None and point in self.labels:
            return self.labels.index(point)
        raise PreconditionError(f"unknown point {point!r}")


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=bool)
    a.setflags(write=False)
    return a


class Entourage:
    """A relation on a finite carrier.

    With ``symmetrize=True`` (the default) the stored relation is
    ``R | R.T | I``, so the axioms of reflexivity and symmetry hold by
    construction.  ``symmetrize=False`` stores ``relation`` verbatim; use it
    only for intermediate relations and for validating foreign input.
    """

    __slots__ = ("carrier", "relation", "name", "_hash")

    def __init__(self, carrier, relation, name=None, symmetrize=True):
        if isinstance(carrier, int):
            carrier = Carrier(carrier)
        rel = np.array(relation, dtype=bool)
        n = carrier.size
        if rel.shape != (n, n):
            raise PreconditionError(
                f"relation shape {rel.shape} does not match carrier size {n}")
        if symmetrize:
            rel = rel | rel.T
            np.fill_diagonal(rel, True)
        self.carrier = carrier
        self.relation = _freeze(rel)
        self.name = name
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def diagonal(cls, carrier, name="diag"):
        if isinstance(carrier, int):
            carrier = Carrier(carrier)
        return cls(carrier, np.eye(carrier.size, dtype=bool), name=name)

    @classmethod
    def full(cls, carrier, name="full"):
        if isinstance(carrier, int):
            carrier = Carrier(carrier)
        return cls(carrier, np.ones((carrier.size, carrier.size), bool), name=name)

    @classmethod
    def from_pairs(cls, carrier, pairs, name=None, symmetrize=True):
        if isinstance(carrier, int):
            carrier = Carrier(carrier)
        rel = np.zeros((carrier.size, carrier.size), dtype=bool)
        for x, y in pairs:
            rel[x, y] = True
        return cls(carrier, rel, name=name, symmetrize=symmetrize)

    @classmethod
    def from_predicate(cls, carrier, pred, name=None):
        if isinstance(carrier, int):
            carrier = Carrier(carrier)
        n = carrier.size
        rel = np.array([[bool(pred(x, y)) for y in range(n)] for x in range(n)],
                       dtype=bool).reshape(n, n)
        return cls(carrier, rel, name=name)

    def renamed(self, name):
        out = Entourage.__new__(Entourage)
        out.carrier, out.relation, out.name, out._hash = (
            self.carrier, self.relation, name, self._hash)
        return out

    # -- basic properties -------------------------------------------------
    @property
    def size(self):
        return self.carrier.size

    @property
    def pair_count(self):
        return int(self.relation.sum())

    def is_reflexive(self):
        return bool(self.relation.diagonal().all())

    def is_symmetric(self):
        return bool((self.relation == self.relation.T).all())

    def is_entourage(self):
        return self.is_reflexive() and self.is_symmetric()

    def is_trivial(self):
        """True when every cross section is a single point (the diagonal)."""
        return self.pair_count == self.size and self.is_reflexive()

    def is_full(self):
        return bool(self.relation.all())

    def __contains__(self, pair):
        x, y = pair
        return bool(self.relation[x, y])

    def _check(self, other):
        if self.carrier != other.carrier:
            raise DomainMismatchError("entourages live on different carriers")

    def __le__(self, other):
        self._check(other)
        return not bool((self.relation & ~other.relation).any())

    def __lt__(self, other):
        return self <= other and self != other

    def __ge__(self, other):
        return other <= self

    def __eq__(self, other):
        if not isinstance(other, Entourage):
            return NotImplemented
        return (self.carrier == other.carrier
                and bool((self.relation == other.relation).all()))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.carrier.size, self.relation.tobytes()))
        return self._hash

    def __and__(self, other):
        self._check(other)
        return Entourage(self.carrier, self.relation & other.relation,
                         symmetrize=False)

    def __or__(self, other):
        self._check(other)
        return Entourage(self.carrier, self.relation | other.relation,
                         symmetrize=False)

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name is not None else ""
        return f"<Entourage N={self.size} pairs={self.pair_count}{tag}>"

    @property
    def tag(self):
        return self.name if self.name is not None else f"pairs{self.pair_count}"


def _same_carrier(*ents):
    c = ents[0].carrier
    for e in ents[1:]:
        if e.carrier != c:
            raise DomainMismatchError("entourages live on different carriers")
    return c


def compose(e1, e2):
    """``e1 o e2``: pairs ``(x, y)`` with a witness ``z``, ``(x,z) in e1``, ``(z,y) in e2``."""
    c = _same_carrier(e1, e2)
    prod = e1.relation.astype(np.float32) @ e2.relation.astype(np.float32)
    rel = prod > 0.5
    sym = e1 is e2 or (e1 == e2 and e1.is_symmetric())
    return Entourage(c, rel, symmetrize=False,
                     name=f"({e1.tag})o({e2.tag})" if not sym else f"{e1.tag}^2")


def power(e, k):
    """k-fold composition ``e o ... o e`` (k >= 1)."""
    if k < 1:
        raise PreconditionError("power needs k >= 1")
    out = e
    for _ in range(k - 1):
        out = compose(out, e)
    return out.renamed(f"{e.tag}^{k}")


def transpose(e):
    return Entourage(e.carrier, e.relation.T, name=e.name, symmetrize=False)


def cross_section(e, x):
    """``E[x]`` as a sorted tuple of point indices."""
    x = e.carrier.index(x)
    return tuple(int(y) for y in np.flatnonzero(e.relation[x]))


def section_mask(e, points):
    """``E[A]`` for a collection of points, as a boolean mask."""
    idx = np.fromiter(points, dtype=np.int64)
    if idx.size == 0:
        return np.zeros(e.size, dtype=bool)
    return e.relation[idx].any(axis=0)


def map_table(f):
    """Accept a FiniteSystem, array or sequence and return an int array."""
    table = getattr(f, "map", f)
    return np.asarray(table, dtype=np.int64)


def iterate_table(f, i):
    table = map_table(f)
    out = np.arange(table.size, dtype=np.int64)
    for _ in range(i):
        out = table[out]
    return out


def pullback_relation(rel, table):
    """Boolean matrix of ``(f x, f y) in rel``."""
    return rel[np.ix_(table, table)]


def dynamic_pullback(e, f, i):
    """``F^{-i}(E)`` with ``F = f x f``."""
    if i < 0:
        raise PreconditionError("pullback index must be nonnegative")
    table = map_table(f)
    if table.size != e.size:
        raise DomainMismatchError("map and entourage carriers differ")
    fi = iterate_table(table, i)
    return Entourage(e.carrier, pullback_relation(e.relation, fi),
                     name=f"F^-{i}({e.tag})", symmetrize=False)


def bowen_relations(e, f, n_max):
    """Yield ``(n, matrix)`` for the Bowen relation at n = 1..n_max.

    Uses ``B_{n+1} = E & F^{-1}(B_n)``.
    """
    table = map_table(f)
    if table.size != e.size:
        raise DomainMismatchError("map and entourage carriers differ")
    current = e.relation
    for n in range(1, n_max + 1):
        if n > 1:
            current = e.relation & pullback_relation(current, table)
        yield n, current


def bowen_relation(e, f, n):
    """``⋂_{i<n} F^{-i}(E)``: pairs whose first n iterates stay E-close."""
    if n < 1:
        raise PreconditionError("Bowen window must be >= 1")
    rel = None
    for _, rel in bowen_relations(e, f, n):
        pass
    return Entourage(e.carrier, rel, name=f"bowen{n}({e.tag})",
                     symmetrize=False)


@dataclass(frozen=True)
class UniformityBase:
    """A finite family of entourages on one carrier.

    Members are kept sorted from largest to smallest pair count, which is a
    linear extension of inclusion.
    """

    entourages: tuple = field(default_factory=tuple)

    def __post_init__(self):
        ents = tuple(self.entourages)
        if not ents:
            raise PreconditionError("a uniformity base needs at least one member")
        _same_carrier(*ents)
        order = sorted(range(len(ents)), key=lambda i: (-ents[i].pair_count, i))
        object.__setattr__(self, "entourages", tuple(ents[i] for i in order))

    @property
    def carrier(self):
        return self.entourages[0].carrier

    def __iter__(self):
        return iter(self.entourages)

    def __len__(self):
        return len(self.entourages)

    def __getitem__(self, i):
        return self.entourages[i]

    def nontrivial(self):
        return [e for e in self.entourages if not e.is_trivial()]

    def with_diagonal(self):
        if any(e.is_trivial() for e in self.entourages):
            return self
        return UniformityBase(self.entourages + (Entourage.diagonal(self.carrier),))

    def by_name(self, name):
        for e in self.entourages:
            if e.name == name:
                return e
        raise KeyError(name)

    def is_nested(self):
        return all(b <= a for a, b in zip(self.entourages, self.entourages[1:]))

    def transported(self, phi):
        """Image of every member under a bijection ``phi`` of the carrier."""
        phi = np.asarray(phi, dtype=np.int64)
        inv = np.empty_like(phi)
        inv[phi] = np.arange(phi.size)
        return UniformityBase(tuple(
            Entourage(e.carrier, e.relation[np.ix_(inv, inv)], name=e.name,
                      symmetrize=False)
            for e in self.entourages))


@dataclass
class AxiomResult:
    axiom: str
    passed: bool
    detail: str = ""
    witness: Optional[tuple] = None


@dataclass
class ValidationReport:
    results: list

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def __getitem__(self, axiom):
        for r in self.results:
            if r.axiom == axiom:
                return r
        raise KeyError(axiom)

    def as_dict(self):
        return {r.axiom: {"passed": r.passed, "detail": r.detail,
                          "witness": list(r.witness) if r.witness else None}
                for r in self.results}


def _first_pair(mask):
    idx = np.argwhere(mask)
    if idx.size == 0:
        return None
    return tuple(int(v) for v in idx[0])


def validate_uniformity_base(base):
    """Check axioms U1-U4 on a finite family of relations.

    ``base`` may be a :class:`UniformityBase` or any sequence of
    relations.  U1 is checked in base form (every pairwise intersection
    contains a member); U3 requires each member's transpose to be a member.
    """
    ents = list(base)
    if not ents:
        raise PreconditionError("empty family")
    _same_carrier(*ents)
    results = []

    # U1
    u1 = AxiomResult("U1", True)
    for i, a in enumerate(ents):
        for b in ents[i:]:
            both = a.relation & b.relation
            if not any(not (c.relation & ~both).any() for c in ents):
                u1 = AxiomResult("U1", False,
                                 f"no member inside {a.tag} & {b.tag}",
                                 (a.tag, b.tag))
                break
        if not u1.passed:
            break
    results.append(u1)

    # U2
    u2 = AxiomResult("U2", True)
    for e in ents:
        missing = np.flatnonzero(~e.relation.diagonal())
        if missing.size:
            x = int(missing[0])
            u2 = AxiomResult("U2", False, f"{e.tag} misses the diagonal", (x, x))
            break
    results.append(u2)

    # U3
    u3 = AxiomResult("U3", True)
    for e in ents:
        t = e.relation.T
        if not any((c.relation == t).all() for c in ents):
            pair = _first_pair(e.relation & ~t)
            u3 = AxiomResult("U3", False, f"transpose of {e.tag} not in family",
                             pair)
            break
    results.append(u3)

    # U4
    u4 = AxiomResult("U4", True)
    for e in ents:
        if not any(compose(c, c) <= e for c in ents):
            sq = compose(e, e)
            pair = _first_pair(sq.relation & ~e.relation)
            u4 = AxiomResult("U4", False, f"no member W with W o W inside {e.tag}",
                             pair)
            break
    results.append(u4)
    return ValidationReport(results)


def half_scale(base, e):
    """Largest member W of ``base`` with ``W o W`` inside ``e`` (or None)."""
    for w in base:
        if compose(w, w) <= e:
            return w
    return None


def coordinate_relation(words, coords):
    """Entourage relation "agree on the given coordinates" over a word table."""
    words = np.asarray(words)
    cols = list(coords)
    sub = words[:, cols]
    return (sub[:, None, :] == sub[None, :, :]).all(axis=2)


def subset_mask(size, points: Sequence[int]):
    m = np.zeros(size, dtype=bool)
    m[list(points)] = True
    return m
