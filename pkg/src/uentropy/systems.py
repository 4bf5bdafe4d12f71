"""Finite dynamical systems and the test-bed zoo.

Metrics are exact: integer numerators over a single common denominator,
held either as a dense matrix or as a vectorized function for large grids.
Every entourage membership test ``d(x, y) < eps`` is decided in integer
arithmetic.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import MissingMetricError, PreconditionError
from .uniform import Carrier, Entourage, UniformityBase, MAX_CARRIER, coordinate_relation

#: Above this size the metric axioms are checked on a seeded sample of triples.
TRIANGLE_EXHAUSTIVE_MAX = 256
TRIANGLE_SAMPLES = 200_000


class Metric:
    """``d(x, y) = num[x, y] / denom`` with integer numerators.

    Either a dense numerator matrix or a vectorized function ``fn(i, j)``
    (broadcasting over index arrays) must be supplied.  Function-backed
    metrics materialize the dense matrix only when asked for it, which lets
    large torus grids use row-wise distance evaluation.
    """

    def __init__(self, num=None, denom=1, *, size=None, fn=None, levels=None):
        if denom < 1:
            raise PreconditionError("metric denominator must be positive")
        if num is None and fn is None:
            raise PreconditionError("metric needs a matrix or a function")
        self.denom = int(denom)
        self._fn = fn
        self._levels = None if levels is None else sorted(set(int(v) for v in levels))
        if num is not None:
            num = np.array(num, dtype=np.int64)
            num.setflags(write=False)
            size = num.shape[0]
        self._num = num
        self.size = int(size)

    @property
    def num(self):
        if self._num is None:
            idx = np.arange(self.size)
            num = np.asarray(self._fn(idx[:, None], idx[None, :]), dtype=np.int64)
            num.setflags(write=False)
            self._num = num
        return self._num

    def values(self, i, j):
        """Numerators for broadcast index arrays ``i`` and ``j``."""
        if self._num is not None or self._fn is None:
            return self.num[i, j]
        return np.asarray(self._fn(np.asarray(i), np.asarray(j)), dtype=np.int64)

    def rows(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return self.values(idx[:, None], np.arange(self.size)[None, :])

    def __call__(self, x, y):
        return Fraction(int(self.values(x, y)), self.denom)

    def level_numerators(self):
        if self._levels is not None:
            return [v for v in self._levels if v > 0]
        return [int(v) for v in np.unique(self.num) if v > 0]

    def distinct_values(self):
        return [Fraction(v, self.denom) for v in self.level_numerators()]

    @property
    def diameter(self):
        levels = self.level_numerators()
        return Fraction(max(levels) if levels else 0, self.denom)

    def below(self, eps):
        """Boolean matrix of pairs with ``d < eps`` (exact)."""
        eps = Fraction(eps)
        return self.num * eps.denominator < eps.numerator * self.denom

    def validate(self, seed=0):
        n = self.size
        if n <= TRIANGLE_EXHAUSTIVE_MAX or self._num is not None:
            d = self.num
            if d.shape != (n, n):
                raise PreconditionError("metric must be square")
            if (d < 0).any():
                raise PreconditionError("metric must be nonnegative")
            if (d != d.T).any():
                raise PreconditionError("metric must be symmetric")
            if (np.diagonal(d) != 0).any():
                raise PreconditionError("metric must vanish on the diagonal")
            if ((d + np.eye(n, dtype=np.int64)) <= 0).any():
                raise PreconditionError("distinct points at distance zero")
        if n <= TRIANGLE_EXHAUSTIVE_MAX:
            d = self.num
            for k in range(n):
                viol = d[:, k, None] + d[None, k, :] < d
                if viol.any():
                    i, j = np.argwhere(viol)[0]
                    raise PreconditionError(
                        f"triangle inequality fails for ({i}, {k}, {j})")
            return
        rng = np.random.default_rng(seed)
        i, j, k = rng.integers(0, n, size=(3, TRIANGLE_SAMPLES))
        dij, dik, dkj = self.values(i, j), self.values(i, k), self.values(k, j)
        dji = self.values(j, i)
        if (dij != dji).any() or (dij < 0).any():
            raise PreconditionError("metric must be symmetric and nonnegative")
        if ((dij == 0) != (i == j)).any():
            raise PreconditionError("metric must separate points")
        if (dik + dkj < dij).any():
            t = int(np.flatnonzero(dik + dkj < dij)[0])
            raise PreconditionError(
                f"triangle inequality fails for ({i[t]}, {k[t]}, {j[t]})")


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    """A self-map of a finite carrier, optionally with an exact metric."""

    carrier: Carrier
    map: np.ndarray
    metric: Optional[Metric] = None
    name: str = "system"
    params: tuple = ()
    coords: Optional[np.ndarray] = None  # word or grid coordinates per point
    invertible: bool = field(default=None)

    def __post_init__(self):
        table = np.ascontiguousarray(self.map, dtype=np.int64)
        n = self.carrier.size
        if table.shape != (n,):
            raise PreconditionError("map table must have one entry per point")
        if n and (table.min() < 0 or table.max() >= n):
            raise PreconditionError("map table leaves the carrier")
        table.setflags(write=False)
        object.__setattr__(self, "map", table)
        perm = bool(np.unique(table).size == n)
        if self.invertible is None:
            object.__setattr__(self, "invertible", perm)
        elif bool(self.invertible) != perm:
            raise PreconditionError("invertible flag disagrees with the map table")
        if self.metric is not None:
            if self.metric.size != n:
                raise PreconditionError("metric size does not match carrier")
            self.metric.validate()

    @property
    def size(self):
        return self.carrier.size

    def __len__(self):
        return self.carrier.size

    @property
    def inverse(self):
        if not self.invertible:
            raise PreconditionError(f"{self.name} is not invertible")
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.size)
        return inv

    def iterate(self, i):
        out = np.arange(self.size, dtype=np.int64)
        for _ in range(i):
            out = self.map[out]
        return out

    def orbit_matrix(self, n):
        """``(N, n)`` array whose row x is ``x, f x, ..., f^{n-1} x``."""
        out = np.empty((self.size, n), dtype=np.int64)
        cur = np.arange(self.size, dtype=np.int64)
        for i in range(n):
            out[:, i] = cur
            cur = self.map[cur]
        return out

    def label(self, x):
        return self.carrier.label(x)

    def describe(self):
        args = ",".join(str(p) for p in self.params)
        return f"{self.name}({args})" if args else self.name

    def __repr__(self):
        return f"<FiniteSystem {self.describe()} N={self.size}>"


@dataclass(frozen=True)
class ScaleGrid:
    """Strictly decreasing positive scales."""

    epsilons: tuple

    def __post_init__(self):
        eps = tuple(Fraction(e) for e in self.epsilons)
        if not eps:
            raise PreconditionError("scale grid must be nonempty")
        if any(e <= 0 for e in eps):
            raise PreconditionError("scales must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise PreconditionError("scales must be strictly decreasing")
        object.__setattr__(self, "epsilons", eps)

    def __iter__(self):
        return iter(self.epsilons)

    def __len__(self):
        return len(self.epsilons)


# -- zoo ------------------------------------------------------------------

def _check_size(n):
    if n < 1 or n > MAX_CARRIER:
        raise PreconditionError(f"carrier size {n} outside [1, {MAX_CARRIER}]")


def _circle_fn(n):
    def fn(i, j):
        diff = np.abs(i - j)
        return np.minimum(diff, n - diff)
    return fn


def _circle_metric(n):
    return Metric(denom=n, size=n, fn=_circle_fn(n), levels=range(n // 2 + 1))


def full_shift(m, L):
    """All ``m**L`` words of length L under cyclic left rotation.

    ``d(u, v) = 2**-j`` where j is the first coordinate at which u and v
    differ.  Word index is the base-m number with coordinate 0 most
    significant.
    """
    if m < 2 or L < 1:
        raise PreconditionError("full_shift needs m >= 2 and L >= 1")
    if m ** L > MAX_CARRIER:
        raise PreconditionError(f"full_shift({m},{L}) exceeds the carrier cap")
    words = np.array(list(itertools.product(range(m), repeat=L)), dtype=np.int64)
    n = len(words)
    weights = m ** np.arange(L - 1, -1, -1)
    rotated = np.roll(words, -1, axis=1)
    table = rotated @ weights
    differ = words[:, None, :] != words[None, :, :]
    first = np.where(differ.any(axis=2), differ.argmax(axis=2), L)
    num = np.where(first < L, 2 ** (L - 1 - np.minimum(first, L - 1)), 0)
    sep = "" if m <= 10 else "."
    labels = tuple(sep.join(str(s) for s in w) for w in words)
    return FiniteSystem(Carrier(n, labels), table, Metric(num, 2 ** (L - 1)),
                        name="full_shift", params=(m, L), coords=words)


def doubling(N):
    """``x -> 2x mod N`` on ``Z/N`` with the circle metric."""
    _check_size(N)
    table = (2 * np.arange(N)) % N
    return FiniteSystem(Carrier(N), table, _circle_metric(N), name="doubling",
                        params=(N,))


def tent(N):
    """Tent map on the grid ``i/(N-1)``; the grid is invariant, no rounding."""
    if N < 2:
        raise PreconditionError("tent needs N >= 2")
    _check_size(N)
    i = np.arange(N)
    table = (N - 1) - np.abs((N - 1) - 2 * i)
    metric = Metric(denom=N - 1, size=N, fn=lambda a, b: np.abs(a - b),
                    levels=range(N))
    return FiniteSystem(Carrier(N), table, metric, name="tent", params=(N,))


def rotation(N, k):
    """``x -> x + k mod N`` with the circle metric (an isometry)."""
    _check_size(N)
    table = (np.arange(N) + k) % N
    return FiniteSystem(Carrier(N), table, _circle_metric(N), name="rotation",
                        params=(N, k))


def contraction(levels):
    """Halving on ``{0} U {2**-j : j < levels}``; index 0 is the fixed point 0.

    The last dyadic point ``2**-(levels-1)`` maps to 0 (its half is
    equidistant from 0 and itself; the tie goes to the fixed point).
    """
    if levels < 1:
        raise PreconditionError("contraction needs levels >= 1")
    _check_size(levels + 1)
    denom = 2 ** (levels - 1)
    values = np.array([0] + [2 ** (levels - 1 - j) for j in range(levels)],
                      dtype=np.int64)
    table = np.zeros(levels + 1, dtype=np.int64)
    for idx in range(1, levels + 1):
        table[idx] = idx + 1 if idx < levels else 0
    labels = ["0"] + [str(Fraction(1, 2 ** j)) for j in range(levels)]
    num = np.abs(values[:, None] - values[None, :])
    return FiniteSystem(Carrier(levels + 1, tuple(labels)), table,
                        Metric(num, denom), name="contraction", params=(levels,),
                        coords=values)


def cat(N):
    """Arnold cat map ``(x, y) -> (2x + y, x + y) mod N`` on the torus grid."""
    if N < 1 or N * N > MAX_CARRIER:
        raise PreconditionError(f"cat({N}) exceeds the carrier cap")
    x, y = np.divmod(np.arange(N * N), N)
    table = ((2 * x + y) % N) * N + (x + y) % N
    circ = _circle_fn(N)

    def fn(i, j):
        xi, yi = np.divmod(i, N)
        xj, yj = np.divmod(j, N)
        return np.maximum(circ(xi, xj), circ(yi, yj))

    coords = np.stack([x, y], axis=1)
    metric = Metric(denom=N, size=N * N, fn=fn, levels=range(N // 2 + 1))
    return FiniteSystem(Carrier(N * N), table, metric, name="cat",
                        params=(N,), coords=coords)


def identity(N):
    """Identity map with the discrete-path metric ``|x - y|``."""
    _check_size(N)
    metric = Metric(denom=1, size=N, fn=lambda a, b: np.abs(a - b), levels=range(N))
    return FiniteSystem(Carrier(N), np.arange(N), metric, name="identity",
                        params=(N,))


def disjoint_union(a, b, gap=None):
    """``a`` on indices ``0..|a|-1`` followed by ``b``.

    Cross-component distance is the constant ``gap``; it must be at least
    half the larger diameter for the triangle inequality.  The default is
    three quarters of the larger diameter.
    """
    if a.metric is None or b.metric is None:
        raise MissingMetricError("disjoint_union needs metrics on both parts")
    diam = max(a.metric.diameter, b.metric.diameter)
    gap = Fraction(3, 4) * diam if gap is None else Fraction(gap)
    if 2 * gap < diam:
        raise PreconditionError("gap below half the diameter breaks the triangle inequality")
    denom = math.lcm(a.metric.denom, b.metric.denom, gap.denominator)
    na, nb = a.size, b.size
    num = np.full((na + nb, na + nb), gap.numerator * (denom // gap.denominator),
                  dtype=np.int64)
    num[:na, :na] = a.metric.num * (denom // a.metric.denom)
    num[na:, na:] = b.metric.num * (denom // b.metric.denom)
    table = np.concatenate([a.map, b.map + na])
    labels = tuple(f"a:{a.label(x)}" for x in range(na)) + tuple(
        f"b:{b.label(x)}" for x in range(nb))
    return FiniteSystem(Carrier(na + nb, labels), table, Metric(num, denom),
                        name="union", params=(a.describe(), b.describe()))


ZOO = {
    "full_shift": dict(builder=full_shift, args=("m", "L"),
                       ranges="m >= 2, L >= 1, m**L <= 65536",
                       expected="log m", provenance="cylinder-count oracle"),
    "doubling": dict(builder=doubling, args=("N",), ranges="1 <= N <= 65536",
                     expected="log 2 (windows n <= log2 N)",
                     provenance="grid approximation of the circle doubling map"),
    "tent": dict(builder=tent, args=("N",), ranges="2 <= N <= 65536",
                 expected="log 2 (windows n <= log2 N)",
                 provenance="grid approximation of the tent map"),
    "rotation": dict(builder=rotation, args=("N", "k"),
                     ranges="1 <= N <= 65536, any integer k",
                     expected="0", provenance="isometry: Bowen relation constant in n"),
    "contraction": dict(builder=contraction, args=("levels",),
                        ranges="1 <= levels <= 65535",
                        expected="0", provenance="contraction theorem"),
    "cat": dict(builder=cat, args=("N",), ranges="1 <= N <= 256",
                expected="log((3 + sqrt 5)/2) = 0.9624",
                provenance="largest eigenvalue of [[2,1],[1,1]]"),
    "identity": dict(builder=identity, args=("N",), ranges="1 <= N <= 65536",
                     expected="0", provenance="Bowen relation constant in n"),
}


def build_zoo_system(name, *params):
    """Instantiate a zoo system, e.g. ``build_zoo_system("full_shift", 2, 4)``."""
    if isinstance(name, dict):
        spec = dict(name)
        name = spec.pop("name")
        params = tuple(spec[a] for a in ZOO[name]["args"]) if name in ZOO else ()
    if name not in ZOO:
        raise PreconditionError(f"unknown system {name!r}; known: {sorted(ZOO)}")
    entry = ZOO[name]
    if len(params) != len(entry["args"]):
        raise PreconditionError(
            f"{name} takes parameters {entry['args']}, got {params}")
    return entry["builder"](*(int(p) for p in params))


def parse_system_spec(text):
    """``"full_shift 2 4"`` or ``"full_shift(2,4)"`` -> FiniteSystem."""
    parts = text.replace("(", " ").replace(")", " ").replace(",", " ").split()
    if not parts:
        raise PreconditionError("empty system spec")
    return build_zoo_system(parts[0], *parts[1:])


# -- dynamics -------------------------------------------------------------

def orbit(sys, x, n):
    """``[x, f(x), ..., f^{n-1}(x)]`` as point indices."""
    x = sys.carrier.index(x)
    out = []
    for _ in range(n):
        out.append(x)
        x = int(sys.map[x])
    return out


def bowen_distance(sys, x, y, n):
    """``max_{i<n} d(f^i x, f^i y)`` as an exact fraction."""
    if sys.metric is None:
        raise MissingMetricError(f"{sys.describe()} has no metric")
    if n < 1:
        raise PreconditionError("Bowen window must be >= 1")
    ox, oy = orbit(sys, x, n), orbit(sys, y, n)
    return Fraction(int(sys.metric.values(np.array(ox), np.array(oy)).max()),
                    sys.metric.denom)


def bowen_distance_matrix(sys, n):
    """Numerators of ``d_n`` for all pairs, over ``sys.metric.denom``."""
    if sys.metric is None:
        raise MissingMetricError(f"{sys.describe()} has no metric")
    d = sys.metric.num
    out = d.copy()
    cur = sys.map
    for _ in range(1, n):
        out = np.maximum(out, d[np.ix_(cur, cur)])
        cur = sys.map[cur]
    return out


def metric_entourage(sys, eps):
    if sys.metric is None:
        raise MissingMetricError(f"{sys.describe()} has no metric")
    eps = Fraction(eps)
    return Entourage(sys.carrier, sys.metric.below(eps), name=f"eps={eps}",
                     symmetrize=False)


def metric_entourage_family(sys, grid):
    """``{d < eps}`` for each grid scale, plus the diagonal at the bottom.

    The diagonal is appended when no grid scale produces it, so the family
    always satisfies U1 and U4 on a finite carrier.
    """
    if not isinstance(grid, ScaleGrid):
        grid = ScaleGrid(tuple(grid))
    ents = []
    for eps in grid:
        e = metric_entourage(sys, eps)
        if ents and e == ents[-1]:
            continue
        ents.append(e)
    base = UniformityBase(tuple(ents))
    return base.with_diagonal()


def default_grid(sys, max_scales=16):
    """Scales at the metric's distance levels, largest first.

    The first scale exceeds the diameter (full relation); each further
    scale equals one distinct distance, so ``{d < eps}`` steps down one
    level at a time, ending at the diagonal.  Long level lists are thinned
    to ``max_scales`` evenly spaced levels, always keeping both ends.
    """
    if sys.metric is None:
        raise MissingMetricError(f"{sys.describe()} has no metric")
    levels = sorted(sys.metric.distinct_values(), reverse=True)
    if not levels:
        return ScaleGrid((Fraction(1),))
    top = 2 * levels[0]
    if len(levels) + 1 > max_scales:
        keep = np.unique(np.round(np.linspace(0, len(levels) - 1, max_scales - 1))
                         .astype(int))
        levels = [levels[i] for i in keep]
    return ScaleGrid((top,) + tuple(levels))


def default_base(sys, max_scales=16):
    return metric_entourage_family(sys, default_grid(sys, max_scales))


def coordinate_entourage(sys, coords=(0,), name=None):
    """For word systems: "agree on the given coordinates" (taken mod L)."""
    if sys.coords is None or sys.name != "full_shift":
        raise PreconditionError("coordinate entourages need a full_shift system")
    L = sys.coords.shape[1]
    cols = sorted({c % L for c in coords})
    rel = coordinate_relation(sys.coords, cols)
    return Entourage(sys.carrier, rel,
                     name=name or "agree" + "".join(f"[{c}]" for c in coords))


def first_symbol_entourage(sys):
    return coordinate_entourage(sys, (0,), name="E0")


def word_index(sys, word):
    """Index of a word given as a string or sequence of symbols."""
    if isinstance(word, str):
        return sys.carrier.index(word)
    m = sys.params[0]
    idx = 0
    for s in word:
        idx = idx * m + int(s)
    return idx


def is_conjugacy(sys_x, sys_y, phi):
    """Return the first point where ``phi o f != g o phi``, or None."""
    phi = np.asarray(phi, dtype=np.int64)
    lhs = phi[sys_x.map]
    rhs = sys_y.map[phi]
    bad = np.flatnonzero(lhs != rhs)
    return int(bad[0]) if bad.size else None


def list_systems():
    """Catalog text of zoo systems with parameter ranges and expected rates."""
    lines = ["name         parameters   ranges                               expected rate   provenance"]
    for name, entry in ZOO.items():
        args = " ".join(entry["args"])
        lines.append(f"{name:<12} {args:<12} {entry['ranges']:<36} "
                     f"{entry['expected']:<15} {entry['provenance']}")
    return "\n".join(lines) + "\n"
