"""Pseudo-orbits, shadowing, chain recurrence and the entropy certificate.

The certificate turns a sensitive point of a system with shadowing into
2^n orbit segments of length n*l that are pairwise separated, which bounds
the separated-set growth rate below by log 2 / l.
"""

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _search
from .errors import NotFoundError, PreconditionError
from .expansivity import first_sensitive_point
from .uniform import Entourage, compose, half_scale, map_table

RNG_ALGORITHM = "PCG64"
#: Memoized search states allowed before exhaustive chain checks fall back to sampling.
DEFAULT_STATE_BUDGET = 200_000
DEFAULT_SAMPLES = 20_000


@dataclass
class PseudoOrbit:
    states: tuple
    validity: str                   # tag of the entourage D
    jumps: list                     # (i, (f(x_i), x_{i+1})) where f(x_i) != x_{i+1}

    def __len__(self):
        return len(self.states)


@dataclass
class ChainViolation:
    index: int                      # first i with (f(x_i), x_{i+1}) outside D
    pair: tuple

    def __bool__(self):
        return False


def verify_pseudo_orbit(sys, states, D):
    """Validated :class:`PseudoOrbit`, or a :class:`ChainViolation` (falsy)."""
    states = tuple(int(s) for s in states)
    if not states:
        raise PreconditionError("pseudo-orbit needs at least one state")
    table = map_table(sys)
    jumps = []
    for i in range(len(states) - 1):
        fx, nxt = int(table[states[i]]), states[i + 1]
        if not D.relation[fx, nxt]:
            return ChainViolation(i, (fx, nxt))
        if fx != nxt:
            jumps.append((i, (fx, nxt)))
    return PseudoOrbit(states, D.tag, jumps)


def _states(po):
    return po.states if isinstance(po, PseudoOrbit) else tuple(int(s) for s in po)


def find_shadowing_points(sys, po, E):
    """All w with ``(f^i w, x_i) in E`` for every i, by exhaustive scan."""
    states = _states(po)
    table = map_table(sys)
    cur = np.arange(sys.size, dtype=np.int64)
    ok = np.ones(sys.size, dtype=bool)
    for s in states:
        ok &= E.relation[cur, s]
        cur = table[cur]
    return tuple(int(w) for w in np.flatnonzero(ok))


@dataclass
class ChainTest:
    passed: bool
    exact: bool                      # False when checked on a random sample
    chains: int                      # chains (or states) examined
    counterexample: Optional[tuple] = None


def _shadow_columns(sys, E, L):
    """``cols[i][x]``: bitset of w with ``(f^i w, x) in E``."""
    table = map_table(sys)
    cur = np.arange(sys.size, dtype=np.int64)
    cols = []
    for _ in range(L):
        cols.append(_search.bits_from_matrix(E.relation[cur].T))
        cur = table[cur]
    return cols


def _exhaustive_chain_test(succ, cols, L, size, state_budget):
    """Depth-first search over (step, state, live shadows); memoized."""
    seen = set()
    full = (1 << size) - 1
    for x0 in range(size):
        stack = [(0, x0, full & cols[0][x0], (x0,))]
        while stack:
            i, x, live, path = stack.pop()
            if not live:
                return ChainTest(False, True, len(seen), path)
            if i == L - 1:
                continue
            key = (i, x, live)
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > state_budget:
                return None
            for y in reversed(succ[x]):
                stack.append((i + 1, y, live & cols[i + 1][y], path + (y,)))
    return ChainTest(True, True, len(seen))


def _sampled_chain_test(succ, cols, L, size, samples, rng):
    full = (1 << size) - 1
    for _ in range(samples):
        x = int(rng.integers(size))
        path, live = [x], full & cols[0][x]
        for i in range(1, L):
            nxt = succ[x]
            x = int(nxt[rng.integers(len(nxt))])
            path.append(x)
            live &= cols[i][x]
        if not live:
            return ChainTest(False, False, samples, tuple(path))
    return ChainTest(True, False, samples)


def chain_successors(sys, D):
    """``succ[x]``: the points y with ``(f(x), y) in D``."""
    table = map_table(sys)
    return [tuple(int(y) for y in np.flatnonzero(D.relation[table[x]]))
            for x in range(sys.size)]


def shadowing_test(sys, D, E, L, state_budget=DEFAULT_STATE_BUDGET,
                   samples=DEFAULT_SAMPLES, seed=0):
    """Is every D-chain of L states E-shadowed by a true orbit?

    Exhaustive (memoized over live shadow sets) while the state budget
    lasts, then a seeded random sample of chains.
    """
    if L < 1:
        raise PreconditionError("chain length must be >= 1")
    succ = chain_successors(sys, D)
    cols = _shadow_columns(sys, E, L)
    res = _exhaustive_chain_test(succ, cols, L, sys.size, state_budget)
    if res is not None:
        return res
    rng = np.random.Generator(np.random.PCG64(seed))
    return _sampled_chain_test(succ, cols, L, sys.size, samples, rng)


@dataclass
class ShadowingModulus:
    scale: Entourage
    exact: bool
    tested: list                    # (tag, passed, exact)

    @property
    def flag(self):
        return "exact" if self.exact else "sampled"


def shadowing_modulus(sys, base, E, L, budget=DEFAULT_STATE_BUDGET, seed=0,
                      samples=DEFAULT_SAMPLES, nontrivial=False):
    """Largest base member D inside E whose L-state chains are all E-shadowed."""
    tested = []
    last = None
    for D in base:
        if not D <= E or (nontrivial and D.is_trivial()):
            continue
        res = shadowing_test(sys, D, E, L, budget, samples, seed)
        tested.append((D.tag, res.passed, res.exact))
        if res.passed:
            return ShadowingModulus(D, res.exact, tested)
        last = (D.tag, res.counterexample)
    if last is None:
        raise NotFoundError(f"no base member inside {E.tag} to test", evidence=None)
    raise NotFoundError(
        f"no shadowing modulus for {E.tag}; smallest tested {last[0]} fails on chain {last[1]}",
        evidence=last)


# -- chain recurrence ----------------------------------------------------------

def chain_recurrent_points(sys, D):
    """Mask of x admitting a D-chain of length >= 1 from x back to x."""
    table = map_table(sys)
    succ = D.relation[table]                     # row x: y with (f x, y) in D
    graph = csr_matrix(succ)
    _, labels = connected_components(graph, directed=True, connection="strong")
    sizes = np.bincount(labels)
    return (sizes[labels] > 1) | np.diag(succ)


def chain_recurrent_pairs(sys, D):
    """``R(G)`` for ``G = f x f`` with the product entourage of D.

    A pair lies on a closed chain iff both coordinates do: cycles of
    lengths a and b through p and q repeat to common length a*b.
    """
    m = chain_recurrent_points(sys, D)
    return Entourage(sys.carrier, np.outer(m, m), name=f"R({D.tag})", symmetrize=False)


# -- certificate -----------------------------------------------------------------

STAGES = ("sensitivity", "shadowing", "recurrent-pair", "return-time",
          "missing-shadow", "separation")


class CertificateError(NotFoundError):
    """Pipeline failure; ``stage`` names the missing hypothesis."""

    def __init__(self, stage, message, evidence=None):
        super().__init__(f"{stage}: {message}", evidence)
        self.stage = stage


def block_word(blocks, word):
    """Concatenate the blocks named by ``word`` (a sequence of block indices)."""
    out = []
    for w in word:
        out.extend(blocks[w])
    return tuple(out)


def _first_exit(table, y, z, rel, limit):
    for k in range(limit):
        if not rel[y, z]:
            return k
        y, z = table[y], table[z]
    return None


def _first_return(table, y, z, W, k, limit):
    fy, fz = y, z
    for l in range(1, limit + 1):
        fy, fz = table[fy], table[fz]
        if l > k and W[fy, y] and W[fz, z]:
            return l
    return None


@dataclass
class EntropyCertificate:
    anchor: int
    blocks: tuple                   # (xi, eta)
    l: int
    k: int
    n: int
    shadows: dict                   # word string -> shadow point
    scale: str                      # E
    scales: dict                    # role -> tag (V, E, D, W)
    bound: float
    verified: bool
    shadowing: str                  # exact | sampled
    separation_times: np.ndarray = field(repr=False, default=None)

    def digest(self):
        return hashlib.sha256(np.ascontiguousarray(
            self.separation_times, dtype=np.int64).tobytes()).hexdigest()

    def to_dict(self, sys=None):
        lab = (lambda x: sys.label(x)) if sys is not None else (lambda x: x)
        return {
            "anchor": lab(self.anchor),
            "scales": dict(self.scales),
            "l": self.l, "k": self.k, "n": self.n,
            "blocks": [[lab(s) for s in b] for b in self.blocks],
            "shadows": {w: lab(p) for w, p in self.shadows.items()},
            "verification_digest": self.digest(),
            "bound_nats": self.bound,
            "verified": self.verified,
            "shadowing": self.shadowing,
        }


def separation_times(sys, points, E, length):
    """Matrix of first times i < length with iterates outside E (-1: never)."""
    table = map_table(sys)
    pts = np.asarray(points, dtype=np.int64)
    m = len(pts)
    times = np.full((m, m), -1, dtype=np.int64)
    cur = pts.copy()
    for i in range(length):
        apart = ~E.relation[np.ix_(cur, cur)] & (times < 0)
        times[apart] = i
        cur = table[cur]
    np.fill_diagonal(times, 0)
    return times


def _pair_candidates(sys, x, W, D, E3, limit):
    table = map_table(sys)
    rec = chain_recurrent_points(sys, D)
    near = [int(p) for p in np.flatnonzero(W.relation[x]) if rec[p]]
    found, exits = [], 0
    for y, z in itertools.combinations(near, 2):
        if not W.relation[y, z]:
            continue
        k = _first_exit(table, y, z, E3.relation, limit)
        if k is None:
            continue
        exits += 1
        l = _first_return(table, y, z, W.relation, k, limit)
        if l is not None:
            found.append((l, k, y, z))
    return sorted(found), exits


def entropy_certificate(sys, base, n, budget=DEFAULT_STATE_BUDGET, seed=0,
                        samples=DEFAULT_SAMPLES, max_candidates=64):
    """Build and verify 2^n pairwise (nl, E)-separated shadow points.

    Search order: lowest-index sensitive point x with its largest V; scales
    E with ``E^3`` inside V (largest first); shadowing moduli D inside E;
    ``W`` the half scale of D; pairs ordered by (l, k, y, z).  On failure
    the raised :class:`CertificateError` names the furthest stage reached.
    """
    if n < 1:
        raise PreconditionError("word length must be >= 1")
    sens = first_sensitive_point(sys, base)
    if sens is None:
        raise CertificateError("sensitivity", "no sensitive point at any nontrivial scale")
    x, V = sens
    limit = sys.size * sys.size
    table = map_table(sys)
    furthest, detail = None, "no scale E with E^3 inside V"
    shadow_cache = {}

    def note(stage, msg):
        nonlocal furthest, detail
        s = STAGES.index(stage)
        if furthest is None or s > furthest:
            furthest, detail = s, msg

    for E in base.nontrivial():
        E3 = compose(compose(E, E), E)
        if not E3 <= V:
            continue
        for D in base.nontrivial():
            if not D <= E:
                continue
            W = half_scale(base, D)
            if W is None or W.is_trivial():
                note("shadowing", f"no nontrivial half scale of {D.tag}")
                continue
            cands, exits = _pair_candidates(sys, x, W, D, E3, limit)
            if not cands:
                if exits:
                    note("return-time", f"pairs near {x} at {W.tag} never return")
                else:
                    note("recurrent-pair", f"no recurrent pair near {x} at {W.tag} leaves {E.tag}^3")
                continue
            for l, k, y, z in cands[:max_candidates]:
                L = n * l
                key = (D.tag, E.tag, L)
                if key not in shadow_cache:
                    shadow_cache[key] = shadowing_test(sys, D, E, L, budget, samples, seed)
                test = shadow_cache[key]
                if not test.passed:
                    note("shadowing", f"{D.tag} is not a shadowing modulus for "
                                      f"{E.tag} at chain length {L}; chain {test.counterexample}")
                    continue
                xi = tuple(int(s) for s in sys.orbit_matrix(l)[y])
                eta = tuple(int(s) for s in sys.orbit_matrix(l)[z])
                shadows, missing = {}, None
                for word in itertools.product((0, 1), repeat=n):
                    states = block_word((xi, eta), word)
                    po = verify_pseudo_orbit(sys, states, D)
                    if not po:
                        raise PreconditionError(
                            f"block word {word} is not a {D.tag}-chain at step {po.index}")
                    ws = find_shadowing_points(sys, po, E)
                    if not ws:
                        missing = word
                        break
                    shadows["".join(map(str, word))] = ws[0]
                if missing is not None:
                    note("missing-shadow", f"word {missing} has no {E.tag}-shadow")
                    continue
                pts = list(shadows.values())
                times = separation_times(sys, pts, E, L)
                off = ~np.eye(len(pts), dtype=bool)
                if (times[off] < 0).any() or len(set(pts)) < len(pts):
                    note("separation", f"shadows not pairwise ({L}, {E.tag})-separated")
                    continue
                return EntropyCertificate(
                    anchor=x, blocks=(xi, eta), l=l, k=k, n=n, shadows=shadows,
                    scale=E.tag,
                    scales={"V": V.tag, "E": E.tag, "D": D.tag, "W": W.tag},
                    bound=math.log(2) / l, verified=test.exact,
                    shadowing="exact" if test.exact else "sampled",
                    separation_times=times)
    stage = STAGES[1] if furthest is None else STAGES[furthest]
    raise CertificateError(stage, detail, evidence=x)
