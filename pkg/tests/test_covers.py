import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_entourages, random_systems
from uentropy.covers import (Cover, check_subadditivity, cover_entropy, dynamical_join_counts,
                             join, lebesgue_entourage, min_subcover_cardinality,
                             preimage_cover, refinement_check, uniform_cover,
                             uniform_cover_entropy)
from uentropy.errors import DomainMismatchError, NotFoundError, PreconditionError
from uentropy.spanning import uniform_entropy
from uentropy.systems import (contraction, default_base, first_symbol_entourage, full_shift,
                              identity, metric_entourage, rotation)
from uentropy.uniform import Carrier, Entourage, UniformityBase

LOG2 = math.log(2)


def brute_n(members, universe):
    members = list(set(members))
    for k in range(1, len(members) + 1):
        for combo in itertools.combinations(members, k):
            u = 0
            for m in combo:
                u |= m
            if universe & ~u == 0:
                return k
    raise AssertionError


def naive_join_counts(sys, a, n_max):
    """Full dynamical joins without pruning, for small systems."""
    size = a.size
    cur = set(a.members)
    out = {1: brute_n(cur, a.universe)}
    fi = np.arange(size)
    for n in range(2, n_max + 1):
        fi = sys.map[fi]
        pre = set()
        for m in a.members:
            mask = np.array([(m >> int(fi[x])) & 1 for x in range(size)], dtype=bool)
            bits = sum(1 << x for x in np.flatnonzero(mask))
            if bits:
                pre.add(bits)
        cur = {x & y for x in cur for y in pre} - {0}
        out[n] = brute_n(cur, a.universe)
    return out


@st.composite
def covers(draw, size):
    k = draw(st.integers(1, 5))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    members = [int(v) for v in rng.integers(1, 1 << size, size=k)]
    union = 0
    for m in members:
        union |= m
    missing = ((1 << size) - 1) & ~union
    if missing:
        members.append(missing)
    return Cover(Carrier(size), tuple(members))


def test_cover_must_cover():
    with pytest.raises(PreconditionError):
        Cover.from_sets(3, [(0, 1)])
    with pytest.raises(PreconditionError):
        Cover(Carrier(2), (0, 3))


def test_join_of_partitions_is_common_refinement():
    a = Cover.from_sets(4, [(0, 1), (2, 3)])
    b = Cover.from_sets(4, [(0, 2), (1, 3)])
    j = join(a, b)
    assert sorted(j.sets()) == [(0,), (1,), (2,), (3,)]
    assert refinement_check(j, a) and refinement_check(j, b)


def test_join_carrier_mismatch():
    with pytest.raises(DomainMismatchError):
        join(Cover.from_sets(2, [(0, 1)]), Cover.from_sets(3, [(0, 1, 2)]))


@given(st.data())
def test_join_commutative_and_associative(data):
    n = data.draw(st.integers(1, 8))
    a, b, c = (data.draw(covers(n)) for _ in range(3))
    assert join(a, b) == join(b, a)
    assert join(join(a, b), c) == join(a, join(b, c))
    assert refinement_check(join(a, b), a) and refinement_check(join(a, b), b)


@given(st.data())
def test_refinement_transitive(data):
    n = data.draw(st.integers(1, 7))
    a, b, c = (data.draw(covers(n)) for _ in range(3))
    ab, abc = join(a, b), join(join(a, b), c)
    assert refinement_check(abc, ab) and refinement_check(ab, a)
    assert refinement_check(abc, a)


def test_refinement_examples():
    whole = Cover.from_sets(3, [(0, 1, 2)])
    singles = Cover.from_sets(3, [(0,), (1,), (2,)])
    halves = Cover.from_sets(3, [(0, 1), (1, 2)])
    assert refinement_check(singles, halves) and refinement_check(singles, whole)
    assert refinement_check(whole, whole) and not refinement_check(whole, halves)


@given(st.data())
def test_min_subcover_matches_brute_force(data):
    n = data.draw(st.integers(1, 9))
    a = data.draw(covers(n))
    r = min_subcover_cardinality(a)
    assert r.exact and r.count == brute_n(a.members, a.universe)
    g = min_subcover_cardinality(a, mode="greedy")
    assert g.lower_bound <= r.count <= g.count


@given(random_systems(max_size=8), st.data())
def test_preimage_never_needs_more_members(sys, data):
    a = data.draw(covers(sys.size))
    pre = preimage_cover(sys, a, check=True)
    assert min_subcover_cardinality(pre).count <= min_subcover_cardinality(a).count


@given(random_systems(max_size=7), st.data())
def test_pruned_joins_match_naive_joins(sys, data):
    a = data.draw(covers(sys.size))
    got = {n: r.count for n, r in dynamical_join_counts(sys, a, 4).items()}
    assert got == naive_join_counts(sys, a, 4)


@given(random_systems(max_size=7), st.data(), st.integers(1, 6))
def test_capped_joins_bracket_naive_counts(sys, data, cap):
    a = data.draw(covers(sys.size))
    truth = naive_join_counts(sys, a, 4)
    for n, r in dynamical_join_counts(sys, a, 4, max_members=cap).items():
        assert r.lower_bound <= truth[n] <= r.count
        if not r.exact:
            assert r.witness == []


@given(random_systems(max_size=10), st.data())
def test_join_counts_subadditive(sys, data):
    a = data.draw(covers(sys.size))
    counts = {n: r.count for n, r in dynamical_join_counts(sys, a, 6).items()}
    assert check_subadditivity(counts) is None


def test_subadditivity_detector():
    assert check_subadditivity({1: 2, 2: 5}) == (1, 1)
    assert check_subadditivity({1: 2, 2: 4, 3: 8}) is None


def test_cover_entropy_trivial_cover():
    s = full_shift(2, 5)
    est = cover_entropy(s, Cover.from_sets(s.size, [range(s.size)]), n_max=5)
    assert est.fitted_rate == 0.0


def test_cover_entropy_identity_stabilizes():
    s = identity(6)
    a = Cover.from_sets(6, [(0, 1, 2), (2, 3, 4), (4, 5)])
    est = cover_entropy(s, a, n_max=4)
    assert est.series() == {1: 3, 2: 3, 3: 3, 4: 3}
    assert est.fitted_rate == 0.0


def test_first_symbol_partition_doubles():
    s = full_shift(2, 8)
    est = cover_entropy(s, uniform_cover(first_symbol_entourage(s)), n_max=8, window=(1, 8))
    assert est.series() == {n: 2 ** n for n in range(1, 9)}
    assert abs(est.fitted_rate - LOG2) < 1e-9


def test_uniform_cover_examples():
    s = full_shift(2, 4)
    assert sorted(uniform_cover(Entourage.diagonal(s.carrier)).sets()) == [(x,) for x in range(16)]
    assert uniform_cover(Entourage.full(s.carrier)).sets() == [tuple(range(16))]
    c = uniform_cover(first_symbol_entourage(s))
    assert len(c) == 2 and all(len(m) == 8 for m in c.sets())
    assert sorted(c.multiplicity.values()) == [8, 8]


def test_uniform_cover_entropy_identity_diagonal():
    s = identity(4)
    base = UniformityBase((Entourage.diagonal(s.carrier),))
    est = uniform_cover_entropy(s, base, n_max=3)
    assert est.series() == {1: 4, 2: 4, 3: 4} and est.fitted_rate == 0.0
    assert est.notes["compact_set"] == "X"


@pytest.mark.parametrize("sys", [full_shift(2, 8), rotation(32, 5), contraction(10),
                                 full_shift(3, 3), identity(5)])
def test_uniform_cover_entropy_equals_uniform_entropy(sys):
    base = default_base(sys)
    huc = uniform_cover_entropy(sys, base)
    hu = uniform_entropy(sys, base)
    assert huc.exact and hu.exact
    assert abs(huc.fitted_rate - hu.rate) < 1e-6


def test_uniform_cover_entropy_on_subset():
    s = full_shift(2, 6)
    K = [x for x in range(s.size) if s.label(x)[0] == "0"]
    est = uniform_cover_entropy(s, default_base(s), subset=K, window=(1, 6))
    assert est.fitted_rate > 0.3
    assert est.notes["compact_set"].startswith("K")


def test_lebesgue_entourage_examples():
    s = full_shift(2, 4)
    base = default_base(s)
    whole = Cover.from_sets(16, [range(16)])
    assert lebesgue_entourage(whole, base) == base[0]
    singles = Cover.from_sets(16, [(x,) for x in range(16)])
    assert lebesgue_entourage(singles, base).is_trivial()
    part = uniform_cover(first_symbol_entourage(s))
    D = lebesgue_entourage(part, base)
    assert D == metric_entourage(s, 1)
    for D2 in base:
        if D2 <= D:
            assert refinement_check(uniform_cover(D2), part)


def test_lebesgue_entourage_not_found():
    s = full_shift(2, 3)
    base = UniformityBase((Entourage.full(s.carrier),))
    with pytest.raises(NotFoundError):
        lebesgue_entourage(Cover.from_sets(8, [(x,) for x in range(8)]), base)
