import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_entourages, random_systems, systems_with_nested_pair
from uentropy.errors import PreconditionError
from uentropy.spanning import (ExtremalSetResult, check_monotonicity, count_table,
                               default_window, greedy_net, growth_rate, max_separated,
                               min_spanning, net_entropy, uniform_entropy)
from uentropy.systems import (contraction, default_base, doubling, first_symbol_entourage,
                              full_shift, identity, rotation, tent)
from uentropy.uniform import Entourage, UniformityBase, bowen_relation

LOG2 = math.log(2)


def brute_sep(rel, points):
    for k in range(len(points), 0, -1):
        for combo in itertools.combinations(points, k):
            if all(not rel[a, b] for a, b in itertools.combinations(combo, 2)):
                return k
    return 0


def brute_span(rel, points):
    for k in range(1, len(points) + 1):
        for combo in itertools.combinations(points, k):
            if all(any(rel[c, x] for c in combo) for x in points):
                return k
    raise AssertionError


def cylinder_count(sys, n):
    """Distinct length-n prefixes of coordinate-0 itineraries."""
    words = {tuple(sys.coords[x][i % sys.coords.shape[1]] for i in range(n))
             for x in range(sys.size)}
    return len(words)


def test_full_shift_counts_equal_cylinders():
    s = full_shift(2, 6)
    E0 = first_symbol_entourage(s)
    t = count_table(s, E0, 6)
    for n in range(1, 7):
        assert t["separated"][n].cardinality == cylinder_count(s, n) == 2 ** n
        assert t["spanning"][n].cardinality == 2 ** n
        assert t["separated"][n].exact


def test_separated_witness_is_separated():
    s = full_shift(2, 5)
    E0 = first_symbol_entourage(s)
    r = max_separated(s, E0, 3)
    rel = bowen_relation(E0, s, 3).relation
    for a, b in itertools.combinations(r.witness, 2):
        assert not rel[a, b]


@given(random_systems(max_size=8), st.integers(1, 4), st.data())
def test_exact_counts_match_brute_force(sys, n, data):
    E = data.draw(random_entourages(sys.size, 0.4))
    rel = bowen_relation(E, sys, n).relation
    pts = list(range(sys.size))
    assert max_separated(sys, E, n).cardinality == brute_sep(rel, pts)
    assert min_spanning(sys, E, n).cardinality == brute_span(rel, pts)


@given(random_systems(max_size=8), st.data())
def test_subset_counts_match_brute_force(sys, data):
    E = data.draw(random_entourages(sys.size, 0.4))
    K = sorted(data.draw(st.sets(st.integers(0, sys.size - 1), min_size=1)))
    rel = bowen_relation(E, sys, 2).relation
    assert max_separated(sys, E, 2, subset=K).cardinality == brute_sep(rel, K)
    assert min_spanning(sys, E, 2, subset=K).cardinality == brute_span(rel, K)


@given(random_systems(max_size=12), st.data())
def test_greedy_intervals_contain_exact(sys, data):
    E = data.draw(random_entourages(sys.size, 0.3))
    for kind, fn in (("separated", max_separated), ("spanning", min_spanning)):
        exact = fn(sys, E, 2).cardinality
        lo, hi = fn(sys, E, 2, mode="greedy").interval
        assert lo <= exact <= hi, kind


@given(systems_with_nested_pair(max_size=9))
def test_monotonicity_inequalities(case):
    sys, U, V = case
    rep = check_monotonicity(sys, U, V, 4)
    assert rep.holds and rep.exact, rep.first_violation


def test_monotonicity_requires_nesting():
    s = full_shift(2, 3)
    with pytest.raises(PreconditionError):
        check_monotonicity(s, Entourage.full(s.carrier), Entourage.diagonal(s.carrier), 2)


def test_growth_rate_constant_counts_is_zero():
    assert growth_rate([5, 5, 5, 5]).slope == 0.0


def test_growth_rate_exact_doubling():
    r = growth_rate({n: 2 ** n for n in range(1, 11)})
    assert abs(r.slope - LOG2) < 1e-12
    assert abs(r.limsup - LOG2) < 1e-12


def test_growth_rate_single_point_window():
    assert growth_rate({3: 8}).slope == pytest.approx(LOG2)


def test_growth_rate_window_checks():
    with pytest.raises(PreconditionError):
        growth_rate({1: 2, 2: 4}, window=(1, 3))
    with pytest.raises(PreconditionError):
        growth_rate({1: 0, 2: 4})


@given(st.lists(st.integers(1, 10 ** 6), min_size=2, max_size=10), st.integers(1, 1000))
def test_growth_rate_invariant_under_scaling(counts, c):
    a = growth_rate(counts).slope
    b = growth_rate([c * v for v in counts]).slope
    assert abs(a - b) < 1e-9


def test_default_window():
    assert default_window(1024, 20) == (1, 10)
    assert default_window(64, 4) == (1, 4)


@pytest.mark.parametrize("sys,expected", [
    (full_shift(2, 8), LOG2),
    (rotation(32, 5), 0.0),
    (contraction(10), 0.0),
    (identity(6), 0.0),
])
def test_uniform_entropy_zoo(sys, expected):
    ue = uniform_entropy(sys, default_base(sys))
    assert ue.exact and ue.agree
    assert abs(ue.rate - expected) < 1e-9


def test_identity_single_diagonal_scale_counts_points():
    s = identity(5)
    base = UniformityBase((Entourage.diagonal(s.carrier),))
    ue = uniform_entropy(s, base, n_max=3)
    assert ue.separated.series() == {1: 5, 2: 5, 3: 5}
    assert ue.rate == 0.0


def test_estimate_bounds_bracket_fit():
    s = tent(33)
    ue = uniform_entropy(s, default_base(s, max_scales=6), n_max=5, mode="greedy")
    est = ue.separated
    assert est.lower_bound <= est.fitted_rate <= est.upper_bound
    assert not est.exact


def test_exact_result_rejects_gap():
    with pytest.raises(PreconditionError):
        ExtremalSetResult("separated", 1, "s", 2, [0, 1], True, 1)


def test_greedy_net_is_separated_and_spanning():
    s = doubling(64)
    eps = Fraction(1, 8)
    centers = greedy_net(s, eps, 3)
    E = Entourage(s.carrier, s.metric.below(eps), symmetrize=False)
    rel = bowen_relation(E, s, 3).relation
    for a, b in itertools.combinations(centers, 2):
        assert not rel[a, b]
    assert rel[np.ix_(centers, range(s.size))].any(axis=0).all()


def test_net_entropy_doubling():
    est = net_entropy(doubling(1024), [Fraction(1, 2), Fraction(1, 4)], 10)
    assert abs(est.fitted_rate - LOG2) < 0.1
    assert not est.exact
