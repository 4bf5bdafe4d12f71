import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_entourages, random_systems
from uentropy.entpoints import entropy_point_set
from uentropy.errors import NotFoundError, PreconditionError
from uentropy.shadowing import (CertificateError, PseudoOrbit, block_word,
                                chain_recurrent_pairs, chain_recurrent_points,
                                entropy_certificate, find_shadowing_points, separation_times,
                                shadowing_modulus, shadowing_test, verify_pseudo_orbit)
from uentropy.spanning import count_table, growth_rate
from uentropy.systems import (cat, contraction, default_base, first_symbol_entourage,
                              full_shift, metric_entourage, orbit, rotation)
from uentropy.uniform import Entourage, UniformityBase

LOG2 = math.log(2)


def all_chains(sys, D, L):
    chains = [(x,) for x in range(sys.size)]
    for _ in range(L - 1):
        chains = [c + (y,) for c in chains
                  for y in np.flatnonzero(D.relation[sys.map[c[-1]]])]
    return chains


def brute_recurrent_pairs(sys, D):
    """Pairs that reach themselves in the product chain graph."""
    n = sys.size
    succ = {}
    for p in range(n):
        for q in range(n):
            ps = np.flatnonzero(D.relation[sys.map[p]])
            qs = np.flatnonzero(D.relation[sys.map[q]])
            succ[p, q] = [(int(a), int(b)) for a in ps for b in qs]
    out = np.zeros((n, n), dtype=bool)
    for start in succ:
        seen, frontier = set(), list(succ[start])
        while frontier:
            v = frontier.pop()
            if v in seen:
                continue
            seen.add(v)
            frontier.extend(succ[v])
        out[start] = start in seen
    return out


def test_true_orbit_is_valid_for_diagonal():
    s = full_shift(2, 4)
    po = verify_pseudo_orbit(s, orbit(s, 5, 6), Entourage.diagonal(s.carrier))
    assert isinstance(po, PseudoOrbit) and po.jumps == []


def test_single_large_jump_reported():
    s = rotation(8, 1)
    states = [0, 1, 2, 6, 7]
    D = metric_entourage(s, Fraction(2, 8))
    v = verify_pseudo_orbit(s, states, D)
    assert not v and v.index == 2 and v.pair == (3, 6)


@given(random_systems(max_size=8), st.data())
def test_perturbing_a_step_flips_validity(sys, data):
    D = data.draw(random_entourages(sys.size, 0.4))
    x0 = data.draw(st.integers(0, sys.size - 1))
    L = data.draw(st.integers(2, 6))
    states = orbit(sys, x0, L)
    assert verify_pseudo_orbit(sys, states, D)
    i = data.draw(st.integers(0, L - 2))
    outside = np.flatnonzero(~D.relation[sys.map[states[i]]])
    if outside.size == 0:
        return
    bad = list(states)
    bad[i + 1] = int(outside[0])
    v = verify_pseudo_orbit(sys, bad, D)
    assert not v and v.index == i


def test_shadows_of_true_orbit_include_start():
    s = cat(4)
    E = metric_entourage(s, Fraction(1, 2))
    assert 7 in find_shadowing_points(s, orbit(s, 7, 5), E)
    bumped = list(orbit(s, 7, 3)) + [0]
    if tuple(bumped) != tuple(orbit(s, 7, 4)):
        assert find_shadowing_points(s, bumped, Entourage.diagonal(s.carrier)) == ()


def test_late_edits_have_unique_shadow():
    s = full_shift(2, 6)
    rng = np.random.default_rng(7)
    x = s.carrier.index("010011")
    states = [x]
    for _ in range(5):
        word = list(s.label(s.map[states[-1]]))
        word[5] = "01"[rng.integers(2)]
        states.append(s.carrier.index("".join(word)))
    D = metric_entourage(s, Fraction(1, 16))
    po = verify_pseudo_orbit(s, states, D)
    assert po
    readout = "".join(s.label(p)[0] for p in states)
    assert find_shadowing_points(s, po, first_symbol_entourage(s)) == (s.carrier.index(readout),)


@given(random_systems(max_size=5), st.integers(1, 4), st.data())
def test_shadowing_test_matches_chain_enumeration(sys, L, data):
    D = data.draw(random_entourages(sys.size, 0.3))
    E = data.draw(random_entourages(sys.size, 0.4))
    expected = all(find_shadowing_points(sys, c, E) for c in all_chains(sys, D, L))
    res = shadowing_test(sys, D, E, L)
    assert res.exact and res.passed == expected
    if not res.passed:
        assert verify_pseudo_orbit(sys, res.counterexample, D)
        assert find_shadowing_points(sys, res.counterexample, E) == ()


def test_sampled_fallback_is_seeded():
    s = full_shift(2, 6)
    D = metric_entourage(s, Fraction(1, 16))
    E = first_symbol_entourage(s)
    a = shadowing_test(s, D, E, 5, state_budget=1, samples=500, seed=4)
    b = shadowing_test(s, D, E, 5, state_budget=1, samples=500, seed=4)
    assert not a.exact and a == b and a.passed and a.chains == 500


def test_modulus_full_shift():
    s = full_shift(2, 4)
    base = default_base(s)
    E = metric_entourage(s, Fraction(1, 2))
    mod = shadowing_modulus(s, base, E, 8)
    assert mod.flag == "exact"
    for c in all_chains(s, mod.scale, 8):
        assert find_shadowing_points(s, c, E)
    # chains longer than the word length must be orbits; shorter ones need not
    assert mod.scale.is_trivial()
    short = shadowing_modulus(s, base, E, 3, nontrivial=True)
    assert not short.scale.is_trivial()
    for c in all_chains(s, short.scale, 3):
        assert find_shadowing_points(s, c, E)


def test_diagonal_is_always_a_modulus():
    for s in (rotation(16, 3), contraction(6), cat(4)):
        D = Entourage.diagonal(s.carrier)
        assert shadowing_test(s, D, D, 5).passed


def test_rotation_drift_is_not_shadowed():
    s = rotation(16, 3)
    D = metric_entourage(s, Fraction(2, 16))
    res = shadowing_test(s, D, Entourage.diagonal(s.carrier), 4)
    assert not res.passed
    assert verify_pseudo_orbit(s, res.counterexample, D)
    assert find_shadowing_points(s, res.counterexample, Entourage.diagonal(s.carrier)) == ()
    E = metric_entourage(s, Fraction(3, 16))
    base = UniformityBase((E, D, Entourage.diagonal(s.carrier)))
    with pytest.raises(NotFoundError):
        shadowing_modulus(s, base, E, 8, nontrivial=True)
    assert shadowing_modulus(s, base, E, 8).scale.is_trivial()


@given(random_systems(max_size=6), st.data())
def test_chain_recurrent_pairs_match_product_graph(sys, data):
    D = data.draw(random_entourages(sys.size, 0.3))
    assert np.array_equal(chain_recurrent_pairs(sys, D).relation, brute_recurrent_pairs(sys, D))


@given(random_systems(max_size=9), st.data())
def test_chain_recurrence_monotone_and_invariant(sys, data):
    D = data.draw(random_entourages(sys.size, 0.3))
    extra = data.draw(random_entourages(sys.size, 0.3))
    D2 = Entourage(sys.carrier, D.relation | extra.relation)
    R, R2 = chain_recurrent_pairs(sys, D).relation, chain_recurrent_pairs(sys, D2).relation
    assert not (R & ~R2).any()
    pts = chain_recurrent_points(sys, Entourage.diagonal(sys.carrier))
    assert pts[sys.map[pts]].all()


def test_permutations_fully_chain_recurrent():
    for s in (full_shift(2, 4), rotation(10, 3), cat(4)):
        assert chain_recurrent_pairs(s, Entourage.diagonal(s.carrier)).relation.all()


def test_contraction_recurrence_only_fixed_point():
    s = contraction(8)
    D = metric_entourage(s, Fraction(1, 256))
    R = chain_recurrent_pairs(s, D).relation
    assert R[0, 0] and R.sum() == 1


def test_block_word():
    assert block_word(((1, 2), (3, 4)), (0, 1, 0)) == (1, 2, 3, 4, 1, 2)


@pytest.fixture(scope="module")
def shift_cert():
    s = full_shift(2, 6)
    return s, entropy_certificate(s, default_base(s), 3)


def test_certificate_full_shift(shift_cert):
    s, cert = shift_cert
    assert cert.verified and cert.n == 3 and cert.l > cert.k >= 0
    assert len(cert.shadows) == 8 and len(set(cert.shadows.values())) == 8
    assert cert.bound == LOG2 / cert.l


def test_certificate_shadows_rechecked(shift_cert):
    s, cert = shift_cert
    base = default_base(s)
    E, D = base.by_name(cert.scales["E"]), base.by_name(cert.scales["D"])
    for word, w in cert.shadows.items():
        states = block_word(cert.blocks, [int(c) for c in word])
        assert verify_pseudo_orbit(s, states, D)
        traj = orbit(s, w, len(states))
        assert all(E.relation[a, b] for a, b in zip(traj, states))


def test_certificate_separation_exhaustive(shift_cert):
    s, cert = shift_cert
    E = default_base(s).by_name(cert.scales["E"])
    L = cert.n * cert.l
    pts = list(cert.shadows.values())
    pairs = list(itertools.combinations(pts, 2))
    assert len(pairs) == 28
    for a, b in pairs:
        ta, tb = orbit(s, a, L), orbit(s, b, L)
        assert any(not E.relation[p, q] for p, q in zip(ta, tb))
    times = separation_times(s, pts, E, L)
    assert (times[~np.eye(8, dtype=bool)] >= 0).all()


def test_certificate_bound_below_sep_rate(shift_cert):
    s, cert = shift_cert
    E = default_base(s).by_name(cert.scales["E"])
    t = count_table(s, E, 6, kinds=("separated",))["separated"]
    assert all(r.exact for r in t.values())
    rate = growth_rate({n: r.cardinality for n, r in t.items()}).slope
    assert 0 < cert.bound <= rate + 1e-12


def test_certificate_serializes(shift_cert):
    s, cert = shift_cert
    d = cert.to_dict(s)
    again = json.loads(json.dumps(d))
    assert again["bound_nats"] == cert.bound and len(again["shadows"]) == 8
    assert again["verification_digest"] == cert.digest()
    assert set(again["scales"]) == {"V", "E", "D", "W"}


def test_certificate_anchor_is_entropy_point(shift_cert):
    s, cert = shift_cert
    assert cert.anchor in entropy_point_set(s, default_base(s))


def test_certificate_deterministic(shift_cert):
    s, cert = shift_cert
    again = entropy_certificate(s, default_base(s), 3)
    assert again.shadows == cert.shadows and again.digest() == cert.digest()


def test_certificate_contraction_lacks_sensitivity():
    s = contraction(8)
    with pytest.raises(CertificateError) as err:
        entropy_certificate(s, default_base(s), 3)
    assert err.value.stage == "sensitivity"


def test_certificate_short_carrier_lacks_shadowing():
    # 8-step chains on 6-periodic words cannot all be shadowed
    s = full_shift(2, 6)
    with pytest.raises(CertificateError) as err:
        entropy_certificate(s, default_base(s), 4)
    assert err.value.stage == "shadowing"


def test_certificate_rejects_bad_word_length():
    s = full_shift(2, 4)
    with pytest.raises(PreconditionError):
        entropy_certificate(s, default_base(s), 0)
