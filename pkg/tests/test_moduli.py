import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from twisted_k3.arith import factorize
from twisted_k3.discform import Structure, disc_form_Tw, qform_iso, structure_of_disc
from twisted_k3.lattice import eichler_invariants, lambda_d, twist_vector
from twisted_k3.moduli import (
    canonicalize_wclass,
    component_census,
    grid,
    merge_rule_k_zero,
    order_in_dual_quotient,
    satisfies_star2,
    square_obstruction,
    star2_reason,
    star2_via_reciprocity,
    star2prime_decompositions,
)
from twisted_k3.wclass import WClass


def star2_by_definition(d):
    if d <= 0 or d % 2 or d % 4 == 0 or d % 9 == 0:
        return False
    return all(p == 2 or p % 3 != 2 for p, _ in factorize(d))


# --- (**) and (**') ---

def test_star2_examples():
    assert satisfies_star2(14)
    assert not satisfies_star2(8)
    assert satisfies_star2(2)
    assert star2_reason(8) == "4 divides d"
    assert "5" in star2_reason(10)


def test_star2_matches_definition():
    for d in range(-4, 3000):
        assert satisfies_star2(d) == star2_by_definition(d)


def test_reciprocity_examples():
    assert star2_via_reciprocity(2)
    assert star2_via_reciprocity(6)
    assert not star2_via_reciprocity(10)
    assert not star2_via_reciprocity(18)


def test_reciprocity_four_mod_six_is_false():
    for d in range(4, 2000, 6):
        assert not star2_via_reciprocity(d) and not satisfies_star2(d)
    with pytest.raises(ValueError):
        star2_via_reciprocity(7)


def test_star2prime_examples():
    assert star2prime_decompositions(8) == [(2, 2)]
    assert star2prime_decompositions(686) == [(686, 1), (14, 7)]
    assert star2prime_decompositions(7) == []


def test_star2prime_matches_divisor_sweep():
    for dp in range(1, 2000):
        brute = [(dp // (r * r), r) for r in range(1, dp + 1)
                 if dp % (r * r) == 0 and star2_by_definition(dp // (r * r))]
        assert star2prime_decompositions(dp) == brute


# --- canonical classes ---

def test_canonicalize_examples():
    assert canonicalize_wclass(WClass(2, 2, 3, 5)) == WClass(2, 2, 1, 1)
    assert canonicalize_wclass(WClass(2, 2, 0, 0)) == WClass(2, 2, 0, 0)
    assert canonicalize_wclass(WClass(14, 7, 9, 10)) == WClass(14, 7, 2, 3)


@given(st.integers(1, 40), st.integers(1, 12), st.integers(-200, 200), st.integers(-200, 200))
@settings(max_examples=400, deadline=None)
def test_canonicalize_range_idempotent_invariant(h, r, n, k):
    c = WClass(2 * h, r, n, k)
    cc = canonicalize_wclass(c)
    assert 0 <= cc.n < r and 0 <= cc.k < math.gcd(r, 2 * h)
    assert canonicalize_wclass(cc) == cc
    assert square_obstruction(c, cc) == "inconclusive"


def _primitive(v):
    v = v * v.lattice.gram[20][20]  # clear the 1/d on l'_d
    assert v.is_integral
    return v / v.content()


def test_canonical_class_reached_by_lattice_moves():
    # independent route: for a dual shift X = r w + r (t/d) l'_d of the input
    # (same element of the quotient), take the f1 shift Y = r w' + r u f1 of
    # the canonical output with the same square, then compare the full
    # Eichler data of the primitive integral multiples
    rng = random.Random(12)
    for _ in range(150):
        d = 2 * rng.randint(1, 12)
        r = rng.randint(1, 8)
        c = WClass(d, r, rng.randint(0, 15), rng.randint(0, 15))
        cc = canonicalize_wclass(c)
        L = lambda_d(d)
        Y0 = twist_vector(cc) * r
        found = False
        for t in range(-200, 201):
            X = twist_vector(c) * r + L.vector(ld=Fraction(r * t, d))
            u = (X.square() - Y0.square()) / (2 * r)
            if u.denominator != 1:
                continue
            Y = Y0 + L.vector(f1=r * u)
            if eichler_invariants(_primitive(X)) == eichler_invariants(_primitive(Y)):
                found = True
                break
        assert found, (c, cc)


def test_every_cell_has_order_r():
    for r in range(1, 13):
        for d in (2, 6, 12, 14, 30):
            for c in grid(d, r):
                assert order_in_dual_quotient(c) == r


# --- obstruction and merges ---

def test_square_obstruction_examples():
    a, b = WClass(14, 7, 0, 1), WClass(14, 7, 1, 3)
    assert a.disc == -1 and b.disc == 19
    assert square_obstruction(a, b) == "obstructed"
    assert square_obstruction(a, a) == "inconclusive"
    assert square_obstruction(WClass(2, 2, 0, 0), WClass(2, 2, 1, 0)) == "inconclusive"
    with pytest.raises(ValueError):
        square_obstruction(WClass(2, 2, 0, 0), WClass(2, 4, 0, 0))


def test_merge_rule_examples():
    assert merge_rule_k_zero(WClass(2, 2, 0, 0), WClass(2, 2, 1, 0))
    c = WClass(14, 7, 0, 1)
    assert merge_rule_k_zero(c, c)
    assert not merge_rule_k_zero(c, WClass(14, 7, 1, 3))


def test_obstruction_implies_no_merge():
    for d in range(2, 31, 2):
        for r in range(2, 7):
            cells = grid(d, r)
            for a in cells:
                for b in cells:
                    if square_obstruction(a, b) == "obstructed":
                        assert not merge_rule_k_zero(a, b)


# --- census ---

def test_census_examples():
    rep = component_census(2, 2)
    assert len(rep.representatives) == 4 and rep.upper_bound == 4
    assert rep.group_of(0, 0) == rep.group_of(1, 0)
    assert rep.group_count <= 3
    assert component_census(2, 1).group_count == 1
    rep = component_census(14, 7)
    assert len(rep.representatives) == 49 and rep.upper_bound == 49
    assert rep.group_of(0, 1) != rep.group_of(1, 3)


def test_census_merge_certificates_hold_in_the_lattice():
    # each merge names two dual shifts; rebuild both vectors with exact
    # LatticeVector arithmetic and compare their Eichler data
    for d, r in ((2, 2), (6, 3), (10, 4), (14, 7), (12, 6)):
        rep = component_census(d, r)
        L = lambda_d(d)
        for m in rep.merges:
            vecs = []
            for (n, k), sh in zip(m["cells"], (m["shift_1"], m["shift_2"])):
                a1, b1, a2, b2, g = sh
                lam = L.vector(e1=a1, f1=b1, e2=a2, f2=b2, ld=Fraction(g, d))
                x = (twist_vector(WClass(d, r, n, k)) + lam) * (r * d)
                assert x.is_integral
                vecs.append(x)
            (x, y) = vecs
            assert x.content() == y.content()
            assert eichler_invariants(x / x.content()) == eichler_invariants(y / y.content())


def test_census_groups_are_sound():
    # merged cells never differ in invariants, and every separated pair of
    # groups with differing signatures carries a certificate
    for d in range(2, 41, 2):
        for r in range(1, 7):
            rep = component_census(d, r)
            assert rep.lower_bound <= rep.group_count <= rep.upper_bound
            for g in rep.groups:
                cells = [WClass(d, r, n, k) for n, k in g]
                assert len({c.disc % r for c in cells}) == 1
                sts = {structure_of_disc(c) for c in cells}
                assert len(sts) == 1
                if sts != {Structure.OTHER}:
                    F0 = disc_form_Tw(cells[0])
                    assert all(qform_iso(F0, disc_form_Tw(c)) for c in cells[1:])
            sig = [(tuple(s["factors"]), s["square_mod_r"], s["form_class"])
                   for s in rep.signatures]
            certified = {tuple(c["groups"]) for c in rep.separations}
            for i in range(len(sig)):
                for j in range(i + 1, len(sig)):
                    if sig[i] != sig[j]:
                        assert (i, j) in certified


def test_census_is_deterministic():
    a, b = component_census(14, 7), component_census(14, 7)
    assert a.groups == b.groups and a.merges == b.merges and a.separations == b.separations
