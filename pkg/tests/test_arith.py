import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twisted_k3.arith import (
    NotCoprimeError,
    crt_combine,
    factorize,
    is_square_mod,
    is_unit_square_mod,
    mod_inv,
    quadratic_root_classes,
    solve_quadratic_congruence,
    split_r,
    xgcd,
)


def trial_division(n):
    out, p = [], 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def brute_roots(a, b, m):
    x = np.arange(m, dtype=np.int64)
    return np.nonzero(((a % m) * (x * x % m) - b) % m == 0)[0]


# --- factorize ---

def test_factorize_examples():
    assert factorize(1) == []
    assert factorize(686) == trial_division(686) == [(2, 1), (7, 3)]
    assert factorize(8) == [(2, 3)]


def test_factorize_rejects_nonpositive():
    with pytest.raises(ValueError):
        factorize(0)


def test_factorize_reconstructs_up_to_a_million():
    for n in range(1, 10**6 + 1):
        f = factorize(n)
        prod = 1
        for p, e in f:
            prod *= p ** e
        assert prod == n


def test_factorize_matches_trial_division_sample():
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(1, 10**9)
        assert factorize(n) == trial_division(n)


def test_factorize_large_semiprime_uses_rho():
    p, q = 1_000_003, 1_000_033
    assert factorize(p * q) == [(p, 1), (q, 1)]
    assert factorize(p * p * 12) == [(2, 2), (3, 1), (p, 2)]


@given(st.integers(min_value=1, max_value=10**12))
@settings(max_examples=200, deadline=None)
def test_factorization_shape(n):
    f = factorize(n)
    primes = [p for p, _ in f]
    assert primes == sorted(set(primes))
    assert all(e >= 1 for _, e in f)
    assert math.prod(p ** e for p, e in f) == n


# --- gcd / inverse / CRT ---

@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_xgcd_bezout(a, b):
    g, x, y = xgcd(a, b)
    assert g == math.gcd(a, b)
    assert a * x + b * y == g


def test_mod_inv():
    assert mod_inv(3, 7) * 3 % 7 == 1
    assert mod_inv(5, 1) == 0
    with pytest.raises(ValueError):
        mod_inv(4, 8)


def enumerate_crt(residues):
    M = math.prod(m for _, m in residues)
    return [x for x in range(M) if all((x - v) % m == 0 for v, m in residues)]


def test_crt_examples():
    assert crt_combine([(1, 3), (2, 5)]) == (7, 15) == (enumerate_crt([(1, 3), (2, 5)])[0], 15)
    assert crt_combine([(0, 1)]) == (0, 1)
    assert crt_combine([(3, 4), (5, 9)]) == (23, 36)
    assert enumerate_crt([(3, 4), (5, 9)]) == [23]


def test_crt_rejects_shared_factor_with_witness():
    with pytest.raises(NotCoprimeError) as info:
        crt_combine([(1, 4), (3, 6)])
    assert info.value.gcd == 2


@given(st.lists(st.tuples(st.integers(-1000, 1000), st.sampled_from([1, 2, 3, 5, 7, 11, 13, 17])),
                min_size=1, max_size=4, unique_by=lambda t: t[1]))
def test_crt_reduces_to_each_input(residues):
    x, M = crt_combine(residues)
    assert M == math.prod(m for _, m in residues)
    assert 0 <= x < M
    for v, m in residues:
        assert (x - v) % m == 0


# --- quadratic congruences ---

def test_congruence_examples():
    s = solve_quadratic_congruence(3, -5, 16)
    assert s.solvable and s.root == 3 and s.check()
    assert (3 * 9 + 5) % 16 == 0
    assert not solve_quadratic_congruence(1, 5, 16).solvable
    assert sorted({x * x % 16 for x in range(16)}) == [0, 1, 4, 9]
    s = solve_quadratic_congruence(1, 0, 7)
    assert s.solvable and s.root == 0


def test_congruence_exhaustive_small_moduli():
    for m in range(1, 70):
        for a in range(-2, m + 2):
            for b in range(m):
                s = solve_quadratic_congruence(a, b, m)
                roots = brute_roots(a, b, m)
                assert s.solvable == (len(roots) > 0), (a, b, m)
                if s.solvable:
                    assert s.root == roots[0] and s.check()


def test_root_classes_cover_exactly_the_roots():
    rng = random.Random(3)
    for _ in range(400):
        m = rng.randint(1, 3000)
        a = rng.randrange(m) if rng.random() < 0.7 else m * rng.randint(0, 3)
        b = a * rng.randrange(m) ** 2 if rng.random() < 0.5 else rng.randrange(m)
        covered = set()
        for r, M in quadratic_root_classes(a, b, m):
            covered.update(range(r % M, m, M))
        assert covered == set(brute_roots(a, b, m).tolist()), (a, b, m)


def test_is_square_mod_examples():
    assert is_square_mod(-3, 4)
    assert not is_square_mod(-3, 8)
    assert {x * x % 8 for x in range(8)} == {0, 1, 4}
    assert is_square_mod(0, 1)
    assert not is_unit_square_mod(4, 8)
    assert is_unit_square_mod(9, 16)


# --- split_r ---

def test_split_r_examples():
    assert split_r(2, False) == (1, 1, 1)
    assert split_r(7, False) == (0, 7, 1)
    assert split_r(6, True) == (1, 1, 3)


def test_split_r_rejects_three_in_cyclic_case():
    with pytest.raises(ValueError):
        split_r(6, False)


@given(st.integers(1, 10**6))
@settings(max_examples=300)
def test_split_r_properties(r):
    three = r % 3 == 0
    s, q, r0 = split_r(r, three)
    assert (1 << s) * q * r0 == r
    assert math.gcd(q, 6) == 1
    assert all(p % 3 == 1 for p, _ in factorize(q))
    assert r0 % 2 == 1
    for p, _ in factorize(r0):
        assert p % 3 == 2 or (three and p == 3)
