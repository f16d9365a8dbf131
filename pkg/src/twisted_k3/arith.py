"""Exact integer and modular arithmetic.

Factorization, CRT, and the quadratic congruence solver used by every
existence construction in the package.  All integers are Python ints, so
nothing overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, List, Sequence, Tuple

TRIAL_DIVISION_LIMIT = 10**6

Factorization = List[Tuple[int, int]]


class NotCoprimeError(ValueError):
    """Raised by :func:`crt_combine` when two moduli share a factor."""

    def __init__(self, m1: int, m2: int):
        self.moduli = (m1, m2)
        self.gcd = math.gcd(m1, m2)
        super().__init__(f"moduli {m1} and {m2} are not coprime (gcd {self.gcd})")


def xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) and g >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def mod_inv(a: int, m: int) -> int:
    if m == 1:
        return 0
    g, x, _ = xgcd(a % m, m)
    if g != 1:
        raise ValueError(f"{a} is not invertible modulo {m}")
    return x % m


# --- factorization ---------------------------------------------------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_probable_prime(n: int) -> bool:
    # Deterministic for n < 3.3e24 with these bases.
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    c = 1
    while True:
        x = y = 2
        g = 1
        while g == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            g = math.gcd(abs(x - y), n)
        if g != n:
            return g
        c += 1


def _split(n: int, out: dict) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    f = _pollard_rho(n)
    _split(f, out)
    _split(n // f, out)


def factorize(n: int) -> Factorization:
    """Prime factorization of ``n >= 1`` as ascending (prime, exponent) pairs.

    Trial division up to 10**6, Pollard rho for whatever cofactor is left.
    """
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    found: dict = {}
    p = 2
    while p * p <= n and p <= TRIAL_DIVISION_LIMIT:
        while n % p == 0:
            found[p] = found.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        if p * p > n:
            found[n] = found.get(n, 0) + 1
        else:
            _split(n, found)
    return sorted(found.items())


def prime_divisors(n: int) -> List[int]:
    return [p for p, _ in factorize(abs(n))] if n else []


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def gcd_all(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = math.gcd(g, v)
    return g


# --- CRT ---------------------------------------------------------------------

def crt_combine(residues: Sequence[Tuple[int, int]]) -> Tuple[int, int]:
    """Combine (value, modulus) pairs with pairwise coprime moduli.

    Returns (x, M) with M the product of the moduli and 0 <= x < M.
    Raises NotCoprimeError naming the first offending pair.
    """
    x, m = 0, 1
    for value, mod in residues:
        if mod < 1:
            raise ValueError(f"modulus must be >= 1, got {mod}")
        g, inv, _ = xgcd(m, mod)
        if g != 1:
            raise NotCoprimeError(m, mod)
        # x + m*t = value (mod mod)
        t = ((value - x) * inv) % mod
        x += m * t
        m *= mod
        x %= m
    return x, m


# --- quadratic congruences ---------------------------------------------------

@dataclass(frozen=True)
class CongruenceSolution:
    """Outcome of solving a*x^2 = b (mod modulus)."""

    a: int
    b: int
    modulus: int
    solvable: bool
    root: int | None = None

    def check(self) -> bool:
        if not self.solvable:
            return self.root is None
        return 0 <= self.root < self.modulus and (
            self.a * self.root * self.root - self.b) % self.modulus == 0


def _tonelli_shanks(c: int, p: int) -> int:
    """A square root of the quadratic residue c modulo the odd prime p."""
    c %= p
    if c == 0:
        return 0
    if p % 4 == 3:
        return pow(c, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, cz, t, x = s, pow(z, q, p), pow(c, q, p), pow(c, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        bb = pow(cz, 1 << (m - i - 1), p)
        m, cz = i, bb * bb % p
        t, x = t * cz % p, x * bb % p
    return x


def _unit_sqrt_classes(c: int, p: int, e: int) -> List[Tuple[int, int]]:
    """Root classes of y^2 = c (mod p^e) for a p-adic unit c.

    Each class (r, M) means every y = r (mod M) is a root.
    """
    pe = p ** e
    c %= pe
    if p == 2:
        if e == 1:
            return [(1, 2)]
        if e == 2:
            return [(1, 2)] if c % 4 == 1 else []
        if c % 8 != 1:
            return []
        # lift a root of y^2 = c from mod 8 upward; classes are +-y mod 2^(e-1)
        y = 1
        for k in range(3, e):
            if (y * y - c) % (1 << (k + 1)):
                y += 1 << (k - 1)
        half = 1 << (e - 1)
        return sorted({(y % half, half), ((-y) % half, half)})
    if pow(c % p, (p - 1) // 2, p) != 1:
        return []
    y = _tonelli_shanks(c, p)
    pk = p
    for _ in range(1, e):
        pk *= p
        # Newton step: y <- y - (y^2 - c)/(2y)
        y = (y - (y * y - c) * pow(2 * y, -1, pk)) % pk
    return sorted({(y % pe, pe), ((-y) % pe, pe)})


def _prime_power_classes(a: int, b: int, p: int, e: int) -> List[Tuple[int, int]]:
    """Root classes of a*x^2 = b (mod p^e)."""
    pe = p ** e
    a %= pe
    b %= pe
    if a == 0:
        return [(0, 1)] if b == 0 else []
    va = valuation(a, p)
    if b % p ** va:
        return []
    a //= p ** va
    b //= p ** va
    E = e - va
    pE = p ** E
    c = b * mod_inv(a, pE) % pE
    if c == 0:
        half = p ** ((E + 1) // 2)
        return [(0, half)]
    vc = valuation(c, p)
    if vc % 2:
        return []
    h = vc // 2
    scale = p ** h
    ys = _unit_sqrt_classes(c // p ** vc, p, E - vc)
    # x = p^h * y, y known modulo M  ->  x known modulo p^h * M
    return sorted({(scale * r % (scale * M), scale * M) for r, M in ys})


def quadratic_root_classes(a: int, b: int, m: int) -> List[Tuple[int, int]]:
    """All solutions of a*x^2 = b (mod m) as a list of residue classes."""
    if m < 1:
        raise ValueError(f"modulus must be >= 1, got {m}")
    local = [_prime_power_classes(a, b, p, e) for p, e in factorize(m)]
    if any(not cls for cls in local):
        return []
    return [crt_combine(combo) for combo in product(*local)]


def solve_quadratic_congruence(a: int, b: int, m: int) -> CongruenceSolution:
    """Smallest x in [0, m) with a*x^2 = b (mod m), if one exists.

    >>> solve_quadratic_congruence(3, -5, 16).root
    3
    >>> solve_quadratic_congruence(1, 5, 16).solvable
    False
    """
    classes = quadratic_root_classes(a, b, m)
    if not classes:
        return CongruenceSolution(a, b, m, False)
    root = min(r % M for r, M in classes)
    return CongruenceSolution(a, b, m, True, root)


def is_square_mod(a: int, m: int) -> bool:
    return solve_quadratic_congruence(1, a, m).solvable


def is_unit_square_mod(a: int, m: int) -> bool:
    """True iff a is a unit modulo m and a square modulo m."""
    return math.gcd(a, m) == 1 and is_square_mod(a, m)


def split_r(r: int, three_in_r0: bool) -> Tuple[int, int, int]:
    """Write r = 2^s * q * r0.

    q collects the prime powers of r with prime = 1 (mod 3); r0 the remaining
    odd prime powers.  With ``three_in_r0`` false, 3 must not divide r.
    """
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    if not three_in_r0 and r % 3 == 0:
        raise ValueError(f"r = {r} is divisible by 3, not allowed in the cyclic case")
    s, q, r0 = 0, 1, 1
    for p, e in factorize(r):
        if p == 2:
            s = e
        elif p % 3 == 1:
            q *= p ** e
        else:
            r0 *= p ** e
    return s, q, r0
