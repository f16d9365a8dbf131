"""Finite quadratic forms on discriminant groups.

Two routes produce forms here: closed formulas for Disc T_w and
Disc K_{d'}^perp (``disc_form_Tw``, ``disc_form_K``) and a direct computation
from any even Gram matrix (``disc_form_from_gram``).  ``qform_iso`` decides
isomorphism for forms with at most two generators by splitting into
p-primary parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Sequence, Tuple

from .arith import factorize, gcd_all, quadratic_root_classes, solve_quadratic_congruence
from .lattice import DiscGroup, smith_decomposition, smith_normal_form
from .wclass import WClass


@dataclass(frozen=True, eq=False)
class QMod2Z:
    """A rational number modulo 2Z, stored as its representative in [0, 2)."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value) % 2)

    def __eq__(self, other):
        if isinstance(other, QMod2Z):
            return self.value == other.value
        if isinstance(other, (int, Fraction)):
            return self.value == Fraction(other) % 2
        return NotImplemented

    def __hash__(self):
        return hash(("QMod2Z", self.value))

    def __add__(self, other):
        other = other.value if isinstance(other, QMod2Z) else Fraction(other)
        return QMod2Z(self.value + other)

    __radd__ = __add__

    def __neg__(self):
        return QMod2Z(-self.value)

    def __sub__(self, other):
        return self + (-other if isinstance(other, QMod2Z) else -Fraction(other))

    def __mul__(self, k):
        if isinstance(k, Fraction) and k.denominator != 1:
            raise ValueError("only integer multiples are well defined modulo 2")
        return QMod2Z(self.value * int(k))

    __rmul__ = __mul__

    def mod1(self) -> Fraction:
        return self.value % 1

    def __str__(self):
        return str(self.value)

    def __repr__(self):
        return f"QMod2Z({self.value})"


def _mod1(x) -> Fraction:
    return Fraction(x) % 1


@dataclass(frozen=True)
class FiniteQuadraticForm:
    """Orthogonal-or-not presentation of (Disc L, q).

    The group is the direct sum of Z/orders[i] on the listed generators.
    ``q`` holds q(g_i) in Q/2Z, ``b`` the bilinear values b(g_i, g_j) in Q/Z.
    """

    labels: Tuple[str, ...]
    orders: Tuple[int, ...]
    q: Tuple[QMod2Z, ...]
    b: Tuple[Tuple[Fraction, ...], ...]

    @classmethod
    def orthogonal(cls, labels, orders, qvalues) -> "FiniteQuadraticForm":
        qs = tuple(QMod2Z(v) for v in qvalues)
        n = len(qs)
        b = tuple(tuple(qs[i].mod1() if i == j else Fraction(0) for j in range(n))
                  for i in range(n))
        return cls(tuple(labels), tuple(orders), qs, b)

    @property
    def rank(self) -> int:
        return len(self.orders)

    def group(self) -> DiscGroup:
        diag = [[o if i == j else 0 for j in range(self.rank)] for i, o in enumerate(self.orders)]
        if not diag:
            return DiscGroup(())
        return smith_normal_form(diag).normalized()

    def value(self, coeffs: Sequence[int]) -> QMod2Z:
        """q(sum c_i g_i)."""
        total = Fraction(0)
        for i, ci in enumerate(coeffs):
            if not ci:
                continue
            total += ci * ci * self.q[i].value
            for j in range(i + 1, self.rank):
                total += 2 * ci * coeffs[j] * self.b[i][j]
        return QMod2Z(total)

    def bilinear(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        return _mod1(sum(xi * yj * self.b[i][j]
                         for i, xi in enumerate(x) for j, yj in enumerate(y)))

    def well_defined(self) -> bool:
        """Every generator of order N has N*q integral and N^2*q = 0 mod 2;
        b is symmetric, killed by the orders, and polarizes q."""
        for i, N in enumerate(self.orders):
            v = self.q[i].value
            if (N * v).denominator != 1 or (N * N * v) % 2 != 0:
                return False
            if self.b[i][i] != self.q[i].mod1():
                return False
            for j in range(self.rank):
                if self.b[i][j] != self.b[j][i] or (N * self.b[i][j]).denominator != 1:
                    return False
        for i in range(self.rank):
            for j in range(i + 1, self.rank):
                ei = [int(t == i) for t in range(self.rank)]
                ej = [int(t == j) for t in range(self.rank)]
                both = [a + c for a, c in zip(ei, ej)]
                lhs = self.value(both) - self.q[i] - self.q[j]
                if lhs != QMod2Z(2 * self.b[i][j]):
                    return False
        return True

    def drop_trivial(self) -> "FiniteQuadraticForm":
        keep = [i for i, o in enumerate(self.orders) if o > 1]
        return FiniteQuadraticForm(
            tuple(self.labels[i] for i in keep),
            tuple(self.orders[i] for i in keep),
            tuple(self.q[i] for i in keep),
            tuple(tuple(self.b[i][j] for j in keep) for i in keep))

    def describe(self) -> List[dict]:
        return [{"label": lab, "order": o, "q": str(qv)}
                for lab, o, qv in zip(self.labels, self.orders, self.q)]


class UnclassifiedStructure(ValueError):
    """Disc T_w is neither cyclic nor Z/(r^2 d/3) x Z/3."""

    def __init__(self, c: WClass, factors: Tuple[int, ...]):
        self.wclass = c
        self.factors = factors
        super().__init__(f"unclassified structure for {c}: invariant factors {factors}")


class UnsupportedForm(ValueError):
    pass


class Structure(str, Enum):
    CYCLIC = "cyclic"
    THREE_TIMES_CYCLIC = "three_times_cyclic"
    OTHER = "other"


# --- Disc T_w by formula -----------------------------------------------------

def order_of_w(c: WClass) -> int:
    d, r, n, k = c.as_tuple()
    N = r * r * d
    return math.lcm(N // math.gcd(N, c.disc), r * d // math.gcd(r * d, k), r)


def wsquare(c: WClass) -> QMod2Z:
    """q([w]) = (2nd - k^2)/(r^2 d) modulo 2."""
    return QMod2Z(Fraction(c.disc, c.r * c.r * c.d))


def structure_of_disc(c: WClass) -> Structure:
    g = math.gcd(c.r, c.disc)
    if g == 1:
        return Structure.CYCLIC
    if g == 3 and (c.d % 3 or (c.n * c.d) % 9):
        return Structure.THREE_TIMES_CYCLIC
    return Structure.OTHER


def normalized_pairs(c: WClass) -> Iterator[WClass]:
    """Representatives (n + j r, k + p r), 0 <= p < d, 0 <= j < 3, on which
    [w] generates the big cyclic factor, in search order.

    Shifting k by multiples of r does not change the class; shifting n by r
    does not change T_w.  Cyclic case: gcd(d, k') = gcd(d, k, r) and
    gcd(r^2 d, 2nd' - k'^2) = 1.  Three-times-cyclic case: ord[w] = r^2 d/3
    and, when 3 does not divide d, 9 does not divide 2nd' - k'^2.  Both
    conditions are periodic in p with period dividing d, so the bounded
    search sees every residue.
    """
    d, r, n, k = c.as_tuple()
    st = structure_of_disc(c)
    if st is Structure.OTHER:
        raise UnclassifiedStructure(c, invariant_factors(c))
    found = False
    if st is Structure.CYCLIC:
        s = gcd_all((d, k, r))
        for p in range(d):
            k2 = k + p * r
            if math.gcd(d, k2) == s and math.gcd(r * r * d, 2 * n * d - k2 * k2) == 1:
                found = True
                for j in range(3):
                    yield WClass(d, r, n + j * r, k2)
    else:
        target = r * r * d // 3
        for p in range(d):
            for j in range(3):
                c2 = WClass(d, r, n + j * r, k + p * r)
                if order_of_w(c2) != target:
                    continue
                if d % 3 and c2.disc % 9 == 0:
                    continue
                found = True
                yield c2
    if not found:
        raise AssertionError(f"no normalizing shift for {c}")


def normalized_pair(c: WClass) -> WClass:
    """The first of ``normalized_pairs``: smallest shift p, then smallest j."""
    return next(normalized_pairs(c))


def order3_value(c2: WClass) -> Fraction:
    """q on the order-3 generator for a normalized three-times-cyclic pair."""
    if c2.d % 3:
        return Fraction(-c2.d * c2.disc, 9)
    return Fraction(-c2.d, 9)


def invariant_factors(c: WClass) -> Tuple[int, ...]:
    from .lattice import invariant_factors_formula
    return invariant_factors_formula(c).factors


def disc_form_Tw(c: WClass) -> FiniteQuadraticForm:
    """(Disc T_w, q) on explicit generators.

    Cyclic: one generator t = [w'] of order r^2 d for the normalized pair.
    Otherwise (1,0) = [w'] of order r^2 d/3 and (0,1) of order 3, orthogonal,
    with q(0,1) = -(d/9)(2nd - k^2) if 3 does not divide d, else -d/9.
    """
    c2 = normalized_pair(c)
    d, r = c.d, c.r
    N = r * r * d
    if structure_of_disc(c) is Structure.CYCLIC:
        return FiniteQuadraticForm.orthogonal(("t",), (N,), (wsquare(c2).value,))
    return FiniteQuadraticForm.orthogonal(("(1,0)", "(0,1)"), (N // 3, 3),
                                          (wsquare(c2).value, order3_value(c2)))


def disc_form_K(dprime: int) -> FiniteQuadraticForm:
    """Hassett's form on Disc K_{d'}^perp.

    d' = 2 (mod 6): Z/d' with q(u) = (1 - 2d')/(3d').
    d' = 0 (mod 6): (1,0) of order d'/3 with q = 3/d' and (0,1) of order 3
    with q = -2/3, orthogonal.
    """
    if dprime < 1 or dprime % 6 not in (0, 2):
        raise ValueError(f"d' = {dprime} is not 0 or 2 mod 6: C_{dprime} is empty")
    if dprime % 6 == 2:
        return FiniteQuadraticForm.orthogonal(("u",), (dprime,),
                                              (Fraction(1 - 2 * dprime, 3 * dprime),))
    return FiniteQuadraticForm.orthogonal(("(1,0)", "(0,1)"), (dprime // 3, 3),
                                          (Fraction(3, dprime), Fraction(-2, 3)))


def disc_form_from_gram(G: Sequence[Sequence[int]]) -> FiniteQuadraticForm:
    """(Disc L, q_L) computed directly from an even nonsingular Gram matrix.

    With U G V = D in Smith form, the columns of V divided by the diagonal
    entries give a basis of L^v whose classes generate L^v/L.
    """
    n = len(G)
    if any(G[i][i] % 2 for i in range(n)):
        raise ValueError("Gram matrix is not even")
    _, D, V = smith_decomposition(G)
    gens, orders = [], []
    for i in range(n):
        if D[i][i] == 0:
            raise ValueError("Gram matrix is singular")
        if D[i][i] > 1:
            gens.append([Fraction(V[j][i], D[i][i]) for j in range(n)])
            orders.append(D[i][i])

    def pair(x, y):
        return sum(x[i] * G[i][j] * y[j] for i in range(n) for j in range(n)
                   if G[i][j] and x[i] and y[j])

    qs = tuple(QMod2Z(pair(g, g)) for g in gens)
    b = tuple(tuple(_mod1(pair(g, h)) for h in gens) for g in gens)
    labels = tuple(f"g{i + 1}" for i in range(len(gens)))
    return FiniteQuadraticForm(labels, tuple(orders), qs, b)


# --- isomorphism -------------------------------------------------------------

@dataclass(frozen=True)
class IsoResult:
    """Verdict of ``qform_iso``.

    ``unit`` is set when both groups are cyclic: x with x^2 q1(t) = q2(u).
    ``local`` maps each prime to its witness (a unit, or images of the
    p-part generators as coefficient tuples in the second form).
    """

    isomorphic: bool
    unit: int | None = None
    local: Dict[int, object] = field(default_factory=dict)
    reason: str = ""

    def __bool__(self):
        return self.isomorphic


def _as_cyclic(F: FiniteQuadraticForm):
    """(N, q) for a cyclic form, merging two generators of coprime orders."""
    if F.rank == 0:
        return 1, QMod2Z(0)
    if F.rank == 1:
        return F.orders[0], F.q[0]
    if F.rank == 2 and math.gcd(*F.orders) == 1:
        return F.orders[0] * F.orders[1], F.value((1, 1))
    return None


def _p_part(F: FiniteQuadraticForm, p: int):
    """Generators of the p-primary part: list of (order, q, b-row) in a small form."""
    idx, orders, mult = [], [], []
    for i, N in enumerate(F.orders):
        pa = 1
        while N % (pa * p) == 0:
            pa *= p
        if pa > 1:
            idx.append(i)
            orders.append(pa)
            mult.append(N // pa)
    qs = tuple(F.q[i] * (m * m) for i, m in zip(idx, mult))
    b = tuple(tuple(_mod1(mi * mj * F.b[i][j]) for j, mj in zip(idx, mult))
              for i, mi in zip(idx, mult))
    return FiniteQuadraticForm(tuple(F.labels[i] for i in idx), tuple(orders), qs, b)


def _unit_solution(a1: int, a2: int, N: int):
    """Smallest unit x mod N with a1 x^2 = a2 (mod 2N), or None."""
    if N == 1:
        return 1
    sol = solve_quadratic_congruence(a1, a2, 2 * N)
    if sol.solvable and math.gcd(sol.root, N) == 1:
        return sol.root % N
    primes = [p for p, _ in factorize(N)]
    for r, M in quadratic_root_classes(a1, a2, 2 * N):
        # look for a unit in the class r mod M
        for t in range(2 * N // M):
            x = r + t * M
            if all(x % p for p in primes):
                return x % N
    return None


def _elem_order(coeffs, orders) -> int:
    return math.lcm(*[o // math.gcd(c, o) for c, o in zip(coeffs, orders)]) if orders else 1


def _rank2_iso(A: FiniteQuadraticForm, B: FiniteQuadraticForm, p: int):
    """Exhaustive search for an isometry of rank-2 p-groups; images or None."""
    order = sorted(range(2), key=lambda i: -A.orders[i])
    P = [A.orders[i] for i in order]
    qa = [A.q[i] for i in order]
    bab = A.b[order[0]][order[1]]
    elems = list(product(range(B.orders[0]), range(B.orders[1])))
    info = {e: (_elem_order(e, B.orders), B.value(e)) for e in elems}
    c1 = [e for e in elems if info[e] == (P[0], qa[0])]
    c2 = [e for e in elems if info[e] == (P[1], qa[1])]

    def socle_coords(e, P_e):
        # element of order p obtained from e, in coordinates of B's socle basis
        m = P_e // p
        return tuple((m * c) // (o // p) % p for c, o in zip(e, B.orders))

    for y1 in c1:
        s1 = socle_coords(y1, P[0])
        for y2 in c2:
            if B.bilinear(y1, y2) != bab:
                continue
            s2 = socle_coords(y2, P[1])
            if (s1[0] * s2[1] - s1[1] * s2[0]) % p:
                images = [None, None]
                images[order[0]], images[order[1]] = y1, y2
                return tuple(images)
    return None


def qform_iso(F1: FiniteQuadraticForm, F2: FiniteQuadraticForm) -> IsoResult:
    """Decide whether two finite quadratic forms are isometric.

    Both forms must have at most two nontrivial generators.  Cyclic groups
    are decided by one quadratic congruence; otherwise each p-primary part is
    compared separately, exhaustively when it has rank two.
    """
    A, B = F1.drop_trivial(), F2.drop_trivial()
    if A.rank > 2 or B.rank > 2:
        raise UnsupportedForm(f"forms with more than two generators are not supported "
                              f"({A.orders} vs {B.orders})")
    gA, gB = A.group(), B.group()
    if gA != gB:
        return IsoResult(False, reason=f"groups differ: {gA.factors} vs {gB.factors}")
    ca, cb = _as_cyclic(A), _as_cyclic(B)
    if ca is not None and cb is not None:
        N = ca[0]
        a1, a2 = N * ca[1].value, N * cb[1].value
        x = _unit_solution(int(a1), int(a2), N)
        if x is None:
            return IsoResult(False, reason=f"no unit x with x^2 * {ca[1]} = {cb[1]} mod 2")
        return IsoResult(True, unit=x)
    local: Dict[int, object] = {}
    for p, _ in factorize(gA.order):
        Ap, Bp = _p_part(A, p), _p_part(B, p)
        if sorted(Ap.orders) != sorted(Bp.orders):
            return IsoResult(False, reason=f"{p}-parts differ")
        if Ap.rank == 1:
            P = Ap.orders[0]
            x = _unit_solution(int(P * Ap.q[0].value), int(P * Bp.q[0].value), P)
            if x is None:
                return IsoResult(False, reason=f"{p}-parts not isometric")
            local[p] = x
        else:
            imgs = _rank2_iso(Ap, Bp, p)
            if imgs is None:
                return IsoResult(False, reason=f"{p}-parts not isometric")
            local[p] = imgs
    return IsoResult(True, local=local)
