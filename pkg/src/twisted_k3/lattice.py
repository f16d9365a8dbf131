"""Integer lattices with fixed bases.

Gram matrices are tuples of int tuples.  Vectors carry exact Fraction
coordinates over a named ambient lattice, so dual and rational vectors
(twists w, B-fields) live in the same type as integral ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .arith import gcd_all
from .constants import (E8_MINUS, EXTENDED_LABELS, LAMBDA_D_LABELS, U_GRAM,
                        block_diagonal, lambda_d_gram)
from .wclass import WClass

Matrix = Tuple[Tuple[int, ...], ...]


# --- Smith normal form -------------------------------------------------------

def _identity(n: int) -> List[List[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_decomposition(A: Sequence[Sequence[int]]):
    """Return (U, D, V) with U*A*V = D in Smith normal form.

    U and V are unimodular.  Pivoting always takes the entry of smallest
    absolute value, so the output is deterministic.  Works for rectangular
    and singular matrices.
    """
    M = [list(map(int, row)) for row in A]
    m = len(M)
    n = len(M[0]) if m else 0
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):
        # row_dst += c * row_src
        M[dst] = [a + c * b for a, b in zip(M[dst], M[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, c):
        for row in M:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if M[i][j] and (best is None or abs(M[i][j]) < abs(M[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            for i in range(t + 1, m):
                if M[i][t]:
                    add_row(i, t, -(M[i][t] // M[t][t]))
            for j in range(t + 1, n):
                if M[t][j]:
                    add_col(j, t, -(M[t][j] // M[t][t]))
            rest = [(abs(M[i][t]), i, t) for i in range(t + 1, m) if M[i][t]]
            rest += [(abs(M[t][j]), t, j) for j in range(t + 1, n) if M[t][j]]
            if rest:
                _, i, j = min(rest)
                if j == t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if M[i][j] % M[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if M[t][t] < 0:
            M[t] = [-v for v in M[t]]
            U[t] = [-v for v in U[t]]
    return U, M, V


@dataclass(frozen=True)
class DiscGroup:
    """Finite abelian group Z/g1 x ... x Z/gk with g1 | g2 | ... | gk."""

    factors: Tuple[int, ...]

    def __post_init__(self):
        fs = self.factors
        if any(f < 1 for f in fs):
            raise ValueError(f"invariant factors must be positive: {fs}")
        if any(fs[i + 1] % fs[i] for i in range(len(fs) - 1)):
            raise ValueError(f"not a divisibility chain: {fs}")

    @property
    def order(self) -> int:
        return math.prod(self.factors)

    def nontrivial(self) -> Tuple[int, ...]:
        return tuple(f for f in self.factors if f > 1)

    @property
    def is_cyclic(self) -> bool:
        return len(self.nontrivial()) <= 1

    def normalized(self, keep_trivial: bool = False) -> "DiscGroup":
        return self if keep_trivial else DiscGroup(self.nontrivial())


def smith_normal_form(G: Sequence[Sequence[int]]) -> DiscGroup:
    """Invariant factors of the cokernel of a nonsingular square matrix."""
    n = len(G)
    if any(len(row) != n for row in G):
        raise ValueError("smith_normal_form needs a square matrix")
    _, D, _ = smith_decomposition(G)
    diag = tuple(D[i][i] for i in range(n))
    if 0 in diag:
        raise ValueError("matrix is singular")
    return DiscGroup(diag)


def determinant(G: Sequence[Sequence[int]]) -> int:
    """Exact determinant via fraction-free Gaussian elimination (Bareiss)."""
    M = [list(row) for row in G]
    n = len(M)
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k]), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


# --- the lattice T_0 -------------------------------------------------------

def gram_T0(c: WClass) -> Matrix:
    """Intersection matrix of T_0 = <e1 - n f1, r f1, k f1 + l'_d>."""
    d, r, n, k = c.as_tuple()
    return ((-2 * n, r, k), (r, 0, 0), (k, 0, -d))


def invariant_factors_formula(c: WClass) -> DiscGroup:
    """(g1, g2, g3) of Disc T_w from the gcds of the minors of gram_T0."""
    d, r, n, k = c.as_tuple()
    g1 = gcd_all((2 * n, r, k, d))
    g2 = gcd_all((r * r, k * r, r * d, 2 * n * d - k * k)) // g1
    g3 = d * r * r // (g1 * g2)
    return DiscGroup((g1, g2, g3))


# --- lattices and vectors ----------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    """A lattice Z^n with a fixed symmetric integer Gram matrix.

    ``base`` names the lattice N when this lattice is N + U with the
    hyperbolic plane on the last two coordinates.
    """

    name: str
    gram: Matrix
    labels: Tuple[str, ...]
    base: "Lattice | None" = None

    def __post_init__(self):
        n = len(self.gram)
        if any(len(row) != n for row in self.gram) or len(self.labels) != n:
            raise ValueError("Gram matrix and labels disagree in size")
        if any(self.gram[i][j] != self.gram[j][i] for i in range(n) for j in range(i)):
            raise ValueError("Gram matrix is not symmetric")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def _sparse(self):
        # cached list of nonzero Gram entries, the lattices here are block diagonal
        cache = self.__dict__.get("_nz")
        if cache is None:
            cache = [(i, j, v) for i, row in enumerate(self.gram)
                     for j, v in enumerate(row) if v]
            object.__setattr__(self, "_nz", cache)
        return cache

    def vector(self, coords=None, **named) -> "LatticeVector":
        """Build a vector from a coordinate list or from label=coefficient pairs."""
        if coords is None:
            coords = [0] * self.rank
            index = {lab: i for i, lab in enumerate(self.labels)}
            for lab, v in named.items():
                if lab not in index:
                    raise KeyError(f"{self.name} has no basis vector {lab!r}")
                coords[index[lab]] = v
        elif named:
            raise TypeError("give either coords or named coefficients, not both")
        return LatticeVector(self, tuple(Fraction(v) for v in coords))

    def zero(self) -> "LatticeVector":
        return self.vector()

    def basis_vector(self, label: str) -> "LatticeVector":
        return self.vector(**{label: 1})


@dataclass(frozen=True)
class LatticeVector:
    lattice: Lattice
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != self.lattice.rank:
            raise ValueError("coordinate count does not match the lattice rank")

    def _same(self, other: "LatticeVector"):
        if self.lattice != other.lattice:
            raise ValueError(
                f"ambient mismatch: {self.lattice.name} vs {other.lattice.name}")

    def __add__(self, other):
        self._same(other)
        return LatticeVector(self.lattice, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._same(other)
        return LatticeVector(self.lattice, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return LatticeVector(self.lattice, tuple(-a for a in self.coords))

    def __mul__(self, s):
        s = Fraction(s)
        return LatticeVector(self.lattice, tuple(s * a for a in self.coords))

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1 / Fraction(s))

    def __getitem__(self, label: str) -> Fraction:
        return self.coords[self.lattice.labels.index(label)]

    @property
    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def content(self) -> int:
        """gcd of the coordinates of an integral vector."""
        if not self.is_integral:
            raise ValueError("content is only defined for integral vectors")
        return gcd_all(int(c) for c in self.coords)

    def pairings(self) -> Tuple[Fraction, ...]:
        """(x, b_i) for every basis vector b_i."""
        out = [Fraction(0)] * self.lattice.rank
        for i, j, v in self.lattice._sparse():
            out[j] += self.coords[i] * v
        return tuple(out)

    def square(self) -> Fraction:
        return inner_product(self, self)

    def restrict(self, lattice: Lattice) -> "LatticeVector":
        """Drop the trailing U coordinates of a vector in lattice + U."""
        return LatticeVector(lattice, self.coords[:lattice.rank])

    def __repr__(self):
        terms = [f"{c}*{lab}" for c, lab in zip(self.coords, self.lattice.labels) if c]
        return f"<{self.lattice.name}: {' + '.join(terms) or '0'}>"


def inner_product(x: LatticeVector, y: LatticeVector) -> Fraction:
    x._same(y)
    total = Fraction(0)
    for i, j, v in x.lattice._sparse():
        if x.coords[i] and y.coords[j]:
            total += x.coords[i] * v * y.coords[j]
    return total


def with_hyperbolic_plane(N: Lattice, labels=("e", "f")) -> Lattice:
    return Lattice(f"{N.name}+U", block_diagonal(N.gram, U_GRAM), N.labels + tuple(labels), base=N)


_LAMBDA_CACHE: Dict[int, Lattice] = {}


def lambda_d(d: int) -> Lattice:
    """Lambda_d = E8(-1)^2 + U1 + U2 + <l'_d> in the fixed basis order."""
    if d not in _LAMBDA_CACHE:
        _LAMBDA_CACHE[d] = Lattice(f"Lambda_{d}", lambda_d_gram(d), LAMBDA_D_LABELS)
    return _LAMBDA_CACHE[d]


def lambda_d_extended(d: int) -> Lattice:
    """Lambda_d + U4, the part of the extended K3 lattice that T_w lives in."""
    lat = with_hyperbolic_plane(lambda_d(d), labels=EXTENDED_LABELS[-2:])
    return lat


def twist_vector(c: WClass) -> LatticeVector:
    """w_{n,k} as a rational vector of Lambda_d."""
    d, r, n, k = c.as_tuple()
    return lambda_d(d).vector(e1=Fraction(1, r), f1=Fraction(n, r), ld=Fraction(k, r * d))


# --- Eichler criterion -------------------------------------------------------

class NonPrimitiveError(ValueError):
    def __init__(self, content: int):
        self.content = content
        super().__init__(f"vector is not primitive (content {content})")


def divisibility(x: LatticeVector) -> int:
    """div(x) = gcd of (x, v) over the lattice, for integral x."""
    return gcd_all(int(p) for p in x.pairings())


def eichler_invariants(x: LatticeVector) -> Tuple[Fraction, int, Fraction]:
    """(square, divisibility, class of x/div(x) in Disc Lambda_d) for primitive x.

    The class is returned as the l'_d coefficient of x/div(x) modulo 1, an
    element of (1/d)Z/Z = Disc Lambda_d.  The unimodular blocks contribute
    nothing to the discriminant group.
    """
    if not x.is_integral:
        raise ValueError("Eichler invariants need an integral vector")
    cont = x.content()
    if cont != 1:
        raise NonPrimitiveError(cont)
    div = divisibility(x)
    cls = (x["ld"] / div) % 1
    return x.square(), div, cls


def eichler_equivalent(x: LatticeVector, y: LatticeVector) -> bool:
    """Same orbit under the stable orthogonal group of Lambda_d.

    Lambda_d contains U1 + U2, so primitive vectors are equivalent exactly when
    square, divisibility and discriminant class agree.
    """
    x._same(y)
    return eichler_invariants(x) == eichler_invariants(y)


# --- B-field shift -----------------------------------------------------------

def bfield_shift(B: LatticeVector, v: LatticeVector) -> LatticeVector:
    """Apply exp(B) to v in (N + U) tensor Q.

    z -> z - (B, z) f,  e -> e + B - (B^2/2) f,  f -> f.
    """
    N = B.lattice
    amb = v.lattice
    if amb.base != N:
        raise ValueError(f"{amb.name} is not {N.name} + U")
    z = v.restrict(N)
    a, b = v.coords[-2], v.coords[-1]
    new_z = z + B * a
    new_f = b - inner_product(B, z) - a * B.square() / 2
    return LatticeVector(amb, new_z.coords + (a, new_f))


def exp_w_integrality(c: WClass, x: LatticeVector) -> bool:
    """Whether exp(w) maps the integral vector x of Lambda_d into the extended lattice."""
    if x.lattice != lambda_d(c.d):
        raise ValueError(f"x must lie in Lambda_{c.d}")
    if not x.is_integral:
        raise ValueError("x must be integral")
    amb = lambda_d_extended(c.d)
    v = LatticeVector(amb, x.coords + (Fraction(0), Fraction(0)))
    return bfield_shift(twist_vector(c), v).is_integral


# --- cubic fourfold lattice --------------------------------------------------

def kernel_basis(P: Sequence[Sequence[int]]) -> List[List[int]]:
    """Z-basis (as columns) of the saturated integer kernel of P."""
    _, D, V = smith_decomposition(P)
    rank = sum(1 for i in range(min(len(D), len(D[0]))) if D[i][i])
    n = len(V)
    return [[V[i][j] for i in range(n)] for j in range(rank, n)]


def cubic_lattice() -> Lattice:
    """E8(-1)^2 + U^2 + Z(-1)^3, the middle cohomology of a cubic fourfold (sign changed)."""
    minus_one = ((-1, 0, 0), (0, -1, 0), (0, 0, -1))
    labels = LAMBDA_D_LABELS[:20] + ("z1", "z2", "z3")
    return Lattice("H4(1)", block_diagonal(E8_MINUS, E8_MINUS, U_GRAM, U_GRAM, minus_one), labels)


def special_sublattice(dprime: int) -> Tuple[LatticeVector, LatticeVector]:
    """Generators (h, T) of a rank-2 primitive sublattice K_{d'} of discriminant d'.

    h = (1, 1, 1) in Z(-1)^3.  For d' = 0 (mod 6), T = e2 - (d'/6) f2 with (h, T) = 0;
    for d' = 2 (mod 6), T = e2 - ((d'-2)/6) f2 + z3 with (h, T) = -1.
    """
    L = cubic_lattice()
    h = L.vector(z1=1, z2=1, z3=1)
    if dprime % 6 == 0:
        T = L.vector(e2=1, f2=-(dprime // 6))
    elif dprime % 6 == 2:
        T = L.vector(e2=1, f2=-((dprime - 2) // 6), z3=1)
    else:
        raise ValueError(f"no special sublattice of discriminant {dprime}")
    return h, T


def k_perp_gram(dprime: int) -> Matrix:
    """Gram matrix of the orthogonal complement of K_{d'} in the cubic lattice."""
    L = cubic_lattice()
    h, T = special_sublattice(dprime)
    P = [[int(v) for v in h.pairings()], [int(v) for v in T.pairings()]]
    basis = [L.vector(col) for col in kernel_basis(P)]
    return tuple(tuple(int(inner_product(x, y)) for y in basis) for x in basis)
