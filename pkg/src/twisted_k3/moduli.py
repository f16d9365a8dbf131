"""Admissible degrees, canonical twist classes and the component census.

A twist of order r on a polarized K3 of degree d is a class [w] in
(1/r)Lambda_d^v / Lambda_d^v.  Up to the stable orthogonal group every such
class is represented by some w_{n,k} with 0 <= n < r and 0 <= k < gcd(r, d),
so the grid has at most r*gcd(r, d) cells.  The census merges cells that are
provably equivalent (Eichler invariants of shifted representatives) and
separates cells whose lattice invariants differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from .arith import factorize, is_square_mod, xgcd
from .discform import (
    Structure,
    disc_form_from_gram,
    disc_form_Tw,
    qform_iso,
    structure_of_disc,
)
from .lattice import gram_T0, invariant_factors_formula
from .wclass import WClass

DEFAULT_MERGE_BOUND = 2


# --- conditions (**) and (**') ----------------------------------------------

def star2_reason(d: int) -> str | None:
    """Why d fails (**), or None when it satisfies it."""
    if d <= 0:
        return f"d = {d} is not positive"
    if d % 2:
        return f"d = {d} is odd"
    if d % 4 == 0:
        return "4 divides d"
    if d % 9 == 0:
        return "9 divides d"
    for p, _ in factorize(d):
        if p > 2 and p % 3 == 2:
            return f"{p} divides d and {p} = 2 mod 3"
    return None


def satisfies_star2(d: int) -> bool:
    """d even and not divisible by 4, 9, or any odd prime p = 2 mod 3."""
    return star2_reason(d) is None


def star2_via_reciprocity(d: int) -> bool:
    """(**) decided through quadratic residues instead of factoring.

    d = 2 (mod 6): -3 must be a square modulo 2d.
    d = 6t: -3 must be a square modulo 4t and 4t a nonzero square modulo 3,
    i.e. 4t = 1 (mod 3).
    d = 4 (mod 6) falls under neither branch and is always rejected: d/2 is
    then 2 mod 3, so either 4 divides d or an odd prime 2 mod 3 does.
    """
    if d <= 0 or d % 2:
        raise ValueError(f"d must be even and positive, got {d}")
    if d % 6 == 4:
        return False
    if d % 6 == 2:
        return is_square_mod(-3, 2 * d)
    t = d // 6
    return is_square_mod(-3, 4 * t) and (4 * t) % 3 == 1


def star2prime_decompositions(dprime: int) -> List[Tuple[int, int]]:
    """All (d, r) with d*r^2 = d' and d satisfying (**), ascending in r."""
    out = []
    if dprime < 1:
        return out
    r = 1
    while r * r <= dprime:
        if dprime % (r * r) == 0 and satisfies_star2(dprime // (r * r)):
            out.append((dprime // (r * r), r))
        r += 1
    return out


# --- canonical representatives ----------------------------------------------

def canonicalize_wclass(c: WClass) -> WClass:
    """Equivalent representative with 0 <= n < r and 0 <= k < gcd(r, d).

    Three moves keep the class: k -> k + r*m (changes w by an element of
    Lambda_d^v), n -> n + r (changes w by f1), and k -> k + d*j together with
    the n that keeps 2nd - k^2 fixed (Eichler's criterion on r*w).  Writing
    gcd(r, d) = p*r + q*d, the first move absorbs the p part and the third the
    q part, so 2nd - k^2 is preserved modulo r throughout.
    """
    d, r, n, k = c.as_tuple()
    g = math.gcd(r, d)
    kc = k % g
    j = (k - kc) // g
    if d % r == 0:
        p = 1
    else:
        _, p, _ = xgcd(r, d)
    k1 = k - j * p * r
    num = kc * kc - k1 * k1
    assert num % (2 * d) == 0, (c, k1, kc)
    n1 = n + num // (2 * d)
    return WClass(d, r, n1 % r, kc)


def order_in_dual_quotient(c: WClass) -> int:
    """Order of [w_{n,k}] in (1/r)Lambda_d^v / Lambda_d^v by direct enumeration.

    m*w lies in Lambda_d^v exactly when its e1, f1 and l'_d/d coefficients
    are integers.
    """
    d, r, n, k = c.as_tuple()
    for m in range(1, r + 1):
        coeffs = (Fraction(m, r), Fraction(m * n, r), Fraction(m * k, r))
        if all(x.denominator == 1 for x in coeffs):
            return m
    raise AssertionError("r*w always lies in the dual lattice")


def grid(d: int, r: int) -> List[WClass]:
    """Canonical cells in lexicographic (n, k) order."""
    g = math.gcd(r, d)
    return [WClass(d, r, n, k) for n in range(r) for k in range(g)]


# --- invariants and merges ---------------------------------------------------

def square_obstruction(c1: WClass, c2: WClass) -> str:
    """'obstructed' if 2nd - k^2 differs modulo r, else 'inconclusive'.

    (r*w)^2 * d = 2nd - k^2, and every allowed change of representative
    alters this by a multiple of r, so a mismatch proves inequivalence.
    """
    if (c1.d, c1.r) != (c2.d, c2.r):
        raise ValueError(f"classes live over different (d, r): {c1} vs {c2}")
    return "obstructed" if (c1.disc - c2.disc) % c1.r else "inconclusive"


def _shift_box(bound: int) -> np.ndarray:
    rng = np.arange(-bound, bound + 1, dtype=np.int64)
    grids = np.meshgrid(rng, rng, rng, rng, rng, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _vec_gcd(*cols):
    out = np.zeros_like(cols[0])
    for c in cols:
        out = np.gcd(out, c)
    return out


def shifted_invariants(c: WClass, bound: int = DEFAULT_MERGE_BOUND):
    """Eichler data of d*(r*w + r*lam) for every lam in the search box.

    lam = a1 e1 + b1 f1 + a2 e2 + b2 f2 + (g/d) l'_d with all coefficients in
    [-bound, bound] and E8 parts zero.  Returns (shifts, keys) where each key
    is (content, square, divisibility, class mod d) of the scaled vector; two
    cells sharing a key are equivalent.
    """
    d, r, n, k = c.as_tuple()
    box = _shift_box(bound)
    A1 = d * (1 + r * box[:, 0])
    B1 = d * (n + r * box[:, 1])
    A2 = d * r * box[:, 2]
    B2 = d * r * box[:, 3]
    C = k + r * box[:, 4]
    g = _vec_gcd(A1, B1, A2, B2, C)
    # a zero vector carries no Eichler data
    keep = g != 0
    box, g = box[keep], g[keep]
    A1, B1, A2, B2, C = (v[keep] // g for v in (A1, B1, A2, B2, C))
    sq = 2 * A1 * B1 + 2 * A2 * B2 - d * C * C
    div = _vec_gcd(A1, B1, A2, B2, d * C)
    cls = (C * d // div) % d
    keys = np.stack([g, sq, div, cls], axis=1)
    return box, keys


def _merge_witness(c1: WClass, c2: WClass, bound: int):
    b1, k1 = shifted_invariants(c1, bound)
    b2, k2 = shifted_invariants(c2, bound)
    first: Dict[tuple, int] = {}
    for i, row in enumerate(map(tuple, k1.tolist())):
        first.setdefault(row, i)
    for j, row in enumerate(map(tuple, k2.tolist())):
        if row in first:
            i = first[row]
            return {"shift_1": b1[i].tolist(), "shift_2": b2[j].tolist(),
                    "invariants": list(row)}
    return None


def merge_rule_k_zero(c1: WClass, c2: WClass, bound: int = DEFAULT_MERGE_BOUND) -> bool:
    """True when bounded search proves [w1] and [w2] equivalent.

    False only means nothing was found inside the box.
    """
    if (c1.d, c1.r) != (c2.d, c2.r):
        raise ValueError(f"classes live over different (d, r): {c1} vs {c2}")
    if c1 == c2:
        return True
    return _merge_witness(c1, c2, bound) is not None


# --- census ------------------------------------------------------------------

def _cell_form(c: WClass):
    if structure_of_disc(c) is not Structure.OTHER:
        return disc_form_Tw(c)
    F = disc_form_from_gram(gram_T0(c)).drop_trivial()
    return F if F.rank <= 2 else None


@dataclass
class CensusReport:
    """Grid cells of M_d^r split into merged groups, with bounds.

    ``groups`` holds the cells (as (n, k)) of each provably-equal group.
    ``lower_bound`` counts pairwise distinguishable groups, ``upper_bound``
    is r*gcd(r, d).
    """

    d: int
    r: int
    representatives: List[WClass]
    groups: List[List[Tuple[int, int]]]
    upper_bound: int
    lower_bound: int
    merges: List[dict] = field(default_factory=list)
    separations: List[dict] = field(default_factory=list)
    signatures: List[dict] = field(default_factory=list)
    bound: int = DEFAULT_MERGE_BOUND

    @property
    def group_count(self) -> int:
        return len(self.groups)

    def group_of(self, n: int, k: int) -> int:
        for i, g in enumerate(self.groups):
            if (n, k) in g:
                return i
        raise KeyError((n, k))


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def component_census(d: int, r: int, bound: int = DEFAULT_MERGE_BOUND) -> CensusReport:
    cells = grid(d, r)
    N = len(cells)
    parent = list(range(N))
    merges = []
    owner: Dict[tuple, Tuple[int, int]] = {}
    for i, c in enumerate(cells):
        box, keys = shifted_invariants(c, bound)
        for j, row in enumerate(map(tuple, keys.tolist())):
            if row not in owner:
                owner[row] = (i, j)
                continue
            i0, j0 = owner[row]
            a, b = _find(parent, i0), _find(parent, i)
            if a != b:
                parent[max(a, b)] = min(a, b)
                b0, _ = shifted_invariants(cells[i0], bound)
                merges.append({"cells": [[cells[i0].n, cells[i0].k], [c.n, c.k]],
                               "shift_1": b0[j0].tolist(), "shift_2": box[j].tolist(),
                               "invariants": list(row)})
    roots: Dict[int, List[int]] = {}
    for i in range(N):
        roots.setdefault(_find(parent, i), []).append(i)
    members = [roots[k] for k in sorted(roots)]
    groups = [[(cells[i].n, cells[i].k) for i in m] for m in members]

    # invariants of one representative per group
    reps = [cells[m[0]] for m in members]
    forms = [_cell_form(c) for c in reps]
    factors = [invariant_factors_formula(c).factors for c in reps]
    residues = [c.disc % r for c in reps]
    form_cluster: List[int] = []
    for i, F in enumerate(forms):
        cid = i if F is not None else -1
        if F is not None:
            for j in range(i):
                if forms[j] is not None and form_cluster[j] == j and factors[i] == factors[j] \
                        and qform_iso(forms[j], F):
                    cid = j
                    break
        form_cluster.append(cid)
    signatures = [{"group": i, "factors": list(factors[i]), "square_mod_r": residues[i],
                   "form_class": form_cluster[i]} for i in range(len(reps))]

    separations = []
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            cert = None
            if factors[i] != factors[j]:
                cert = {"kind": "invariant_factors", "values": [list(factors[i]), list(factors[j])]}
            elif residues[i] != residues[j]:
                cert = {"kind": "square_mod_r", "values": [residues[i], residues[j]]}
            elif form_cluster[i] != form_cluster[j] and forms[i] is not None and forms[j] is not None:
                cert = {"kind": "discriminant_form",
                        "values": [qform_iso(forms[i], forms[j]).reason]}
            if cert is not None:
                cert["groups"] = [i, j]
                separations.append(cert)
    distinct = {(tuple(s["factors"]), s["square_mod_r"], s["form_class"]) for s in signatures}
    return CensusReport(d, r, cells, groups, r * math.gcd(r, d), len(distinct),
                        merges, separations, signatures, bound)
