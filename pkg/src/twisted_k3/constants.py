"""Fixed bases and Gram blocks.

Basis order for Lambda_d (21 coordinates):

    E8(-1) block 1 (a1..a8), E8(-1) block 2 (b1..b8), U1 (e1, f1),
    U2 (e2, f2), l'_d = e3 - (d/2) f3.

The extended lattice adds U4 (e4, f4) at the end.  The E8(-1) block is the
negated Cartan matrix for the simple roots in Bourbaki order (node 2 hangs
off node 4).  Nothing downstream depends on that choice beyond unimodularity
and negative definiteness.

``render_constants()`` produces the human-readable text shipped as
``data/lattice_constants.txt``; a test keeps the two in sync.
"""

from __future__ import annotations

from typing import List, Tuple

E8_EDGES = ((1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4))


def _e8_cartan() -> Tuple[Tuple[int, ...], ...]:
    m = [[2 if i == j else 0 for j in range(8)] for i in range(8)]
    for a, b in E8_EDGES:
        m[a - 1][b - 1] = m[b - 1][a - 1] = -1
    return tuple(tuple(row) for row in m)


E8_CARTAN = _e8_cartan()
E8_MINUS = tuple(tuple(-v for v in row) for row in E8_CARTAN)
U_GRAM = ((0, 1), (1, 0))

E8_LABELS_1 = tuple(f"a{i}" for i in range(1, 9))
E8_LABELS_2 = tuple(f"b{i}" for i in range(1, 9))
LAMBDA_D_LABELS = E8_LABELS_1 + E8_LABELS_2 + ("e1", "f1", "e2", "f2", "ld")
EXTENDED_LABELS = LAMBDA_D_LABELS + ("e4", "f4")


def block_diagonal(*blocks) -> Tuple[Tuple[int, ...], ...]:
    n = sum(len(b) for b in blocks)
    out: List[List[int]] = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, v in enumerate(row):
                out[off + i][off + j] = v
        off += len(b)
    return tuple(tuple(row) for row in out)


def lambda_d_gram(d: int) -> Tuple[Tuple[int, ...], ...]:
    return block_diagonal(E8_MINUS, E8_MINUS, U_GRAM, U_GRAM, ((-d,),))


def _fmt_matrix(m) -> List[str]:
    return ["  " + " ".join(f"{v:3d}" for v in row) for row in m]


def render_constants() -> str:
    lines = [
        "Lattice constants",
        "=================",
        "",
        "Lambda   = E8(-1) + E8(-1) + U1 + U2 + U3",
        "l_d      = e3 + (d/2) f3      (square d)",
        "l'_d     = e3 - (d/2) f3      (square -d)",
        "Lambda_d = E8(-1) + E8(-1) + U1 + U2 + <l'_d>",
        "Extended = Lambda_d + U4      (coordinates e4, f4 appended)",
        "",
        "Coordinate order of Lambda_d (21 entries):",
        "  " + " ".join(LAMBDA_D_LABELS),
        "Coordinate order of the extended lattice (23 entries):",
        "  " + " ".join(EXTENDED_LABELS),
        "",
        "E8(-1) Gram block (negated Cartan matrix, Bourbaki order):",
        *_fmt_matrix(E8_MINUS),
        "",
        "Hyperbolic plane U, basis (e, f):",
        *_fmt_matrix(U_GRAM),
        "",
        "<l'_d> block: (-d)",
        "",
        "Dual lattice: Lambda_d^v = E8(-1) + E8(-1) + U1 + U2 + <l'_d / d>,",
        "so Disc Lambda_d = Z/d generated by the class of l'_d / d.",
        "",
    ]
    return "\n".join(lines)
