"""Lattice computations for twisted K3 surfaces of degree d and order r.

Modules: ``arith`` (integer kernel), ``lattice`` (Gram matrices, Smith form,
Eichler data, B-field shifts), ``discform`` (finite quadratic forms),
``moduli`` (admissible degrees, canonical classes, component census),
``assoc`` (witnesses for T_w = K_{d'}^perp), ``cli``.
"""

__version__ = "0.1.0"
