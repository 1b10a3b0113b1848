"""fieldrec: exact function-field computer algebra and multiplicative-group
field reconstruction.

Subpackages by concern:

* ``polyfield``   exact arithmetic and canonical forms over Q(t1..tr), F_p(t1..tr)
* ``factorize``   factorization, irreducibility (plain and absolute), p-th roots
* ``differentials`` the module of Kahler differentials and the operator d
* ``dependence``  algebraic / p-multiplicative dependence, regular elements
* ``milnor``      symbols, divisorial valuations, tame residues, certificates
* ``lines``       projective lines in the multiplicative group, good pairs,
                  density computations
* ``reconstruct`` the oracle-to-field-isomorphism engine
* ``harness``     challenge generation, campaigns, reports
"""

from .polyfield import (
    FieldDescriptor,
    Polynomial,
    RationalFunction,
    arith,
    parse,
    prime_field,
    pth_root,
    rationals,
)
from .factorize import Factorization, factor, is_irreducible

__all__ = [
    "FieldDescriptor",
    "Polynomial",
    "RationalFunction",
    "Factorization",
    "arith",
    "factor",
    "is_irreducible",
    "parse",
    "prime_field",
    "pth_root",
    "rationals",
]
