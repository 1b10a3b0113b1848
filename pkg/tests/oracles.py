"""Independent test oracles.

These deliberately avoid the code paths they are used to check: dependence is
decided by a brute-force linear-algebra relation search with proven degree
bounds, counting problems by direct enumeration, residues by the closed-form
tame formula, derivatives by sympy's symbolic differentiation.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import sympy

from fieldrec.lines import _scalar_nullspace
from fieldrec.polyfield import FieldDescriptor, Polynomial, RationalFunction


def relation_bruteforce(x: RationalFunction, y: RationalFunction
                        ) -> Optional[Polynomial]:
    """Nonzero W(u, v) with W(x, y) = 0 by exhaustive linear algebra.

    If x, y are dependent, an annihilator exists with deg_u <= deg(y) and
    deg_v <= deg(x) (each conjugate-degree bound comes from the tower
    k(x, y) / k(y) being dominated by the fiber degree of y), so searching
    that box is a complete decision procedure.
    """
    desc = x.desc
    p = desc.characteristic
    du = max(y.num.degree(), y.den.degree())
    dv = max(x.num.degree(), x.den.degree())
    P1, Q1 = x.num, x.den
    P2, Q2 = y.num, y.den
    # powers
    p1 = [Polynomial.const(desc, 1)]
    q1 = [Polynomial.const(desc, 1)]
    p2 = [Polynomial.const(desc, 1)]
    q2 = [Polynomial.const(desc, 1)]
    for _ in range(max(du, dv)):
        p1.append(p1[-1] * P1)
        q1.append(q1[-1] * Q1)
        p2.append(p2[-1] * P2)
        q2.append(q2[-1] * Q2)
    unknowns = [(i, j) for i in range(du + 1) for j in range(dv + 1)]
    columns = []
    row_index: Dict[tuple, int] = {}
    for (i, j) in unknowns:
        term = p1[i] * q1[du - i] * p2[j] * q2[dv - j]
        col = {}
        for e, c in term.terms:
            col[row_index.setdefault(e, len(row_index))] = c
        columns.append(col)
    zero = 0 if p else Fraction(0)
    rows = [[columns[c].get(r, zero) for c in range(len(unknowns))]
            for r in range(len(row_index))]
    for vec in _scalar_nullspace(rows, len(unknowns), p):
        terms = {}
        for (i, j), c in zip(unknowns, vec):
            if c:
                terms[(i, j)] = c
        if not terms:
            continue
        W = Polynomial(FieldDescriptor(p, desc.constant_field, ("u", "v"), desc.order_q), terms)
        if W.compose((x, y)).is_zero():
            return W
    return None


def dependent_bruteforce(x: RationalFunction, y: RationalFunction) -> bool:
    if x.is_constant() or y.is_constant():
        return x.is_constant() and y.is_constant()
    return relation_bruteforce(x, y) is not None


def partials_sympy(f: RationalFunction) -> List[RationalFunction]:
    """Partial derivatives computed by sympy, mapped back exactly."""
    desc = f.desc
    gens = sympy.symbols(" ".join(desc.variables))
    if desc.nvars == 1:
        gens = (gens,)

    def to_expr(poly: Polynomial):
        expr = sympy.Integer(0)
        for e, c in poly.terms:
            if desc.characteristic:
                coef = sympy.Integer(int(c))
            else:
                coef = sympy.Rational(c.numerator, c.denominator)
            mono = coef
            for g, k in zip(gens, e):
                mono *= g ** k
            expr += mono
        return expr

    expr = to_expr(f.num) / to_expr(f.den)
    out = []
    from fieldrec.polyfield import parse
    for g in gens:
        der = sympy.cancel(sympy.diff(expr, g))
        num, den = sympy.fraction(der)
        text = f"({num})/({den})".replace("**", "^")
        out.append(parse(text, desc))
    return out


def count_density_enumeration(p: int, r: int, d: int) -> Fraction:
    """|S' cap S_d| / |S_d| by direct monomial enumeration."""
    total = 0
    special = 0
    for combo in itertools.product(range(d + 1), repeat=r):
        if sum(combo) != d:
            continue
        total += 1
        if all(e % p == 0 for e in combo[1:]):
            special += 1
    return Fraction(special, total)


def tame_residue_closed_form(x1: RationalFunction, x2: RationalFunction, v):
    """(-1)^{ab} x2^a / x1^b with a = v(x1), b = v(x2), as a v-unit."""
    from fieldrec import milnor

    a = milnor.valuation(x1, v)
    b = milnor.valuation(x2, v)
    val = x2 ** a / x1 ** b
    if (a * b) % 2:
        val = -val
    return val
