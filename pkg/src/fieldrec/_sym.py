"""sympy bridge: gcd, factorization and resultants on raw term dicts.

Works at the level of {exponent tuple: coefficient} dicts so the value types
in polyfield stay in charge of canonical forms.  Coefficients are Fraction
(char 0) or ints in [0, p) (char p).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple

import sympy
from sympy import Poly, QQ
from sympy.polys.domains import GF


@lru_cache(maxsize=None)
def _symbols(names: Tuple[str, ...]):
    return tuple(sympy.Symbol(n) for n in names)


def _domain(char: int):
    return QQ if char == 0 else GF(char)


def to_poly(char: int, names: Tuple[str, ...], d: Dict[tuple, object]) -> Poly:
    gens = _symbols(names)
    if char == 0:
        coeffs = {e: sympy.Rational(c.numerator, c.denominator) for e, c in d.items()}
    else:
        coeffs = {e: int(c) for e, c in d.items()}
    if not coeffs:
        coeffs = {(0,) * len(names): 0}
    return Poly.from_dict(coeffs, *gens, domain=_domain(char))


def from_poly(char: int, P: Poly) -> Dict[tuple, object]:
    out = {}
    for exp, c in P.terms():
        if char == 0:
            q = sympy.Rational(c)
            out[exp] = Fraction(int(q.p), int(q.q))
        else:
            out[exp] = int(c) % char
    return {e: c for e, c in out.items() if c != 0}


def gcd_dict(char: int, names: Tuple[str, ...], a: Dict, b: Dict) -> Dict:
    g = to_poly(char, names, a).gcd(to_poly(char, names, b))
    return from_poly(char, g)


def factor_dict(char: int, names: Tuple[str, ...], a: Dict) -> List[Tuple[Dict, int]]:
    """Irreducible factorization (char 0 any arity; char p univariate only here)."""
    _, factors = to_poly(char, names, a).factor_list()
    return [(from_poly(char, f), e) for f, e in factors]


def resultant_dict(char: int, names: Tuple[str, ...], a: Dict, b: Dict) -> Dict:
    """Resultant with respect to the FIRST name in ``names``."""
    A = to_poly(char, names, a)
    B = to_poly(char, names, b)
    R = A.resultant(B)
    if not isinstance(R, Poly):
        R = Poly(R, *_symbols(names), domain=_domain(char))
    # result no longer involves names[0]; re-embed on the full gen tuple
    R = Poly(R.as_expr(), *_symbols(names), domain=_domain(char))
    return from_poly(char, R)


def is_squarefree_univ(char: int, name: str, a: Dict) -> bool:
    P = to_poly(char, (name,), a)
    return P.gcd(P.diff()).degree() == 0


def count_factors_over_extension(names: Tuple[str, ...], f: Dict,
                                 minpoly_coeffs: List[Fraction]) -> int:
    """Number of irreducible factors of f over Q(theta), theta a root of minpoly.

    Only used by the characteristic-0 absolute irreducibility test.
    """
    gens = _symbols(names)
    z = sympy.Dummy("z")
    mp = sum(sympy.Rational(c.numerator, c.denominator) * z ** i
             for i, c in enumerate(minpoly_coeffs))
    theta = sympy.rootof(sympy.Poly(mp, z), 0)
    expr = Poly.from_dict(
        {e: sympy.Rational(c.numerator, c.denominator) for e, c in f.items()}, *gens, domain=QQ
    ).as_expr()
    _, factors = sympy.factor_list(expr, *gens, extension=theta)
    return sum(e for _, e in factors)
