"""Factorization into canonical irreducibles and irreducibility tests.

Characteristic 0 goes through sympy (multivariate Zassenhaus/Wang);
characteristic p goes through the Kronecker machinery in ``gfq``.  Canonical
irreducible factors are monic under the graded-lex order, so a factorization
is ``unit * prod(f_i ** e_i)`` with the unit a nonzero constant.

Absolute irreducibility (over the algebraic closure):

* char p: conjugate-count argument over extension fields (see gfq).
* char 0: if f is irreducible over Q and splits over the closure into e > 1
  conjugates, e divides every partial degree; the minimal field of definition
  of a factor embeds into Q(beta) for beta a simple root of a generic fiber
  f(a, y), so factoring over that one extension decides the question.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from . import _sym, gfq
from .polyfield import FieldDescriptor, Polynomial, RationalFunction


@dataclass(frozen=True)
class Factorization:
    """unit * prod(factor^exponent), factors canonical monic irreducibles."""

    unit: object
    factors: Tuple[Tuple[Polynomial, int], ...]

    def reassemble(self, desc: FieldDescriptor) -> RationalFunction:
        acc = RationalFunction.const(desc, self.unit)
        for f, e in self.factors:
            acc = acc * RationalFunction.from_polynomial(f) ** e
        return acc

    def exponent_map(self) -> Dict[Polynomial, int]:
        return {f: e for f, e in self.factors}


_FACTOR_CACHE: Dict[Polynomial, Tuple[object, Tuple[Tuple[Polynomial, int], ...]]] = {}
_CACHE_LOCK = threading.Lock()


def _poly_to_mv(f: Polynomial, F: gfq.GFq):
    return {e: F.from_int(c) for e, c in f.terms}


def _mv_to_poly(desc: FieldDescriptor, d, F: gfq.GFq) -> Polynomial:
    # only valid when all elements are prime-field (s == 1)
    return Polynomial(desc, {e: c[0] for e, c in d.items()})


def factor_polynomial(f: Polynomial) -> Tuple[object, Tuple[Tuple[Polynomial, int], ...]]:
    """(unit, ((monic irreducible, exponent), ...)) with deterministic factor order."""
    if f.is_zero():
        raise ZeroDivisionError("factor of zero")
    if f.is_constant():
        return f.constant_value(), ()
    with _CACHE_LOCK:
        hit = _FACTOR_CACHE.get(f)
    if hit is not None:
        return hit
    desc = f.desc
    if desc.characteristic == 0:
        raw = _sym.factor_dict(0, desc.variables, dict(dict(f.terms)))
        factors = []
        for d, e in raw:
            g = Polynomial(desc, d).monic()
            if g.is_constant():
                continue
            factors.append((g, e))
    else:
        F = gfq.GFq.get(desc.characteristic, 1)
        _, raw = gfq.mv_factor(F, _poly_to_mv(f, F), seed=0)
        factors = [(_mv_to_poly(desc, d, F).monic(), e) for d, e in raw]
    factors.sort(key=lambda t: (t[0].degree(), t[0].sort_key()))
    # leading terms multiply under grlex, and all factors are monic
    unit = f.leading()[1]
    result = (unit, tuple(factors))
    with _CACHE_LOCK:
        _FACTOR_CACHE[f] = result
    return result


def factor(f: RationalFunction) -> Factorization:
    """Complete factorization of a rational function over its constant field.

    Denominator factors carry negative exponents; reassembly is exact.
    """
    if f.is_zero():
        raise ZeroDivisionError("factor of zero")
    un, fn = factor_polynomial(f.num)
    ud, fd = factor_polynomial(f.den)
    merged: Dict[Polynomial, int] = {}
    for g, e in fn:
        merged[g] = merged.get(g, 0) + e
    for g, e in fd:
        merged[g] = merged.get(g, 0) - e
    p = f.desc.characteristic
    unit = (un * pow(int(ud), -1, p)) % p if p else un / ud
    factors = tuple(sorted(((g, e) for g, e in merged.items() if e != 0),
                           key=lambda t: (t[0].degree(), t[0].sort_key())))
    return Factorization(unit, factors)


def multiplicity(f: RationalFunction, center: Polynomial) -> int:
    """Signed multiplicity of an irreducible center in f = num/den (no full factoring)."""
    if f.is_zero():
        raise ZeroDivisionError("valuation of zero")

    def mult_in(poly: Polynomial) -> int:
        e = 0
        while True:
            try:
                poly = poly.divexact(center)
            except (ValueError, ZeroDivisionError):
                return e
            e += 1

    return mult_in(f.num) - mult_in(f.den)


# -- irreducibility ---------------------------------------------------------

OVER_CONSTANT_FIELD = "over_constant_field"
ABSOLUTELY = "absolutely"


def is_irreducible(f: Polynomial, mode: str = OVER_CONSTANT_FIELD) -> bool:
    if f.is_zero() or f.is_constant():
        raise ValueError("irreducibility is about nonconstant polynomials")
    if mode not in (OVER_CONSTANT_FIELD, ABSOLUTELY):
        raise ValueError(f"unknown mode {mode!r}")
    _, factors = factor_polynomial(f)
    plain = len(factors) == 1 and factors[0][1] == 1
    if mode == OVER_CONSTANT_FIELD or not plain:
        return plain
    g = factors[0][0]
    if f.desc.characteristic:
        F = gfq.GFq.get(f.desc.characteristic, 1)
        return gfq.mv_absolutely_irreducible(F, _poly_to_mv(g, F), known_irreducible=True)
    return _absolutely_irreducible_char0(g)


def _absolutely_irreducible_char0(f: Polynomial) -> bool:
    desc = f.desc
    degs = [f.degree_in(i) for i in range(desc.nvars)] + [f.degree()]
    g = 0
    for d in degs:
        if d > 0:
            g = d if g == 0 else _gcd(g, d)
    if g == 1:
        return True
    # main variable: highest positive degree
    main = max(range(desc.nvars), key=lambda i: f.degree_in(i))
    rng = random.Random(0xABC1)
    for _ in range(80):
        point = {i: Fraction(rng.randint(-9, 9)) for i in range(desc.nvars) if i != main}
        u = f.eval_partial(point)
        # u is univariate in `main`
        coeffs = {e: c for e, c in u.terms}
        univ = {(e[main],): c for e, c in coeffs.items()}
        if max((e[0] for e in univ), default=-1) != f.degree_in(main):
            continue
        if not _sym.is_squarefree_univ(0, "y", univ):
            continue
        raw = _sym.factor_dict(0, ("y",), univ)
        degrees = sorted(max(e[0] for e in d) for d, _ in raw)
        if degrees[0] == 1:
            # rational point on the hypersurface pins the factor field to Q
            return True
        # smallest factor as the extension generator
        best = min(raw, key=lambda t: max(e[0] for e in t[0]))[0]
        deg = max(e[0] for e in best)
        minpoly = [Fraction(0)] * (deg + 1)
        for e, c in best.items():
            minpoly[e[0]] = c
        n = _sym.count_factors_over_extension(desc.variables, dict(dict(f.terms)), minpoly)
        return n == 1
    raise RuntimeError("no usable fiber found for the absolute irreducibility test")


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def absolutely_irreducible_fq(desc: FieldDescriptor, mv, F: gfq.GFq, seed: int = 0) -> bool:
    """Absolute irreducibility of an F_{p^s}-coefficient polynomial (gfq dict form)."""
    return gfq.mv_absolutely_irreducible(F, mv, seed=seed)
