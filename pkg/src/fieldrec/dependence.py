"""Decision procedures for algebraic and p-multiplicative dependence.

``alg_dependent`` is resultant elimination made fast and characteristic-safe:
restrict the pair to seeded low-degree curves t_j = theta_j(t1), take
Res_t1(P1 - u Q1, P2 - v Q2) along each curve, and gcd the results.  For a
dependent pair the irreducible annihilating relation W(u, v) equals the
minimal annihilator of every (valid) restricted pair, so W divides each
curve resultant and survives the gcd; candidates are then verified exactly
by substituting the pair into W.  A constant gcd therefore proves
independence, and every dependent verdict carries an exact certificate.

``is_regular`` decides whether F/k(x) is a regular extension by fiber
sampling: with d(x) != 0, regularity is equivalent to some full-degree fiber
P - cQ being absolutely irreducible (a composite x factors every fiber,
and a non-composite pencil has fewer than d^2 bad fibers).
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from . import _sym, factorize, gfq
from .polyfield import (
    FieldDescriptor,
    Polynomial,
    RationalFunction,
)

MOD_CONSTANTS = "mod_constants"
MOD_P = "mod_p"


@dataclass(frozen=True)
class MultClass:
    """Element of the multiplicative group modulo constants (or modulo
    constants and p-th powers) as a factor-exponent vector."""

    desc: FieldDescriptor
    modulus: str
    exps: Tuple[Tuple[Polynomial, int], ...]

    @staticmethod
    def from_rational(f: RationalFunction, modulus: str = MOD_CONSTANTS) -> "MultClass":
        if f.is_zero():
            raise ZeroDivisionError("class of zero")
        if modulus not in (MOD_CONSTANTS, MOD_P):
            raise ValueError(f"unknown modulus {modulus!r}")
        fac = factorize.factor(f)
        return MultClass._from_map(f.desc, modulus, dict(fac.factors))

    @staticmethod
    def _from_map(desc, modulus, exps: Dict[Polynomial, int]) -> "MultClass":
        p = desc.characteristic
        clean = {}
        for g, e in exps.items():
            if modulus == MOD_P and p:
                e %= p
            if e:
                clean[g] = e
        items = tuple(sorted(clean.items(), key=lambda t: (t[0].degree(), t[0].sort_key())))
        return MultClass(desc, modulus, items)

    def is_identity(self) -> bool:
        return not self.exps

    def exponent_map(self) -> Dict[Polynomial, int]:
        return dict(self.exps)

    def __mul__(self, other: "MultClass") -> "MultClass":
        out = self.exponent_map()
        for g, e in other.exps:
            out[g] = out.get(g, 0) + e
        return MultClass._from_map(self.desc, self.modulus, out)

    def __pow__(self, n: int) -> "MultClass":
        return MultClass._from_map(self.desc, self.modulus,
                                   {g: e * n for g, e in self.exps})

    def inverse(self) -> "MultClass":
        return self ** -1

    def canonical_representative(self) -> RationalFunction:
        acc = RationalFunction.const(self.desc, 1)
        for g, e in self.exps:
            acc = acc * RationalFunction.from_polynomial(g) ** e
        return acc

    def serialize(self) -> str:
        return " * ".join(f"({g})^{e}" for g, e in self.exps) or "1"


def mult_class(f: RationalFunction, modulus: str = MOD_CONSTANTS) -> MultClass:
    return MultClass.from_rational(f, modulus)


# -- algebraic dependence ----------------------------------------------------


def _require_r2(desc: FieldDescriptor):
    if desc.nvars < 2:
        raise ValueError("this operation needs transcendence degree >= 2")


def _curve_thetas(desc: FieldDescriptor, rng: random.Random, attempt: int) -> List[Polynomial]:
    """Images [t1, theta_2(t1), ...] for a seeded restriction curve."""
    t1 = Polynomial.variable(desc, 0)
    images = [t1]
    p = desc.characteristic
    max_deg = 1 if attempt < 6 else 2 if attempt < 14 else 3
    for _ in range(1, desc.nvars):
        coeffs = []
        for _d in range(max_deg + 1):
            c = rng.randrange(p) if p else rng.randint(-5, 5)
            coeffs.append(c)
        poly = Polynomial.zero(desc)
        for dd, c in enumerate(coeffs):
            if c:
                poly = poly + Polynomial.monomial(desc, (dd,) + (0,) * (desc.nvars - 1), c)
        images.append(poly)
    return images


def _restrict_univ(poly: Polynomial, images: List[Polynomial]) -> Dict[Tuple[int], object]:
    """Restrict to a curve; the result only involves t1."""
    res = poly.compose_poly(images)
    return {(e[0],): c for e, c in res.terms}


def _uv_desc(desc: FieldDescriptor) -> FieldDescriptor:
    tag = desc.constant_field
    if tag == "declared_finite" or tag == "declared_alg_closed":
        tag = "prime_field" if desc.characteristic else "rationals"
    return FieldDescriptor(desc.characteristic, tag, ("u", "v"))


def _curve_resultant(x: RationalFunction, y: RationalFunction,
                     images: List[Polynomial]) -> Optional[Polynomial]:
    """Res_t1 of the pair restricted to a curve, as a polynomial in (u, v)."""
    desc = x.desc
    char = desc.characteristic
    P1 = _restrict_univ(x.num, images)
    Q1 = _restrict_univ(x.den, images)
    P2 = _restrict_univ(y.num, images)
    Q2 = _restrict_univ(y.den, images)
    if not Q1 or not Q2:
        return None

    def nonconst(P, Q):
        # P/Q nonconstant as a function of t1
        dP = max(e[0] for e in P) if P else -1
        dQ = max(e[0] for e in Q)
        if dP != dQ:
            return True
        if dP <= 0:
            return False
        # cross-multiplied proportionality test
        lcP = P[(dP,)]
        lcQ = Q[(dQ,)]
        for e in set(P) | set(Q):
            a = P.get(e, 0)
            b = Q.get(e, 0)
            if char:
                if (a * lcQ - b * lcP) % char:
                    return True
            else:
                if a * lcQ != b * lcP:
                    return True
        return False

    if not P1 or not nonconst(P1, Q1) or not P2 or not nonconst(P2, Q2):
        return None
    # A = P1 - u Q1, B = P2 - v Q2 over gens (t1, u, v)
    A: Dict[tuple, object] = {}
    for e, c in P1.items():
        A[(e[0], 0, 0)] = c
    for e, c in Q1.items():
        prev = A.get((e[0], 1, 0), 0)
        A[(e[0], 1, 0)] = prev - c if not char else (prev - c) % char
    B: Dict[tuple, object] = {}
    for e, c in P2.items():
        B[(e[0], 0, 0)] = c
    for e, c in Q2.items():
        prev = B.get((e[0], 0, 1), 0)
        B[(e[0], 0, 1)] = prev - c if not char else (prev - c) % char
    A = {e: c for e, c in A.items() if c != 0}
    B = {e: c for e, c in B.items() if c != 0}
    if max(e[0] for e in A) < 1 or max(e[0] for e in B) < 1:
        return None
    R = _sym.resultant_dict(char, ("t1", "u", "v"), A, B)
    if not R:
        return None
    out = Polynomial(_uv_desc(desc), {(e[1], e[2]): c for e, c in R.items()})
    return None if out.is_zero() else out


def dependence_relation(x: RationalFunction, y: RationalFunction,
                        seed: int = 0) -> Optional[Polynomial]:
    """Irreducible W(u, v) with W(x, y) = 0, or None when x, y are independent.

    Both inputs must be nonconstant.
    """
    desc = x.desc
    _require_r2(desc)
    from .polyfield import poly_gcd

    rng = random.Random(f"curves:{seed}")
    g: Optional[Polynomial] = None
    collected = 0
    attempt = 0
    while collected < 3 and attempt < 40:
        images = _curve_thetas(desc, rng, attempt)
        attempt += 1
        R = _curve_resultant(x, y, images)
        if R is None:
            continue
        collected += 1
        g = R if g is None else poly_gcd(g, R)
        if g.is_constant():
            return None
    if g is None or g.is_constant():
        if g is None:
            raise RuntimeError("no valid restriction curve found")
        return None
    _, factors = factorize.factor_polynomial(g)
    for w, _e in factors:
        if w.degree_in(0) < 1 or w.degree_in(1) < 1:
            continue
        if w.compose((x, y)).is_zero():
            return w
    return None


def alg_dependent(x: RationalFunction, y: RationalFunction) -> bool:
    """Algebraic dependence of classes mod constants.

    Classes equal to 1 are dependent only with each other (the convention
    for the equivalence relation on the multiplicative group mod constants).
    """
    if x.is_zero() or y.is_zero():
        raise ZeroDivisionError("dependence of zero")
    xc, yc = x.is_constant(), y.is_constant()
    if xc or yc:
        return xc and yc
    return dependence_relation(x, y) is not None


def in_rel_alg_closure(z: RationalFunction, x: RationalFunction) -> bool:
    """Is z algebraic over k(x)?  (x nonconstant; constants are always in.)"""
    if x.is_constant():
        raise ValueError("x must be nonconstant")
    if z.is_zero():
        return True
    if z.is_constant():
        return True
    return alg_dependent(z, x)


def p_mult_dependent(x: RationalFunction, y: RationalFunction) -> bool:
    """Nontrivial intersection of the cyclic groups generated by the two
    classes modulo constants and p-th powers (modulo constants in char 0)."""
    if x.is_zero() or y.is_zero():
        raise ZeroDivisionError("dependence of zero")
    p = x.desc.characteristic
    modulus = MOD_P if p else MOD_CONSTANTS
    cx = MultClass.from_rational(x, modulus)
    cy = MultClass.from_rational(y, modulus)
    if cx.is_identity() or cy.is_identity():
        return False
    vx = cx.exponent_map()
    vy = cy.exponent_map()
    support = sorted(set(vx) | set(vy), key=lambda g: (g.degree(), g.sort_key()))
    a = [vx.get(g, 0) for g in support]
    b = [vy.get(g, 0) for g in support]
    if p:
        # parallel nonzero vectors over F_p
        for lam in range(1, p):
            if all((ai - lam * bi) % p == 0 for ai, bi in zip(a, b)):
                return True
        return False
    # char 0: parallel over Q
    i = next(j for j, ai in enumerate(a) if ai)
    if b[i] == 0:
        return False
    # a * b[i] == b * a[i] componentwise
    return all(ai * b[i] == bi * a[i] for ai, bi in zip(a, b))


# -- regularity --------------------------------------------------------------

_REGULAR_CACHE: Dict[RationalFunction, bool] = {}
_REG_LOCK = threading.Lock()


def _dx_nonzero(x: RationalFunction) -> bool:
    p = x.desc.characteristic
    if p == 0:
        return not x.is_constant()
    for poly in (x.num, x.den):
        for e, _c in poly.terms:
            if any(d % p for d in e):
                return True
    return False


def is_regular(x: RationalFunction) -> bool:
    """Is x transcendental over k with F/k(x) a regular extension?

    Decision by fiber sampling; see the module docstring.  Results are cached.
    """
    _require_r2(x.desc)
    if x.is_zero() or x.is_constant():
        return False
    with _REG_LOCK:
        hit = _REGULAR_CACHE.get(x)
    if hit is not None:
        return hit
    result = _is_regular_uncached(x)
    with _REG_LOCK:
        _REGULAR_CACHE[x] = result
    return result


def _is_regular_uncached(x: RationalFunction) -> bool:
    if not _dx_nonzero(x):
        return False
    P, Q = x.num, x.den
    d = max(P.degree(), Q.degree())
    needed = d * d + 8
    if x.desc.characteristic == 0:
        return _regular_char0(P, Q, d, needed)
    return _regular_charp(P, Q, d, needed)


def _regular_char0(P: Polynomial, Q: Polynomial, d: int, needed: int) -> bool:
    checked = 0
    c = 0
    while checked < needed:
        c = -c + (1 if c <= 0 else 0)  # 1, -1, 2, -2, ...
        fib = P - Q.scale(c)
        if fib.degree() != d:
            continue
        checked += 1
        if fib.is_constant():
            continue
        if factorize.is_irreducible(fib, factorize.ABSOLUTELY):
            return True
    return False


def _regular_charp(P: Polynomial, Q: Polynomial, d: int, needed: int) -> bool:
    p = P.desc.characteristic
    s = 1
    while p ** s < needed + 4:
        s += 1
    F = gfq.GFq.get(p, s)
    Pd = {e: F.from_int(c) for e, c in P.terms}
    Qd = {e: F.from_int(c) for e, c in Q.terms}
    checked = 0
    idx = 0
    while checked < needed and idx < F.q:
        # deterministic sweep over F_{p^s}
        digits = []
        n = idx
        for _ in range(s):
            digits.append(n % p)
            n //= p
        c = tuple(digits)
        idx += 1
        fib = dict(Pd)
        for e, v in Qd.items():
            w = F.sub(fib.get(e, F.zero), F.mul(c, v))
            if F.is_zero(w):
                fib.pop(e, None)
            else:
                fib[e] = w
        if gfq.mv_deg_total(fib) != d:
            continue
        checked += 1
        if gfq.mv_absolutely_irreducible(F, fib, seed=idx):
            return True
    return False
