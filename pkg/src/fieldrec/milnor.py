"""Milnor K-symbols over function fields: normal forms, divisorial valuations,
tame residues, nonvanishing certificates, and constant-field type detection.

Normal form: symbols are multilinearly expanded over the factorizations of
their entries (the unit becomes a constant entry, dropped when it is 1),
entries are sorted with antisymmetry signs under a fixed total order, and a
repeated adjacent entry (f, f) is rewritten to (-1, f).  Steinberg relations
are otherwise NOT imposed: equality of normal forms is a sound, deliberately
incomplete equality of symbols, and vanishing is only ever certified through
residues or the explicit patterns <f, 1-f> and <f, -f>, which the normalizer
recognizes and kills.

The residue map is the standard total tame symbol for the valuation's
uniformizer; in the witness configuration v(x1) != 0, v(x_i) = 0 it reduces
to  +v(x1) * <x2bar, ..., xnbar>.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import factorize
from .dependence import alg_dependent
from .polyfield import (
    is_prime,
    DECLARED_ALG_CLOSED,
    DECLARED_FINITE,
    FieldDescriptor,
    Polynomial,
    RationalFunction,
)


class UnsupportedDegree(ValueError):
    pass


class NeitherTypeError(ValueError):
    pass


# -- valuations --------------------------------------------------------------

AFFINE_PLANE = "affine_plane"
PROJECTIVE_PLANE = "projective_plane"


@dataclass(frozen=True)
class InfinityCenter:
    """Line at infinity: of the whole projective model ("total") or of the
    P^1 in one variable over the field of the others ("variable")."""

    kind: str
    index: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("total", "variable"):
            raise ValueError("infinity kind must be 'total' or 'variable'")
        if self.kind == "variable" and self.index is None:
            raise ValueError("variable infinity needs an index")


@dataclass(frozen=True)
class DivisorialValuation:
    model: str
    center: Union[Polynomial, InfinityCenter]

    def __post_init__(self):
        if self.model not in (AFFINE_PLANE, PROJECTIVE_PLANE):
            raise ValueError("unknown model tag")
        if isinstance(self.center, Polynomial):
            if self.center.is_constant():
                raise ValueError("center must be nonconstant")
            if self.center.leading()[1] != 1:
                raise ValueError("center must be monic canonical")

    def describe(self) -> str:
        if isinstance(self.center, Polynomial):
            return f"center {self.center}"
        if self.center.kind == "total":
            return "line at infinity"
        return f"infinity in variable #{self.center.index}"


def at_center(h: Polynomial) -> DivisorialValuation:
    h = h.monic()
    if not factorize.is_irreducible(h):
        raise ValueError(f"center {h} is not irreducible over the constant field")
    return DivisorialValuation(AFFINE_PLANE, h)


def at_infinity() -> DivisorialValuation:
    return DivisorialValuation(PROJECTIVE_PLANE, InfinityCenter("total"))


def at_variable_infinity(index: int) -> DivisorialValuation:
    return DivisorialValuation(PROJECTIVE_PLANE, InfinityCenter("variable", index))


def valuation(f: RationalFunction, v: DivisorialValuation) -> int:
    """Order of vanishing along the divisor (negative at poles)."""
    if f.is_zero():
        raise ZeroDivisionError("valuation of zero")
    c = v.center
    if isinstance(c, Polynomial):
        return factorize.multiplicity(f, c)
    if c.kind == "total":
        return f.den.degree() - f.num.degree()
    j = c.index
    return f.den.degree_in(j) - f.num.degree_in(j)


# -- residue fields ----------------------------------------------------------


@dataclass(frozen=True)
class ResidueField:
    """Where residues land.

    kind "rational": the residue field is again rational, ``desc`` is its
    descriptor and reduction produces RationalFunction values over it.
    kind "modulus": elements are canonical representatives modulo the center
    (degree in the main variable below deg(center)), over the source
    descriptor.
    """

    source: FieldDescriptor
    val: DivisorialValuation
    kind: str
    desc: FieldDescriptor
    main_var: Optional[int] = None  # modulus kind: reduction variable


def residue_field(desc: FieldDescriptor, v: DivisorialValuation) -> ResidueField:
    c = v.center
    if isinstance(c, InfinityCenter):
        if desc.nvars == 1:
            # residue field is the constant field itself
            return ResidueField(desc, v, "constant", desc)
        if c.kind == "variable":
            names = tuple(n for i, n in enumerate(desc.variables) if i != c.index)
            sub = FieldDescriptor(desc.characteristic, desc.constant_field, names, desc.order_q)
            return ResidueField(desc, v, "rational", sub)
        names = tuple(f"s{i+1}" for i in range(desc.nvars - 1))
        sub = FieldDescriptor(desc.characteristic, desc.constant_field, names, desc.order_q)
        return ResidueField(desc, v, "rational", sub)
    # finite center: rational residue field iff linear in some variable
    for m in range(desc.nvars - 1, -1, -1):
        if c.degree_in(m) == 1:
            if desc.nvars == 1:
                return ResidueField(desc, v, "constant", desc, main_var=m)
            names = tuple(n for i, n in enumerate(desc.variables) if i != m)
            sub = FieldDescriptor(desc.characteristic, desc.constant_field, names, desc.order_q)
            return ResidueField(desc, v, "rational", sub, main_var=m)
    # general curve: canonical representatives mod center
    m = min((i for i in range(desc.nvars) if c.degree_in(i) > 0),
            key=lambda i: c.degree_in(i))
    return ResidueField(desc, v, "modulus", desc, main_var=m)


def _erase_var(poly: Polynomial, out_desc: FieldDescriptor, skip: int) -> Polynomial:
    terms = {}
    for e, cf in poly.terms:
        assert e[skip] == 0
        terms[e[:skip] + e[skip + 1:]] = cf
    return Polynomial(out_desc, terms)


def _reduce_unit(f: RationalFunction, rf: ResidueField) -> RationalFunction:
    """Image of a v-unit in the residue field (canonical representative)."""
    desc = rf.source
    v = rf.val
    c = v.center
    if isinstance(c, InfinityCenter):
        if rf.kind == "constant":
            dN, dD = f.num.degree(), f.den.degree()
            assert dN == dD, "not a unit at this valuation"
            lcN = f.num.leading()[1]
            lcD = f.den.leading()[1]
            p = desc.characteristic
            val = (lcN * pow(int(lcD), -1, p)) % p if p else lcN / lcD
            return RationalFunction.const(desc, val)
        if c.kind == "variable":
            j = c.index
            dN = f.num.degree_in(j)
            dD = f.den.degree_in(j)
            assert dN == dD, "not a unit at this valuation"
            lcN = {e[:j] + e[j + 1:]: cf for e, cf in f.num.terms if e[j] == dN}
            lcD = {e[:j] + e[j + 1:]: cf for e, cf in f.den.terms if e[j] == dD}
            return RationalFunction(Polynomial(rf.desc, lcN), Polynomial(rf.desc, lcD))
        # total infinity: ratio of top forms at (s1, ..., s_{r-1}, 1)
        dN, dD = f.num.degree(), f.den.degree()
        assert dN == dD, "not a unit at this valuation"
        topN = {e[:-1]: cf for e, cf in f.num.terms if sum(e) == dN}
        topD = {e[:-1]: cf for e, cf in f.den.terms if sum(e) == dD}
        return RationalFunction(Polynomial(rf.desc, topN), Polynomial(rf.desc, topD))
    if rf.kind == "constant":
        # linear center over one variable: evaluate at the root
        m = rf.main_var
        A = {(): cf for e, cf in c.terms if e[m] == 1}
        B = {(): cf for e, cf in c.terms if e[m] == 0}
        p = desc.characteristic
        a = A.get((), 0)
        b = B.get((), 0)
        root = (-b * pow(int(a), -1, p)) % p if p else -b / a
        return f.compose([RationalFunction.const(desc, root)])
    if rf.kind == "rational":
        m = rf.main_var
        # center = A(t_other) * t_m + B(t_other); substitute t_m = -B/A
        A = {e[:m] + e[m + 1:]: cf for e, cf in c.terms if e[m] == 1}
        B = {e[:m] + e[m + 1:]: cf for e, cf in c.terms if e[m] == 0}
        Ap = Polynomial(rf.desc, A)
        Bp = Polynomial(rf.desc, B)
        t_m_image = RationalFunction(-Bp, Ap)
        images: List[RationalFunction] = []
        pos = 0
        for i in range(desc.nvars):
            if i == m:
                images.append(t_m_image)
            else:
                images.append(RationalFunction.variable(rf.desc, pos))
                pos += 1
        return f.compose(images)
    return _mod_center_canonical(f, c, rf.main_var)


def _as_coeff_list(poly: Polynomial, m: int) -> List[RationalFunction]:
    """View as univariate in t_m with coefficients in the other variables."""
    desc = poly.desc
    deg = max((e[m] for e, _ in poly.terms), default=0)
    coeffs: List[Dict] = [dict() for _ in range(deg + 1)]
    for e, cf in poly.terms:
        coeffs[e[m]][e[:m] + (0,) + e[m:][1:]] = cf
    return [RationalFunction.from_polynomial(Polynomial(desc, d)) for d in coeffs]


def _coeffs_to_rf(coeffs: List[RationalFunction], m: int) -> RationalFunction:
    desc = coeffs[0].desc
    t_m = RationalFunction.variable(desc, m)
    acc = RationalFunction.const(desc, 0)
    power = RationalFunction.const(desc, 1)
    for cf in coeffs:
        acc = acc + cf * power
        power = power * t_m
    return acc


def _uv_field_divmod(a: List[RationalFunction], b: List[RationalFunction]):
    def trim(f):
        while f and f[-1].is_zero():
            f.pop()
        return f

    a = trim(a[:])
    b = trim(b[:])
    q = [a[0] * 0 for _ in range(max(len(a) - len(b) + 1, 0))]
    inv = b[-1].inverse()
    while a and len(a) >= len(b):
        c = a[-1] * inv
        shift = len(a) - len(b)
        q[shift] = c
        for i, bc in enumerate(b):
            a[shift + i] = a[shift + i] - c * bc
        trim(a)
    return q, a


def _mod_center_canonical(f: RationalFunction, h: Polynomial, m: int) -> RationalFunction:
    """Canonical representative of a unit modulo an irreducible center.

    Works in k(t_other)[t_m]/(h): reduces numerator and denominator, inverts
    the denominator by the extended Euclidean algorithm, and returns the
    product with t_m-degree below deg(h)."""
    desc = f.desc
    H = _as_coeff_list(h, m)

    def reduce_list(poly: Polynomial) -> List[RationalFunction]:
        lst = _as_coeff_list(poly, m)
        _, r = _uv_field_divmod(lst, H)
        return r

    N = reduce_list(f.num)
    D = reduce_list(f.den)
    if not D:
        raise ZeroDivisionError("denominator vanishes along the center")
    # invert D mod H: extended Euclid over the rational-coefficient field
    r0, r1 = H[:], D[:]
    zero = RationalFunction.const(desc, 0)
    one = RationalFunction.const(desc, 1)
    t0, t1 = [zero], [one]

    def add_l(x, y):
        n = max(len(x), len(y))
        out = []
        for i in range(n):
            xi = x[i] if i < len(x) else zero
            yi = y[i] if i < len(y) else zero
            out.append(xi + yi)
        while out and out[-1].is_zero():
            out.pop()
        return out

    def mul_l(x, y):
        if not x or not y:
            return []
        out = [zero] * (len(x) + len(y) - 1)
        for i, xi in enumerate(x):
            if xi.is_zero():
                continue
            for j, yj in enumerate(y):
                out[i + j] = out[i + j] + xi * yj
        while out and out[-1].is_zero():
            out.pop()
        return out

    while r1:
        q, r = _uv_field_divmod(r0, r1)
        r0, r1 = r1, r
        t0, t1 = t1, add_l(t0, [(-c) for c in mul_l(q, t1)])
    # r0 = gcd (a unit; h irreducible and D nonzero mod h)
    assert len(r0) == 1, "center not irreducible or denominator not a unit"
    inv_d = [c * r0[0].inverse() for c in t0]
    _, prod = _uv_field_divmod(mul_l(N, inv_d), H)
    if not prod:
        return RationalFunction.const(desc, 0)
    return _coeffs_to_rf(prod, m)


def residue_class_algebraic_over_constants(u: RationalFunction, h: Polynomial, m: int) -> bool:
    """Is the class of u modulo the center algebraic over the constants?

    chi(T) := Res_{t_m}(h, den(u) T - num(u)) kills the class; the class is
    algebraic over k iff chi has an irreducible factor free of the remaining
    variables that annihilates it.
    """
    from . import _sym

    desc = u.desc
    char = desc.characteristic
    names = desc.variables + ("_T",)
    r = desc.nvars
    hd = {e + (0,): c for e, c in h.terms}
    lin: Dict[tuple, object] = {}
    for e, c in u.den.terms:
        lin[e + (1,)] = c
    for e, c in u.num.terms:
        prev = lin.get(e + (0,), 0)
        nc = prev - c if not char else (prev - c) % char
        if nc:
            lin[e + (0,)] = nc
        else:
            lin.pop(e + (0,), None)
    # eliminate t_m: reorder gens so t_m is first
    order = (m,) + tuple(i for i in range(r) if i != m) + (r,)
    names_r = tuple(names[i] for i in order)
    hd_r = {tuple(e[i] for i in order): c for e, c in hd.items()}
    lin_r = {tuple(e[i] for i in order): c for e, c in lin.items()}
    chi = _sym.resultant_dict(char, names_r, hd_r, lin_r)
    if not chi:
        return True  # degenerate; conservatively treat as not visibly free
    chi_desc = FieldDescriptor(char, desc.constant_field,
                               tuple(names_r[1:]), desc.order_q)
    chi_poly = Polynomial(chi_desc, {e[1:]: c for e, c in chi.items()})
    if chi_poly.is_constant():
        return False
    _, factors = factorize.factor_polynomial(chi_poly)
    tvar = chi_desc.nvars - 1
    for w, _e in factors:
        if any(w.degree_in(i) > 0 for i in range(chi_desc.nvars - 1)):
            continue
        if w.degree_in(tvar) < 1:
            continue
        # W(T): does W(u) vanish mod h?
        coeffs = {e[tvar]: c for e, c in w.terms}
        acc = RationalFunction.const(desc, 0)
        for deg, c in coeffs.items():
            acc = acc + RationalFunction.const(desc, c) * u ** deg
        if acc.is_zero():
            return True
        red = _mod_center_canonical(acc, h, m)
        if red.is_zero():
            return True
    return False


# -- symbols ------------------------------------------------------------------

Entry = RationalFunction
SymbolTerms = Dict[Tuple[Entry, ...], int]


def _int_prime_factors(n: int) -> Dict[int, int]:
    out: Dict[int, int] = {}
    d = 2
    while d * d <= n and d < 100_000:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        if n < 100_000 ** 2:
            out[n] = out.get(n, 0) + 1
        else:
            a = _pollard_rho(n)
            for q, e in _int_prime_factors(a).items():
                out[q] = out.get(q, 0) + e
            for q, e in _int_prime_factors(n // a).items():
                out[q] = out.get(q, 0) + e
    return out


def _pollard_rho(n: int) -> int:
    import math
    import random as _random
    if n % 2 == 0:
        return 2
    rng = _random.Random(n)
    while True:
        x = rng.randrange(2, n)
        y, c, d = x, rng.randrange(1, n), 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


_PRIMITIVE_ROOTS: Dict[int, int] = {}


def _primitive_root(p: int) -> int:
    g = _PRIMITIVE_ROOTS.get(p)
    if g is not None:
        return g
    order = p - 1
    primes = [q for q in range(2, order + 1) if order % q == 0 and is_prime(q)]
    for cand in range(2, p):
        if all(pow(cand, order // q, p) != 1 for q in primes):
            _PRIMITIVE_ROOTS[p] = cand
            return cand
    _PRIMITIVE_ROOTS[p] = 1
    return 1


def _constant_atoms(desc: FieldDescriptor, value) -> List[Tuple[Entry, int]]:
    """Multiplicative decomposition of a constant into canonical atoms.

    Char 0: sign atom -1 plus prime atoms with integer exponents.  Char p:
    a power of the least primitive root.  Without this the normal form could
    not satisfy multilinearity on the unit parts."""
    p = desc.characteristic
    out: List[Tuple[Entry, int]] = []
    if p:
        c = int(value) % p
        if c == 1 or p == 2:
            return out
        g = _primitive_root(p)
        ind = 0
        acc = 1
        while acc != c:
            acc = (acc * g) % p
            ind += 1
        if ind:
            out.append((RationalFunction.const(desc, g), ind))
        return out
    frac = Fraction(value)
    if frac < 0:
        out.append((RationalFunction.const(desc, -1), 1))
        frac = -frac
    for q, e in _int_prime_factors(frac.numerator).items():
        out.append((RationalFunction.const(desc, q), e))
    for q, e in _int_prime_factors(frac.denominator).items():
        out.append((RationalFunction.const(desc, q), -e))
    return out


def _torsion_order(desc: FieldDescriptor, entry: Entry) -> Optional[int]:
    if not entry.is_constant():
        return None
    p = desc.characteristic
    if p:
        return p - 1 if p > 2 else None
    return 2 if entry.constant_value() == Fraction(-1) else None


def _reduce_torsion(desc: FieldDescriptor, terms: SymbolTerms) -> SymbolTerms:
    """Coefficients of tuples containing a finite-order atom live mod that order."""
    out: SymbolTerms = {}
    for t, c in terms.items():
        orders = [n for n in (_torsion_order(desc, e) for e in t) if n]
        if orders:
            c %= min(orders)
        if c:
            out[t] = c
    return out


def _entry_key(e: Entry):
    return (0 if e.is_constant() else 1, e.num.degree(), e.sort_key())


def _sorted_signed(entries: Tuple[Entry, ...]):
    order = sorted(range(len(entries)), key=lambda i: (_entry_key(entries[i]), i))
    inversions = 0
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if order[a] > order[b]:
                inversions += 1
    return tuple(entries[i] for i in order), (-1) ** inversions


def _is_steinberg(entries: Tuple[Entry, ...]) -> bool:
    one = 1
    for i in range(len(entries)):
        for j in range(len(entries)):
            if i == j:
                continue
            a, b = entries[i], entries[j]
            if b == RationalFunction.const(a.desc, 1) - a or b == -a:
                return True
    return False


class MilnorSymbol:
    """Formal Z-linear combination of entry tuples in normal form."""

    __slots__ = ("desc", "degree", "terms", "modulus", "_hash")

    def __init__(self, desc: FieldDescriptor, degree: int, terms: SymbolTerms,
                 modulus: Optional[Polynomial] = None, _normalized: bool = False):
        self.desc = desc
        self.degree = degree
        self.modulus = modulus
        if _normalized:
            self.terms = _reduce_torsion(desc, terms) if modulus is None else \
                {t: c for t, c in terms.items() if c}
        else:
            self.terms = _normalize_terms(desc, degree, terms, modulus)
        self._hash = hash((desc, degree, modulus,
                           tuple(sorted(((tuple(t), c) for t, c in self.terms.items()),
                                        key=lambda x: str(x)))))

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "MilnorSymbol") -> "MilnorSymbol":
        assert self.degree == other.degree and self.desc == other.desc
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, 0) + c
            if not out[t]:
                del out[t]
        return MilnorSymbol(self.desc, self.degree, out, self.modulus, _normalized=True)

    def __neg__(self) -> "MilnorSymbol":
        return MilnorSymbol(self.desc, self.degree,
                            {t: -c for t, c in self.terms.items()},
                            self.modulus, _normalized=True)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, n: int) -> "MilnorSymbol":
        if n == 0:
            return MilnorSymbol(self.desc, self.degree, {}, self.modulus, _normalized=True)
        return MilnorSymbol(self.desc, self.degree,
                            {t: n * c for t, c in self.terms.items()},
                            self.modulus, _normalized=True)

    def __eq__(self, other):
        return (isinstance(other, MilnorSymbol)
                and self.desc == other.desc
                and self.degree == other.degree
                and self.modulus == other.modulus
                and self.terms == other.terms)

    def __hash__(self):
        return self._hash

    def serialize(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t, c in sorted(self.terms.items(), key=lambda x: str(x[0])):
            inner = ", ".join(str(e) for e in t)
            parts.append(f"{c}*<{inner}>")
        return " + ".join(parts)

    def __repr__(self):
        return f"MilnorSymbol({self.serialize()})"


def _normalize_terms(desc, degree, raw: SymbolTerms, modulus) -> SymbolTerms:
    if modulus is not None:
        # residue-field symbols: entries are already canonical representatives
        out: SymbolTerms = {}
        for t, c in raw.items():
            if not c:
                continue
            out[t] = out.get(t, 0) + c
            if not out[t]:
                del out[t]
        return out
    one = RationalFunction.const(desc, 1)
    if degree == 1:
        # K1 is the multiplicative group: canonicalize by class value
        value = RationalFunction.const(desc, 1)
        for t, c in raw.items():
            if len(t) != 1:
                raise ValueError("tuple arity does not match symbol degree")
            if t[0].is_zero():
                raise ZeroDivisionError("zero entry in a symbol")
            value = value * t[0] ** c
        if value == one:
            return {}
        fac = factorize.factor(value)
        out = {}
        for atom, k in _constant_atoms(desc, fac.unit):
            out[(atom,)] = k
        for g, e in fac.factors:
            out[(RationalFunction.from_polynomial(g),)] = e
        return _reduce_torsion(desc, out)
    out = {}
    p = desc.characteristic
    if p > 2:
        half_order = (p - 1) // 2
        torsion_atom = RationalFunction.const(desc, _primitive_root(p))
    elif p == 2:
        half_order = 0
        torsion_atom = one
    else:
        half_order = 1
        torsion_atom = RationalFunction.const(desc, -1)
    for t, c in raw.items():
        if not c:
            continue
        if len(t) != degree:
            raise ValueError("tuple arity does not match symbol degree")
        for e in t:
            if e.is_zero():
                raise ZeroDivisionError("zero entry in a symbol")
        if degree >= 2 and _is_steinberg(t):
            continue
        # multilinear expansion over factorizations; units split into atoms
        # so that the unit parts also satisfy multilinearity on the nose
        options: List[List[Tuple[Entry, int]]] = []
        for e in t:
            fac = factorize.factor(e)
            opts: List[Tuple[Entry, int]] = list(_constant_atoms(desc, fac.unit))
            for g, k in fac.factors:
                opts.append((RationalFunction.from_polynomial(g), k))
            options.append(opts)

        def expand(i, acc_entries, acc_coeff):
            if i == len(options):
                entries = list(acc_entries)
                coeff = acc_coeff
                # orient; rewrite adjacent equal pairs by <f, f> = <-1, f>,
                # except when f is the torsion atom itself (kept, reduced mod order)
                while coeff:
                    tup, sign = _sorted_signed(tuple(entries))
                    coeff *= sign
                    entries = list(tup)
                    changed = False
                    for a in range(len(entries) - 1):
                        if entries[a] == entries[a + 1] and entries[a] != torsion_atom:
                            entries[a] = torsion_atom
                            coeff *= half_order if p else 1
                            changed = True
                            break
                    if not changed:
                        break
                tup = tuple(entries)
                if not coeff or any(e == one for e in tup):
                    return
                out[tup] = out.get(tup, 0) + coeff
                if not out[tup]:
                    del out[tup]
                return
            for entry, k in options[i]:
                expand(i + 1, acc_entries + [entry], acc_coeff * k)

        expand(0, [], c)
    return _reduce_torsion(desc, out)


def symbol(entries: Sequence[RationalFunction], coeff: int = 1) -> MilnorSymbol:
    """Normalized symbol <x1, ..., xn>."""
    entries = tuple(entries)
    if not entries:
        raise ValueError("degree must be >= 1")
    desc = entries[0].desc
    return MilnorSymbol(desc, len(entries), {entries: coeff})


def zero_symbol(desc: FieldDescriptor, degree: int) -> MilnorSymbol:
    return MilnorSymbol(desc, degree, {}, _normalized=True)


# -- residues -----------------------------------------------------------------


def _unit_part(f: RationalFunction, v: DivisorialValuation, a: int) -> RationalFunction:
    c = v.center
    desc = f.desc
    if a == 0:
        return f
    if isinstance(c, Polynomial):
        return f / RationalFunction.from_polynomial(c) ** a
    if c.kind == "variable":
        return f * RationalFunction.variable(desc, c.index) ** a
    return f * RationalFunction.variable(desc, desc.nvars - 1) ** a


def residue(s: MilnorSymbol, v: DivisorialValuation) -> MilnorSymbol:
    """Total tame-symbol residue into the residue field of v (degree drops by 1)."""
    if s.modulus is not None:
        raise UnsupportedDegree("residue of an already-reduced symbol")
    desc = s.desc
    n = s.degree
    if n == 1:
        # K1 -> K0: the residue is just the valuation total
        total = sum(c * valuation(t[0], v) for t, c in s.terms.items())
        return MilnorSymbol(desc, 0, {(): total} if total else {}, None, _normalized=True)
    rf = residue_field(desc, v)
    if rf.kind == "modulus" and n > 2:
        raise UnsupportedDegree(
            "degree >= 3 residues are only supported at centers with rational residue field")
    out_desc = rf.desc if rf.kind == "rational" else desc
    out_mod = v.center if rf.kind == "modulus" else None
    acc: SymbolTerms = {}
    minus_one_src = RationalFunction.const(desc, -1)
    for t, c in s.terms.items():
        vals = [valuation(e, v) for e in t]
        units = [_unit_part(e, v, a) for e, a in zip(t, vals)]
        # expand over subsets S of uniformizer-slots
        idxs = [i for i, a in enumerate(vals) if a != 0]
        for mask in range(1, 1 << len(idxs)):
            S = [idxs[i] for i in range(len(idxs)) if mask >> i & 1]
            coeff = c
            for i in S:
                coeff *= vals[i]
            # sign from moving the uniformizer slots to the front (stable)
            inversions = sum(1 for i in S for j in range(i) if j not in S)
            sign = (-1) ** inversions
            # <pi, pi, ...> collapses by <pi,pi> = <pi,-1>: two extra slots pick
            # up one transposition (degree <= 3 keeps this exhaustive)
            if len(S) == 3:
                sign = -sign
            rest: List[RationalFunction] = []
            for _ in range(len(S) - 1):
                rest.append(minus_one_src)
            for i in range(len(t)):
                if i not in S:
                    rest.append(units[i])
            reduced = tuple(_reduce_unit(e, rf) for e in rest)
            if any(e.is_zero() for e in reduced):
                raise ArithmeticError("unit reduced to zero; valuation bookkeeping broken")
            key = reduced
            acc[key] = acc.get(key, 0) + coeff * sign
            if not acc[key]:
                del acc[key]
    if rf.kind in ("rational", "constant"):
        return MilnorSymbol(out_desc, n - 1, acc, None)
    # degree-1 residue classes mod a center: one canonical representative
    one = RationalFunction.const(desc, 1)
    value = one
    for t, c in acc.items():
        value = value * t[0] ** c
    value = _mod_center_canonical(value, v.center, rf.main_var)
    clean = {} if value == one else {(value,): 1}
    return MilnorSymbol(out_desc, n - 1, clean, out_mod, _normalized=True)


# -- visible nonvanishing and certificates ------------------------------------


def _constant_infinite_order(desc: FieldDescriptor, value) -> bool:
    """Does a constant class certify nonvanishing for this constant field?

    Only in the free ambient over the literal rationals: torsion constants
    (prime fields, declared finite) and divisible ones (declared closed)
    die in the reported quotients."""
    if desc.constant_field != "rationals":
        return False
    return value not in (Fraction(1), Fraction(-1))


def k1_class_value(s: MilnorSymbol) -> RationalFunction:
    """Product of entries^coefficients of a degree-1 symbol."""
    assert s.degree == 1
    desc = s.desc
    acc = RationalFunction.const(desc, 1)
    for t, c in s.terms.items():
        acc = acc * t[0] ** c
    if s.modulus is not None:
        rf = ResidueField(desc, DivisorialValuation(AFFINE_PLANE, s.modulus), "modulus",
                          desc, main_var=_modulus_main_var(s.modulus))
        acc = _mod_center_canonical(acc, s.modulus, rf.main_var)
    return acc


def _modulus_main_var(h: Polynomial) -> int:
    return min((i for i in range(h.desc.nvars) if h.degree_in(i) > 0),
               key=lambda i: h.degree_in(i))


def k1_visibly_nonzero(s: MilnorSymbol) -> Optional[str]:
    """Terminal-class description if the degree-1 class is visibly nonzero."""
    if s.degree != 1 or s.is_zero():
        return None
    value = k1_class_value(s)
    if value.is_zero():
        return None
    if s.modulus is None:
        if not value.is_constant():
            return f"nonconstant class {value}"
        if _constant_infinite_order(s.desc, value.constant_value()):
            return f"constant of infinite order {value}"
        return None
    m = _modulus_main_var(s.modulus)
    if value.is_constant():
        if _constant_infinite_order(s.desc, value.constant_value()):
            return f"constant of infinite order {value} (mod {s.modulus})"
        return None
    if not residue_class_algebraic_over_constants(value, s.modulus, m):
        return f"transcendental class {value} mod ({s.modulus})"
    return None


def detect_type(desc: FieldDescriptor):
    """Constant-field type and characteristic from the declared descriptor.

    Finite torsion forces type 2 with q = p^m read off the unit-group order;
    infinite torsion (declared algebraically closed) is type 1 with p the
    unique prime acting invertibly on the unit group (0 in characteristic 0).
    """
    if desc.constant_field == DECLARED_FINITE:
        q = desc.order_q
        # unique prime p with log(|k*|+1) in Z log p
        n = q
        p = 2
        while n % p:
            p += 1
        while n % p == 0:
            n //= p
        if n != 1 or p != desc.characteristic:
            raise NeitherTypeError("declared finite order is not a prime power")
        return {"type": 2, "characteristic": p}
    if desc.constant_field == DECLARED_ALG_CLOSED:
        return {"type": 1, "characteristic": desc.characteristic}
    raise NeitherTypeError(
        "constant field matches neither an algebraically closed nor a finite field")


# -- witness valuations --------------------------------------------------------


def _candidate_valuations(xs: Sequence[RationalFunction]) -> List[DivisorialValuation]:
    desc = xs[0].desc
    seen = set()
    out: List[DivisorialValuation] = []
    for x in xs:
        fac = factorize.factor(x)
        batch = sorted((g for g, _e in fac.factors if g not in seen),
                       key=lambda g: (g.degree(), g.sort_key()))
        for g in batch:
            seen.add(g)
            out.append(at_center(g))
    for j in range(desc.nvars):
        out.append(at_variable_infinity(j))
    out.append(at_infinity())
    return out


def find_witness_valuation(xs: Sequence[RationalFunction]) -> Optional[DivisorialValuation]:
    """A divisorial valuation with v(x1) != 0, v(x_i) = 0 for i >= 2, and the
    residues of x2..xn algebraically independent in the residue field.

    Searches the divisors of x1's numerator and denominator plus the lines at
    infinity; returns None when no candidate qualifies.
    """
    xs = list(xs)
    if not xs:
        raise ValueError("empty input")
    for x in xs:
        if x.is_zero():
            raise ZeroDivisionError("zero entry")
    desc = xs[0].desc
    n = len(xs)
    if n >= 2:
        if any(x.is_constant() for x in xs):
            return None
        for i in range(n):
            for j in range(i + 1, n):
                if alg_dependent(xs[i], xs[j]):
                    return None
    x1 = xs[0]
    fac = factorize.factor(x1)
    candidates = [at_center(g) for g, _ in fac.factors]
    candidates.sort(key=lambda v: (v.center.degree(), v.center.sort_key()))
    candidates += [at_variable_infinity(j) for j in range(desc.nvars)]
    candidates.append(at_infinity())
    for v in candidates:
        if valuation(x1, v) == 0:
            continue
        if any(valuation(x, v) != 0 for x in xs[1:]):
            continue
        if n == 1:
            return v
        rf = residue_field(desc, v)
        residues = [_reduce_unit(x, rf) for x in xs[1:]]
        if rf.kind == "modulus":
            if n > 2:
                continue
            u = residues[0]
            if u.is_constant():
                continue
            if residue_class_algebraic_over_constants(u, v.center, rf.main_var):
                continue
            return v
        if any(u.is_constant() for u in residues):
            continue
        if n == 2:
            return v
        if n == 3:
            if rf.desc.nvars < 2:
                continue
            if alg_dependent(residues[0], residues[1]):
                continue
            return v
        continue
    return None


# -- nonvanishing certificates ---------------------------------------------------


@dataclass
class ChainStep:
    val: DivisorialValuation
    symbol_after: MilnorSymbol

    def to_json(self):
        return {"center": self.val.describe(), "symbol": self.symbol_after.serialize()}


@dataclass
class ResidueChain:
    quotient_tag: str
    steps: List[ChainStep]
    terminal: str
    substitution: Optional[List[str]] = None

    def to_json(self):
        return {
            "quotient": self.quotient_tag,
            "substitution": self.substitution,
            "steps": [s.to_json() for s in self.steps],
            "terminal": self.terminal,
            "verdict": "nonzero",
        }

    def to_json_str(self):
        return json.dumps(self.to_json(), indent=2)


def _quotient_tag(desc: FieldDescriptor) -> str:
    if desc.constant_field == DECLARED_ALG_CLOSED:
        return "mod-divisible"
    if desc.constant_field == DECLARED_FINITE:
        return "mod-torsion"
    return "multiplicative-free"


def _substituted_symbol(s: MilnorSymbol, images: List[RationalFunction]) -> MilnorSymbol:
    terms: SymbolTerms = {}
    for t, c in s.terms.items():
        key = tuple(e.compose(images) for e in t)
        terms[key] = terms.get(key, 0) + c
    return MilnorSymbol(s.desc, s.degree, terms)


def _certificate_search(s: MilnorSymbol, depth_budget: int) -> Optional[List[ChainStep]]:
    if s.is_zero():
        return None
    if s.degree == 1:
        return [] if k1_visibly_nonzero(s) else None
    if s.degree > 3:
        raise UnsupportedDegree("certificates support degree 1..3")
    entries = [e for t in s.terms for e in t if not e.is_constant()]
    if not entries:
        return None
    candidates = _candidate_valuations(entries)
    for v in candidates:
        rf = residue_field(s.desc, v)
        if s.degree >= 3 and rf.kind != "rational":
            continue
        try:
            r = residue(s, v)
        except (UnsupportedDegree, ArithmeticError):
            continue
        if r.is_zero():
            continue
        if r.degree == 1:
            if k1_visibly_nonzero(r):
                return [ChainStep(v, r)]
            continue
        sub = _certificate_search(r, depth_budget - 1)
        if sub is not None:
            return [ChainStep(v, r)] + sub
    return None


def nonvanishing_certificate(s: MilnorSymbol) -> Optional[ResidueChain]:
    """Chain of valuations whose iterated residues end in a visibly nonzero
    degree-1 class.  Existence certifies the symbol is nonzero in the reported
    quotient; None only means the search failed, never that the symbol vanishes.
    """
    if s.degree not in (1, 2, 3):
        raise UnsupportedDegree("certificates support degree 1..3")
    if s.is_zero():
        return None
    tag = _quotient_tag(s.desc)
    if s.degree == 1:
        term = k1_visibly_nonzero(s)
        return ResidueChain(tag, [], term) if term else None
    steps = _certificate_search(s, 3)
    if steps is not None:
        term = k1_visibly_nonzero(steps[-1].symbol_after)
        return ResidueChain(tag, steps, term)
    # model move: a unipotent substitution is a field automorphism, so it
    # preserves (non)vanishing; try a few before giving up
    desc = s.desc
    p = desc.characteristic
    consts = [1, 2] if p == 0 or p > 2 else [1]
    for c in consts:
        for src in range(desc.nvars):
            dst = (src + 1) % desc.nvars
            images = []
            for i in range(desc.nvars):
                base = RationalFunction.variable(desc, i)
                if i == src:
                    base = base + RationalFunction.variable(desc, dst) * c
                images.append(base)
            try:
                s2 = _substituted_symbol(s, images)
            except ZeroDivisionError:
                continue
            steps = _certificate_search(s2, 3)
            if steps is not None:
                term = k1_visibly_nonzero(steps[-1].symbol_after)
                return ResidueChain(tag, steps, term,
                                    substitution=[str(im) for im in images])
    return None


def replay_chain(s: MilnorSymbol, chain: ResidueChain) -> bool:
    """Recompute every step of a certificate and re-check the terminal class."""
    cur = s
    if chain.substitution is not None:
        images = [None] * s.desc.nvars
        from .polyfield import parse
        images = [parse(text, s.desc) for text in chain.substitution]
        cur = _substituted_symbol(cur, images)
    for step in chain.steps:
        cur = residue(cur, step.val)
        if cur != step.symbol_after:
            return False
    if cur.degree != 1:
        return False
    return k1_visibly_nonzero(cur) is not None
