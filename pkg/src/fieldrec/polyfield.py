"""Exact multivariate polynomial and rational-function arithmetic over Q and F_p.

Everything downstream (differentials, dependence tests, symbols, the
reconstruction engine) computes with the two value types defined here:

* ``Polynomial`` — sparse exponent-vector -> coefficient maps, coefficients
  are ``fractions.Fraction`` in characteristic 0 and ints in [0, p) in
  characteristic p.  No floating point anywhere.
* ``RationalFunction`` — coprime numerator/denominator with the denominator
  monic under the fixed monomial order, so equal values are bit-identical
  (safe dict keys, byte-stable serialization).

The monomial order is graded lexicographic in the declared variable order.
Values are immutable and hashable; nothing here mutates after construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

Exponent = Tuple[int, ...]

RATIONALS = "rationals"
PRIME_FIELD = "prime_field"
DECLARED_FINITE = "declared_finite"
DECLARED_ALG_CLOSED = "declared_alg_closed"
_TAGS = (RATIONALS, PRIME_FIELD, DECLARED_FINITE, DECLARED_ALG_CLOSED)


class ParseError(ValueError):
    pass


class DescriptorMismatch(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FieldDescriptor:
    """Ambient field k(t1,...,tr): characteristic, constant-field tag, variables.

    ``order_q`` is only meaningful for the declared_finite tag (q a power of
    the characteristic).  Descriptors with a single variable are permitted
    because residue fields of divisorial valuations drop one variable; the
    dependence/lines/reconstruction layers require r >= 2 themselves.
    """

    characteristic: int
    constant_field: str
    variables: Tuple[str, ...]
    order_q: int = 0

    def __post_init__(self):
        if self.characteristic != 0 and not is_prime(self.characteristic):
            raise ValueError(f"characteristic must be 0 or prime, got {self.characteristic}")
        if self.constant_field not in _TAGS:
            raise ValueError(f"unknown constant field tag {self.constant_field!r}")
        if self.constant_field == RATIONALS and self.characteristic != 0:
            raise ValueError("rationals require characteristic 0")
        if self.constant_field == PRIME_FIELD and self.characteristic == 0:
            raise ValueError("prime_field requires positive characteristic")
        if self.constant_field == DECLARED_FINITE:
            p, q = self.characteristic, self.order_q
            if p == 0 or q < p:
                raise ValueError("declared_finite(q) requires positive characteristic")
            m = q
            while m % p == 0:
                m //= p
            if m != 1:
                raise ValueError(f"declared_finite order {q} is not a power of {p}")
        if len(self.variables) < 1:
            raise ValueError("need at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        for name in self.variables:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
                raise ValueError(f"bad variable name {name!r}")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def char(self) -> int:
        return self.characteristic

    def coeff(self, n: Union[int, Fraction]):
        """Coerce an integer/fraction into the coefficient domain."""
        if self.characteristic == 0:
            return Fraction(n)
        if isinstance(n, Fraction):
            if n.denominator % self.characteristic == 0:
                raise ZeroDivisionError("denominator vanishes in the prime field")
            inv = pow(n.denominator % self.characteristic, -1, self.characteristic)
            return (n.numerator * inv) % self.characteristic
        return n % self.characteristic

    def coeff_is_zero(self, c) -> bool:
        return c == 0

    def var_index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise ParseError(f"unknown variable {name!r}") from None

    def __str__(self):
        inner = ",".join(self.variables)
        if self.characteristic == 0:
            return f"Q({inner})"
        return f"F{self.characteristic}({inner})"


def rationals(*variables: str) -> FieldDescriptor:
    return FieldDescriptor(0, RATIONALS, tuple(variables))


def prime_field(p: int, *variables: str) -> FieldDescriptor:
    return FieldDescriptor(p, PRIME_FIELD, tuple(variables))


def _grlex_key(e: Exponent):
    return (sum(e), e)


def _coeff_str(c, char: int) -> str:
    if char == 0 and c.denominator != 1:
        return f"{c.numerator}/{c.denominator}"
    return str(int(c))


class Polynomial:
    """Multivariate polynomial in canonical sparse form."""

    __slots__ = ("desc", "_terms", "_key", "_hash")

    def __init__(self, desc: FieldDescriptor, terms: Dict[Exponent, object]):
        clean: Dict[Exponent, object] = {}
        r = desc.nvars
        for exp, c in terms.items():
            if len(exp) != r:
                raise ValueError("exponent vector has wrong length")
            if any(e < 0 for e in exp):
                raise ValueError("negative exponent in polynomial")
            c = desc.coeff(c) if not (desc.characteristic == 0 and isinstance(c, Fraction)) else c
            if c != 0:
                clean[exp] = c
        self.desc = desc
        self._terms = clean
        self._key = tuple(sorted(clean.items(), key=lambda t: _grlex_key(t[0]), reverse=True))
        self._hash = hash((desc, self._key))

    @classmethod
    def _raw(cls, desc: FieldDescriptor, clean: Dict[Exponent, object]) -> "Polynomial":
        # trusted constructor: terms already canonical (no zeros, right lengths)
        self = object.__new__(cls)
        self.desc = desc
        self._terms = clean
        self._key = tuple(sorted(clean.items(), key=lambda t: _grlex_key(t[0]), reverse=True))
        self._hash = hash((desc, self._key))
        return self

    @classmethod
    def zero(cls, desc: FieldDescriptor) -> "Polynomial":
        return cls._raw(desc, {})

    @classmethod
    def const(cls, desc: FieldDescriptor, c) -> "Polynomial":
        c = desc.coeff(c)
        if c == 0:
            return cls._raw(desc, {})
        return cls._raw(desc, {(0,) * desc.nvars: c})

    @classmethod
    def variable(cls, desc: FieldDescriptor, which: Union[int, str]) -> "Polynomial":
        i = which if isinstance(which, int) else desc.var_index(which)
        exp = tuple(1 if j == i else 0 for j in range(desc.nvars))
        return cls._raw(desc, {exp: desc.coeff(1)})

    @classmethod
    def monomial(cls, desc: FieldDescriptor, exp: Exponent, c=1) -> "Polynomial":
        return cls(desc, {tuple(exp): c})

    # -- queries ----------------------------------------------------------

    @property
    def terms(self) -> Tuple[Tuple[Exponent, object], ...]:
        return self._key

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def constant_value(self):
        if self.is_zero():
            return self.desc.coeff(0)
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return next(iter(self._terms.values()))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree_in(self, i: int) -> int:
        if not self._terms:
            return -1
        return max(e[i] for e in self._terms)

    def leading(self) -> Tuple[Exponent, object]:
        """Leading (exponent, coefficient) under grlex."""
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        return self._key[0]

    def coeff_of(self, exp: Exponent):
        return self._terms.get(tuple(exp), self.desc.coeff(0))

    def involves(self, i: int) -> bool:
        return any(e[i] for e in self._terms)

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if self.desc != other.desc:
            raise DescriptorMismatch("mixed field descriptors")

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        p = self.desc.characteristic
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = (s + c) % p if p else s + c
                if s == 0:
                    del out[e]
                else:
                    out[e] = s
        return Polynomial._raw(self.desc, out)

    def __neg__(self):
        p = self.desc.characteristic
        return Polynomial._raw(self.desc, {e: (-c) % p if p else -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        self._check(other)
        p = self.desc.characteristic
        if not self._terms or not other._terms:
            return Polynomial.zero(self.desc)
        out: Dict[Exponent, object] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                s = out.get(e)
                s = prod if s is None else s + prod
                if p:
                    s %= p
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return Polynomial._raw(self.desc, out)

    def __rmul__(self, other):
        return self * other

    def __radd__(self, other):
        return self + other

    def __rsub__(self, other):
        return (-self) + other

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial; use RationalFunction")
        result = Polynomial.const(self.desc, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(self.desc, other)
        return NotImplemented

    def scale(self, c) -> "Polynomial":
        c = self.desc.coeff(c)
        p = self.desc.characteristic
        if c == 0:
            return Polynomial.zero(self.desc)
        return Polynomial._raw(self.desc, {e: (v * c) % p if p else v * c for e, v in self._terms.items()})

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        lc = self.leading()[1]
        if lc == 1:
            return self
        p = self.desc.characteristic
        inv = pow(int(lc), -1, p) if p else Fraction(1) / lc
        return self.scale(inv)

    def partial(self, i: int) -> "Polynomial":
        p = self.desc.characteristic
        out: Dict[Exponent, object] = {}
        for e, c in self._terms.items():
            if e[i] == 0:
                continue
            coef = c * e[i]
            if p:
                coef %= p
            if coef == 0:
                continue
            e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
            prev = out.get(e2)
            out[e2] = coef if prev is None else prev + coef  # exponents distinct here
        return Polynomial._raw(self.desc, out)

    def evaluate(self, point: Sequence) -> object:
        """Evaluate at a point of constants, returning a coefficient."""
        p = self.desc.characteristic
        vals = [self.desc.coeff(v) for v in point]
        acc = self.desc.coeff(0)
        for e, c in self._terms.items():
            term = c
            for i, ei in enumerate(e):
                if ei:
                    term = term * vals[i] ** ei
            acc = acc + term
        return acc % p if p else acc

    def eval_partial(self, assign: Dict[int, object]) -> "Polynomial":
        """Specialize some variables to constants (result over the same descriptor)."""
        p = self.desc.characteristic
        vals = {i: self.desc.coeff(v) for i, v in assign.items()}
        out: Dict[Exponent, object] = {}
        for e, c in self._terms.items():
            coef = c
            e2 = list(e)
            for i, v in vals.items():
                if e[i]:
                    coef = coef * v ** e[i]
                    e2[i] = 0
            if p:
                coef %= p
            if coef == 0:
                continue
            key = tuple(e2)
            s = out.get(key)
            s = coef if s is None else s + coef
            if p:
                s %= p
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        return Polynomial._raw(self.desc, out)

    def compose_poly(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute polynomials for the variables."""
        desc_out = images[0].desc if images else self.desc
        caches: List[List[Polynomial]] = [[Polynomial.const(desc_out, 1), img] for img in images]

        def power(i, n):
            cache = caches[i]
            while len(cache) <= n:
                cache.append(cache[-1] * cache[1])
            return cache[n]

        acc = Polynomial.zero(desc_out)
        for e, c in self._terms.items():
            term = Polynomial.const(desc_out, c)
            for i, ei in enumerate(e):
                if ei:
                    term = term * power(i, ei)
            acc = acc + term
        return acc

    def compose(self, images: Sequence["RationalFunction"]) -> "RationalFunction":
        """Substitute rational functions for the variables."""
        desc_out = images[0].num.desc if images else self.desc
        caches: List[List[RationalFunction]] = [
            [RationalFunction.const(desc_out, 1), img] for img in images
        ]

        def power(i, n):
            cache = caches[i]
            while len(cache) <= n:
                cache.append(cache[-1] * cache[1])
            return cache[n]

        acc = RationalFunction.const(desc_out, 0)
        for e, c in self._terms.items():
            term = RationalFunction.const(desc_out, c)
            for i, ei in enumerate(e):
                if ei:
                    term = term * power(i, ei)
            acc = acc + term
        return acc

    def divexact(self, g: "Polynomial") -> "Polynomial":
        """Exact division; raises ValueError if g does not divide self."""
        self._check(g)
        if g.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero():
            return self
        p = self.desc.characteristic
        rem = dict(self._terms)
        out: Dict[Exponent, object] = {}
        g_lead_e, g_lead_c = g.leading()
        g_items = g._key
        inv = pow(int(g_lead_c), -1, p) if p else Fraction(1) / g_lead_c
        while rem:
            e = max(rem, key=_grlex_key)
            c = rem[e]
            q_e = tuple(a - b for a, b in zip(e, g_lead_e))
            if any(x < 0 for x in q_e):
                raise ValueError("not divisible")
            q_c = (c * inv) % p if p else c * inv
            out[q_e] = q_c
            for ge, gc in g_items:
                key = tuple(a + b for a, b in zip(q_e, ge))
                s = rem.get(key, 0) - q_c * gc
                if p:
                    s %= p
                if s == 0:
                    rem.pop(key, None)
                else:
                    rem[key] = s
        return Polynomial._raw(self.desc, out)

    def divides(self, other: "Polynomial") -> bool:
        try:
            other.divexact(self)
            return True
        except (ValueError, ZeroDivisionError):
            return False

    # -- plumbing ---------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.desc == other.desc
            and self._key == other._key
        )

    def __hash__(self):
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def sort_key(self):
        """Total order on canonical polynomials (grlex on terms, then coefficients)."""
        return tuple((e, str(c)) for e, c in self._key)

    def __str__(self):
        if not self._terms:
            return "0"
        char = self.desc.characteristic
        parts: List[str] = []
        for e, c in self._key:
            factors = []
            for i, ei in enumerate(e):
                if ei == 1:
                    factors.append(self.desc.variables[i])
                elif ei > 1:
                    factors.append(f"{self.desc.variables[i]}^{ei}")
            mono = "*".join(factors)
            if char == 0:
                neg = c < 0
                mag = -c if neg else c
            else:
                neg = False
                mag = c
            cs = _coeff_str(mag, char)
            if mono:
                body = mono if cs == "1" else f"{cs}*{mono}"
            else:
                body = cs
            if not parts:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"Polynomial({self})"


class RationalFunction:
    """Canonical fraction of polynomials: coprime, denominator monic under grlex."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Polynomial, den: Polynomial, _canonical: bool = False):
        if num.desc != den.desc:
            raise DescriptorMismatch("numerator/denominator descriptors differ")
        if den.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if not _canonical:
            num, den = _reduce_fraction(num, den)
        self.num = num
        self.den = den
        self._hash = hash((num, den))

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        one = Polynomial.const(p.desc, 1)
        return cls(p, one, _canonical=True)

    @classmethod
    def const(cls, desc: FieldDescriptor, c) -> "RationalFunction":
        return cls.from_polynomial(Polynomial.const(desc, c))

    @classmethod
    def variable(cls, desc: FieldDescriptor, which) -> "RationalFunction":
        return cls.from_polynomial(Polynomial.variable(desc, which))

    @property
    def desc(self) -> FieldDescriptor:
        return self.num.desc

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("not a constant")
        p = self.desc.characteristic
        if p:
            return (self.num.constant_value() * pow(int(self.den.constant_value()), -1, p)) % p
        return self.num.constant_value() / self.den.constant_value()

    def _check(self, other):
        if self.desc != other.desc:
            raise DescriptorMismatch("mixed field descriptors")

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction.from_polynomial(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.const(self.desc, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    def __radd__(self, other):
        return self + other

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        self._check(other)
        # scaling by a constant keeps the fraction canonical
        if other.num.is_constant() and other.den.is_constant():
            if other.num.is_zero():
                return RationalFunction.const(self.desc, 0)
            return RationalFunction(self.num.scale(other.constant_value()), self.den,
                                    _canonical=True)
        if self.num.is_constant() and self.den.is_constant():
            if self.num.is_zero():
                return RationalFunction.const(self.desc, 0)
            return RationalFunction(other.num.scale(self.constant_value()), other.den,
                                    _canonical=True)
        return RationalFunction(self.num * other.num, self.den * other.den)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        other = self._coerce(other)
        self._check(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n == 0:
            return RationalFunction.const(self.desc, 1)
        if n < 0:
            if self.num.is_zero():
                raise ZeroDivisionError("zero to a negative power")
            base = self._swapped()
            n = -n
        else:
            base = self
        # coprimality survives powering; only the monic scaling needs redoing
        num = base.num ** n
        den = base.den ** n
        if not den.is_constant():
            lc = den.leading()[1]
            if lc != 1:
                p = den.desc.characteristic
                inv = pow(int(lc), -1, p) if p else Fraction(1) / lc
                num = num.scale(inv)
                den = den.scale(inv)
            return RationalFunction(num, den, _canonical=True)
        c = den.constant_value()
        p = den.desc.characteristic
        inv = pow(int(c), -1, p) if p else Fraction(1) / c
        return RationalFunction(num.scale(inv), Polynomial.const(den.desc, 1), _canonical=True)

    def _swapped(self) -> "RationalFunction":
        # 1/self without re-running the coprimality reduction
        num, den = self.den, self.num
        if den.is_constant():
            c = den.constant_value()
            p = den.desc.characteristic
            inv = pow(int(c), -1, p) if p else Fraction(1) / c
            return RationalFunction(num.scale(inv), Polynomial.const(den.desc, 1),
                                    _canonical=True)
        lc = den.leading()[1]
        if lc != 1:
            p = den.desc.characteristic
            inv = pow(int(lc), -1, p) if p else Fraction(1) / lc
            num = num.scale(inv)
            den = den.scale(inv)
        return RationalFunction(num, den, _canonical=True)

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return self._swapped()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalFunction.const(self.desc, other)
        return (
            isinstance(other, RationalFunction)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return self._hash

    def __bool__(self):
        return not self.num.is_zero()

    def compose(self, images: Sequence["RationalFunction"]) -> "RationalFunction":
        n = self.num.compose(images)
        d = self.den.compose(images)
        return n / d

    def sort_key(self):
        return (self.num.sort_key(), self.den.sort_key())

    def __str__(self):
        if self.den == Polynomial.const(self.desc, 1):
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RationalFunction({self})"


def _uv_gcd_degree(a: List, b: List, p: int) -> int:
    """Degree of gcd of univariate coefficient lists (exact, cheap)."""
    def trim(f):
        while f and not f[-1]:
            f.pop()
        return f

    a, b = trim(a[:]), trim(b[:])
    while b:
        # remainder of a by b over the field
        inv = pow(int(b[-1]), -1, p) if p else Fraction(1) / b[-1]
        while len(a) >= len(b) and a:
            c = a[-1] * inv
            if p:
                c %= p
            shift = len(a) - len(b)
            for i, bc in enumerate(b):
                a[shift + i] = (a[shift + i] - c * bc) % p if p else a[shift + i] - c * bc
            trim(a)
        a, b = b, a
    return len(a) - 1


def _specialize_list(poly: Polynomial, keep: int, c, p: int):
    deg = poly.degree_in(keep)
    out = [0] * (deg + 1)
    for e, cf in poly._terms.items():
        w = cf
        for i, ei in enumerate(e):
            if i != keep and ei:
                if c == 0:
                    w = 0
                    break
                if c != 1:
                    w = (w * pow(c, ei, p)) % p if p else w * c ** ei
        if w:
            out[e[keep]] = (out[e[keep]] + w) % p if p else out[e[keep]] + w
    return out


def _gfq_coprime_certificate(num: Polynomial, den: Polynomial, keep: int) -> bool:
    """Small-field fallback: specialize the other variables into an extension
    field and test the univariate gcd there."""
    from . import gfq

    p = num.desc.characteristic
    F = gfq.GFq.get(p, 3)
    rng_vals = [F.from_int(2), (1, 1, 0), (0, 1, 0), (2, 0, 1), (1, 2, 1), (0, 2, 2)]
    dn, dd = num.degree_in(keep), den.degree_in(keep)
    for val in rng_vals:
        val = tuple(v % p for v in val)

        def specialize(poly, deg):
            out = [F.zero] * (deg + 1)
            for e, cf in poly._terms.items():
                w = F.from_int(cf)
                for i, ei in enumerate(e):
                    if i != keep and ei:
                        w = F.mul(w, F.pow_(val, ei))
                        if F.is_zero(w):
                            break
                if not F.is_zero(w):
                    out[e[keep]] = F.add(out[e[keep]], w)
            return out

        la = specialize(num, dn)
        lb = specialize(den, dd)
        if F.is_zero(la[dn]) or F.is_zero(lb[dd]):
            continue
        if gfq.uv_deg(gfq.uv_gcd(F, la, lb)) == 0:
            return True
    return False


def _certified_coprime(num: Polynomial, den: Polynomial) -> bool:
    """True only when num, den are provably coprime via cheap univariate
    specializations: a common factor involving the kept variable either drops
    the specialized degree or shows up in the specialized gcd."""
    p = num.desc.characteristic
    r = num.desc.nvars
    if p == 0:
        consts = (1, 2, 0, 3, -1, 5)
    else:
        consts = tuple(range(1, p)) + (0,)
    for keep in range(r):
        dn = num.degree_in(keep)
        dd = den.degree_in(keep)
        ok = False
        for c in consts:
            la = _specialize_list(num, keep, c, p)
            lb = _specialize_list(den, keep, c, p)
            if not la[dn] or not lb[dd]:
                continue
            if _uv_gcd_degree(la, lb, p) == 0:
                ok = True
                break
        if not ok and p and _gfq_coprime_certificate(num, den, keep):
            ok = True
        if not ok:
            return False
    return True


def _reduce_fraction(num: Polynomial, den: Polynomial) -> Tuple[Polynomial, Polynomial]:
    if num.is_zero():
        return num, Polynomial.const(den.desc, 1)
    if den.is_constant():
        c = den.constant_value()
        p = den.desc.characteristic
        inv = pow(int(c), -1, p) if p else Fraction(1) / c
        return num.scale(inv), Polynomial.const(den.desc, 1)
    if not num.is_constant() and not _certified_coprime(num, den):
        g = poly_gcd(num, den)
        if not g.is_constant():
            num = num.divexact(g)
            den = den.divexact(g)
    if den.is_constant():
        return _reduce_fraction(num, den)
    lc = den.leading()[1]
    if lc != 1:
        p = den.desc.characteristic
        inv = pow(int(lc), -1, p) if p else Fraction(1) / lc
        num = num.scale(inv)
        den = den.scale(inv)
    return num, den


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd of multivariate polynomials (sympy-backed)."""
    if a.is_zero():
        return b.monic() if not b.is_zero() else b
    if b.is_zero():
        return a.monic()
    if a.is_constant() or b.is_constant():
        return Polynomial.const(a.desc, 1)
    from . import _sym

    g = _sym.gcd_dict(a.desc.characteristic, a.desc.variables, dict(a._terms), dict(b._terms))
    return Polynomial(a.desc, g).monic()


# -- p-th powers -----------------------------------------------------------


def _poly_pth_root(f: Polynomial) -> Optional[Polynomial]:
    p = f.desc.characteristic
    out: Dict[Exponent, object] = {}
    for e, c in f._terms.items():
        if any(x % p for x in e):
            return None
        # Fermat: c^(1/p) = c in F_p
        out[tuple(x // p for x in e)] = c
    return Polynomial._raw(f.desc, out)


def pth_root(f: RationalFunction) -> Optional[RationalFunction]:
    """Exact p-th root when f lies in the subfield generated by constants and p-th powers.

    Over a perfect prime field that subfield is exactly the set of p-th powers,
    so the root, when it exists, satisfies root**p == f on the nose.
    """
    p = f.desc.characteristic
    if p == 0:
        raise ValueError("pth_root requires positive characteristic")
    if f.is_zero():
        return RationalFunction.const(f.desc, 0)
    rn = _poly_pth_root(f.num)
    if rn is None:
        return None
    rd = _poly_pth_root(f.den)
    if rd is None:
        return None
    return RationalFunction(rn, rd)


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|([()+\-*/^]))")


def _tokenize(text: str) -> List[Tuple[str, str]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ParseError(f"unexpected character at {text[pos:pos + 8]!r}")
            break
        pos = m.end()
        if m.group(1):
            out.append(("int", m.group(1)))
        elif m.group(2):
            out.append(("name", m.group(2)))
        else:
            out.append(("op", m.group(3)))
    return out


class _Parser:
    def __init__(self, tokens: List[Tuple[str, str]], desc: FieldDescriptor):
        self.tokens = tokens
        self.pos = 0
        self.desc = desc

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expr(self) -> RationalFunction:
        val = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self) -> RationalFunction:
        val = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            rhs = self.factor()
            val = val * rhs if op == "*" else val / rhs
        return val

    def factor(self) -> RationalFunction:
        sign = 1
        while self.peek() in (("op", "+"), ("op", "-")):
            if self.take()[1] == "-":
                sign = -sign
        val = self.atom()
        while self.peek() == ("op", "^"):
            self.take()
            kind, text = self.take()
            if kind != "int":
                raise ParseError("exponent must be a nonnegative integer")
            val = val ** int(text)
        return val if sign == 1 else -val

    def atom(self) -> RationalFunction:
        kind, text = self.take()
        if kind == "int":
            return RationalFunction.const(self.desc, int(text))
        if kind == "name":
            return RationalFunction.variable(self.desc, text)
        if (kind, text) == ("op", "("):
            val = self.expr()
            if self.take() != ("op", ")"):
                raise ParseError("missing closing parenthesis")
            return val
        raise ParseError(f"unexpected token {text!r}")


def parse(text: str, desc: FieldDescriptor) -> RationalFunction:
    """Parse the toolkit grammar (integers, variables, + - * / ^, parentheses)."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty input")
    parser = _Parser(tokens, desc)
    val = parser.expr()
    if parser.pos != len(tokens):
        raise ParseError(f"trailing input near {tokens[parser.pos][1]!r}")
    return val


def arith(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    """Arithmetic with an operation tag (add, sub, mul, div)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


# -- randomized element generation (harness/tests) -------------------------


def random_polynomial(desc: FieldDescriptor, rng, max_degree: int = 2, terms: int = 3,
                      nonzero: bool = False) -> Polynomial:
    r = desc.nvars
    p = desc.characteristic
    out: Dict[Exponent, object] = {}
    for _ in range(terms):
        exp = [0] * r
        budget = rng.randint(0, max_degree)
        for _ in range(budget):
            exp[rng.randrange(r)] += 1
        c = rng.randint(1, p - 1) if p else Fraction(rng.randint(-4, 4))
        if c == 0:
            continue
        out[tuple(exp)] = c
    poly = Polynomial(desc, out)
    if nonzero and poly.is_zero():
        return Polynomial.const(desc, 1) + Polynomial.variable(desc, rng.randrange(r))
    return poly


def random_rational(desc: FieldDescriptor, rng, max_degree: int = 2, terms: int = 3,
                    nonzero: bool = False) -> RationalFunction:
    num = random_polynomial(desc, rng, max_degree, terms, nonzero=nonzero)
    den = random_polynomial(desc, rng, max_degree, terms, nonzero=True)
    rf = RationalFunction(num, den)
    if nonzero and rf.is_zero():
        return RationalFunction.from_polynomial(den)
    return rf
