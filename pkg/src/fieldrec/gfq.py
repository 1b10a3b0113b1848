"""Finite fields F_{p^s} with univariate and multivariate factorization.

sympy does not factor multivariate polynomials over finite fields, and the
regularity/absolute-irreducibility tests need coefficients in proper
extensions F_{p^s}, so this module is self-contained:

* ``GFq`` — field elements are coefficient tuples modulo a deterministically
  chosen irreducible modulus.
* univariate polynomials (coefficient lists, low to high): gcd, squarefree
  split, distinct-degree + Cantor-Zassenhaus equal-degree factorization.
* multivariate polynomials (exponent-tuple -> element dicts): primitive-PRS
  gcd and Kronecker-substitution factorization with divisor recombination.

All randomness is drawn from explicitly seeded ``random.Random`` instances,
so every result is reproducible.
"""

from __future__ import annotations

import random
import threading
from typing import Dict, List, Optional, Tuple

Elt = Tuple[int, ...]
UPoly = List[Elt]          # univariate, index = degree
MPoly = Dict[Tuple[int, ...], Elt]


# -- base prime-field univariate helpers (int coefficient lists) -----------

def _zp_trim(f: List[int]) -> List[int]:
    while f and f[-1] == 0:
        f.pop()
    return f

def _zp_mul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return _zp_trim(out)

def _zp_rem(f, g, p):
    f = f[:]
    dg = len(g) - 1
    inv = pow(g[-1], -1, p)
    while len(f) - 1 >= dg and f:
        c = (f[-1] * inv) % p
        shift = len(f) - 1 - dg
        for i, b in enumerate(g):
            f[shift + i] = (f[shift + i] - c * b) % p
        _zp_trim(f)
    return f

def _zp_gcd(f, g, p):
    f, g = f[:], g[:]
    while g:
        f, g = g, _zp_rem(f, g, p)
    if f:
        inv = pow(f[-1], -1, p)
        f = [(c * inv) % p for c in f]
    return f

def _zp_powmod(f, e, mod, p):
    result = [1]
    base = _zp_rem(f, mod, p)
    while e:
        if e & 1:
            result = _zp_rem(_zp_mul(result, base, p), mod, p)
        base = _zp_rem(_zp_mul(base, base, p), mod, p)
        e >>= 1
    return result

def _zp_sub(f, g, p):
    n = max(len(f), len(g))
    out = [((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p for i in range(n)]
    return _zp_trim(out)


def _zp_is_irreducible(f: List[int], p: int) -> bool:
    """Rabin irreducibility test over F_p."""
    n = len(f) - 1
    if n <= 0:
        return False
    if f[-1] != 1:
        inv = pow(f[-1], -1, p)
        f = [(c * inv) % p for c in f]
    x = [0, 1]
    if _zp_sub(_zp_powmod(x, p ** n, f, p), x, p):
        return False
    for ell in _prime_divisors(n):
        diff = _zp_sub(_zp_powmod(x, p ** (n // ell), f, p), x, p)
        if not diff:
            return False
        if len(_zp_gcd(f, diff, p)) > 1:
            return False
    return True


def _prime_divisors(n: int) -> List[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def find_irreducible(p: int, s: int) -> List[int]:
    """Deterministic monic irreducible of degree s over F_p."""
    if s == 1:
        return [0, 1]
    rng = random.Random(0xF1E1D * p + s)
    while True:
        f = [rng.randrange(p) for _ in range(s)] + [1]
        if f[0] == 0:
            f[0] = 1 + rng.randrange(p - 1) if p > 1 else 1
        if _zp_is_irreducible(f, p):
            return f


_FIELD_CACHE: Dict[Tuple[int, int], "GFq"] = {}
_FIELD_LOCK = threading.Lock()


class GFq:
    """F_{p^s} = F_p[z]/(modulus); elements are coefficient tuples of length s."""

    def __init__(self, p: int, s: int = 1, modulus: Optional[List[int]] = None):
        self.p = p
        self.s = s
        self.q = p ** s
        self.modulus = modulus or find_irreducible(p, s)
        assert len(self.modulus) == s + 1
        self.zero: Elt = (0,) * s
        self.one: Elt = (1,) + (0,) * (s - 1) if s > 0 else ()
        # reduction rows for z^k, k = s .. 2s-2
        self._red: List[List[int]] = []
        row = [(-c) % p for c in self.modulus[:-1]]
        self._red.append(row)
        for _ in range(s - 2):
            prev = self._red[-1]
            nxt = [0] + prev[:-1]
            carry = prev[-1]
            if carry:
                for i in range(s):
                    nxt[i] = (nxt[i] + carry * row[i]) % p
            self._red.append(nxt)

    @staticmethod
    def get(p: int, s: int = 1) -> "GFq":
        with _FIELD_LOCK:
            key = (p, s)
            F = _FIELD_CACHE.get(key)
            if F is None:
                F = GFq(p, s)
                _FIELD_CACHE[key] = F
            return F

    def from_int(self, n: int) -> Elt:
        return (n % self.p,) + (0,) * (self.s - 1)

    def is_zero(self, a: Elt) -> bool:
        return all(c == 0 for c in a)

    def add(self, a: Elt, b: Elt) -> Elt:
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def sub(self, a: Elt, b: Elt) -> Elt:
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def neg(self, a: Elt) -> Elt:
        p = self.p
        return tuple((-x) % p for x in a)

    def mul(self, a: Elt, b: Elt) -> Elt:
        p, s = self.p, self.s
        if s == 1:
            return ((a[0] * b[0]) % p,)
        prod = [0] * (2 * s - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % p
        out = prod[:s]
        for k in range(s, 2 * s - 1):
            c = prod[k]
            if c:
                row = self._red[k - s]
                for i in range(s):
                    out[i] = (out[i] + c * row[i]) % p
        return tuple(out)

    def inv(self, a: Elt) -> Elt:
        if self.is_zero(a):
            raise ZeroDivisionError("inverse of zero in GFq")
        if self.s == 1:
            return (pow(a[0], -1, self.p),)
        # extended Euclid on coefficient lists
        p = self.p
        r0, r1 = self.modulus[:], _zp_trim(list(a))
        t0, t1 = [], [1]
        while r1:
            # divmod r0 by r1
            q = []
            r = r0[:]
            dg = len(r1) - 1
            inv_lc = pow(r1[-1], -1, p)
            qq = [0] * (max(len(r) - dg, 0))
            while len(r) - 1 >= dg and r:
                c = (r[-1] * inv_lc) % p
                shift = len(r) - 1 - dg
                qq[shift] = c
                for i, b in enumerate(r1):
                    r[shift + i] = (r[shift + i] - c * b) % p
                _zp_trim(r)
            r0, r1 = r1, r
            t0, t1 = t1, _zp_trim([(x - y) % p for x, y in
                                   zip(_zp_mul(qq, t1, p) + [0] * len(t0),
                                       t0 + [0] * len(_zp_mul(qq, t1, p)))])
            # note: t_new = t0 - q*t1 computed as -(q*t1 - t0)
            t1 = [(-c) % p for c in t1]
        lc = pow(r0[-1], -1, p)
        t0 = [(c * lc) % p for c in t0]
        t0 = t0[: self.s] + [0] * max(0, self.s - len(t0))
        return tuple(t0[: self.s])

    def pow_(self, a: Elt, e: int) -> Elt:
        if e < 0:
            return self.pow_(self.inv(a), -e)
        result = self.one
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def pth_root(self, a: Elt) -> Elt:
        # Frobenius is bijective; x -> x^(p^(s-1)) inverts it
        return self.pow_(a, self.p ** (self.s - 1))

    def rand(self, rng: random.Random) -> Elt:
        return tuple(rng.randrange(self.p) for _ in range(self.s))

    def embedding_into(self, big: "GFq"):
        """Ring embedding F_{p^s} -> F_{p^{s*l}} (returns an element map)."""
        if big.p != self.p or big.s % self.s:
            raise ValueError("no embedding")
        if big.s == self.s:
            return lambda a: a
        # root of our modulus in the big field, deterministic smallest
        mod_up: UPoly = [big.from_int(c) for c in self.modulus]
        roots = uv_roots(big, mod_up)
        if not roots:
            raise RuntimeError("embedding root not found")
        root = min(roots)
        powers = [big.one]
        for _ in range(self.s - 1):
            powers.append(big.mul(powers[-1], root))

        def emb(a: Elt) -> Elt:
            acc = big.zero
            for c, pw in zip(a, powers):
                if c:
                    acc = big.add(acc, big.mul(big.from_int(c), pw))
            return acc

        return emb

    def __repr__(self):
        return f"GF({self.p}^{self.s})"


# -- univariate over GFq ----------------------------------------------------

def uv_trim(F: GFq, f: UPoly) -> UPoly:
    while f and F.is_zero(f[-1]):
        f.pop()
    return f

def uv_deg(f: UPoly) -> int:
    return len(f) - 1

def uv_add(F: GFq, f: UPoly, g: UPoly) -> UPoly:
    n = max(len(f), len(g))
    out = []
    for i in range(n):
        a = f[i] if i < len(f) else F.zero
        b = g[i] if i < len(g) else F.zero
        out.append(F.add(a, b))
    return uv_trim(F, out)

def uv_sub(F: GFq, f: UPoly, g: UPoly) -> UPoly:
    return uv_add(F, f, [F.neg(c) for c in g])

def uv_scale(F: GFq, f: UPoly, c: Elt) -> UPoly:
    if F.is_zero(c):
        return []
    return [F.mul(a, c) for a in f]

def uv_mul(F: GFq, f: UPoly, g: UPoly) -> UPoly:
    if not f or not g:
        return []
    out = [F.zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if not F.is_zero(a):
            for j, b in enumerate(g):
                out[i + j] = F.add(out[i + j], F.mul(a, b))
    return uv_trim(F, out)

def uv_divmod(F: GFq, f: UPoly, g: UPoly) -> Tuple[UPoly, UPoly]:
    if not g:
        raise ZeroDivisionError
    f = f[:]
    dg = uv_deg(g)
    inv = F.inv(g[-1])
    q = [F.zero] * max(len(f) - dg, 0)
    while f and uv_deg(f) >= dg:
        c = F.mul(f[-1], inv)
        shift = uv_deg(f) - dg
        q[shift] = c
        for i, b in enumerate(g):
            f[shift + i] = F.sub(f[shift + i], F.mul(c, b))
        uv_trim(F, f)
    return uv_trim(F, q), f

def uv_rem(F: GFq, f: UPoly, g: UPoly) -> UPoly:
    return uv_divmod(F, f, g)[1]

def uv_quo(F: GFq, f: UPoly, g: UPoly) -> UPoly:
    return uv_divmod(F, f, g)[0]

def uv_monic(F: GFq, f: UPoly) -> UPoly:
    if not f:
        return f
    return uv_scale(F, f, F.inv(f[-1]))

def uv_gcd(F: GFq, f: UPoly, g: UPoly) -> UPoly:
    f, g = f[:], g[:]
    while g:
        f, g = g, uv_rem(F, f, g)
    return uv_monic(F, f)

def uv_diff(F: GFq, f: UPoly) -> UPoly:
    out = []
    for i in range(1, len(f)):
        out.append(F.mul(f[i], F.from_int(i)))
    return uv_trim(F, out)

def uv_eval(F: GFq, f: UPoly, x: Elt) -> Elt:
    acc = F.zero
    for c in reversed(f):
        acc = F.add(F.mul(acc, x), c)
    return acc

def uv_powmod(F: GFq, f: UPoly, e: int, mod: UPoly) -> UPoly:
    result = [F.one]
    base = uv_rem(F, f, mod)
    while e:
        if e & 1:
            result = uv_rem(F, uv_mul(F, result, base), mod)
        base = uv_rem(F, uv_mul(F, base, base), mod)
        e >>= 1
    return result

def uv_pth_root_poly(F: GFq, f: UPoly) -> UPoly:
    """Root of f = g(x^p)^... : valid when f' == 0."""
    p = F.p
    out = []
    for i in range(0, len(f), p):
        out.append(F.pth_root(f[i]))
    return uv_trim(F, out)


def _uv_distinct_degree(F: GFq, f: UPoly) -> List[Tuple[UPoly, int]]:
    """f monic squarefree -> [(product of irreducibles of degree d, d)]."""
    out = []
    x = [F.zero, F.one]
    h = x[:]
    d = 0
    while uv_deg(f) > 2 * d:
        d += 1
        h = uv_powmod(F, h, F.q, f)
        g = uv_gcd(F, f, uv_sub(F, h, x))
        if uv_deg(g) > 0:
            out.append((g, d))
            f = uv_quo(F, f, g)
            if uv_deg(f) > 0:
                h = uv_rem(F, h, f)
    if uv_deg(f) > 0:
        out.append((f, uv_deg(f)))
    return out


def _uv_equal_degree(F: GFq, f: UPoly, d: int, rng: random.Random) -> List[UPoly]:
    """Cantor-Zassenhaus split of a monic squarefree product of degree-d factors."""
    n = uv_deg(f)
    if n == d:
        return [f]
    while True:
        a = [F.rand(rng) for _ in range(n)]
        a = uv_trim(F, a)
        if uv_deg(a) < 1:
            continue
        g = uv_gcd(F, f, a)
        if 0 < uv_deg(g) < n:
            pass
        elif F.p == 2:
            # trace map over F_{2^(s*d)}
            t = uv_rem(F, a, f)
            acc = t
            cur = t
            for _ in range(F.s * d - 1):
                cur = uv_rem(F, uv_mul(F, cur, cur), f)
                acc = uv_add(F, acc, cur)
            g = uv_gcd(F, f, acc)
        else:
            e = (F.q ** d - 1) // 2
            b = uv_powmod(F, a, e, f)
            g = uv_gcd(F, f, uv_sub(F, b, [F.one]))
        if 0 < uv_deg(g) < n:
            return _uv_equal_degree(F, g, d, rng) + _uv_equal_degree(F, uv_quo(F, f, g), d, rng)


def uv_factor(F: GFq, f: UPoly, seed: int = 0) -> Tuple[Elt, List[Tuple[UPoly, int]]]:
    """Complete factorization: (leading coefficient, [(monic irreducible, mult)])."""
    if not f:
        raise ZeroDivisionError("factor of zero polynomial")
    lc = f[-1]
    f = uv_monic(F, f)
    rng = random.Random(seed ^ 0x5EED)
    found: List[Tuple[UPoly, int]] = []

    def rec(g: UPoly, scale: int):
        if uv_deg(g) <= 0:
            return
        d = uv_diff(F, g)
        if not d:
            rec(uv_pth_root_poly(F, g), scale * F.p)
            return
        w = uv_quo(F, g, uv_gcd(F, g, d))
        # w: product of the distinct factors of g with multiplicity prime to p
        rest = g
        for prod, dd in _uv_distinct_degree(F, uv_monic(F, w)):
            for h in _uv_equal_degree(F, prod, dd, rng):
                h = uv_monic(F, h)
                e = 0
                while True:
                    q, r = uv_divmod(F, rest, h)
                    if r:
                        break
                    rest = q
                    e += 1
                found.append((h, e * scale))
        rec(rest, scale)

    rec(f, 1)
    found.sort(key=lambda t: (uv_deg(t[0]), [c for c in t[0]]))
    return lc, found


def uv_is_irreducible(F: GFq, f: UPoly) -> bool:
    n = uv_deg(f)
    if n <= 0:
        return False
    if n == 1:
        return True
    f = uv_monic(F, f)
    x = [F.zero, F.one]
    xr = uv_rem(F, x, f)
    h = uv_powmod(F, x, F.q ** n, f)
    if uv_sub(F, h, xr):
        return False
    for ell in _prime_divisors(n):
        g = uv_powmod(F, x, F.q ** (n // ell), f)
        if uv_deg(uv_gcd(F, f, uv_sub(F, g, xr))) > 0:
            return False
    return True


def uv_roots(F: GFq, f: UPoly) -> List[Elt]:
    _, factors = uv_factor(F, f, seed=1)
    out = []
    for h, _ in factors:
        if uv_deg(h) == 1:
            out.append(F.neg(h[0]))  # monic x + c -> root -c
    return sorted(out)


# -- multivariate over GFq ---------------------------------------------------

def mv_is_zero(f: MPoly) -> bool:
    return not f

def mv_const(F: GFq, nvars: int, c: Elt) -> MPoly:
    if F.is_zero(c):
        return {}
    return {(0,) * nvars: c}

def mv_add(F: GFq, f: MPoly, g: MPoly) -> MPoly:
    out = dict(f)
    for e, c in g.items():
        s = F.add(out.get(e, F.zero), c)
        if F.is_zero(s):
            out.pop(e, None)
        else:
            out[e] = s
    return out

def mv_neg(F: GFq, f: MPoly) -> MPoly:
    return {e: F.neg(c) for e, c in f.items()}

def mv_mul(F: GFq, f: MPoly, g: MPoly) -> MPoly:
    out: MPoly = {}
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            s = F.add(out.get(e, F.zero), F.mul(c1, c2))
            if F.is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
    return out

def mv_scale(F: GFq, f: MPoly, c: Elt) -> MPoly:
    if F.is_zero(c):
        return {}
    return {e: F.mul(v, c) for e, v in f.items()}

def mv_deg_total(f: MPoly) -> int:
    return max((sum(e) for e in f), default=-1)

def mv_deg_in(f: MPoly, i: int) -> int:
    return max((e[i] for e in f), default=-1)

def mv_partial(F: GFq, f: MPoly, i: int) -> MPoly:
    out: MPoly = {}
    for e, c in f.items():
        if e[i] == 0:
            continue
        k = F.mul(c, F.from_int(e[i]))
        if F.is_zero(k):
            continue
        out[e[:i] + (e[i] - 1,) + e[i + 1:]] = k
    return out

def mv_lead(f: MPoly) -> Tuple[Tuple[int, ...], Elt]:
    e = max(f, key=lambda t: (sum(t), t))
    return e, f[e]

def mv_monic(F: GFq, f: MPoly) -> MPoly:
    if not f:
        return f
    _, lc = mv_lead(f)
    return mv_scale(F, f, F.inv(lc))

def mv_divexact(F: GFq, f: MPoly, g: MPoly) -> Optional[MPoly]:
    """f / g if exact under grlex reduction, else None."""
    if not g:
        raise ZeroDivisionError
    if not f:
        return {}
    rem = dict(f)
    out: MPoly = {}
    ge, gc = mv_lead(g)
    inv = F.inv(gc)
    g_items = list(g.items())
    while rem:
        e = max(rem, key=lambda t: (sum(t), t))
        qe = tuple(a - b for a, b in zip(e, ge))
        if any(x < 0 for x in qe):
            return None
        qc = F.mul(rem[e], inv)
        out[qe] = qc
        for e2, c2 in g_items:
            key = tuple(a + b for a, b in zip(qe, e2))
            s = F.sub(rem.get(key, F.zero), F.mul(qc, c2))
            if F.is_zero(s):
                rem.pop(key, None)
            else:
                rem[key] = s
    return out

def mv_pth_root(F: GFq, f: MPoly) -> Optional[MPoly]:
    p = F.p
    out: MPoly = {}
    for e, c in f.items():
        if any(x % p for x in e):
            return None
        out[tuple(x // p for x in e)] = F.pth_root(c)
    return out

def mv_eval_partial(F: GFq, f: MPoly, assign: Dict[int, Elt]) -> MPoly:
    out: MPoly = {}
    for e, c in f.items():
        coef = c
        e2 = list(e)
        for i, v in assign.items():
            if e[i]:
                coef = F.mul(coef, F.pow_(v, e[i]))
                e2[i] = 0
        if F.is_zero(coef):
            continue
        key = tuple(e2)
        s = F.add(out.get(key, F.zero), coef)
        if F.is_zero(s):
            out.pop(key, None)
        else:
            out[key] = s
    return out

def mv_subs_unipotent(F: GFq, f: MPoly, src: int, dst: int, c: Elt) -> MPoly:
    """Substitute t_src -> t_src + c * t_dst (invertible)."""
    nvars = len(next(iter(f))) if f else 0
    out: MPoly = {}
    for e, coef in f.items():
        n = e[src]
        # binomial expansion of (t_src + c t_dst)^n
        term = coef
        for k in range(n + 1):
            from math import comb
            bc = comb(n, k) % F.p
            if bc == 0:
                continue
            val = F.mul(coef, F.mul(F.from_int(bc), F.pow_(c, k)))
            if F.is_zero(val):
                continue
            e2 = list(e)
            e2[src] = n - k
            e2[dst] += k
            key = tuple(e2)
            s = F.add(out.get(key, F.zero), val)
            if F.is_zero(s):
                out.pop(key, None)
            else:
                out[key] = s
    return out


def _involved(f: MPoly) -> List[int]:
    if not f:
        return []
    n = len(next(iter(f)))
    return [i for i in range(n) if any(e[i] for e in f)]

def _as_uv_in(f: MPoly, i: int) -> Dict[int, MPoly]:
    """View as univariate in t_i with multivariate coefficients."""
    out: Dict[int, MPoly] = {}
    for e, c in f.items():
        d = e[i]
        e2 = e[:i] + (0,) + e[i + 1:]
        out.setdefault(d, {})[e2] = c
    return out

def _from_uv_in(coeffs: Dict[int, MPoly], i: int) -> MPoly:
    out: MPoly = {}
    for d, part in coeffs.items():
        for e, c in part.items():
            out[e[:i] + (d,) + e[i + 1:]] = c
    return out


def mv_gcd(F: GFq, a: MPoly, b: MPoly) -> MPoly:
    """Monic multivariate gcd by primitive PRS."""
    if not a:
        return mv_monic(F, b)
    if not b:
        return mv_monic(F, a)
    via = _involved(a)
    vib = _involved(b)
    if not via or not vib:
        return mv_const(F, len(next(iter(a))), F.one)
    common = [i for i in via if i in vib]
    if not common:
        return mv_const(F, len(next(iter(a))), F.one)
    m = min(common, key=lambda i: max(mv_deg_in(a, i), mv_deg_in(b, i)))

    def content_pp(f):
        cs = _as_uv_in(f, m)
        cont: MPoly = {}
        for part in cs.values():
            cont = mv_gcd(F, cont, part)
        pp = {}
        for d, part in cs.items():
            q = mv_divexact(F, part, cont)
            assert q is not None
            pp[d] = q
        return cont, pp

    ca, pa = content_pp(a)
    cb, pb = content_pp(b)
    cont = mv_gcd(F, ca, cb)

    # primitive PRS in t_m on coefficient dicts
    def prs_deg(f):
        return max(f) if f else -1

    def prs_prem(A, B):
        # pseudo-remainder of A by B wrt main variable
        dA, dB = prs_deg(A), prs_deg(B)
        lcB = B[dB]
        A = {d: dict(c) for d, c in A.items()}
        while prs_deg(A) >= dB and A:
            dA = prs_deg(A)
            lcA = A[dA]
            # A := lcB*A - lcA*B*x^(dA-dB)
            newA: Dict[int, MPoly] = {}
            for d, c in A.items():
                newA[d] = mv_mul(F, c, lcB)
            for d, c in B.items():
                key = d + dA - dB
                sub = mv_mul(F, c, lcA)
                cur = newA.get(key, {})
                cur = mv_add(F, cur, mv_neg(F, sub))
                if cur:
                    newA[key] = cur
                else:
                    newA.pop(key, None)
            newA.pop(dA, None)
            A = {d: c for d, c in newA.items() if c}
        return A

    A, B = (pa, pb) if prs_deg(pa) >= prs_deg(pb) else (pb, pa)
    while B:
        R = prs_prem(A, B)
        if not R:
            break
        # primitive part of R
        rc: MPoly = {}
        for part in R.values():
            rc = mv_gcd(F, rc, part)
        R = {d: mv_divexact(F, part, rc) for d, part in R.items()}
        A, B = B, R
    if B:
        g = _from_uv_in(B, m)
    else:
        # gcd of primitive parts in the main variable
        g = _from_uv_in(A, m)
    g = mv_mul(F, g, cont)
    # g is only guaranteed to divide up to content in t_m; normalize by checking
    res = mv_monic(F, g)
    if mv_divexact(F, a, res) is not None and mv_divexact(F, b, res) is not None:
        return res
    # fall back: strip spurious content
    cs = _as_uv_in(res, m)
    cont2: MPoly = {}
    for part in cs.values():
        cont2 = mv_gcd(F, cont2, part)
    stripped = mv_divexact(F, res, cont2)
    if stripped is not None:
        res2 = mv_monic(F, stripped)
        if mv_divexact(F, a, res2) is not None and mv_divexact(F, b, res2) is not None:
            return res2
    return mv_const(F, len(next(iter(a))), F.one)


class KroneckerBlowup(RuntimeError):
    pass


def _kronecker_decode(exp: int, weights: List[int], bounds: List[int]) -> Optional[Tuple[int, ...]]:
    out = []
    for w, b in zip(reversed(weights), reversed(bounds)):
        d, exp = divmod(exp, w)
        if d > b:
            return None
        out.append(d)
    if exp:
        return None
    return tuple(reversed(out))


def _kronecker_squarefree(F: GFq, w: MPoly, seed: int, budget: int = 60000) -> List[MPoly]:
    """Irreducible monic factors of squarefree w (no monomial divisors)."""
    nvars = len(next(iter(w)))
    inv = _involved(w)
    if len(inv) == 0:
        return []
    if len(inv) == 1:
        i = inv[0]
        coeffs = [F.zero] * (mv_deg_in(w, i) + 1)
        for e, c in w.items():
            coeffs[e[i]] = c
        _, facs = uv_factor(F, coeffs, seed)
        out = []
        for h, mult in facs:
            assert mult == 1
            out.append({(0,) * i + (d,) + (0,) * (nvars - i - 1): c
                        for d, c in enumerate(h) if not F.is_zero(c)})
        return out

    bounds = [mv_deg_in(w, i) for i in range(nvars)]
    weights = [1] * nvars
    for i in range(1, nvars):
        weights[i] = weights[i - 1] * (bounds[i - 1] + 1)
    image: UPoly = []
    deg_img = sum(b * wt for b, wt in zip(bounds, weights))
    image = [F.zero] * (deg_img + 1)
    for e, c in w.items():
        image[sum(x * wt for x, wt in zip(e, weights))] = c
    image = uv_trim(F, image)
    _, ufacs = uv_factor(F, image, seed)

    remaining = dict(w)
    factors: List[MPoly] = []
    mults = [m for _, m in ufacs]
    polys = [h for h, _ in ufacs]

    # enumerate divisor exponent vectors c (0 <= c_i <= m_i) by total count
    import itertools
    total = sum(mults)
    tried = 0
    k = len(polys)

    def decode_candidate(vec) -> Optional[MPoly]:
        prod = [F.one]
        for h, c in zip(polys, vec):
            for _ in range(c):
                prod = uv_mul(F, prod, h)
        cand: MPoly = {}
        for d, coef in enumerate(prod):
            if F.is_zero(coef):
                continue
            e = _kronecker_decode(d, weights, bounds)
            if e is None:
                return None
            cand[e] = coef
        return cand

    size = 1
    while size < total and remaining and mv_deg_total(remaining) > 0:
        progressed = False
        for vec in itertools.product(*[range(m + 1) for m in mults]):
            if sum(vec) != size:
                continue
            tried += 1
            if tried > budget:
                raise KroneckerBlowup()
            cand = decode_candidate(vec)
            if cand is None or mv_deg_total(cand) <= 0:
                continue
            cand = mv_monic(F, cand)
            q = mv_divexact(F, remaining, cand)
            if q is not None:
                factors.append(cand)
                remaining = q
                progressed = True
                # factor removed; re-enumerate at same size on the remainder
                break
        if not progressed:
            size += 1
    if mv_deg_total(remaining) > 0:
        factors.append(mv_monic(F, remaining))
    return factors


def mv_factor(F: GFq, f: MPoly, seed: int = 0) -> Tuple[Elt, List[Tuple[MPoly, int]]]:
    """Complete multivariate factorization over F_{p^s}.

    Returns (unit, [(monic irreducible, multiplicity)]); reassembling the
    product reproduces f exactly.
    """
    if not f:
        raise ZeroDivisionError("factor of zero polynomial")
    nvars = len(next(iter(f)))
    _, lc = mv_lead(f)
    f = mv_monic(F, f)
    out: List[Tuple[MPoly, int]] = []

    # monomial content
    for i in range(nvars):
        mn = min(e[i] for e in f)
        if mn > 0:
            f = {e[:i] + (e[i] - mn,) + e[i + 1:]: c for e, c in f.items()}
            var = {(0,) * i + (1,) + (0,) * (nvars - i - 1): F.one}
            out.append((var, mn))

    for attempt in range(8):
        try:
            work = dict(f)
            acc: List[Tuple[MPoly, int]] = []
            scale = 1
            while mv_deg_total(work) > 0:
                parts = [mv_partial(F, work, i) for i in range(nvars)]
                if all(not pp for pp in parts):
                    rooted = mv_pth_root(F, work)
                    assert rooted is not None
                    work = rooted
                    scale *= F.p
                    continue
                g = {}
                for pp in parts:
                    if pp:
                        g = mv_gcd(F, g, pp)
                g = mv_gcd(F, g, work)
                wsf = mv_divexact(F, work, g)
                assert wsf is not None
                for h in _kronecker_squarefree(F, mv_monic(F, wsf), seed + attempt):
                    e = 0
                    while True:
                        q = mv_divexact(F, work, h)
                        if q is None:
                            break
                        work = q
                        e += 1
                    if e:
                        acc.append((h, e * scale))
            out.extend(acc)
            out.sort(key=lambda t: (mv_deg_total(t[0]), sorted(t[0].items())))
            return lc, out
        except KroneckerBlowup:
            # collision-heavy image: retry after a seeded unipotent substitution
            rng = random.Random(f"kron-retry:{seed}:{attempt}")
            src = rng.randrange(nvars)
            dst = (src + 1 + rng.randrange(nvars - 1)) % nvars
            c = F.from_int(1 + rng.randrange(F.p - 1)) if F.p > 2 else F.one
            fs = mv_subs_unipotent(F, f, src, dst, c)
            lc2, facs = mv_factor(F, fs, seed=seed + 1000 + attempt)
            inv_facs = []
            for h, e in facs:
                hb = mv_subs_unipotent(F, h, src, dst, F.neg(c))
                inv_facs.append((mv_monic(F, hb), e))
            out.extend(inv_facs)
            out.sort(key=lambda t: (mv_deg_total(t[0]), sorted(t[0].items())))
            return lc, out
    raise RuntimeError("factorization did not stabilize")


def mv_is_irreducible(F: GFq, f: MPoly, seed: int = 0) -> bool:
    if mv_deg_total(f) <= 0:
        return False
    _, facs = mv_factor(F, f, seed)
    return len(facs) == 1 and facs[0][1] == 1


def mv_absolutely_irreducible(F: GFq, f: MPoly, seed: int = 0,
                              known_irreducible: bool = False) -> bool:
    """Irreducibility over the algebraic closure.

    The conjugate factors of an F_q-irreducible polynomial share all partial
    degrees, so their number e divides every partial degree and the total
    degree; it then suffices to check irreducibility over F_{q^l} for the
    primes l dividing that gcd.
    """
    if mv_deg_total(f) <= 0:
        return False
    if not known_irreducible and not mv_is_irreducible(F, f, seed):
        return False
    nvars = len(next(iter(f)))
    degs = [mv_deg_in(f, i) for i in range(nvars)] + [mv_deg_total(f)]
    g = 0
    for d in degs:
        if d > 0:
            g = d if g == 0 else _gcd_int(g, d)
    if g == 1:
        return True
    for ell in _prime_divisors(g):
        big = GFq.get(F.p, F.s * ell)
        emb = F.embedding_into(big)
        fb = {e: emb(c) for e, c in f.items()}
        if not mv_is_irreducible(big, fb, seed):
            return False
    return True


def _gcd_int(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a
