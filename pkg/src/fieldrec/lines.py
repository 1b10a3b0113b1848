"""Lines in the multiplicative group modulo constants or modulo the subfield
of p-th powers, good pairs, the shift-to-good search, intersection-set
membership, and the exact monomial-density computation.

Membership in an F^p-line is a semilinear solve: F is free over F^p on the
monomials t^alpha, 0 <= alpha_i < p, so writing every quantity in those
coordinates turns  lambda z = a x + b y  (lambda, a, b in F^p) into a linear
system over the field F^p, solved exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from .dependence import alg_dependent, is_regular, _dx_nonzero
from .differentials import independent
from .polyfield import (
    Polynomial,
    RationalFunction,
    random_polynomial,
)

CONSTANTS = "constants"
P_SUBFIELD = "p_subfield"


class ShiftBudgetExceeded(RuntimeError):
    """The candidate budget ran out; says nothing about nonexistence."""


def power_range(p: int) -> List[int]:
    """Admissible normalized powers: |m| = 1 for p in {0, 2}, else |m| <= (p-1)/2."""
    if p in (0, 2):
        return [1, -1]
    out = []
    for a in range(1, (p - 1) // 2 + 1):
        out.extend([a, -a])
    return out


def _classes_differ(x: RationalFunction, y: RationalFunction, base_field: str) -> bool:
    ratio = x / y
    if base_field == CONSTANTS or x.desc.characteristic == 0:
        return not ratio.is_constant()
    return _dx_nonzero(ratio)


@dataclass(frozen=True)
class LineSpec:
    base_field: str
    x: RationalFunction
    y: RationalFunction

    def __post_init__(self):
        if self.base_field not in (CONSTANTS, P_SUBFIELD):
            raise ValueError("base_field must be 'constants' or 'p_subfield'")
        if self.x.is_zero() or self.y.is_zero():
            raise ZeroDivisionError("line through zero")
        if not _classes_differ(self.x, self.y, self.base_field):
            raise ValueError("base points coincide in the quotient")


@dataclass(frozen=True)
class GoodPair:
    x1: RationalFunction
    x2: RationalFunction

    def __post_init__(self):
        if not is_good_pair(self.x1, self.x2):
            raise ValueError("not a good pair")


def decompose_p_coordinates(f: RationalFunction) -> Dict[Tuple[int, ...], RationalFunction]:
    """Coordinates of f in the basis {t^alpha : 0 <= alpha_i < p} of F over F^p."""
    desc = f.desc
    p = desc.characteristic
    if p == 0:
        raise ValueError("p-basis coordinates need positive characteristic")
    # f = N * D^(p-1) / D^p with D^p in the subfield
    num = f.num * f.den ** (p - 1)
    den = f.den ** p
    buckets: Dict[Tuple[int, ...], Dict] = {}
    for e, c in num.terms:
        alpha = tuple(x % p for x in e)
        gamma = tuple(x - a for x, a in zip(e, alpha))
        buckets.setdefault(alpha, {})[gamma] = c
    out = {}
    for alpha, terms in buckets.items():
        out[alpha] = RationalFunction(Polynomial(desc, terms), den)
    return out


def p_coordinate_rows(polys: Sequence[Polynomial]) -> List[List[RationalFunction]]:
    """Rows of p-basis coordinates of several polynomials, one row per basis
    monomial t^alpha (0 <= alpha_i < p) that occurs.

    Solving a semilinear system with unknowns in the subfield of p-th powers
    only needs the equation cleared of denominators; bucketing the cleared
    polynomials directly avoids the den**p blowup of full coordinates."""
    desc = polys[0].desc
    p = desc.characteristic
    buckets: Dict[Tuple[int, ...], List[Dict]] = {}
    for idx, poly in enumerate(polys):
        for e, c in poly.terms:
            alpha = tuple(x % p for x in e)
            gamma = tuple(x - a for x, a in zip(e, alpha))
            buckets.setdefault(alpha, [dict() for _ in polys])[idx][gamma] = c
    rows = []
    for alpha in sorted(buckets):
        rows.append([RationalFunction.from_polynomial(Polynomial(desc, dct))
                     for dct in buckets[alpha]])
    return rows


def _scalar_nullspace(rows: List[List[object]], ncols: int, char: int) -> List[List[object]]:
    """Nullspace basis over the constant field (plain ints mod p / Fractions)."""
    work = [row[:] for row in rows]
    pivots: List[int] = []
    rank = 0
    for col in range(ncols):
        pr = None
        for r in range(rank, len(work)):
            if work[r][col]:
                pr = r
                break
        if pr is None:
            continue
        work[rank], work[pr] = work[pr], work[rank]
        inv = pow(int(work[rank][col]), -1, char) if char else Fraction(1) / work[rank][col]
        work[rank] = [(c * inv) % char if char else c * inv for c in work[rank]]
        for r in range(len(work)):
            if r != rank and work[r][col]:
                f = work[r][col]
                work[r] = [(a - f * b) % char if char else a - f * b
                           for a, b in zip(work[r], work[rank])]
        pivots.append(col)
        rank += 1
        if rank == len(work):
            break
    free = [c for c in range(ncols) if c not in pivots]
    one = 1 if char else Fraction(1)
    basis = []
    for fc in free:
        vec = [0 if char else Fraction(0)] * ncols
        vec[fc] = one
        for i, pc in enumerate(pivots):
            v = work[i][fc]
            vec[pc] = (-v) % char if char else -v
        basis.append(vec)
    return basis


def _nullspace(rows: List[List[RationalFunction]], ncols: int) -> List[List[RationalFunction]]:
    """Basis of the solution space of rows * v = 0 over the ambient field."""
    if not rows:
        rows = []
    work = [row[:] for row in rows]
    pivots: List[int] = []
    rank = 0
    for col in range(ncols):
        pr = None
        for r in range(rank, len(work)):
            if not work[r][col].is_zero():
                pr = r
                break
        if pr is None:
            continue
        work[rank], work[pr] = work[pr], work[rank]
        inv = work[rank][col].inverse()
        work[rank] = [c * inv for c in work[rank]]
        for r in range(len(work)):
            if r != rank and not work[r][col].is_zero():
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[rank])]
        pivots.append(col)
        rank += 1
        if rank == len(work):
            break
    free = [c for c in range(ncols) if c not in pivots]
    if not rows:
        return []
    desc = rows[0][0].desc
    one = RationalFunction.const(desc, 1)
    zero = RationalFunction.const(desc, 0)
    basis = []
    for fc in free:
        vec = [zero] * ncols
        vec[fc] = one
        for i, pc in enumerate(pivots):
            vec[pc] = -work[i][fc]
        basis.append(vec)
    return basis


def line_membership(z: RationalFunction, L: LineSpec
                    ) -> Optional[Tuple[RationalFunction, RationalFunction]]:
    """Coefficients (a, b) with z = a x + b y up to base-field scaling, when
    they exist; the first nonzero coefficient is scaled to 1."""
    if z.is_zero():
        raise ZeroDivisionError("membership of zero")
    desc = z.desc
    p = desc.characteristic
    if L.base_field == P_SUBFIELD and p:
        # clear denominators: lambda Z = a X + b Y with polynomial sides
        Z = z.num * L.x.den * L.y.den
        X = L.x.num * z.den * L.y.den
        Y = L.y.num * z.den * L.x.den
        rows = [[rz, -rx, -ry] for rz, rx, ry in p_coordinate_rows([Z, X, Y])]
        sol = None
        for vec in _nullspace(rows, 3):
            if not vec[0].is_zero():
                lam, a, b = vec
                a = a / lam
                b = b / lam
                if z == a * L.x + b * L.y:
                    sol = (a, b)
                break
    else:
        den = z.den * L.x.den * L.y.den

        def coords(f: RationalFunction) -> Dict[Tuple[int, ...], object]:
            poly = f.num * den.divexact(f.den)
            return dict(poly.terms)

        cz, cx, cy = coords(z), coords(L.x), coords(L.y)
        keys = sorted(set(cz) | set(cx) | set(cy))
        zero = 0 if p else Fraction(0)
        rows = [[cz.get(k, zero),
                 (-cx.get(k, zero)) % p if p else -cx.get(k, zero),
                 (-cy.get(k, zero)) % p if p else -cy.get(k, zero)] for k in keys]
        sol = None
        for vec in _scalar_nullspace(rows, 3, p):
            if vec[0]:
                lam, a, b = vec
                inv = pow(int(lam), -1, p) if p else Fraction(1) / lam
                a = RationalFunction.const(desc, (a * inv) % p if p else a * inv)
                b = RationalFunction.const(desc, (b * inv) % p if p else b * inv)
                if z == a * L.x + b * L.y:
                    sol = (a, b)
                break
    if sol is None:
        return None
    a, b = sol
    lead = a if not a.is_zero() else b
    return a / lead, b / lead


def is_good_pair(x1: RationalFunction, x2: RationalFunction) -> bool:
    """x1 regular and d(x1), d(x2) independent over F."""
    if x1.is_zero() or x2.is_zero():
        raise ZeroDivisionError("zero entry")
    return is_regular(x1) and independent([x1, x2])


def shift_to_good(x: RationalFunction, budget: int = 64,
                  seed: int = 0) -> RationalFunction:
    """A regular y with d(x), d(y) independent, so that (y, x*y) is a good pair.

    Sweeps y = a t_j + x first, then seeded random low-degree polynomials;
    raises ShiftBudgetExceeded when the budget runs out (which is a search
    failure, not a nonexistence proof)."""
    desc = x.desc
    if x.is_zero():
        raise ZeroDivisionError("shift of zero")
    if not _dx_nonzero(x):
        raise ValueError("precondition failed: x is a p-th power times a constant")
    spent = 0

    def try_candidate(y: RationalFunction) -> Optional[RationalFunction]:
        nonlocal spent
        spent += 1
        if y.is_zero() or y.is_constant():
            return None
        if not independent([x, y]):
            return None
        if not is_regular(y):
            return None
        return y

    p = desc.characteristic
    a_values = range(1, p) if p else range(1, 1 + budget)
    for a in a_values:
        for j in range(desc.nvars):
            if spent >= budget:
                raise ShiftBudgetExceeded(f"no good shift found within {budget} attempts")
            tj = RationalFunction.variable(desc, j)
            y = try_candidate(tj * a + x)
            if y is not None:
                return y
    rng = random.Random(f"shift:{seed}")
    while spent < budget:
        cand = random_polynomial(desc, rng, max_degree=3, terms=4, nonzero=True)
        y = try_candidate(RationalFunction.from_polynomial(cand))
        if y is not None:
            return y
    raise ShiftBudgetExceeded(f"no good shift found within {budget} attempts")


def bt_member_detail(z: RationalFunction,
                     x1: RationalFunction, x2: RationalFunction,
                     y1: RationalFunction, y2: RationalFunction
                     ) -> Tuple[bool, bool]:
    """(membership, boundary_flag) for the intersection of the two shifted
    relative closures; boundary means a ratio was constant and the class-1
    convention decided it."""
    for f in (z, x1, x2, y1, y2):
        if f.is_zero():
            raise ZeroDivisionError("zero entry")
    rx = x1 / x2
    ry = y1 / y2
    if rx.is_constant() or ry.is_constant():
        raise ValueError("x1/x2 and y1/y2 must be nonconstant")
    zx = z / x2
    zy = z / y2
    boundary = zx.is_constant() or zy.is_constant()
    return alg_dependent(zx, rx) and alg_dependent(zy, ry), boundary


def bt_member(z, x1, x2, y1, y2) -> bool:
    return bt_member_detail(z, x1, x2, y1, y2)[0]


def line_image_power_test(candidates: Sequence[Tuple[RationalFunction, RationalFunction]],
                          x1: RationalFunction, x2: RationalFunction,
                          m: int) -> bool:
    """Do all claimed line correspondences (z, z') satisfy z'^m in the
    p-subfield line through x1^m, x2^m?  (x1, x2 are the image-side base
    points.)  m must lie in the normalized power range."""
    p = x1.desc.characteristic
    if m not in power_range(p):
        raise ValueError(f"power {m} outside the normalized range for p={p}")
    L = LineSpec(P_SUBFIELD, x1 ** m, x2 ** m)
    for _z, z_img in candidates:
        if line_membership(z_img ** m, L) is None:
            return False
    return True


def density_ratio(p: int, r: int, d: int) -> Fraction:
    """Exact density of polynomials in k[x, x2^p, ..., xr^p] among homogeneous
    degree-d ones: (sum_{n <= d/p} C(n+r-2, n)) / C(d+r-1, d)."""
    if r < 2:
        raise ValueError("need r >= 2")
    if d < 1:
        raise ValueError("need d >= 1")
    count = sum(comb(n + r - 2, n) for n in range(d // p + 1))
    total = comb(d + r - 1, d)
    return Fraction(count, total)
