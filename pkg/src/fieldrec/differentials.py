"""The module of differentials of F = k(t1..tr) over k, with basis dt1..dtr.

``d`` is exact partial differentiation; its kernel is the constants in
characteristic 0 and the subfield of p-th powers in characteristic p, which
is what the dependence and line machinery lean on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .polyfield import (
    DescriptorMismatch,
    FieldDescriptor,
    Polynomial,
    RationalFunction,
)


class DerivativeError(ValueError):
    """No f' with d(f) = f' d(x) exists (or d(x) = 0)."""


@dataclass(frozen=True)
class DifferentialForm:
    desc: FieldDescriptor
    coeffs: Tuple[RationalFunction, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.desc.nvars:
            raise ValueError("coefficient vector has wrong length")
        for c in self.coeffs:
            if c.desc != self.desc:
                raise DescriptorMismatch("coefficient over wrong field")

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        return DifferentialForm(self.desc, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "DifferentialForm":
        return DifferentialForm(self.desc, tuple(-a for a in self.coeffs))

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def scale(self, f: RationalFunction) -> "DifferentialForm":
        return DifferentialForm(self.desc, tuple(f * a for a in self.coeffs))

    def __str__(self):
        parts = [f"({c})*d{v}" for c, v in zip(self.coeffs, self.desc.variables) if not c.is_zero()]
        return " + ".join(parts) if parts else "0"


def zero_form(desc: FieldDescriptor) -> DifferentialForm:
    z = RationalFunction.const(desc, 0)
    return DifferentialForm(desc, (z,) * desc.nvars)


def _partial_rf(f: RationalFunction, i: int) -> RationalFunction:
    num, den = f.num, f.den
    dn = num.partial(i)
    dd = den.partial(i)
    if dd.is_zero():
        if dn.is_zero():
            return RationalFunction.const(f.desc, 0)
        return RationalFunction(dn, den)
    return RationalFunction(dn * den - num * dd, den * den)


def d(f: RationalFunction) -> DifferentialForm:
    """Exact differential; zero exactly on constants (char 0) / p-th powers (char p)."""
    return DifferentialForm(f.desc, tuple(_partial_rf(f, i) for i in range(f.desc.nvars)))


def dlog(f: RationalFunction) -> DifferentialForm:
    """d(f)/f: additive on products."""
    if f.is_zero():
        raise ZeroDivisionError("dlog of zero")
    return d(f).scale(f.inverse())


def derivative_wrt(f: RationalFunction, x: RationalFunction) -> RationalFunction:
    """The unique f' with d(f) = f' d(x), when it exists.

    Computed from a single coordinate and then verified against all of them;
    inconsistency means f is not differentially dependent on x.
    """
    dx = d(x)
    if dx.is_zero():
        raise DerivativeError("d(x) = 0; derivative with respect to x undefined")
    df = d(f)
    i = next(j for j, c in enumerate(dx.coeffs) if not c.is_zero())
    fp = df.coeffs[i] / dx.coeffs[i]
    for j in range(f.desc.nvars):
        if df.coeffs[j] != fp * dx.coeffs[j]:
            raise DerivativeError("no f' with d(f) = f' d(x): inputs not dependent")
    return fp


def _rank(matrix: List[List[Polynomial]]) -> int:
    """Rank of a polynomial matrix over the fraction field (fraction-free elimination)."""
    rows = [row[:] for row in matrix]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    rank = 0
    col = 0
    while rank < nrows and col < ncols:
        pivot = None
        for r in range(rank, nrows):
            if not rows[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        for r in range(rank + 1, nrows):
            if rows[r][col].is_zero():
                continue
            factor = rows[r][col]
            rows[r] = [pv * rows[r][c] - factor * rows[rank][c] for c in range(ncols)]
        rank += 1
        col += 1
    return rank


def independent(fs: Sequence[RationalFunction]) -> bool:
    """Are d(f_1), ..., d(f_n) linearly independent over F?"""
    fs = list(fs)
    if not fs:
        raise ValueError("empty list")
    desc = fs[0].desc
    forms = [d(f) for f in fs]
    if len(fs) > desc.nvars:
        return False
    # clear denominators columnwise; scaling a column by a nonzero element
    # preserves rank: entry_i * prod(all dens) = num_i * prod(dens except own)
    matrix: List[List[Polynomial]] = []
    for i in range(desc.nvars):
        row = []
        for form in forms:
            entry = form.coeffs[i].num
            for j, other in enumerate(form.coeffs):
                if j != i:
                    entry = entry * other.den
            row.append(entry)
        matrix.append(row)
    return _rank(matrix) == len(fs)
