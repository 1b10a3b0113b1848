"""Lines in the multiplicative quotients, good pairs, shifts, intersection
membership, power normalization, densities."""

import random
from fractions import Fraction

import pytest

from fieldrec import lines
from fieldrec.dependence import p_mult_dependent
from fieldrec.polyfield import (
    RationalFunction,
    parse,
    prime_field,
    random_rational,
    rationals,
)
from oracles import count_density_enumeration


def test_line_membership_constants(Q2):
    L = lines.LineSpec(lines.CONSTANTS, parse("t1", Q2), parse("t2", Q2))
    assert lines.line_membership(parse("t1+5*t2", Q2), L) == \
        (parse("1", Q2), parse("5", Q2))
    assert lines.line_membership(parse("t1*t2", Q2), L) is None
    # scaled memberships: first nonzero coefficient normalized to 1
    assert lines.line_membership(parse("7*t1 + 7*t2", Q2), L) == \
        (parse("1", Q2), parse("1", Q2))
    assert lines.line_membership(parse("t2", Q2), L) == (parse("0", Q2), parse("1", Q2))


def test_line_membership_p_subfield(F2):
    L = lines.LineSpec(lines.P_SUBFIELD, parse("t1", F2), parse("t2", F2))
    a, b = lines.line_membership(parse("t1^3 + t1*t2^2", F2), L)
    # (t1^2+t2^2) t1: the coefficient is in the subfield of squares
    assert (a, b) == (parse("1", F2), parse("0", F2))
    got = lines.line_membership(parse("t1^3 + t1*t2^2 + t2^3", F2), L)
    assert got == (parse("1", F2), parse("(t2^2)/(t1^2+t2^2)", F2))
    assert lines.line_membership(parse("t1*t2", F2), L) is None


def test_line_symmetry(Q2, F3, rng):
    for desc in (Q2, F3):
        x, y = parse("t1", desc), parse("t2", desc)
        Lxy = lines.LineSpec(lines.CONSTANTS, x, y)
        Lyx = lines.LineSpec(lines.CONSTANTS, y, x)
        for _ in range(40):
            z = random_rational(desc, rng, 1, 2, nonzero=True)
            m1 = lines.line_membership(z, Lxy)
            m2 = lines.line_membership(z, Lyx)
            assert (m1 is None) == (m2 is None)
            if m1 is not None:
                a1, b1 = m1
                a2, b2 = m2
                # both memberships hold up to constants, with swapped roles
                assert (z / (a1 * x + b1 * y)).is_constant()
                assert (z / (a2 * y + b2 * x)).is_constant()
                lead = b1 if not b1.is_zero() else a1
                assert (a2, b2) == (b1 / lead, a1 / lead)


def test_line_spec_invariants(Q2, F3):
    with pytest.raises(ValueError):
        lines.LineSpec(lines.CONSTANTS, parse("t1", Q2), parse("3*t1", Q2))
    with pytest.raises(ValueError):
        lines.LineSpec(lines.P_SUBFIELD, parse("t1", F3), parse("t1^4", F3))
    lines.LineSpec(lines.P_SUBFIELD, parse("t1", F3), parse("t1^2", F3))  # differ mod cubes


def test_good_pair_examples(Q2):
    assert lines.is_good_pair(parse("t1", Q2), parse("t2", Q2))
    assert not lines.is_good_pair(parse("t1", Q2), parse("t1^2", Q2))
    assert not lines.is_good_pair(parse("t1^2", Q2), parse("t2", Q2))
    assert lines.GoodPair(parse("t1", Q2), parse("t2", Q2))
    with pytest.raises(ValueError):
        lines.GoodPair(parse("t1^2", Q2), parse("t2", Q2))


def test_shift_to_good(Q2, F2, F3):
    y = lines.shift_to_good(parse("t1/t2", Q2))
    assert lines.is_good_pair(y, parse("t1/t2", Q2) * y)
    y2 = lines.shift_to_good(parse("t1", Q2))
    assert y2 == parse("t1+t2", Q2)  # first sweep candidate a=1, j=t2... verified good
    for desc in (F2, F3):
        x = parse("t1+t2", desc)
        y3 = lines.shift_to_good(x)
        assert lines.is_good_pair(y3, x * y3)
    with pytest.raises(ValueError):
        lines.shift_to_good(parse("t1^2", F2))
    with pytest.raises(lines.ShiftBudgetExceeded):
        lines.shift_to_good(parse("t1", Q2), budget=0)


def test_bt_member_examples(Q2):
    assert lines.bt_member(parse("t1-t2", Q2), parse("t1", Q2), parse("t2", Q2),
                           parse("t1-1", Q2), parse("t2-1", Q2))
    assert not lines.bt_member(parse("t1+t2^2", Q2), parse("t1", Q2), parse("t2", Q2),
                               parse("t1-1", Q2), parse("t2-1", Q2))
    verdict, boundary = lines.bt_member_detail(parse("t2", Q2), parse("t1", Q2),
                                               parse("t2", Q2), parse("t1-1", Q2),
                                               parse("t2-1", Q2))
    assert boundary  # z = x2: routed through the class-1 convention
    assert not verdict


def test_lineslem1_inclusion(Q2, F5, rng):
    # x1 - c x2 lies in the intersection through (x1 - c1, x2 - c2), c = c1/c2
    for trial in range(40):
        desc = Q2 if trial % 2 == 0 else F5
        p = desc.characteristic
        c1 = rng.randint(1, p - 1) if p else rng.randint(1, 6)
        c2 = rng.randint(1, p - 1) if p else rng.randint(1, 6)
        x1, x2 = parse("t1", desc), parse("t2", desc)
        c = RationalFunction.const(desc, c1) / RationalFunction.const(desc, c2)
        z = x1 - c * x2
        y1 = x1 - RationalFunction.const(desc, c1)
        y2 = x2 - RationalFunction.const(desc, c2)
        assert not p_mult_dependent(x1, y1)
        assert not p_mult_dependent(x2, y2)
        assert lines.bt_member(z, x1, x2, y1, y2)


def test_lineslem2_disjointness(F3, F5, rng):
    # z in both powered lines forces z in {1} or the x^{mn} ray
    for desc in (F3, F5):
        p = desc.characteristic
        mrange = lines.power_range(p)
        for _ in range(20):
            x = random_rational(desc, rng, 1, 2, nonzero=True)
            if x.is_constant():
                continue
            from fieldrec.dependence import MOD_P, MultClass
            if MultClass.from_rational(x, MOD_P).is_identity():
                continue
            m, n = rng.sample(mrange, 2)
            # sample from l(1, x^m)^n and test the other line
            a = random_rational(desc, rng, 1, 2, nonzero=True)
            b = random_rational(desc, rng, 1, 2, nonzero=True)
            w = a ** p + b ** p * x ** m
            if w.is_zero():
                continue
            z = w ** n
            # does z also lie in l(1, x^n)^m (classes mod p)?
            minv = pow(m % p, -1, p)
            w2_cls = MultClass.from_rational(z, MOD_P) ** minv
            w2 = w2_cls.canonical_representative()
            L = lines.LineSpec(lines.P_SUBFIELD, RationalFunction.const(desc, 1), x ** n)
            if lines.line_membership(w2, L) is not None:
                cls = MultClass.from_rational(z / x ** (m * n), MOD_P)
                assert cls.is_identity() or MultClass.from_rational(z, MOD_P).is_identity()
        # the ray element x^{mn} is always in both
        x = parse("t1", desc)
        for m, n in [(1, -1), (1, 2) if p == 5 else (1, -1)]:
            if m == n:
                continue
            z = x ** (m * n)
            L1 = lines.LineSpec(lines.P_SUBFIELD, RationalFunction.const(desc, 1), x ** m)
            assert lines.line_membership(x ** m, L1) is not None


def test_line_image_power_test(F3, F5):
    pairs = [(parse("t1+2*t2", F3), parse("t1+2*t2", F3))]
    assert lines.line_image_power_test(pairs, parse("t1", F3), parse("t2", F3), 1)
    inv_pairs = [(parse("t1+2*t2", F3), parse("t1+2*t2", F3).inverse())]
    assert not lines.line_image_power_test(inv_pairs, parse("t1", F3).inverse(),
                                           parse("t2", F3).inverse(), 1)
    assert lines.line_image_power_test(inv_pairs, parse("t1", F3).inverse(),
                                       parse("t2", F3).inverse(), -1)
    with pytest.raises(ValueError):
        lines.line_image_power_test(pairs, parse("t1", F3), parse("t2", F3), 2)
    # char 5 twisted by 2: passes only at m = 2 among the admissible range
    x, y = parse("t1", F5), parse("t2", F5)
    t = 3  # 3*2 = 6 = 1 mod 5: the twist whose square is line-preserving
    twisted = [(y * (1 + x), (parse("t2*(1+t1)", F5) ** t))]
    base1, base2 = y ** t, (x * y) ** t
    passing = [m for m in lines.power_range(5)
               if lines.line_image_power_test(twisted, base1, base2, m)]
    assert passing == [2]


def test_ml_consequence(Q2, F5, rng):
    # members of the intersection set lie on a powered p-subfield line for
    # some admissible m
    for desc in (Q2, F5):
        p = desc.characteristic
        x1, x2 = parse("t1", desc), parse("t2", desc)
        assert lines.is_good_pair(x1, x2)
        for _ in range(10):
            c1 = rng.randint(1, 4) if not p else rng.randint(1, p - 1)
            c2 = rng.randint(1, 4) if not p else rng.randint(1, p - 1)
            c = RationalFunction.const(desc, c1) / RationalFunction.const(desc, c2)
            z = x1 - c * x2
            assert lines.bt_member(z, x1, x2, x1 - RationalFunction.const(desc, c1),
                                   x2 - RationalFunction.const(desc, c2))
            found = [m for m in lines.power_range(p)
                     if lines.line_image_power_test([(z, z)], x1, x2, m)]
            assert found, "no admissible power puts the member on a powered line"


def test_density_examples():
    assert lines.density_ratio(2, 2, 4) == Fraction(3, 5)
    assert lines.density_ratio(3, 2, 2) == Fraction(1, 3)
    for p, r in [(2, 2), (3, 2), (5, 3)]:
        assert lines.density_ratio(p, r, 500) > 0


def test_density_matches_enumeration():
    for p in (2, 3, 5):
        for r in (2, 3):
            for d in (1, 2, 3, 4, 6, 9):
                assert lines.density_ratio(p, r, d) == count_density_enumeration(p, r, d)


def test_density_limit_and_tail():
    # the gap oscillates with period p (floor(d/p) plateaus), but decreases
    # strictly along the stride d = 0 mod p, checked on exact rationals
    for p in (2, 3, 5):
        for r in (2, 3):
            limit = Fraction(1, p ** (r - 1))
            gaps = [abs(lines.density_ratio(p, r, d) - limit)
                    for d in range(p, 501, p)]
            assert all(b < a for a, b in zip(gaps, gaps[1:]))
            assert gaps[-1] < limit * Fraction(3, 100)


def test_power_range():
    assert lines.power_range(0) == [1, -1]
    assert lines.power_range(2) == [1, -1]
    assert lines.power_range(5) == [1, -1, 2, -2]
    assert lines.power_range(7) == [1, -1, 2, -2, 3, -3]
