"""Dependence relations: algebraic dependence, p-multiplicative dependence,
regular elements; cross-checked against the brute-force relation oracle."""

import random

import pytest

from fieldrec import dependence as dep
from fieldrec.differentials import independent
from fieldrec.polyfield import (
    RationalFunction,
    parse,
    prime_field,
    random_rational,
    rationals,
)
from oracles import dependent_bruteforce, relation_bruteforce


def test_alg_dependent_examples(Q2):
    assert dep.alg_dependent(parse("t1", Q2), parse("t1^2+1", Q2))
    assert not dep.alg_dependent(parse("t1", Q2), parse("t2", Q2))
    assert dep.alg_dependent(parse("t1*t2", Q2), parse("(t1*t2)^3 + t1*t2", Q2))
    with pytest.raises(ZeroDivisionError):
        dep.alg_dependent(parse("0", Q2), parse("t1", Q2))


def test_alg_dependent_constant_convention(Q2):
    assert dep.alg_dependent(parse("3", Q2), parse("7", Q2))
    assert not dep.alg_dependent(parse("3", Q2), parse("t1", Q2))
    assert not dep.alg_dependent(parse("t1", Q2), parse("3", Q2))


def test_in_rel_alg_closure_examples(Q2):
    assert dep.in_rel_alg_closure(parse("t1^2", Q2), parse("t1", Q2))
    assert not dep.in_rel_alg_closure(parse("t2", Q2), parse("t1", Q2))
    assert dep.in_rel_alg_closure(parse("(t1^2+1)/t1", Q2), parse("t1", Q2))
    assert dep.in_rel_alg_closure(parse("5", Q2), parse("t1", Q2))
    # explicit minimal polynomial for the third example: z t1 = t1^2 + 1
    z = parse("(t1^2+1)/t1", Q2)
    t1 = parse("t1", Q2)
    assert (z * t1 - t1 ** 2 - 1).is_zero()


def test_dependence_vs_bruteforce_oracle(Q2, F3, rng):
    agree = 0
    for trial in range(60):
        desc = Q2 if trial % 2 == 0 else F3
        if rng.random() < 0.4:
            w = random_rational(desc, rng, 2, 2, nonzero=True)
            if w.is_constant():
                continue
            x = w ** 2 + w
            y = (w + 1) ** 3
        else:
            x = random_rational(desc, rng, 2, 3, nonzero=True)
            y = random_rational(desc, rng, 2, 3, nonzero=True)
        if x.is_zero() or y.is_zero() or x.is_constant() or y.is_constant():
            continue
        assert dep.alg_dependent(x, y) == dependent_bruteforce(x, y), (str(x), str(y))
        agree += 1
    assert agree >= 40


def test_dependence_relation_certificate(Q2, rng):
    for _ in range(15):
        w = random_rational(Q2, rng, 2, 2, nonzero=True)
        if w.is_constant():
            continue
        x = w ** 2
        y = w ** 3 + 1
        W = dep.dependence_relation(x, y)
        assert W is not None
        assert W.compose((x, y)).is_zero()


def test_equivalence_relation_properties(Q2, rng):
    # reflexive / symmetric on nonconstant classes; transitive within k(u)
    for _ in range(10):
        u = random_rational(Q2, rng, 2, 2, nonzero=True)
        if u.is_constant():
            continue
        a = u ** 2 + 1
        b = (u + 1) ** 2
        c = u ** 3
        assert dep.alg_dependent(a, a)
        assert dep.alg_dependent(a, b) == dep.alg_dependent(b, a)
        assert dep.alg_dependent(a, b) and dep.alg_dependent(b, c)
        assert dep.alg_dependent(a, c)


def test_char_p_jacobian_trap(F3):
    # t1 and t1^3 t2 are algebraically independent although their
    # differentials see only the separable part; the Jacobian criterion
    # would be fooled by t1, t1^3 which are dependent with d-independence false
    assert not dep.alg_dependent(parse("t1", F3), parse("t1^3*t2", F3))
    assert dep.alg_dependent(parse("t1", F3), parse("t1^3", F3))
    assert not independent([parse("t1", F3), parse("t1^3", F3)])


def test_consistency_with_differentials(Q2, F5, rng):
    # dependent implies d-dependent; in char 0 the two are equivalent
    for _ in range(25):
        x = random_rational(Q2, rng, 2, 2, nonzero=True)
        y = random_rational(Q2, rng, 2, 2, nonzero=True)
        if x.is_constant() or y.is_constant():
            continue
        dependent = dep.alg_dependent(x, y)
        assert dependent == (not independent([x, y]))
    for _ in range(15):
        x = random_rational(F5, rng, 2, 2, nonzero=True)
        y = random_rational(F5, rng, 2, 2, nonzero=True)
        if x.is_constant() or y.is_constant():
            continue
        if dep.alg_dependent(x, y):
            assert not independent([x, y])


def test_p_mult_dependent_examples(F3):
    assert dep.p_mult_dependent(parse("t1^2", F3), parse("t1^5", F3))
    assert not dep.p_mult_dependent(parse("t1", F3), parse("t2", F3))
    assert dep.p_mult_dependent(parse("t1", F3), parse("t1*t2^3", F3))


def test_p_mult_dependent_properties(F3, F5, Q2, rng):
    # equivalence-ish: x ~ x^n for n prime to p; trivial classes never relate
    for desc in (F3, F5):
        p = desc.characteristic
        for _ in range(20):
            x = random_rational(desc, rng, 2, 2, nonzero=True)
            if x.is_constant():
                continue
            cls = dep.MultClass.from_rational(x, dep.MOD_P)
            if cls.is_identity():
                continue
            for n in (1, 2, p + 1, p + 2):
                if n % p == 0:
                    continue
                assert dep.p_mult_dependent(x, x ** n)
            assert not dep.p_mult_dependent(x, x ** p)
    # char 0: proportional exponent vectors
    assert dep.p_mult_dependent(parse("t1^2/t2^2", Q2), parse("t1^3/t2^3", Q2))
    assert not dep.p_mult_dependent(parse("t1/t2", Q2), parse("t1*t2", Q2))


def test_mult_class_basics(Q2, F3):
    c = dep.MultClass.from_rational(parse("t1^2*t2/(t1+t2)", Q2))
    assert {(str(g), e) for g, e in c.exps} == {("t1", 2), ("t2", 1), ("t1 + t2", -1)}
    assert c.canonical_representative() == parse("t1^2*t2/(t1+t2)", Q2)
    assert (c * c.inverse()).is_identity()
    # mod-p classes reduce exponents
    c3 = dep.MultClass.from_rational(parse("t1^3*t2", F3), dep.MOD_P)
    assert [(str(g), e) for g, e in c3.exps] == [("t2", 1)]
    # constants have trivial class
    assert dep.MultClass.from_rational(parse("5", Q2)).is_identity()


def test_is_regular_examples(Q2):
    assert dep.is_regular(parse("t1", Q2))
    assert not dep.is_regular(parse("t1^2", Q2))
    assert dep.is_regular(parse("t1^2+t2^2", Q2))
    assert not dep.is_regular(parse("5", Q2))


def test_is_regular_char_p(F2, F3):
    assert dep.is_regular(parse("t1", F3))
    assert not dep.is_regular(parse("t1^3", F3))      # inseparable fiber
    assert not dep.is_regular(parse("t1^2", F3))      # composite
    assert dep.is_regular(parse("t1*t2", F2))
    assert not dep.is_regular(parse("t1^2*t2^2", F2))


def test_regular_implies_not_pth_power(F3, rng):
    from fieldrec.polyfield import pth_root
    accepted = 0
    for _ in range(40):
        x = random_rational(F3, rng, 2, 2, nonzero=True)
        if x.is_constant():
            continue
        if dep.is_regular(x):
            accepted += 1
            assert pth_root(x) is None
    assert accepted >= 5
