"""Finite-field layer: F_{p^s} arithmetic, univariate and multivariate
factorization, absolute irreducibility over extensions."""

import random

import pytest

from fieldrec import gfq


def reassemble_uv(F, lc, facs):
    g = [lc]
    for h, e in facs:
        for _ in range(e):
            g = gfq.uv_mul(F, g, h)
    return g


def reassemble_mv(F, nvars, lc, facs):
    acc = gfq.mv_const(F, nvars, lc)
    for h, e in facs:
        for _ in range(e):
            acc = gfq.mv_mul(F, acc, h)
    return acc


def test_field_axioms_extension():
    F = gfq.GFq.get(3, 3)
    rng = random.Random(5)
    for _ in range(300):
        a, b, c = (F.rand(rng) for _ in range(3))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(F.add(a, b), c) == F.add(F.mul(a, c), F.mul(b, c))
        if not F.is_zero(a):
            assert F.mul(a, F.inv(a)) == F.one
    # Frobenius is an automorphism with the p-th root as inverse
    for _ in range(50):
        a = F.rand(rng)
        assert F.pth_root(F.pow_(a, 3)) == a
        assert F.pow_(F.pth_root(a), 3) == a


def test_univariate_factor_roundtrip():
    rng = random.Random(7)
    for trial in range(80):
        p = rng.choice([2, 3, 5])
        s = rng.choice([1, 2, 3])
        F = gfq.GFq.get(p, s)
        f = [F.one]
        for _ in range(rng.randint(1, 3)):
            g = [F.rand(rng) for _ in range(rng.randint(1, 4))] + [F.one]
            f = gfq.uv_mul(F, f, g)
        lc, facs = gfq.uv_factor(F, f, seed=trial)
        assert reassemble_uv(F, lc, facs) == f
        for h, _e in facs:
            assert gfq.uv_is_irreducible(F, h)


def test_univariate_matches_sympy_over_prime_field():
    import sympy
    x = sympy.Symbol("x")
    rng = random.Random(3)
    for trial in range(40):
        p = rng.choice([2, 3, 5, 7])
        F = gfq.GFq.get(p, 1)
        coeffs = [rng.randrange(p) for _ in range(rng.randint(2, 9))] + [1]
        f = [(c,) for c in coeffs]
        f = gfq.uv_trim(F, f)
        if gfq.uv_deg(f) < 1:
            continue
        _, mine = gfq.uv_factor(F, f, seed=trial)
        expr = sum(c * x ** i for i, (c,) in enumerate(f))
        _, theirs = sympy.factor_list(sympy.Poly(expr, x, modulus=p))
        assert sorted(gfq.uv_deg(h) for h, e in mine for _ in range(e)) == \
            sorted(h.degree() for h, e in theirs for _ in range(e))


def test_multivariate_factor_roundtrip():
    rng = random.Random(11)
    for trial in range(60):
        p = rng.choice([2, 3, 5])
        s = rng.choice([1, 2])
        F = gfq.GFq.get(p, s)
        nv = rng.choice([2, 3])

        def rand_mv(deg, terms):
            out = {}
            for _ in range(terms):
                e = [0] * nv
                for _ in range(rng.randint(0, deg)):
                    e[rng.randrange(nv)] += 1
                c = F.rand(rng)
                if not F.is_zero(c):
                    out[tuple(e)] = c
            return out

        f = {(0,) * nv: F.one}
        for _ in range(rng.randint(1, 3)):
            g = rand_mv(2, 3)
            if not g or gfq.mv_deg_total(g) < 1:
                continue
            f = gfq.mv_mul(F, f, g)
        if gfq.mv_deg_total(f) < 1:
            continue
        lc, facs = gfq.mv_factor(F, f, seed=trial)
        assert reassemble_mv(F, nv, lc, facs) == f


def test_multivariate_gcd():
    rng = random.Random(13)
    for trial in range(40):
        p = rng.choice([2, 3, 5])
        F = gfq.GFq.get(p, rng.choice([1, 2]))
        nv = 2

        def rand_mv(deg, terms):
            out = {}
            for _ in range(terms):
                e = [0] * nv
                for _ in range(rng.randint(0, deg)):
                    e[rng.randrange(nv)] += 1
                c = F.rand(rng)
                if not F.is_zero(c):
                    out[tuple(e)] = c
            return out

        a, b, c = rand_mv(2, 3), rand_mv(2, 3), rand_mv(2, 2)
        if not (a and b and c):
            continue
        g = gfq.mv_gcd(F, gfq.mv_mul(F, a, c), gfq.mv_mul(F, b, c))
        # gcd must be divisible by c up to the gcd of a and b
        assert gfq.mv_divexact(F, g, gfq.mv_gcd(F, g, c)) is not None
        q = gfq.mv_divexact(F, gfq.mv_mul(F, a, c), g)
        assert q is not None


def test_frobenius_identity_char2():
    F = gfq.GFq.get(2, 1)
    f = {(2, 0): F.one, (0, 2): F.one}  # t1^2 + t2^2 = (t1 + t2)^2
    lc, facs = gfq.mv_factor(F, f, 0)
    assert len(facs) == 1 and facs[0][1] == 2


def test_absolute_irreducibility():
    F3 = gfq.GFq.get(3, 1)
    # t1^2 + t2^2 irreducible over F_3 but splits over F_9
    f = {(2, 0): F3.one, (0, 2): F3.one}
    assert gfq.mv_is_irreducible(F3, f)
    assert not gfq.mv_absolutely_irreducible(F3, f)
    # t1 t2 - 1 is a torus: absolutely irreducible
    g = {(1, 1): F3.one, (0, 0): (2,)}
    assert gfq.mv_absolutely_irreducible(F3, g)
    # gcd of degrees 1 shortcut
    h = {(2, 0): F3.one, (0, 1): F3.one}  # t1^2 + t2
    assert gfq.mv_absolutely_irreducible(F3, h)


def test_embedding_is_ring_hom():
    rng = random.Random(23)
    F = gfq.GFq.get(3, 2)
    big = gfq.GFq.get(3, 4)
    emb = F.embedding_into(big)
    for _ in range(60):
        a, b = F.rand(rng), F.rand(rng)
        assert emb(F.add(a, b)) == big.add(emb(a), emb(b))
        assert emb(F.mul(a, b)) == big.mul(emb(a), emb(b))
    assert emb(F.one) == big.one
