"""Challenge generation, concealed oracles, fault injection, and campaigns.

A challenge hides an invertible field morphism (linear, monomial, triangular,
or a bounded composite), a sign, and a 64-bit scramble key.  The oracle
exposed to the engine answers only class queries; representatives carry a
keyed pseudo-random unit so that no constant information leaks.  Reports
compare the recovered morphism and sign against the hidden ones exactly.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import factorize
from .dependence import MultClass
from .polyfield import (
    FieldDescriptor,
    Polynomial,
    RationalFunction,
    parse,
    prime_field,
    rationals,
)
from .reconstruct import (
    FieldMorphism,
    OracleClaims,
    OracleMorphism,
    ReconstructionError,
    identity_morphism,
    invert_field_morphism,
    reconstruct_isomorphism,
)

FAMILIES = ("linear", "monomial", "de_jonquieres", "composite", "identity")


@dataclass
class Challenge:
    descriptor: FieldDescriptor
    hidden_map: FieldMorphism
    hidden_inverse: FieldMorphism
    hidden_sign: int
    scramble_key: int
    probe_budget: int = 64
    family: str = "composite"
    seed: int = 0
    power_twist: Optional[int] = None  # experimental, labeled synthetic

    def challenge_id(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:12]

    def to_json(self) -> dict:
        return {
            "field": str(self.descriptor),
            "characteristic": self.descriptor.characteristic,
            "variables": list(self.descriptor.variables),
            "family": self.family,
            "seed": self.seed,
            "hidden_map": self.hidden_map.serialize(),
            "hidden_sign": self.hidden_sign,
            "scramble_key": self.scramble_key,
            "probe_budget": self.probe_budget,
            "power_twist": self.power_twist,
        }


def challenge_from_json(data: dict) -> Challenge:
    char = data["characteristic"]
    names = tuple(data["variables"])
    desc = prime_field(char, *names) if char else rationals(*names)
    images = tuple(parse(data["hidden_map"]["images"][v], desc) for v in names)
    hidden = FieldMorphism(desc, desc, images, data["hidden_map"].get("constant_map", "identity"))
    inv = invert_field_morphism(hidden)
    if inv is None:
        raise ValueError("hidden map in the challenge file is not invertible")
    return Challenge(desc, hidden, inv, data["hidden_sign"], data["scramble_key"],
                     data.get("probe_budget", 64), data.get("family", "composite"),
                     data.get("seed", 0), data.get("power_twist"))


# -- map families ---------------------------------------------------------------


def _rand_const(desc, rng, nonzero=False):
    p = desc.characteristic
    if p:
        lo = 1 if nonzero else 0
        return rng.randrange(lo, p)
    c = 0
    while nonzero and c == 0:
        c = rng.randint(-3, 3)
    if not nonzero:
        c = rng.randint(-3, 3)
    return c


def _linear_map(desc: FieldDescriptor, rng: random.Random) -> Tuple[FieldMorphism, FieldMorphism]:
    r = desc.nvars
    p = desc.characteristic
    while True:
        A = [[_rand_const(desc, rng) for _ in range(r)] for _ in range(r)]
        det = A[0][0] * A[1][1] - A[0][1] * A[1][0] if r == 2 else _det3(A)
        det = det % p if p else det
        if det != 0:
            break
    b = [_rand_const(desc, rng) for _ in range(r)]
    images = []
    for i in range(r):
        acc = Polynomial.const(desc, b[i])
        for j in range(r):
            acc = acc + Polynomial.variable(desc, j).scale(A[i][j])
        images.append(RationalFunction.from_polynomial(acc))
    phi = FieldMorphism(desc, desc, tuple(images))
    inv = invert_field_morphism(phi, max_degree=1)
    assert inv is not None
    return phi, inv


def _det3(A):
    return (A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
            - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
            + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]))


def _monomial_map(desc: FieldDescriptor, rng: random.Random) -> Tuple[FieldMorphism, FieldMorphism]:
    r = desc.nvars
    # random product of elementary integer matrices: determinant +-1
    E = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    for _ in range(rng.randint(1, 4)):
        i, j = rng.randrange(r), rng.randrange(r)
        if i == j:
            continue
        c = rng.choice([-2, -1, 1, 2])
        for k in range(r):
            E[i][k] += c * E[j][k]
    if rng.random() < 0.5:
        E[0], E[-1] = E[-1], E[0]
    consts = [_rand_const(desc, rng, nonzero=True) if desc.characteristic else
              rng.choice([1, -1, 2]) for _ in range(r)]
    images = []
    for i in range(r):
        f = RationalFunction.const(desc, consts[i])
        for j in range(r):
            f = f * RationalFunction.variable(desc, j) ** E[i][j]
        images.append(f)
    phi = FieldMorphism(desc, desc, tuple(images))
    Einv = _int_matrix_inverse(E)
    inv_images = []
    for i in range(r):
        f = RationalFunction.const(desc, 1)
        for j in range(r):
            f = f * (RationalFunction.variable(desc, j) /
                     RationalFunction.const(desc, consts[j])) ** Einv[i][j]
        inv_images.append(f)
    inv = FieldMorphism(desc, desc, tuple(inv_images))
    _assert_inverse(phi, inv)
    return phi, inv


def _int_matrix_inverse(E):
    r = len(E)
    if r == 2:
        det = E[0][0] * E[1][1] - E[0][1] * E[1][0]
        assert det in (1, -1)
        return [[E[1][1] * det, -E[0][1] * det],
                [-E[1][0] * det, E[0][0] * det]]
    det = _det3(E)
    assert det in (1, -1)
    cof = [[0] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            minor = [[E[a][b] for b in range(r) if b != j] for a in range(r) if a != i]
            cof[j][i] = (-1) ** (i + j) * (minor[0][0] * minor[1][1] - minor[0][1] * minor[1][0])
    return [[c * det for c in row] for row in cof]


def _de_jonquieres_map(desc: FieldDescriptor, rng: random.Random
                       ) -> Tuple[FieldMorphism, FieldMorphism]:
    r = desc.nvars
    c = _rand_const(desc, rng, nonzero=True) if desc.characteristic else rng.choice([1, -1, 2])
    deg = rng.randint(1, 4)
    q = Polynomial.zero(desc)
    for dd in range(deg + 1):
        coef = _rand_const(desc, rng)
        if coef:
            q = q + Polynomial.monomial(desc, (dd,) + (0,) * (r - 1), coef)
    t2 = Polynomial.variable(desc, 1)
    images = [RationalFunction.variable(desc, 0),
              RationalFunction.from_polynomial(t2.scale(c) + q)]
    for i in range(2, r):
        images.append(RationalFunction.variable(desc, i))
    phi = FieldMorphism(desc, desc, tuple(images))
    inv_images = [RationalFunction.variable(desc, 0),
                  (RationalFunction.variable(desc, 1) - RationalFunction.from_polynomial(q))
                  / RationalFunction.const(desc, c)]
    for i in range(2, r):
        inv_images.append(RationalFunction.variable(desc, i))
    inv = FieldMorphism(desc, desc, tuple(inv_images))
    _assert_inverse(phi, inv)
    return phi, inv


def _assert_inverse(phi: FieldMorphism, inv: FieldMorphism):
    comp = phi.compose(inv)
    assert comp.is_identity(), "inverse verification failed"
    comp2 = inv.compose(phi)
    assert comp2.is_identity(), "inverse verification failed"


def _composite_map(desc: FieldDescriptor, rng: random.Random, max_total_degree: int = 8
                   ) -> Tuple[FieldMorphism, FieldMorphism]:
    makers = [_linear_map, _monomial_map, _de_jonquieres_map]
    for _attempt in range(40):
        k = rng.randint(2, 3)
        phi = identity_morphism(desc)
        inv = identity_morphism(desc)
        for _ in range(k):
            f, g = rng.choice(makers)(desc, rng)
            phi = f.compose(phi)
            inv = inv.compose(g)
        deg = max(max(im.num.degree(), im.den.degree()) for im in phi.images)
        if deg <= max_total_degree and not phi.is_identity():
            _assert_inverse(phi, inv)
            return phi, inv
    raise RuntimeError("could not draw a bounded composite map")


def generate_challenge(seed: int, family: str, descriptor: FieldDescriptor,
                       hidden_sign: Optional[int] = None,
                       power_twist: Optional[int] = None) -> Challenge:
    """Reproducible challenge; the hidden map's inverse is computed and
    verified at generation time."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    rng = random.Random(f"challenge:{seed}:{family}:{descriptor}")
    if family == "linear":
        phi, inv = _linear_map(descriptor, rng)
    elif family == "monomial":
        phi, inv = _monomial_map(descriptor, rng)
    elif family == "de_jonquieres":
        phi, inv = _de_jonquieres_map(descriptor, rng)
    elif family == "composite":
        phi, inv = _composite_map(descriptor, rng)
    else:
        phi = identity_morphism(descriptor)
        inv = identity_morphism(descriptor)
    sign = hidden_sign if hidden_sign is not None else rng.choice([1, -1])
    key = rng.getrandbits(64)
    return Challenge(descriptor, phi, inv, sign, key,
                     family=family, seed=seed, power_twist=power_twist)


# -- oracles ----------------------------------------------------------------------


def _scramble_unit(desc: FieldDescriptor, key: int, class_text: str):
    digest = hashlib.blake2b(class_text.encode(), key=key.to_bytes(8, "big"),
                             digest_size=8).digest()
    n = int.from_bytes(digest, "big")
    p = desc.characteristic
    if p:
        return 1 + n % (p - 1) if p > 2 else 1
    num = 1 + n % 7
    den = 1 + (n >> 8) % 7
    sign = -1 if (n >> 16) & 1 else 1
    return Fraction(sign * num, den)


def make_oracle(challenge: Challenge,
                claims: OracleClaims = OracleClaims()) -> OracleMorphism:
    """Concealed oracle for a challenge: class queries only, scrambled units."""
    sigma = challenge.hidden_map
    desc = challenge.descriptor
    twist = challenge.power_twist if challenge.power_twist is not None else challenge.hidden_sign

    def query(cls: MultClass) -> MultClass:
        out: Dict[Polynomial, int] = {}
        for h, e in cls.exps:
            img = sigma.apply(RationalFunction.from_polynomial(h))
            for g, k in factorize.factor(img).factors:
                out[g] = out.get(g, 0) + k * e * twist
        return MultClass._from_map(desc, cls.modulus, out)

    def representative(cls: MultClass) -> RationalFunction:
        rep = cls.canonical_representative()
        unit = _scramble_unit(desc, challenge.scramble_key, cls.serialize())
        return rep * RationalFunction.const(desc, unit)

    return OracleMorphism(query, desc, desc, claims, representative)


def make_inverse_oracle(challenge: Challenge) -> OracleMorphism:
    """Oracle concealing the inverse map with the same sign."""
    inv_challenge = Challenge(challenge.descriptor, challenge.hidden_inverse,
                              challenge.hidden_map, challenge.hidden_sign,
                              challenge.scramble_key ^ 0x5A5A5A5A,
                              challenge.probe_budget, challenge.family, challenge.seed)
    return make_oracle(inv_challenge)


def corrupt_oracle(oracle: OracleMorphism, desc: FieldDescriptor,
                   seed: int = 0) -> Tuple[OracleMorphism, str]:
    """Tamper with the answer for exactly one class the engine always queries.

    The corrupted oracle is still a well-defined function on classes; the
    engine must detect the inconsistency and fail with a stage tag."""
    rng = random.Random(f"corrupt:{seed}")
    one = RationalFunction.const(desc, 1)
    targets = [RationalFunction.variable(desc, i) for i in range(desc.nvars)]
    targets += [one + RationalFunction.variable(desc, i) for i in range(desc.nvars)]
    victim = MultClass.from_rational(targets[rng.randrange(len(targets))])
    junk = Polynomial.variable(desc, rng.randrange(desc.nvars)) + \
        Polynomial.const(desc, 1 + rng.randrange(2))

    def query(cls: MultClass) -> MultClass:
        out = oracle.query(cls)
        if cls == victim:
            tampered = out.exponent_map()
            tampered[junk] = tampered.get(junk, 0) + 1
            return MultClass._from_map(out.desc, out.modulus, tampered)
        return out

    corrupted = OracleMorphism(query, oracle.domain, oracle.codomain, oracle.claims,
                               oracle._representative)
    return corrupted, victim.serialize()


# -- campaigns ---------------------------------------------------------------------


@dataclass
class Report:
    challenge_id: str
    family: str
    field: str
    seed: int
    success: bool
    recovered_map: Optional[dict]
    recovered_sign: Optional[int]
    recovered_power: Optional[int]
    hidden_map: dict
    hidden_sign: int
    verification_counts: Dict[str, int]
    timings: Dict[str, float]
    failure: Optional[str] = None
    notes: List[str] = field(default_factory=list)

    def to_json(self, include_timings: bool = True) -> dict:
        data = {
            "challenge_id": self.challenge_id,
            "family": self.family,
            "field": self.field,
            "seed": self.seed,
            "success": self.success,
            "recovered_map": self.recovered_map,
            "recovered_sign": self.recovered_sign,
            "recovered_power": self.recovered_power,
            "hidden_map": self.hidden_map,
            "hidden_sign": self.hidden_sign,
            "verification_counts": self.verification_counts,
            "failure": self.failure,
            "notes": self.notes,
        }
        if include_timings:
            data["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return data

    def stable_json(self) -> str:
        return json.dumps(self.to_json(include_timings=False), sort_keys=True)


def run_challenge(challenge: Challenge, seed: int = 0,
                  verification_classes: int = 500) -> Report:
    oracle = make_oracle(challenge)
    t0 = time.perf_counter()
    try:
        outcome = reconstruct_isomorphism(oracle, seed=seed,
                                          verification_classes=verification_classes,
                                          probe_budget=challenge.probe_budget)
        recovered, sign = outcome.morphism, outcome.sign
        success = (recovered == challenge.hidden_map and sign == challenge.hidden_sign)
        failure = None if success else "recovered data differ from hidden"
        return Report(challenge.challenge_id(), challenge.family, str(challenge.descriptor),
                      challenge.seed, success, recovered.serialize(), sign, outcome.power,
                      challenge.hidden_map.serialize(), challenge.hidden_sign,
                      outcome.counts, {**outcome.timings,
                                       "total": time.perf_counter() - t0},
                      failure, outcome.notes)
    except ReconstructionError as err:
        return Report(challenge.challenge_id(), challenge.family, str(challenge.descriptor),
                      challenge.seed, False, None, None, None,
                      challenge.hidden_map.serialize(), challenge.hidden_sign,
                      {}, {"total": time.perf_counter() - t0},
                      failure=f"stage={err.stage}: {err}")


@dataclass
class CampaignConfig:
    characteristic: int = 0
    variables: Tuple[str, ...] = ("t1", "t2")
    families: Tuple[str, ...] = ("linear", "monomial", "de_jonquieres", "composite")
    count: int = 8
    base_seed: int = 1
    verification_classes: int = 500

    def descriptor(self) -> FieldDescriptor:
        if self.characteristic:
            return prime_field(self.characteristic, *self.variables)
        return rationals(*self.variables)

    @staticmethod
    def from_json(data: dict) -> "CampaignConfig":
        return CampaignConfig(
            characteristic=data.get("characteristic", 0),
            variables=tuple(data.get("variables", ("t1", "t2"))),
            families=tuple(data.get("families",
                                    ("linear", "monomial", "de_jonquieres", "composite"))),
            count=data.get("count", 8),
            base_seed=data.get("base_seed", 1),
            verification_classes=data.get("verification_classes", 500),
        )


def run_campaign(config: CampaignConfig) -> List[Report]:
    """Deterministic batch of challenges; per-challenge failures are recorded,
    never abort the campaign."""
    desc = config.descriptor()
    reports = []
    for i in range(config.count):
        family = config.families[i % len(config.families)]
        sign = 1 if i % 2 == 0 else -1
        ch = generate_challenge(config.base_seed + i, family, desc, hidden_sign=sign)
        reports.append(run_challenge(ch, seed=config.base_seed + i,
                                     verification_classes=config.verification_classes))
    return reports


def campaign_summary(reports: Sequence[Report]) -> dict:
    return {
        "total": len(reports),
        "successes": sum(r.success for r in reports),
        "failures": [r.to_json(include_timings=False) for r in reports if not r.success],
    }
