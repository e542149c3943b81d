import math
import random
from fractions import Fraction

import pytest

from orbitobs import elliptic
from orbitobs.arith import primes_up_to
from orbitobs.elliptic import (EllipticCurve, NumericContradiction, TbarForcedZero,
                               TorsionOrbitMembership, ec_add, ec_neg, ec_scalar_mul,
                               elliptic_order_spectrum, good_reduction, group_order,
                               is_torsion, make_point, on_curve, point_order_mod_p,
                               reduce_point, translated_subvariety_check)
from orbitobs.errors import (BadReductionPrime, InsufficientWitnesses, InvalidInput,
                             SingularReduction, TorsionPoint)

from oracles import (brute_point_order, ec_add_mod, enumerate_points, reduce_mod)

E = EllipticCurve(0, -2)
P = make_point(3, 5)
TWO_P = make_point(Fraction(129, 100), Fraction(-383, 1000))


def test_curve_validation():
    assert E.discriminant == -16 * 27 * 4
    with pytest.raises(InvalidInput):
        EllipticCurve(0, 0)


def test_group_law_examples():
    assert ec_add(E, P, None) == P and ec_add(E, None, P) == P
    assert ec_add(E, P, ec_neg(P)) is None
    assert ec_add(E, P, P) == TWO_P
    assert on_curve(E, TWO_P)
    assert ec_scalar_mul(E, 1, P) == P
    assert ec_scalar_mul(E, 2, P) == TWO_P
    assert ec_scalar_mul(E, 0, P) is None
    assert ec_scalar_mul(E, -3, P) == ec_neg(ec_scalar_mul(E, 3, P))


def test_singular_reduction():
    # y^2 = x^3 - 2 has discriminant divisible by 3
    with pytest.raises(SingularReduction):
        ec_add(E, (0, 1), (1, 1), 3)


def test_good_reduction_examples():
    assert good_reduction(E, 5)
    assert not good_reduction(E, 2) and not good_reduction(E, 3)


def test_reduce_point_examples():
    assert reduce_point(E, P, 7) == (3, 5)
    assert reduce_point(E, None, 7) is None
    assert reduce_point(E, TWO_P, 5) is None
    with pytest.raises(BadReductionPrime):
        reduce_point(E, P, 3)


def test_group_order_examples():
    assert group_order(E, 5) == 6
    assert group_order(EllipticCurve(0, 1), 5) == 6


def test_point_order_examples():
    assert point_order_mod_p(E, P, 5).point_order == 2
    assert point_order_mod_p(E, None, 7).point_order == 1
    assert point_order_mod_p(E, P, 7).point_order == 7
    assert brute_point_order(0, (3, 5), 7) == 7


def test_is_torsion_examples():
    assert is_torsion(E, None)
    assert not is_torsion(E, P)
    T = make_point(0, 2)
    E4 = EllipticCurve(0, 4)
    assert is_torsion(E4, T) and ec_scalar_mul(E4, 3, T) is None


def _random_curve_mod(rng, p):
    while True:
        a4, a6 = rng.randrange(p), rng.randrange(p)
        if (4 * a4 ** 3 + 27 * a6 ** 2) % p:
            return EllipticCurve(a4, a6)


def test_group_law_axioms_mod_p():
    rng = random.Random(1)
    for p in rng.sample([q for q in primes_up_to(1000) if q > 3], 25):
        C = _random_curve_mod(rng, p)
        pts = [elliptic.random_point(C, p, rng) for _ in range(6)] + [None]
        for _ in range(20):
            A, B, D = (rng.choice(pts) for _ in range(3))
            assert ec_add(C, A, B, p) == ec_add(C, B, A, p)
            assert ec_add(C, ec_add(C, A, B, p), D, p) == ec_add(C, A, ec_add(C, B, D, p), p)
            assert ec_add(C, A, B, p) == ec_add_mod(C.a4, A, B, p)


def test_group_law_axioms_over_q():
    Q1, Q2 = P, ec_scalar_mul(E, 3, P)
    Q3 = ec_neg(TWO_P)
    assert ec_add(E, Q1, Q2) == ec_add(E, Q2, Q1)
    assert ec_add(E, ec_add(E, Q1, Q2), Q3) == ec_add(E, Q1, ec_add(E, Q2, Q3))
    assert ec_add(E, Q1, Q2) == ec_scalar_mul(E, 4, P)


def test_reduction_is_a_homomorphism():
    for p in [q for q in primes_up_to(120) if good_reduction(E, q)]:
        Pbar = reduce_point(E, P, p)
        for m in range(-50, 51):
            Q = ec_scalar_mul(E, m, P)
            assert reduce_point(E, Q, p) == ec_scalar_mul(E, m, Pbar, p), (p, m)
            if Q is not None:
                assert reduce_point(E, Q, p) == reduce_mod(Q, p)


def test_oracle_agreement_small_primes():
    curves = [E, EllipticCurve(0, 1), EllipticCurve(-1, 1), EllipticCurve(2, -3)]
    for C in curves:
        for p in [q for q in primes_up_to(200) if good_reduction(C, q)]:
            pts = enumerate_points(C.a4, C.a6, p)
            assert group_order(C, p) == len(pts)
            assert elliptic.count_points_exhaustive(C, p) == len(pts)
            for Q in pts[:: max(1, len(pts) // 6)]:
                cert = point_order_mod_p(C, (Fraction(Q[0]), Fraction(Q[1])) if Q else None, p)
                assert cert.point_order == brute_point_order(C.a4, Q, p)


def test_hasse_and_bsgs_above_threshold():
    for p in (10007, 50021, 99991, 1_000_003):
        lo, hi = elliptic.hasse_interval(p)
        N = group_order(E, p)
        assert abs(N - (p + 1)) <= 2 * math.isqrt(p) + 1 and lo <= N <= hi
    assert [group_order(E, p) for p in (10007, 50021, 99991)] == [10008, 50022, 99436]
    assert elliptic.group_order_bsgs(E, 10007) == elliptic.count_points_exhaustive(E, 10007)


def test_certificates_replay_and_lagrange():
    for p in [q for q in primes_up_to(3000) if good_reduction(E, q)][:120]:
        cert = point_order_mod_p(E, P, p)
        assert cert.verify(E, P)
        assert cert.group_order % cert.point_order == 0


def test_certificate_rejects_tampering():
    from dataclasses import replace
    cert = point_order_mod_p(E, P, 7)
    assert not replace(cert, point_order=1, maximality_witnesses=()).verify(E, P)
    assert not replace(cert, group_order=cert.group_order + 1).verify(E, P)


def test_spectrum_examples():
    rep = elliptic_order_spectrum(E, P, 2, 100)
    assert rep.realized[2].p == 5
    assert rep.missing == (1,)
    with pytest.raises(TorsionPoint):
        elliptic_order_spectrum(EllipticCurve(0, 4), make_point(0, 2), 4, 100)


def test_spectrum_smallest_primes_against_oracle():
    rep = elliptic_order_spectrum(E, P, 6, 2000)
    for n, cert in rep.realized.items():
        assert cert.point_order == n and cert.verify(E, P)
        smaller = [q for q in primes_up_to(cert.p - 1) if good_reduction(E, q)]
        assert all(brute_point_order(0, reduce_mod(P, q), q) != n for q in smaller)


def test_translate_examples():
    out = translated_subvariety_check(E, P, None, 2)
    assert isinstance(out, TbarForcedZero) and out.tbar_is_identity
    assert len({w.p for w in out.witnesses}) >= 3
    assert all(elliptic.replay_witness(E, P, None, 2, w) for w in out.witnesses)
    out = translated_subvariety_check(E, P, make_point(3, -5), 2, witness_budget=1)
    assert isinstance(out, NumericContradiction) and out.first_failure == 0


def test_translate_torsion_orbit():
    E4, T = EllipticCurve(0, 4), make_point(0, 2)
    out = translated_subvariety_check(E4, T, ec_scalar_mul(E4, 2, T), 2)
    assert isinstance(out, TorsionOrbitMembership) and out.member
    out = translated_subvariety_check(E4, T, None, 2)
    assert not out.member


def test_translate_budget():
    with pytest.raises(InsufficientWitnesses):
        translated_subvariety_check(E, P, None, 2, witness_budget=3, p_limit=30)
