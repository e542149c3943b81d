"""Short Weierstrass curves y^2 = x^3 + a4 x + a6 over Q and F_p.

Points are ``None`` (the point at infinity) or an ``(x, y)`` tuple:
Fractions over Q, ints in [0, p) over F_p. Every function takes an
optional prime ``p``; ``p=None`` means exact arithmetic over Q.
"""
from __future__ import annotations

import dataclasses
import math
import random
from fractions import Fraction
from typing import Optional, Union

from . import arith, config
from .arith import as_rat, factor
from .errors import (BadReductionPrime, InsufficientWitnesses, InvalidInput,
                     InvariantViolation, SingularReduction, TorsionPoint)

Point = Optional[tuple]

MAZUR_BOUND = 12  # largest possible torsion order of a point in E(Q)


@dataclasses.dataclass(frozen=True)
class EllipticCurve:
    a4: int
    a6: int

    def __post_init__(self):
        if self.discriminant == 0:
            raise InvalidInput(f"y^2 = x^3 + {self.a4}x + {self.a6} is singular")

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.a4 ** 3 + 27 * self.a6 ** 2)

    def __str__(self):
        return f"y^2 = x^3 + {self.a4}x + {self.a6}"


def make_point(x, y) -> Point:
    return (as_rat(x), as_rat(y))


def on_curve(E: EllipticCurve, P: Point, p: int | None = None) -> bool:
    if P is None:
        return True
    x, y = P
    lhs, rhs = y * y, x * x * x + E.a4 * x + E.a6
    if p is None:
        return lhs == rhs
    return (lhs - rhs) % p == 0


def _check_field(E: EllipticCurve, p: int | None):
    if p is not None and E.discriminant % p == 0:
        raise SingularReduction(f"{E} is singular mod {p}")


def ec_neg(P: Point, p: int | None = None) -> Point:
    if P is None:
        return None
    x, y = P
    return (x, -y % p) if p is not None else (x, -y)


def _add(E: EllipticCurve, P: Point, Q: Point, p: int | None) -> Point:
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if p is None:
        if x1 == x2:
            if y1 != y2 or y1 == 0:
                return None
            slope = (3 * x1 * x1 + E.a4) / (2 * y1)
        else:
            slope = (y2 - y1) / (x2 - x1)
        x3 = slope * slope - x1 - x2
        return (x3, slope * (x1 - x3) - y1)
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        slope = (3 * x1 * x1 + E.a4) * pow(2 * y1, -1, p) % p
    else:
        slope = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (slope * slope - x1 - x2) % p
    return (x3, (slope * (x1 - x3) - y1) % p)


def ec_add(E: EllipticCurve, P: Point, Q: Point, p: int | None = None) -> Point:
    _check_field(E, p)
    return _add(E, P, Q, p)


def _mul(E: EllipticCurve, m: int, P: Point, p: int | None) -> Point:
    if m < 0:
        return _mul(E, -m, ec_neg(P, p), p)
    result, addend = None, P
    while m:
        if m & 1:
            result = _add(E, result, addend, p)
        addend = _add(E, addend, addend, p)
        m >>= 1
    return result


def ec_scalar_mul(E: EllipticCurve, m: int, P: Point, p: int | None = None) -> Point:
    _check_field(E, p)
    return _mul(E, m, P, p)


def good_reduction(E: EllipticCurve, p: int) -> bool:
    # 2 and 3 are always treated as bad for short Weierstrass models
    return p > 3 and E.discriminant % p != 0


def reduce_point(E: EllipticCurve, P: Point, p: int) -> Point:
    """P mod p; a denominator divisible by p sends P to infinity."""
    if not good_reduction(E, p):
        raise BadReductionPrime(f"{p} is a bad prime for {E}")
    if P is None:
        return None
    x, y = (as_rat(c) for c in P)
    if x.denominator % p == 0:
        return None
    return (x.numerator * pow(x.denominator, -1, p) % p,
            y.numerator * pow(y.denominator, -1, p) % p)


# ---------------------------------------------------------- point counts

def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of a mod an odd prime p (Tonelli-Shanks), or None."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def count_points_exhaustive(E: EllipticCurve, p: int) -> int:
    squares = [0] * p
    for y in range(p):
        squares[y * y % p] += 1
    a4, a6 = E.a4 % p, E.a6 % p
    return 1 + sum(squares[(x * x * x + a4 * x + a6) % p] for x in range(p))


def hasse_interval(p: int) -> tuple[int, int]:
    # |N - (p + 1)| <= 2 sqrt(p)  <=>  (N - p - 1)^2 <= 4p
    w = math.isqrt(4 * p)
    return p + 1 - w, p + 1 + w


def random_point(E: EllipticCurve, p: int, rng: random.Random) -> Point:
    while True:
        x = rng.randrange(p)
        y = sqrt_mod(x * x * x + E.a4 * x + E.a6, p)
        if y:
            return (x, y)


def _order_from_multiple(E: EllipticCurve, P: Point, M: int, p: int | None) -> int:
    for q, e in factor(M).factors:
        for _ in range(e):
            if _mul(E, M // q, P, p) is None:
                M //= q
            else:
                break
    return M


def _bsgs_multiple(E: EllipticCurve, Q: Point, p: int) -> int:
    """Some M in the Hasse interval with [M]Q = O."""
    lo, hi = hasse_interval(p)
    m = math.isqrt(hi - lo) + 1
    baby = {}
    R = None
    for j in range(m):
        baby.setdefault(R, j)
        R = _add(E, R, Q, p)
    step = _mul(E, m, Q, p)
    G = _mul(E, lo, Q, p)
    for i in range(m + 1):
        j = baby.get(ec_neg(G, p), None)
        if j is not None:
            return lo + i * m + j
        G = _add(E, G, step, p)
    raise InvariantViolation(f"no multiple of {Q} killed it in the Hasse interval mod {p}")


def group_order_bsgs(E: EllipticCurve, p: int, max_points: int = 40) -> int | None:
    """#E(F_p) from the lcm of random point orders, or None if still ambiguous."""
    lo, hi = hasse_interval(p)
    rng = random.Random(p)
    L = 1
    for _ in range(max_points):
        Q = random_point(E, p, rng)
        L = math.lcm(L, _order_from_multiple(E, Q, _bsgs_multiple(E, Q, p), p))
        multiples = list(range(-(-lo // L) * L, hi + 1, L))
        if len(multiples) == 1:
            return multiples[0]
    return None


def group_order(E: EllipticCurve, p: int) -> int:
    """#E(F_p): exhaustive count below the configured switch, baby-step
    giant-step over the Hasse interval above it."""
    if not good_reduction(E, p):
        raise BadReductionPrime(f"{p} is a bad prime for {E}")
    N = None
    if p >= config.get().exhaustive_count_below:
        N = group_order_bsgs(E, p)
    if N is None:
        N = count_points_exhaustive(E, p)
    lo, hi = hasse_interval(p)
    if not lo <= N <= hi:
        raise InvariantViolation(f"#E(F_{p}) = {N} violates the Hasse bound")
    return N


# -------------------------------------------------------- point orders

@dataclasses.dataclass(frozen=True)
class ECOrderCertificate:
    p: int
    group_order: int
    point_order: int
    reduced_point: Point
    maximality_witnesses: tuple[tuple[int, Point], ...]

    def verify(self, E: EllipticCurve, P: Point) -> bool:
        p, f, N = self.p, self.point_order, self.group_order
        if not arith.is_prime(p) or not good_reduction(E, p):
            return False
        Pbar = reduce_point(E, P, p)
        if Pbar != self.reduced_point or N % f:
            return False
        lo, hi = hasse_interval(p)
        if not lo <= N <= hi or _mul(E, f, Pbar, p) is not None:
            return False
        if {q for q, _ in self.maximality_witnesses} != set(factor(f).primes):
            return False
        return all(W is not None and _mul(E, f // q, Pbar, p) == W
                   for q, W in self.maximality_witnesses)


def _ec_certificate(E, Pbar, p, N, f) -> ECOrderCertificate:
    witnesses = tuple((q, _mul(E, f // q, Pbar, p)) for q in factor(f).primes)
    return ECOrderCertificate(p, N, f, Pbar, witnesses)


def point_order_mod_p(E: EllipticCurve, P: Point, p: int) -> ECOrderCertificate:
    """Order of P mod p, by factoring #E(F_p) and descending."""
    Pbar = reduce_point(E, P, p)
    N = group_order(E, p)
    f = 1 if Pbar is None else _order_from_multiple(E, Pbar, N, p)
    return _ec_certificate(E, Pbar, p, N, f)


def good_primes(E: EllipticCurve, stop: int, start: int = 5):
    for p in arith.iter_primes(start, stop):
        if good_reduction(E, p):
            yield p


def is_torsion(E: EllipticCurve, P: Point) -> bool:
    """Torsion test from reduction at two good primes.

    For good p >= 5 the torsion of E(Q) injects into E(F_p), so a torsion
    point has the same order m at every good prime and [m]P = O over Q.
    """
    if P is None:
        return True
    orders = []
    for p in good_primes(E, 10 ** 6):
        orders.append(point_order_mod_p(E, P, p).point_order)
        if len(orders) == 2:
            break
    f1, f2 = orders
    if f1 != f2 or f1 > MAZUR_BOUND:
        return False
    return _mul(E, f1, P, None) is None


# ------------------------------------------------------------- spectra

@dataclasses.dataclass(frozen=True)
class EllipticSpectrumReport:
    curve: EllipticCurve
    point: Point
    n_max: int
    p_max: int
    realized: dict[int, ECOrderCertificate]
    missing: tuple[int, ...]


def small_order(E: EllipticCurve, Pbar: Point, p: int, bound: int) -> int | None:
    """Order of Pbar in E(F_p) if it is at most ``bound``, else None."""
    if Pbar is None:
        return 1
    Q = Pbar
    for k in range(1, bound + 1):
        if Q is None:
            return k
        Q = _add(E, Q, Pbar, p)
    return None


def elliptic_order_spectrum(E: EllipticCurve, P: Point, n_max: int, p_max: int) -> EllipticSpectrumReport:
    """Smallest good prime p <= p_max with f_p(P) = n, for n = 1..n_max."""
    if not on_curve(E, P):
        raise InvalidInput("point is not on the curve")
    if is_torsion(E, P):
        raise TorsionPoint(f"{P} has finite order on {E}")
    first: dict[int, int] = {}
    for p in good_primes(E, p_max):
        f = small_order(E, reduce_point(E, P, p), p, n_max)
        if f is not None and f not in first:
            first[f] = p
            if len(first) == n_max:
                break
    realized = {}
    for n, p in sorted(first.items()):
        cert = point_order_mod_p(E, P, p)
        if cert.point_order != n:
            raise InvariantViolation(f"order at {p} is {cert.point_order}, scan said {n}")
        realized[n] = cert
    missing = tuple(n for n in range(1, n_max + 1) if n not in realized)
    return EllipticSpectrumReport(E, P, n_max, p_max, realized, missing)


# -------------------------------------------- translated subvarieties

@dataclasses.dataclass(frozen=True)
class ECWitness:
    """P has order d^n mod p; the limit hypothesis forces T = O mod p."""

    p: int
    n: int
    order: int
    tbar_reduced: Point

    @property
    def consistent(self) -> bool:
        return self.tbar_reduced is None


@dataclasses.dataclass(frozen=True)
class TbarForcedZero:
    witnesses: tuple[ECWitness, ...]
    tbar_is_identity: bool


@dataclasses.dataclass(frozen=True)
class NumericContradiction:
    witnesses: tuple[ECWitness, ...]
    first_failure: int  # index into witnesses


@dataclasses.dataclass(frozen=True)
class TorsionOrbitMembership:
    orbit: tuple[Point, ...]
    member: bool


TranslateOutcome = Union[TbarForcedZero, NumericContradiction, TorsionOrbitMembership]


def d_power_exponent(E: EllipticCurve, Pbar: Point, p: int, d: int) -> int | None:
    """n >= 1 with the order of Pbar exactly d^n, else None."""
    if Pbar is None:
        return None
    _, hi = hasse_interval(p)
    Q, n = Pbar, 0
    while d ** n <= hi:
        Q = _mul(E, d, Q, p)
        n += 1
        if Q is None:
            order = _order_from_multiple(E, Pbar, d ** n, p)
            return n if order == d ** n else None
    return None


def replay_witness(E: EllipticCurve, P: Point, T: Point, d: int, w: ECWitness) -> bool:
    Pbar = reduce_point(E, P, w.p)
    if w.order != d ** w.n or _order_from_multiple(E, Pbar, w.order, w.p) != w.order \
            or _mul(E, w.order, Pbar, w.p) is not None:
        return False
    return reduce_point(E, T, w.p) == w.tbar_reduced


def translated_subvariety_check(E: EllipticCurve, Pbar: Point, Tbar: Point, d: int,
                                witness_budget: int = 3,
                                p_limit: int | None = None) -> TranslateOutcome:
    """Congruence test for lim [d^n] Pbar = Tbar at every good prime.

    Nontorsion Pbar: primes where Pbar has order d^n force Tbar = O there.
    Torsion Pbar: Tbar must be one of the finitely many [d^n] Pbar.
    """
    if d < 2:
        raise InvalidInput("d must be >= 2")
    for Q in (Pbar, Tbar):
        if not on_curve(E, Q):
            raise InvalidInput(f"{Q} is not on {E}")
    if is_torsion(E, Pbar):
        orbit: list[Point] = []
        Q = Pbar
        while Q not in orbit:
            orbit.append(Q)
            Q = _mul(E, d, Q, None)
        return TorsionOrbitMembership(tuple(orbit), Tbar in orbit)

    if p_limit is None:
        p_limit = config.get().prime_budget
    found: dict[int, int] = {}
    for p in good_primes(E, p_limit):
        n = d_power_exponent(E, reduce_point(E, Pbar, p), p, d)
        if n is not None and n not in found:
            found[n] = p
            if len(found) == witness_budget:
                break
    if len(found) < witness_budget:
        raise InsufficientWitnesses(
            f"found {len(found)} of {witness_budget} primes with order a power of {d}")
    witnesses = tuple(ECWitness(p, n, d ** n, reduce_point(E, Tbar, p))
                      for n, p in sorted(found.items()))
    for i, w in enumerate(witnesses):
        if not w.consistent:
            return NumericContradiction(witnesses, i)
    return TbarForcedZero(witnesses, Tbar is None)
