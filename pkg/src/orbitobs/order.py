"""Multiplicative orders of rationals modulo primes, order spectra and
primitive-divisor (Bang-Zsigmondy) certificates."""
from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

from . import arith, config
from .arith import Factorization, as_rat, factor, is_prime
from .errors import (BadReductionPrime, FactorizationTimeout,
                     InsufficientWitnesses, InvalidInput, RootOfUnityInput,
                     ZeroInput)

# Cyclotomic values above this size skip the factoring route and go
# straight to the progression scan; the route also gets a reduced effort
# since the scan is always available as a fallback.
FACTOR_ROUTE_MAX_BITS = 320
FACTOR_ROUTE_EFFORT = 200_000


@dataclasses.dataclass(frozen=True)
class OrderCertificate:
    lam: Fraction
    p: int
    order: int
    group_order: int
    maximality_witnesses: tuple[tuple[int, int], ...]

    def verify(self) -> bool:
        """Replay every modular exponentiation in the certificate."""
        p, lam = self.p, self.lam
        if not is_prime(p) or lam.numerator % p == 0 or lam.denominator % p == 0:
            return False
        if self.group_order != p - 1 or self.group_order % self.order:
            return False
        r = residue(lam, p)
        if pow(r, self.order, p) != 1:
            return False
        needed = set(factor(self.order).primes)
        if {q for q, _ in self.maximality_witnesses} != needed:
            return False
        for q, stored in self.maximality_witnesses:
            if pow(r, self.order // q, p) != stored or stored == 1:
                return False
        return True


@dataclasses.dataclass(frozen=True)
class SpectrumReport:
    lam: Fraction
    n_max: int
    p_max: int
    realized: dict[int, OrderCertificate]
    missing: tuple[int, ...]
    proven_exceptional: tuple[int, ...]


@dataclasses.dataclass(frozen=True)
class PrimitiveDivisors:
    """Primes of exact order n, read off the factorization of Phi_n(a, b)."""

    lam: Fraction
    n: int
    cyclotomic_value: int
    factorization: Factorization | None
    primitive_primes: tuple[int, ...]

    @property
    def complete(self) -> bool:
        return self.factorization is not None

    @property
    def exceptional(self) -> bool:
        return self.complete and not self.primitive_primes


def residue(lam, p: int) -> int:
    """Image of lam = a/b in F_p, i.e. a * b^-1 mod p."""
    lam = as_rat(lam)
    if lam.numerator % p == 0 or lam.denominator % p == 0:
        raise BadReductionPrime(f"{p} divides numerator or denominator of {lam}")
    return lam.numerator * pow(lam.denominator, -1, p) % p


def _order_of_residue(r: int, p: int, group: Factorization) -> int:
    order = group.value
    for q, e in group.factors:
        for _ in range(e):
            if pow(r, order // q, p) == 1:
                order //= q
            else:
                break
    return order


def _certificate(lam: Fraction, p: int, r: int, order: int) -> OrderCertificate:
    witnesses = tuple((q, pow(r, order // q, p)) for q in factor(order).primes)
    return OrderCertificate(lam, p, order, p - 1, witnesses)


def mult_order(lam, p: int) -> OrderCertificate:
    """Exact order of lam in F_p^*, with a replayable certificate.

    >>> mult_order(2, 7).order
    3
    """
    lam = as_rat(lam)
    if lam == 0:
        raise ZeroInput("lambda must be nonzero")
    if not is_prime(p):
        raise InvalidInput(f"{p} is not prime")
    r = residue(lam, p)
    order = _order_of_residue(r, p, factor(p - 1))
    return _certificate(lam, p, r, order)


def _order_dividing(lam: Fraction, p: int, n: int) -> OrderCertificate:
    """Certificate for a prime where lam^n = 1 is already known.

    The order divides n, so the descent runs over n's factorization and
    p - 1 never has to be factored (it can be far harder than n).
    """
    r = residue(lam, p)
    if pow(r, n, p) != 1:
        raise InvalidInput(f"{lam}^{n} is not 1 mod {p}")
    return _certificate(lam, p, r, _order_of_residue(r, p, factor(n)))


def _require_non_root(lam) -> Fraction:
    lam = as_rat(lam)
    if lam == 0:
        raise ZeroInput("lambda must be nonzero")
    if arith.is_root_of_unity(lam):
        raise RootOfUnityInput(f"{lam} is a root of unity")
    return lam


def cyclotomic_value(a: int, b: int, n: int) -> int:
    """Homogenized Phi_n(a, b) via Moebius inversion of a^m - b^m."""
    num, den = 1, 1
    for m in arith.divisors(factor(n)):
        mu = arith.mobius(factor(n // m))
        if mu == 1:
            num *= a ** m - b ** m
        elif mu == -1:
            den *= a ** m - b ** m
    value, rem = divmod(num, den)
    assert rem == 0
    return value


def primitive_divisors(lam, n: int, effort: int | None = None) -> PrimitiveDivisors:
    """Factor Phi_n(a, b) and keep the primes where lam has order n.

    ``factorization`` is None when the cyclotomic value did not split
    within the effort budget.
    """
    lam = _require_non_root(lam)
    if n < 1:
        raise InvalidInput("n must be >= 1")
    a, b = lam.numerator, lam.denominator
    value = cyclotomic_value(a, b, n)
    try:
        fac = factor(abs(value), effort)
    except FactorizationTimeout:
        return PrimitiveDivisors(lam, n, value, None, ())
    prim = tuple(p for p in fac.primes
                 if a % p and b % p and _order_dividing(lam, p, n).order == n)
    return PrimitiveDivisors(lam, n, value, fac, prim)


def _scan_progression(lam: Fraction, n: int, p_limit: int, avoid) -> list[int]:
    # p has order n only if n | p - 1
    a, b = lam.numerator, lam.denominator
    out = []
    p = n + 1
    while p <= p_limit:
        if pow(a, n, p) == pow(b, n, p) and p not in avoid and a % p and b % p \
                and is_prime(p):
            if _order_dividing(lam, p, n).order == n:
                out.append(p)
        p += n
    return out


def _order_n_primes(lam: Fraction, n: int, p_limit: int, avoid=()) -> tuple[list[int], bool]:
    """Primes p <= p_limit with f_p(lam) = n.

    The flag is True when Phi_n(a, b) was fully factored and has no
    prime of order n at all, i.e. n is a proven exception.
    """
    avoid = set(avoid)
    a, b = lam.numerator, lam.denominator
    if cyclotomic_bits(a, b, n) <= FACTOR_ROUTE_MAX_BITS:
        effort = min(config.get().factor_effort, FACTOR_ROUTE_EFFORT)
        report = primitive_divisors(lam, n, effort)
        if report.complete:
            return [p for p in report.primitive_primes
                    if p <= p_limit and p not in avoid], report.exceptional
    return _scan_progression(lam, n, p_limit, avoid), False


def cyclotomic_bits(a: int, b: int, n: int) -> int:
    # log2 |Phi_n(a,b)| <= phi(n) * log2(|a| + |b|)
    fac = factor(n)
    phi = n
    for q in fac.primes:
        phi = phi // q * (q - 1)
    return phi * (abs(a) + abs(b)).bit_length()


def primes_with_order(lam, n: int, p_limit: int | None = None, avoid=()) -> list[OrderCertificate]:
    """All primes p <= p_limit outside the support of lam with f_p(lam) = n.

    Factors Phi_n(a, b) when that is cheap; otherwise scans the
    progression p = 1 (mod n), which is exhaustive below p_limit.
    """
    lam = _require_non_root(lam)
    if n < 1:
        raise InvalidInput("n must be >= 1")
    if p_limit is None:
        p_limit = config.get().prime_budget
    primes, _ = _order_n_primes(lam, n, p_limit, avoid)
    return [_order_dividing(lam, p, n) for p in primes]


def scan_primes_with_order(lam, n: int, p_limit: int) -> list[int]:
    """Cross-check route: walk every prime below p_limit."""
    lam = _require_non_root(lam)
    a, b = lam.numerator, lam.denominator
    return [p for p in arith.iter_primes(2, p_limit)
            if a % p and b % p and mult_order(lam, p).order == n]


def order_spectrum(lam, n_max: int, p_max: int) -> SpectrumReport:
    """Which orders 1..n_max occur for lam modulo primes p <= p_max.

    An index lands in ``proven_exceptional`` only when Phi_n(a, b) was
    factored completely and none of its primes has order n; everything
    else in ``missing`` is merely unrealized under the budget.
    """
    lam = _require_non_root(lam)
    realized: dict[int, OrderCertificate] = {}
    missing, proven = [], []
    for n in range(1, n_max + 1):
        primes, exceptional = _order_n_primes(lam, n, p_max)
        if primes:
            realized[n] = _order_dividing(lam, primes[0], n)
        else:
            missing.append(n)
            if exceptional:
                proven.append(n)
    return SpectrumReport(lam, n_max, p_max, realized, tuple(missing), tuple(proven))


def find_orders_coprime_to(lam, d: int, count: int, p_limit: int | None = None,
                           avoid=()) -> list[OrderCertificate]:
    """Certificates for the smallest orders m > 1 with gcd(m, d) = 1.

    One certificate per order (its smallest prime), orders ascending.
    """
    lam = _require_non_root(lam)
    if d < 2:
        raise InvalidInput("d must be >= 2")
    if p_limit is None:
        p_limit = config.get().prime_budget
    found = []
    for m in range(2, p_limit):
        if len(found) == count:
            break
        if math.gcd(m, d) != 1:
            continue
        primes, _ = _order_n_primes(lam, m, p_limit, avoid)
        if primes:
            found.append(_order_dividing(lam, primes[0], m))
    if len(found) < count:
        raise InsufficientWitnesses(
            f"only {len(found)} of {count} orders coprime to {d} below {p_limit}")
    return found
