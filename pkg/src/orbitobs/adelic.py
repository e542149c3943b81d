"""Finite-place probes of v-adic limits of power towers.

A claimed limit xi = lim lambda^(d^n) at every good prime is tested the
way the refutation goes: primes where lambda has order d^n force
xi = 1 there, primes where the order is coprime to d then force
lambda = 1. Each step is stored as a replayable congruence.
"""
from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Union

from . import arith, config
from .arith import as_rat, factor, is_root_of_unity
from .errors import InsufficientWitnesses, InvalidInput, ZeroInput
from .order import _order_n_primes, find_orders_coprime_to, mult_order, residue
from .power import root_cycle


@dataclasses.dataclass(frozen=True)
class CongruenceWitness:
    """lambda has order ``claimed_order`` mod p, so the limit hypothesis
    forces ``subject`` (xi or lambda) to be ``forced_value`` mod p."""

    p: int
    claimed_order: int
    subject: str
    observed: int
    forced_value: int = 1

    @property
    def contradicts(self) -> bool:
        return self.observed % self.p != self.forced_value % self.p

    def replay(self, lam: Fraction, xi: Fraction, d: int) -> bool:
        """Recheck the order claim and the observed residue from scratch."""
        p = self.p
        try:
            cert = mult_order(lam, p)
        except Exception:
            return False
        if cert.order != self.claimed_order:
            return False
        if self.subject == "xi":
            ok_order = _is_power_of(self.claimed_order, d)
            value = xi
        else:
            ok_order = math.gcd(self.claimed_order, d) == 1
            value = lam
        return ok_order and residue(value, p) == self.observed


@dataclasses.dataclass(frozen=True)
class RootOfUnityCase:
    limit_set: tuple[Fraction, ...]
    matching_r: int | None


@dataclasses.dataclass(frozen=True)
class Refuted:
    xi_forcing: tuple[CongruenceWitness, ...]
    lambda_forcing: tuple[CongruenceWitness, ...]

    @property
    def first_contradiction(self) -> CongruenceWitness | None:
        for w in self.xi_forcing + self.lambda_forcing:
            if w.contradicts:
                return w
        return None


PowerLimitOutcome = Union[RootOfUnityCase, Refuted]


@dataclasses.dataclass(frozen=True)
class PowerLimitTranscript:
    lam: Fraction
    xi: Fraction
    d: int
    outcome: PowerLimitOutcome

    def replays(self) -> bool:
        """True when every witness recomputes and at least one congruence
        is numerically false (or, for roots of unity, the match is exact)."""
        out = self.outcome
        if isinstance(out, RootOfUnityCase):
            if not is_root_of_unity(self.lam):
                return False
            values, start = root_cycle(self.lam, self.d)
            if set(out.limit_set) != set(values[start:]):
                return False
            if out.matching_r is None:
                return self.xi not in values
            return self.lam ** (self.d ** out.matching_r) == self.xi and \
                self.xi not in values[:out.matching_r]
        witnesses = out.xi_forcing + out.lambda_forcing
        if not all(w.replay(self.lam, self.xi, self.d) for w in witnesses):
            return False
        if len({w.p for w in out.xi_forcing}) != len(out.xi_forcing):
            return False
        return out.first_contradiction is not None


@dataclasses.dataclass(frozen=True)
class ZhatReason:
    prime: int
    divides_d: bool
    # p-adic norms as exact rationals; the limit norm is 0 for p | d
    limit_norm: Fraction
    m_norm: Fraction

    def valid_for(self, d: int, m: int) -> bool:
        p = self.prime
        if not arith.is_prime(p) or (d % p == 0) != self.divides_d:
            return False
        if self.m_norm != padic_norm(m, p) or self.limit_norm != (0 if self.divides_d else 1):
            return False
        return self.limit_norm != self.m_norm


@dataclasses.dataclass(frozen=True)
class ZhatVerdict:
    d: int
    m: int
    converges: bool
    reason: ZhatReason


def _is_power_of(n: int, d: int) -> bool:
    while n % d == 0:
        n //= d
    return n == 1


def padic_norm(m: int, p: int) -> Fraction:
    if m == 0:
        return Fraction(0)
    return Fraction(1, p ** arith.int_valuation(m, p))


def residue_orbit(lam, d: int, p: int, n_list) -> list[int]:
    """lambda^(d^n) mod p for each n, reducing d^n modulo p - 1."""
    lam = as_rat(lam)
    if lam == 0:
        raise ZeroInput("lambda must be nonzero")
    e = config.get().residue_power
    if e == 1:
        r = residue(lam, p)
        return [pow(r, pow(d, n, p - 1), p) for n in n_list]
    # exploration knob: work in (Z/p^e)^*, whose exponent divides p^(e-1)(p-1)
    mod = p ** e
    residue(lam, p)  # raises on bad primes
    r = lam.numerator * pow(lam.denominator, -1, mod) % mod
    group = p ** (e - 1) * (p - 1)
    return [pow(r, pow(d, n, group), mod) for n in n_list]


def residue_period(lam, d: int, p: int) -> tuple[int, int]:
    """(preperiod, period) of n -> lambda^(d^n) mod p by direct iteration."""
    r = residue(lam, p)
    seen: dict[int, int] = {}
    n, cur = 0, r
    while cur not in seen:
        seen[cur] = n
        cur = pow(cur, d, p)
        n += 1
    return seen[cur], n - seen[cur]


def power_limit_decide(lam, xi, d: int, witness_budget: int = 3,
                       p_limit: int | None = None, max_n: int = 64) -> PowerLimitTranscript:
    """Decide or refute xi = lim lambda^(d^n) at all good finite places.

    Roots of unity get the exact finite limit set. Otherwise the result
    is a Refuted transcript: ``witness_budget`` primes of order d^n
    (each forcing xi = 1) and ``witness_budget`` primes of order coprime
    to d (each forcing lambda = 1).
    """
    lam, xi = as_rat(lam), as_rat(xi)
    if lam == 0 or xi == 0:
        raise ZeroInput("lambda and xi must be nonzero")
    if d < 2:
        raise InvalidInput("d must be >= 2")
    if p_limit is None:
        p_limit = config.get().prime_budget

    if is_root_of_unity(lam):
        values, start = root_cycle(lam, d)
        limits = tuple(values[start:])
        hits = [r for r, v in enumerate(values) if v == xi]
        return PowerLimitTranscript(lam, xi, d, RootOfUnityCase(limits, hits[0] if hits else None))

    bad = set(arith.support(lam)) | set(arith.support(xi))
    xi_forcing = []
    used = set()
    for n in range(1, max_n + 1):
        if len(xi_forcing) == witness_budget or d ** n >= p_limit:
            break
        primes, _ = _order_n_primes(lam, d ** n, p_limit, avoid=bad | used)
        if primes:
            p = primes[0]
            used.add(p)
            xi_forcing.append(CongruenceWitness(p, d ** n, "xi", residue(xi, p)))
    if len(xi_forcing) < witness_budget:
        raise InsufficientWitnesses(
            f"found {len(xi_forcing)} of {witness_budget} primes with order a power of {d}")

    certs = find_orders_coprime_to(lam, d, witness_budget, p_limit, avoid=bad)
    lambda_forcing = [CongruenceWitness(c.p, c.order, "lambda", residue(lam, c.p))
                      for c in certs]
    return PowerLimitTranscript(lam, xi, d, Refuted(tuple(xi_forcing), tuple(lambda_forcing)))


def zhat_power_limit(d: int, m: int) -> ZhatVerdict:
    """Can d^(r_i) -> m in Z-hat along an unbounded sequence r_i?

    Never: at p | d the powers tend to 0, so m = 0 would be forced, while
    at p not dividing d they are units, so |m|_p = 1 would be forced.
    The reason names whichever prime breaks for this particular m.
    """
    if d < 2:
        raise InvalidInput("d must be >= 2")
    if m != 0:
        p = factor(d).primes[0]
        reason = ZhatReason(p, True, Fraction(0), padic_norm(m, p))
    else:
        p = next(q for q in arith.SMALL_PRIMES if d % q)
        reason = ZhatReason(p, False, Fraction(1), Fraction(0))
    return ZhatVerdict(d, m, False, reason)
