"""Exact arithmetic substrate: rationals, primality, factorization,
p-adic valuations and Weil heights over Q.

Rationals are plain ``fractions.Fraction`` values; they are always kept
in lowest terms with a positive denominator, which is exactly the
invariant we need.
"""
from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Iterable, Iterator

from . import config
from .errors import FactorizationTimeout, InvalidInput, ZeroInput

BigRat = Fraction

# n < 3317044064679887385961981 is decided correctly by Miller-Rabin on
# the first 13 prime bases (Sorenson & Webster, 2015).
MR_DETERMINISTIC_LIMIT = 3317044064679887385961981
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def as_rat(value) -> Fraction:
    """Coerce ``int``, ``Fraction`` or an ``"a/b"`` string to a Fraction.

    Floats are rejected so that no binary rounding ever sneaks in.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise InvalidInput(f"refusing non-exact rational {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                return Fraction(int(num), int(den))
            return Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"not a rational 'a/b': {value!r}") from exc
    raise InvalidInput(f"cannot interpret {value!r} as a rational")


def rat_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- primes

def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(range(i * i, limit + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


SMALL_PRIMES = _small_primes(1 << 16)
_SMALL_PRIME_SET = frozenset(SMALL_PRIMES)


def primes_up_to(limit: int) -> list[int]:
    if limit <= SMALL_PRIMES[-1]:
        import bisect
        return SMALL_PRIMES[: bisect.bisect_right(SMALL_PRIMES, limit)]
    return _small_primes(limit)


def iter_primes(start: int = 2, stop: int | None = None) -> Iterator[int]:
    """Primes p with start <= p <= stop (unbounded when stop is None)."""
    if stop is not None:
        # segmented sieve keeps memory flat for large stops
        lo = max(start, 2)
        seg = 1 << 18
        while lo <= stop:
            hi = min(stop, lo + seg - 1)
            yield from _segment_primes(lo, hi)
            lo = hi + 1
        return
    n = max(start, 2)
    while True:
        if is_prime(n):
            yield n
        n += 1


def _segment_primes(lo: int, hi: int) -> list[int]:
    flags = bytearray([1]) * (hi - lo + 1)
    for p in primes_up_to(math.isqrt(hi)):
        first = max(p * p, ((lo + p - 1) // p) * p)
        if first > hi:
            continue
        flags[first - lo::p] = bytearray(len(range(first, hi + 1, p)))
    return [lo + i for i, f in enumerate(flags) if f and lo + i >= 2]


def _strong_probable_prime(n: int, base: int, d: int, s: int) -> bool:
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def _jacobi(a: int, n: int) -> int:
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _strong_lucas_probable_prime(n: int) -> bool:
    # Selfridge parameters: first D in 5, -7, 9, -11, ... with (D/n) = -1
    if math.isqrt(n) ** 2 == n:
        return False
    D = 5
    while True:
        j = _jacobi(D, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -D - 2 if D > 0 else -D + 2
    P, Q = 1, (1 - D) // 4
    d, s = n + 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    inv2 = pow(2, -1, n)
    U, V, Qk = 1, P, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = (P * U + V) * inv2 % n, (D * U + P * V) * inv2 % n
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if V == 0:
            return True
    return False


def is_prime(n: int) -> bool:
    """Primality test.

    Below ``MR_DETERMINISTIC_LIMIT`` this is a proof (Miller-Rabin on the
    first 13 prime bases). Above it we run Baillie-PSW: a composite
    verdict is still a proof, and :func:`pocklington_certificate` can
    turn a prime verdict into one when ``n - 1`` factors within budget.
    """
    if n < 2:
        return False
    if n <= SMALL_PRIMES[-1]:
        return n in _SMALL_PRIME_SET
    for p in SMALL_PRIMES[:50]:
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < MR_DETERMINISTIC_LIMIT:
        return all(_strong_probable_prime(n, a, d, s) for a in _MR_BASES)
    if not _strong_probable_prime(n, 2, d, s):
        return False
    return _strong_lucas_probable_prime(n)


def pocklington_certificate(n: int) -> dict | None:
    """Try to prove ``n`` prime with the Pocklington-Lehmer criterion.

    Returns ``{"F": F, "witnesses": {q: a}}`` where F | n - 1 is a fully
    factored part exceeding sqrt(n), or None if n - 1 would not split far
    enough within the effort budget.
    """
    m = n - 1
    found: dict[int, int] = {}
    rest = m
    for p in SMALL_PRIMES:
        if rest % p == 0:
            while rest % p == 0:
                rest //= p
                found[p] = found.get(p, 0) + 1
    F = m // rest
    if F * F <= n and rest > 1:
        try:
            tail = factor(rest)
        except FactorizationTimeout:
            return None
        for p, e in tail.factors:
            found[p] = found.get(p, 0) + e
        F = m
    if F * F <= n:
        return None
    witnesses = {}
    for q in found:
        for a in range(2, 200):
            if pow(a, m, n) != 1:
                return None
            if math.gcd(pow(a, m // q, n) - 1, n) == 1:
                witnesses[q] = a
                break
        else:
            return None
    return {"F": F, "witnesses": witnesses}


# --------------------------------------------------------- factorization

@dataclasses.dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def recompose(self) -> int:
        out = 1
        for p, e in self.factors:
            out *= p ** e
        return out

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)


_cache = None


def install_cache(cache):
    """Route factor() lookups through ``cache`` (get/put by integer).

    Returns the previously installed cache so callers can restore it.
    """
    global _cache
    previous, _cache = _cache, cache
    return previous


def _integer_root(n: int, k: int) -> int:
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def _perfect_power(n: int) -> tuple[int, int] | None:
    for k in range(2, n.bit_length() + 1):
        r = _integer_root(n, k)
        if r ** k == n:
            return r, k
    return None


class _Effort:
    def __init__(self, budget: int):
        self.left = budget

    def spend(self, n: int, units: int):
        self.left -= units
        if self.left < 0:
            raise FactorizationTimeout(f"effort budget exhausted factoring {n}")


def _brent(n: int, c: int, effort: _Effort) -> int | None:
    y, r, q, g = 2, 1, 1, 1
    m = 128
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            step = min(m, r - k)
            for _ in range(step):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            effort.spend(n, step)
            g = math.gcd(q, n)
            k += m
        r *= 2
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
            if g > 1:
                break
    return None if g == n else g


def _split(n: int, effort: _Effort, out: dict[int, int], mult: int = 1):
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + mult
        return
    pp = _perfect_power(n)
    if pp is not None:
        _split(pp[0], effort, out, mult * pp[1])
        return
    for c in range(1, 64):
        g = _brent(n, c, effort)
        if g is not None:
            _split(g, effort, out, mult)
            _split(n // g, effort, out, mult)
            return
    raise FactorizationTimeout(f"rho found no split of {n}")


def factor(n: int, effort: int | None = None) -> Factorization:
    """Complete prime factorization of a positive integer.

    Trial division up to ``Settings.trial_bound``, then Brent's variant
    of Pollard rho under a deterministic iteration budget. Running out
    of budget raises FactorizationTimeout rather than returning a
    partial answer.
    """
    if not isinstance(n, int) or n < 1:
        raise InvalidInput(f"factor() needs a positive integer, got {n!r}")
    if _cache is not None:
        hit = _cache.get(n)
        if hit is not None:
            return hit
    settings = config.get()
    budget = _Effort(settings.factor_effort if effort is None else effort)
    found: dict[int, int] = {}
    rest = n
    bound = settings.trial_bound
    for p in primes_up_to(bound):
        if p * p > rest:
            break
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            found[p] = e
    if rest > 1:
        _split(rest, budget, found)
    result = Factorization(n, tuple(sorted(found.items())))
    if _cache is not None:
        _cache.put(n, result)
    return result


def divisors(fac: Factorization) -> list[int]:
    divs = [1]
    for p, e in fac.factors:
        divs = [d * p ** k for d in divs for k in range(e + 1)]
    return sorted(divs)


def mobius(fac: Factorization) -> int:
    if any(e > 1 for _, e in fac.factors):
        return 0
    return -1 if len(fac.factors) % 2 else 1


# ------------------------------------------------- valuations and heights

def _nonzero(x: Fraction) -> Fraction:
    x = as_rat(x)
    if x == 0:
        raise ZeroInput("expected a nonzero rational")
    return x


def int_valuation(n: int, p: int) -> int:
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def v_adic_valuation(x, p: int) -> int:
    x = _nonzero(x)
    return int_valuation(x.numerator, p) - int_valuation(x.denominator, p)


def support(x) -> tuple[int, ...]:
    """Finite primes where |x|_p != 1, ascending."""
    x = _nonzero(x)
    primes = set(factor(abs(x.numerator)).primes)
    primes.update(factor(x.denominator).primes)
    return tuple(sorted(primes))


def height_bound(x) -> int:
    """H(x) = max(|num|, den): the exact integer behind the Weil height."""
    x = as_rat(x)
    return max(abs(x.numerator), x.denominator)


def weil_height(x) -> float:
    x = as_rat(x)
    if x == 0:
        return 0.0
    return math.log(height_bound(x))


def is_root_of_unity(x) -> bool:
    x = _nonzero(x)
    return x in (1, -1)


def lcm_all(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out
