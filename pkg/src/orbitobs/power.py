"""Dynamics of the coordinatewise power map [X, Y, Z] -> [X^d, Y^d, Z^d]
on P^2(Q): orbits, torus-translate curves A X^k = B Y^l, lines, and the
exact intersection decisions for both."""
from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Union

from . import config
from .arith import as_rat, height_bound, is_root_of_unity
from .errors import (CoordinateOverflow, InvalidInput, PreperiodicPoint,
                     UnsupportedCase)


@dataclasses.dataclass(frozen=True)
class ProjPoint2:
    """Point of P^2(Q) in canonical form: coprime integers, first nonzero
    coordinate positive. Build with :meth:`of`."""

    x: int
    y: int
    z: int

    @classmethod
    def of(cls, x, y, z) -> "ProjPoint2":
        coords = [as_rat(c) for c in (x, y, z)]
        if not any(coords):
            raise InvalidInput("[0, 0, 0] is not a projective point")
        den = math.lcm(*(c.denominator for c in coords))
        ints = [int(c * den) for c in coords]
        g = math.gcd(*ints)
        ints = [c // g for c in ints]
        lead = next(c for c in ints if c)
        if lead < 0:
            ints = [-c for c in ints]
        return cls(*ints)

    def coords(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)

    def max_bits(self) -> int:
        return max(abs(c).bit_length() for c in self.coords())

    def __str__(self):
        return f"[{self.x},{self.y},{self.z}]"


@dataclasses.dataclass(frozen=True)
class TorusCurve:
    """V : A X^k = B Y^l, read in the affine chart Z = 1."""

    A: Fraction
    B: Fraction
    k: int
    l: int

    def __post_init__(self):
        object.__setattr__(self, "A", as_rat(self.A))
        object.__setattr__(self, "B", as_rat(self.B))
        if self.A == 0 and self.B == 0:
            raise InvalidInput("A and B cannot both vanish")
        if self.k < 1 or self.l < 1:
            raise InvalidInput("exponents k, l must be >= 1")


@dataclasses.dataclass(frozen=True)
class LineCurve:
    A: Fraction
    B: Fraction
    C: Fraction

    def __post_init__(self):
        for name in "ABC":
            object.__setattr__(self, name, as_rat(getattr(self, name)))
        if self.A == 0 and self.B == 0 and self.C == 0:
            raise InvalidInput("a line needs a nonzero coefficient")

    def coefficients(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.A, self.B, self.C)


@dataclasses.dataclass(frozen=True)
class TowerCertificate:
    """Why the intersection is exactly the listed exponents.

    ``method`` is "height" (h(ratio^(d^n)) = d^n h(ratio) admits at most
    one n), "root-cycle" (ratio is +-1, values enumerated), or
    "degenerate" (a coordinate or coefficient vanishes).
    """

    method: str
    ratio: Fraction | None = None
    target: Fraction | None = None
    ratio_height_bound: int | None = None
    target_height_bound: int | None = None
    candidate: int | None = None


@dataclasses.dataclass(frozen=True)
class CaseI:
    intersection_exponents: tuple[int, ...]
    certificate: TowerCertificate


@dataclasses.dataclass(frozen=True)
class CaseII:
    entry_r: int
    preperiod_i: int
    period_q: int


TrichotomyVerdict = Union[CaseI, CaseII]


@dataclasses.dataclass(frozen=True)
class LineTerm:
    """One branch of the line decision: fixed value of the cycling
    coordinate ratio, the resulting target, and the solution if any."""

    cycle_value: Fraction | None
    target: Fraction
    solution: int | None


@dataclasses.dataclass(frozen=True)
class LineIntersection:
    exponents: tuple[int, ...]
    hypothesis: str              # "a" (root-of-unity ratio) or "b" (zero coordinate)
    free_ratio: Fraction
    terms: tuple[LineTerm, ...]


@dataclasses.dataclass(frozen=True)
class IntersectionReport:
    exponents: tuple[int, ...]
    n_check: int
    certified_complete: bool


# ------------------------------------------------------------- orbits

def _check_size(P: ProjPoint2, exponent: int):
    cap = config.get().coordinate_bit_cap
    if P.max_bits() * exponent > cap:
        raise CoordinateOverflow(
            f"{P} to the power {exponent} exceeds the {cap}-bit coordinate cap")


def raise_point(P: ProjPoint2, exponent: int) -> ProjPoint2:
    """Coordinatewise power. Coprimality survives, only the sign moves."""
    _check_size(P, exponent)
    return ProjPoint2.of(*(c ** exponent for c in P.coords()))


def power_map_apply(P: ProjPoint2, d: int) -> ProjPoint2:
    return raise_point(P, d)


def iterate(P: ProjPoint2, d: int, n: int) -> ProjPoint2:
    """phi^n(P), powering the base point once by d^n."""
    return raise_point(P, d ** n)


def orbit(P: ProjPoint2, d: int, n_max: int) -> list[ProjPoint2]:
    if n_max < 0:
        raise InvalidInput("n_max must be >= 0")
    _check_size(P, d ** n_max)
    return [iterate(P, d, n) for n in range(n_max + 1)]


def point_preperiodic(P: ProjPoint2, d: int | None = None) -> bool:
    """Finite orbit iff all nonzero coordinates share one absolute value."""
    return len({abs(c) for c in P.coords() if c}) == 1


# ------------------------------------------------- tower equations

def solve_tower(x: Fraction, target: Fraction, d: int) -> tuple[int | None, TowerCertificate]:
    """The unique n >= 0 with x^(d^n) = target, if any, for x not +-1.

    Compares H(x)^(d^n) against H(target) as integers, which pins down
    at most one candidate, then confirms the candidate exactly.
    """
    hx, ht = height_bound(x), height_bound(target)
    cert = dict(method="height", ratio=x, target=target,
                ratio_height_bound=hx, target_height_bound=ht)
    if target == 0 or x == 0:
        return None, TowerCertificate(**cert)
    n, cur = 0, hx
    while cur < ht:
        cur = cur ** d
        n += 1
    if cur != ht:
        return None, TowerCertificate(**cert)
    cert["candidate"] = n
    if x ** (d ** n) != target:
        return None, TowerCertificate(**cert)
    return n, TowerCertificate(**cert)


def root_cycle(x: Fraction, d: int) -> tuple[list[Fraction], int]:
    """Values x^(d^n) for a root of unity x, as (prefix + cycle, cycle start)."""
    seen: list[Fraction] = []
    cur = x
    while cur not in seen:
        seen.append(cur)
        cur = cur ** d
    return seen, seen.index(cur)


def _root_tower_solutions(x: Fraction, target: Fraction, d: int) -> list[int]:
    values, _ = root_cycle(x, d)
    return [n for n, v in enumerate(values) if v == target]


# ------------------------------------------------------ torus curves

def _power_is(x: Fraction, e: int, target: Fraction) -> bool:
    """x^e == target, refusing early by height instead of materializing x^e."""
    hx, ht = height_bound(x), height_bound(target)
    if hx > 1 and (hx.bit_length() - 1) * e > ht.bit_length():
        return False
    return x ** e == target


def on_torus_curve(P: ProjPoint2, V: TorusCurve, exponent: int = 1) -> bool:
    """Membership of [x^e, y^e, z^e] in A X^k = B Y^l, read in the chart
    where P lives: Z = 1 if z != 0, else Y = 1, else X = 1."""
    x, y, z = P.coords()
    if z:
        X, Y = Fraction(x, z), Fraction(y, z)
    elif y:
        X, Y = Fraction(x, y), Fraction(1)
    else:
        X, Y = Fraction(1), Fraction(0)
    lhs_zero = V.A == 0 or X == 0
    rhs_zero = V.B == 0 or Y == 0
    if lhs_zero or rhs_zero:
        return lhs_zero and rhs_zero
    return _power_is(X ** V.k / Y ** V.l, exponent, V.B / V.A)


def curve_preperiodic(V: TorusCurve, d: int) -> tuple[int, int] | None:
    """(preperiod, period) of V under phi, or None if V wanders.

    phi^n(V_[A,B]) = V_[A^(d^n), B^(d^n)], so this is the orbit of the
    ratio B/A under x -> x^d.
    """
    if V.A == 0 or V.B == 0:
        return (0, 1)
    c = V.B / V.A
    if not is_root_of_unity(c):
        return None
    values, start = root_cycle(c, d)
    return (start, len(values) - start)


def curve_iterate(V: TorusCurve, d: int, n: int) -> TorusCurve:
    return TorusCurve(V.A ** (d ** n), V.B ** (d ** n), V.k, V.l)


def torus_trichotomy(P: ProjPoint2, V: TorusCurve, d: int) -> TrichotomyVerdict:
    """Exact decision of the orbit/curve intersection for the power map.

    Either the orbit meets V in an explicitly certified finite set of
    exponents (CaseI), or V is preperiodic and phi^r(P) lies on V for a
    minimal entry exponent r (CaseII).
    """
    if d < 2:
        raise InvalidInput("d must be >= 2")
    if point_preperiodic(P, d):
        raise PreperiodicPoint(f"{P} has a finite orbit under the power map")
    x, y, z = P.coords()
    A, B = V.A, V.B
    preper = curve_preperiodic(V, d)

    if z and x and y:
        if A == 0 or B == 0:
            return CaseI((), TowerCertificate("degenerate"))
        rho = Fraction(x, z) ** V.k / Fraction(y, z) ** V.l
        target = B / A
        if is_root_of_unity(rho):
            hits = _root_tower_solutions(rho, target, d)
            if hits and preper is not None:
                i, q = preper
                return CaseII(hits[0], i, q)
            return CaseI(tuple(hits), TowerCertificate("root-cycle", rho, target))
        n, cert = solve_tower(rho, target, d)
        return CaseI(() if n is None else (n,), cert)

    if not z:
        # P = [a, 1, 0]; chart Y = 1 turns membership into A a^k = B
        if A == 0 or B == 0:
            return CaseI((), TowerCertificate("degenerate"))
        ratio = Fraction(x, y) ** V.k
        n, cert = solve_tower(ratio, B / A, d)
        return CaseI(() if n is None else (n,), cert)

    if not y:
        # P = [a, 0, 1]: A a^k = 0, so only the line Y = 0 (A = 0) meets the orbit
        if A == 0:
            return CaseII(0, *preper)
        return CaseI((), TowerCertificate("degenerate"))

    # x == 0: P = [0, b, 1], B b^l = 0
    if B == 0:
        return CaseII(0, *preper)
    return CaseI((), TowerCertificate("degenerate"))


def orbit_torus_intersection(P: ProjPoint2, V: TorusCurve, d: int, n_check: int) -> IntersectionReport:
    """Direct evaluation of phi^n(P) in V for n <= n_check.

    The result is flagged complete for all n when the trichotomy lands
    in CaseI, whose certificate covers every exponent.
    """
    hits = tuple(n for n in range(n_check + 1) if on_torus_curve(P, V, d ** n))
    complete = False
    if not point_preperiodic(P, d):
        verdict = torus_trichotomy(P, V, d)
        if isinstance(verdict, CaseI):
            complete = True
            if any(n <= n_check for n in verdict.intersection_exponents
                   if n not in hits) or \
                    any(n not in verdict.intersection_exponents for n in hits):
                from .errors import InvariantViolation
                raise InvariantViolation(
                    f"scan {hits} disagrees with certificate {verdict.intersection_exponents}")
    return IntersectionReport(hits, n_check, complete)


# -------------------------------------------------------------- lines

def on_line(P: ProjPoint2, L: LineCurve) -> bool:
    return sum(c * v for c, v in zip(L.coefficients(), P.coords())) == 0


def line_orbit_intersection(P: ProjPoint2, L: LineCurve, d: int) -> LineIntersection:
    """Exact {n : phi^n(P) on L} for a line with ABC != 0.

    Supported when P has a zero coordinate, or two coordinates whose
    ratio is +-1; other points raise UnsupportedCase.
    """
    if d < 2:
        raise InvalidInput("d must be >= 2")
    coeffs = L.coefficients()
    if any(c == 0 for c in coeffs):
        raise UnsupportedCase("ABC = 0: use the torus trichotomy instead")
    if point_preperiodic(P, d):
        raise PreperiodicPoint(f"{P} has a finite orbit under the power map")
    coords = P.coords()
    zeros = [i for i, c in enumerate(coords) if c == 0]

    if zeros:
        # L_i u^e + L_j w^e = 0  <=>  (u/w)^e = -L_j/L_i
        i, j = (t for t in range(3) if t != zeros[0])
        ratio = Fraction(coords[i], coords[j])
        target = -coeffs[j] / coeffs[i]
        n, _ = solve_tower(ratio, target, d)
        term = LineTerm(None, target, n)
        return LineIntersection(() if n is None else (n,), "b", ratio, (term,))

    pairs = [(i, j) for i in range(3) for j in range(i + 1, 3)
             if abs(coords[i]) == abs(coords[j])]
    if not pairs:
        raise UnsupportedCase(
            "no zero coordinate and no coordinate ratio is a root of unity")
    i, j = pairs[0]
    t = 3 - i - j
    cycling = Fraction(coords[i], coords[j])
    free = Fraction(coords[t], coords[j])
    values, _ = root_cycle(cycling, d)
    terms, hits = [], set()
    for s0 in dict.fromkeys(values):
        # L_t free^e + L_i s0 + L_j = 0
        target = -(coeffs[j] + coeffs[i] * s0) / coeffs[t]
        n, _ = solve_tower(free, target, d)
        if n is not None and cycling ** (d ** n) != s0:
            n = None
        terms.append(LineTerm(s0, target, n))
        if n is not None:
            hits.add(n)
    return LineIntersection(tuple(sorted(hits)), "a", free, tuple(terms))
