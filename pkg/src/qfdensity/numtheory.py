"""Exact arithmetic helpers: valuations, residue symbols, square classes.

Everything here works with arbitrary-precision integers and
``fractions.Fraction``; no floating point is used anywhere.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Union

Rational = Union[int, Fraction]

#: Marker for the archimedean place, usable wherever a prime is expected.
REAL = "real"


class NumTheoryError(ValueError):
    """Raised on invalid arithmetic input (zero valuation argument etc.)."""


class PValuation(NamedTuple):
    """Decomposition n = unit * p**v with p not dividing unit."""

    v: int
    unit: Rational


def valuation(n: Rational, p: int) -> PValuation:
    """p-adic valuation and p-free part of a nonzero integer or Fraction."""
    if n == 0:
        raise NumTheoryError("valuation of zero")
    if isinstance(n, Fraction) and n.denominator != 1:
        num = valuation(n.numerator, p)
        den = valuation(n.denominator, p)
        return PValuation(num.v - den.v, Fraction(num.unit, den.unit))
    n = int(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return PValuation(v, n)


def unit_residue(u: Rational, m: int) -> int:
    """Residue mod m of a rational whose denominator is coprime to m."""
    if isinstance(u, Fraction):
        return u.numerator * pow(u.denominator, -1, m) % m
    return u % m


# ---------------------------------------------------------------------------
# primality and factoring


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; valid far beyond 64-bit inputs."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    n += 1
    while not is_prime(n):
        n += 1
    return n


def odd_primes():
    """3, 5, 7, 11, ... ad infinitum."""
    p = 3
    while True:
        yield p
        p = next_prime(p)


def _pollard_rho(n: int, rng: random.Random) -> int:
    while True:
        c = rng.randrange(1, n)
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


def factorize(n: int) -> dict:
    """Prime factorization {p: exponent} of |n|, n nonzero."""
    if n == 0:
        raise NumTheoryError("factorize(0)")
    n = abs(n)
    out: dict = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 7
    while f * f <= n and f < 100000:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 2
    if n == 1:
        return out
    rng = random.Random(0xC0FFEE)
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m, rng)
        stack.append(d)
        stack.append(m // d)
    return out


# ---------------------------------------------------------------------------
# residue symbols


def legendre_symbol(a: Rational, p: int) -> int:
    """Quadratic residue symbol mod an odd prime: 0, 1 or -1."""
    if p == 2:
        raise NumTheoryError("dyadic Legendre undefined")
    r = unit_residue(a, p) if isinstance(a, Fraction) else a % p
    if r == 0:
        return 0
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


@lru_cache(maxsize=None)
def least_nonresidue(p: int) -> int:
    """Smallest positive quadratic nonresidue mod an odd prime."""
    for r in itertools.count(2):
        if legendre_symbol(r, p) == -1:
            return r
    raise AssertionError


# ---------------------------------------------------------------------------
# square classes of Q_p


@dataclass(frozen=True)
class SquareClassSystem:
    """Representatives of the square classes of Q_p, in fixed order.

    Odd p: (1, r, p, r*p) with r the least nonresidue; index parity of the
    valuation is encoded in the representative.  p = 2: the eight classes
    (1, 3, 5, 7, 2, 6, 10, 14).  ``nu`` is the unit-square index
    [Z_p^* : Z_p^{*2}].
    """

    p: int
    reps: tuple
    nu: int

    @staticmethod
    @lru_cache(maxsize=None)
    def for_prime(p: int) -> "SquareClassSystem":
        if p == 2:
            return SquareClassSystem(2, (1, 3, 5, 7, 2, 6, 10, 14), 4)
        r = least_nonresidue(p)
        return SquareClassSystem(p, (1, r, p, r * p), 2)

    def __len__(self):
        return len(self.reps)


def square_class_of(x: Rational, p: int) -> tuple:
    """(class index, valuation) of a nonzero rational in Q_p.

    The index refers to ``SquareClassSystem.for_prime(p).reps``; the
    valuation's parity always matches that of the representative.
    """
    if x == 0:
        raise NumTheoryError("square class of zero")
    pv = valuation(x, p)
    if p == 2:
        u8 = unit_residue(pv.unit, 8)
        idx = (u8 - 1) // 2 + (4 if pv.v % 2 else 0)
    else:
        chi = legendre_symbol(pv.unit, p)
        idx = (pv.v % 2) * 2 + (0 if chi == 1 else 1)
    return idx, pv.v


def is_padic_square(x: Rational, p: int) -> bool:
    return square_class_of(x, p)[0] == 0


def is_rational_square(x: Rational) -> bool:
    x = Fraction(x)
    if x <= 0:
        return False
    rn = math.isqrt(x.numerator)
    rd = math.isqrt(x.denominator)
    return rn * rn == x.numerator and rd * rd == x.denominator


# ---------------------------------------------------------------------------
# Hilbert symbol


def hilbert_symbol(a: Rational, b: Rational, place) -> int:
    """Hilbert symbol (a, b) at a prime or at the real place.

    Equals 1 exactly when z^2 = a*x^2 + b*y^2 has a nontrivial solution
    over the completion; bimultiplicative and symmetric.
    """
    if a == 0 or b == 0:
        raise NumTheoryError("Hilbert symbol needs nonzero entries")
    if place == REAL:
        return -1 if a < 0 and b < 0 else 1
    p = place
    va = valuation(a, p)
    vb = valuation(b, p)
    alpha, u = va.v, va.unit
    beta, w = vb.v, vb.unit
    if p == 2:
        u8 = unit_residue(u, 8)
        w8 = unit_residue(w, 8)
        eps_u = (u8 - 1) // 2 % 2
        eps_w = (w8 - 1) // 2 % 2
        omega_u = (u8 * u8 - 1) // 8 % 2
        omega_w = (w8 * w8 - 1) // 8 % 2
        exponent = eps_u * eps_w + alpha * omega_w + beta * omega_u
        return -1 if exponent % 2 else 1
    sign = 1
    if alpha % 2 and beta % 2 and (p - 1) // 2 % 2:
        sign = -sign
    if beta % 2:
        sign *= legendre_symbol(u, p)
    if alpha % 2:
        sign *= legendre_symbol(w, p)
    return sign


def relevant_places(a: int, b: int):
    """Real place plus the primes dividing 2ab; (a,b)_v = 1 elsewhere."""
    places = [REAL, 2]
    for p in sorted(factorize(a * b)):
        if p != 2:
            places.append(p)
    return places


# ---------------------------------------------------------------------------
# CRT


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple:
    """Combine x = r1 mod m1, x = r2 mod m2 for coprime moduli."""
    g = math.gcd(m1, m2)
    if g != 1:
        raise NumTheoryError("crt moduli must be coprime")
    m = m1 * m2
    x = (r1 * m2 * pow(m2, -1, m1) + r2 * m1 * pow(m1, -1, m2)) % m
    return x, m
