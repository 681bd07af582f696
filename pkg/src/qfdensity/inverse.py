"""Inverse problem: hitting prescribed density targets.

Greedy products of factors (1 - 1/(2p+2)) over odd primes land in any
open subinterval of [0, 1]; the attainable local densities of ADC forms
form small explicit sets; a parity condition governs which local
prescriptions admit a global form of given signature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .numtheory import is_prime


class InverseError(ValueError):
    pass


def _tree_product(xs) -> int:
    """Balanced product; quasilinear where a running product is quadratic."""
    xs = list(xs)
    if not xs:
        return 1
    while len(xs) > 1:
        nxt = [xs[i] * xs[i + 1] for i in range(0, len(xs) - 1, 2)]
        if len(xs) % 2:
            nxt.append(xs[-1])
        xs = nxt
    return xs[0]


def _odd_primes_sieved():
    """Odd primes in order, via a doubling segmented sieve."""
    bound = 1 << 12
    start = 3
    while True:
        sieve = bytearray([1]) * (bound - start)
        for q in range(2, int(bound ** 0.5) + 1):
            first = max(q * q, (start + q - 1) // q * q)
            sieve[first - start::q] = bytearray(len(range(first, bound, q)))
        for i, flag in enumerate(sieve):
            if flag:
                yield start + i
        start, bound = bound, bound * 4


@dataclass(frozen=True)
class GreedyProductPlan:
    primes: tuple
    product: Fraction
    target: tuple  # (alpha, beta)

    def to_json_dict(self) -> dict:
        return {
            "primes": list(self.primes),
            "product": str(self.product),
            "interval": [str(self.target[0]), str(self.target[1])],
        }


def greedy_interval_product(alpha, beta) -> GreedyProductPlan:
    """Distinct odd primes whose product of (1 - 1/(2p+2)) lies in (alpha, beta).

    Strategy: while the running product is at least beta, multiply by the
    factor of the smallest unused odd prime that keeps the product above
    alpha.  The first crossing below beta therefore lands inside the
    interval.  The factor count grows very fast as beta shrinks; intervals
    with beta roughly above 1/4 stay cheap.
    """
    alpha, beta = Fraction(alpha), Fraction(beta)
    if not (0 <= alpha < beta <= 1):
        raise InverseError("need 0 <= alpha < beta <= 1")
    an, ad = alpha.numerator, alpha.denominator
    bn, bd = beta.numerator, beta.denominator
    prime_stream = _odd_primes_sieved()

    # Bulk phase: a float shadow of the log-product identifies a prefix of
    # consecutive primes that are certainly accepted and certainly leave the
    # product above beta; the margin absorbs the float error many times over.
    # All decisions that affect the landing are re-made exactly below.
    log_beta = math.log(bn) - math.log(bd)
    log_prod = 0.0
    bulk_num, bulk_den = [], []
    primes = []
    pending = None
    for p in prime_stream:
        step = math.log1p(-1.0 / (2 * p + 2))
        if log_prod + step > log_beta + 1e-6:
            log_prod += step
            bulk_num.append(2 * p + 1)
            bulk_den.append(2 * p + 2)
            primes.append(p)
        else:
            pending = p
            break
    num = _tree_product(bulk_num)
    den = _tree_product(bulk_den)

    # Exact walk: multiply the smallest remaining primes whose factor keeps
    # the product above alpha; the first crossing below beta lands inside.
    # The running product is kept unreduced, with one gcd at the end.
    assert num * bd >= bn * den
    while num * bd >= bn * den:
        p = pending if pending is not None else next(prime_stream)
        pending = None
        if (num * (2 * p + 1)) * ad > an * (den * (2 * p + 2)):
            num *= 2 * p + 1
            den *= 2 * p + 2
            primes.append(p)
    plan = GreedyProductPlan(tuple(primes), Fraction(num, den), (alpha, beta))
    assert alpha < plan.product < beta
    return plan


def attainable_local_density_set(p: int) -> frozenset:
    """The four local densities attained by ADC forms at p."""
    if p == 2:
        return frozenset(
            {Fraction(1, 2), Fraction(5, 6), Fraction(11, 12), Fraction(1)}
        )
    if not is_prime(p):
        raise InverseError("place must be prime")
    return frozenset(
        {
            Fraction(1, 2),
            Fraction(p + 2, 2 * p + 2),
            Fraction(2 * p + 1, 2 * p + 2),
            Fraction(1),
        }
    )


def globalization_feasible(n: int, r: int, s: int, S, T) -> bool:
    """Parity precondition for gluing prescribed local forms globally.

    For n = 3 the number of prescribed anisotropic primes must be odd for
    definite signatures and even otherwise; no condition for n >= 4.
    Only the hypothesis is checked, no lattice is constructed.
    """
    if n < 3:
        raise InverseError("globalization needs n >= 3")
    if r + s != n or r < 0 or s < 0:
        raise InverseError("signature must satisfy r + s = n")
    S, T = set(S), set(T)
    if not T <= S:
        raise InverseError("anisotropy set must lie inside the support set")
    if n >= 4:
        return True
    if r * s == 0:
        return len(T) % 2 == 1
    return len(T) % 2 == 0


def v2_density_construction(k: int) -> tuple:
    """(p, delta) with delta = 5/6 * (p+1)/(2p) and v_2(delta) >= k.

    p is the least prime congruent to -1 mod 2^(k+2).
    """
    if k < 0:
        raise InverseError("k must be nonnegative")
    modulus = 1 << (k + 2)
    p = modulus - 1
    while not is_prime(p):
        p += modulus
    return p, Fraction(5, 6) * Fraction(p + 1, 2 * p)
