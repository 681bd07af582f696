"""Shared corpus builders for the test suite.

All randomness is seeded; the suites are deterministic.
"""

import random

from qfdensity.forms import (
    DegenerateFormError,
    gauss_reduce_isotropic_binary,
    make_form,
    transform,
)


def random_form(rng: random.Random, n: int, cmax: int):
    """Nondegenerate form with coefficients in [-cmax, cmax]."""
    while True:
        coeffs = [rng.randint(-cmax, cmax) for _ in range(n * (n + 1) // 2)]
        try:
            return make_form(n, coeffs)
        except DegenerateFormError:
            continue


def random_sl2(rng: random.Random, steps: int = 5):
    """Product of elementary shears and the rotation; determinant one."""
    m = [[1, 0], [0, 1]]

    def mul(a, b):
        return [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ]

    for _ in range(steps):
        kind = rng.randrange(3)
        k = rng.choice([-2, -1, 1, 2])
        if kind == 0:
            m = mul(m, [[1, k], [0, 1]])
        elif kind == 1:
            m = mul(m, [[1, 0], [k, 1]])
        else:
            m = mul(m, [[0, -1], [1, 0]])
    return m


def random_sln(rng: random.Random, n: int):
    """Determinant-one integer matrix with entries in [-3, 3], by rejection."""
    while True:
        m = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        if _int_det(m) == 1:
            return m


def _int_det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * _int_det(minor)
    return total


def random_isotropic_binary(rng: random.Random, delta_cap: int = 10_000):
    """Primitive isotropic binary with 0 < Delta <= delta_cap, via a twist.

    Built from a reduced shape (or the hyperbolic plane) so Delta is a
    perfect square by construction.
    """
    while True:
        b = rng.randint(1, int(delta_cap ** 0.5))
        if b == 1:
            base = make_form(2, (0, 1, 0)) if rng.random() < 0.5 else make_form(2, (1, 1, 0))
        else:
            choices = [a for a in range(1, b) if _gcd(a, b) == 1]
            base = make_form(2, (rng.choice(choices), b, 0))
        f = transform(base, random_sl2(rng))
        if max(abs(c) for c in f.coeffs) <= delta_cap:
            return f


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a
