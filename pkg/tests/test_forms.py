import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_form, random_sl2, random_sln
from qfdensity.forms import (
    DegenerateFormError,
    FormError,
    QuadraticForm,
    anisotropic_places,
    binary_Delta,
    diagonalize_over_Q,
    discriminant,
    doubled_det,
    form_to_str,
    gauss_reduce_isotropic_binary,
    hasse_invariant,
    is_isotropic_local,
    is_isotropic_over_Q,
    is_primitive,
    make_form,
    parse_form,
    primitive_part,
    signature,
    transform,
    witt_invariant,
)
from qfdensity.numtheory import REAL, hilbert_symbol, is_padic_square, valuation


def test_make_form_examples():
    f = make_form(3, [1, 0, 0, 1, 0, 1])
    assert f(( 1, 2, 3)) == 14
    g = make_form(2, [1, 5, 0])
    assert g((1, 0)) == 1 and g((1, 1)) == 6
    with pytest.raises(DegenerateFormError):
        make_form(2, [1, 0, 0])
    with pytest.raises(FormError):
        make_form(3, [1, 2, 3])


def test_parse_form():
    assert parse_form("x^2+y^2+z^2").coeffs == (1, 0, 0, 1, 0, 1)
    assert parse_form("x^2+5*x*y").coeffs == (1, 5, 0)
    assert parse_form("x1^2-4*x2^2").coeffs == (1, 0, -4)
    assert parse_form("3*x^2+4*y^2+9*z^2").coeffs == (3, 0, 0, 4, 0, 9)
    for bad in ("", "x", "x^3", "x^2+", "2*x", "x*y*z", "q^2"):
        with pytest.raises(FormError):
            parse_form(bad)


def test_form_round_trip():
    rng = random.Random(3)
    for _ in range(20):
        f = random_form(rng, rng.randint(1, 4), 9)
        assert parse_form(form_to_str(f)) == f


def test_discriminants():
    assert discriminant(parse_form("x^2+y^2+z^2")) == 1
    assert binary_Delta(parse_form("x^2-y^2")) == 4
    assert binary_Delta(parse_form("x^2+5*x*y")) == 25
    with pytest.raises(FormError):
        binary_Delta(parse_form("x^2+y^2+z^2"))


def test_signatures():
    assert signature(parse_form("x^2+y^2+z^2")) == (3, 0)
    assert signature(parse_form("x^2-y^2")) == (1, 1)
    assert signature(parse_form("x^2+y^2+7*z^2+7*w^2")) == (4, 0)


def test_diagonalize_over_Q():
    f = parse_form("2*x^2+3*y^2")
    assert diagonalize_over_Q(f) == [2, 3]
    # hyperbolic plane splits with opposite signs
    d = diagonalize_over_Q(make_form(2, (0, 1, 0)))
    assert sorted(x > 0 for x in d) == [False, True]
    # the product of the diagonal matches det(A) up to a rational square
    for expr in ("x^2+5*x*y", "x^2-9*y^2", "2*x^2+x*y+3*y^2"):
        g = parse_form(expr)
        d = diagonalize_over_Q(g)
        ratio = Fraction(math.prod(d)) / discriminant(g)
        n, dd = ratio.numerator, ratio.denominator
        assert n > 0 and math.isqrt(n) ** 2 == n and math.isqrt(dd) ** 2 == dd


def test_primitivity():
    f = parse_form("x^2+y^2")
    assert is_primitive(f) and primitive_part(f) == (1, f)
    g = make_form(4, [2023 if i in (0, 4, 7, 9) else 0 for i in range(10)])
    c, g0 = primitive_part(g)
    assert c == 2023 and g0 == parse_form("x^2+y^2+z^2+w^2")
    c, h = primitive_part(parse_form("2*x^2+2*x*y+2*y^2"))
    assert c == 2 and h == parse_form("x^2+x*y+y^2")


def test_hasse_witt_examples():
    f = parse_form("x^2+y^2+z^2")
    for p in (3, 5, 7, 11):
        assert hasse_invariant(f, p) == 1
    assert hasse_invariant(f, REAL) == 1
    assert witt_invariant(f, REAL) == -1
    # anisotropic ternary at p exactly when the Witt invariant is -1
    assert witt_invariant(f, 2) == -1 and not is_isotropic_local(f, 2)
    assert witt_invariant(f, 7) == 1 and is_isotropic_local(f, 7)


def test_hasse_invariant_basis_independent():
    rng = random.Random(17)
    for n in (2, 3, 4):
        for _ in range(10):
            f = random_form(rng, n, 5)
            u = random_sln(rng, n)
            g = transform(f, u)
            for place in (REAL, 2, 3, 5):
                assert hasse_invariant(f, place) == hasse_invariant(g, place)


def test_isotropy_local_examples():
    assert is_isotropic_local(parse_form("x^2-y^2"), REAL)
    for p in (2, 3, 5, 7):
        assert is_isotropic_local(parse_form("x^2-y^2"), p)
    assert is_isotropic_local(parse_form("x^2+y^2+z^2"), 7)
    watson = parse_form("x^2+y^2+7*z^2+7*w^2")
    assert not is_isotropic_local(watson, 7)
    assert is_isotropic_local(watson, 2)
    assert not is_isotropic_local(watson, REAL)
    five = make_form(5, [1 if i in (0, 5, 9, 12, 14) else 0 for i in range(15)])
    for p in (2, 3, 5):
        assert is_isotropic_local(five, p)
    assert not is_isotropic_local(five, REAL)


def test_isotropy_over_Q():
    assert is_isotropic_over_Q(parse_form("x^2-y^2"))
    assert not is_isotropic_over_Q(parse_form("x^2+y^2"))
    assert is_isotropic_over_Q(parse_form("x^2+5*x*y"))
    assert not is_isotropic_over_Q(parse_form("x^2-2*y^2"))
    # x^2+y^2 = 3(z^2+w^2) forces odd 3-adic valuation on one side
    assert not is_isotropic_over_Q(parse_form("x^2+y^2-3*z^2-3*w^2"))
    assert is_isotropic_over_Q(parse_form("x^2+y^2-z^2-3*w^2"))


def _brute_isotropic_ternary(f: QuadraticForm, p: int) -> bool:
    """Liftable primitive zero mod p^(2e+1) for some e up to the det bound."""
    emax = valuation(doubled_det(f), p).v
    b = f.doubled_gram()
    for e in range(emax + 1):
        k = 2 * e + 1
        pk = p**k
        pe1 = p ** (e + 1)
        xs = np.arange(pk, dtype=np.int64)
        X, Y, Z = np.meshgrid(xs, xs, xs, indexing="ij", sparse=True)
        fv = (
            f.coeffs[0] * X * X
            + f.coeffs[3] * Y * Y
            + f.coeffs[5] * Z * Z
            + f.coeffs[1] * X * Y
            + f.coeffs[2] * X * Z
            + f.coeffs[4] * Y * Z
        ) % pk
        gx = b[0][0] * X + b[0][1] * Y + b[0][2] * Z
        gy = b[1][0] * X + b[1][1] * Y + b[1][2] * Z
        gz = b[2][0] * X + b[2][1] * Y + b[2][2] * Z
        primitive = (X % p != 0) | (Y % p != 0) | (Z % p != 0)
        slope = (gx % pe1 != 0) | (gy % pe1 != 0) | (gz % pe1 != 0)
        if bool((primitive & slope & (fv == 0)).any()):
            return True
    return False


def test_ternary_isotropy_against_brute_force():
    rng = random.Random(23)
    corpus = []
    while len(corpus) < 12:
        f = random_form(rng, 3, 4)
        if valuation(doubled_det(f), 2).v <= 2 and valuation(doubled_det(f), 3).v <= 1:
            corpus.append(f)
    for f in corpus:
        for p in (2, 3):
            assert is_isotropic_local(f, p) == _brute_isotropic_ternary(f, p), (f, p)


def test_ternary_anisotropic_places_even():
    rng = random.Random(29)
    for _ in range(40):
        f = random_form(rng, 3, 6)
        assert len(anisotropic_places(f)) % 2 == 0, f


def test_gauss_reduce_examples():
    red = gauss_reduce_isotropic_binary(parse_form("x^2+5*x*y"))
    assert (red.A, red.B, red.hyperbolic) == (1, 5, False)
    red9 = gauss_reduce_isotropic_binary(parse_form("x^2-9*y^2"))
    assert red9.B == 6 and 1 <= red9.A < 6 and math.gcd(red9.A, 6) == 1
    assert transform(parse_form("x^2-9*y^2"), red9.witness).coeffs == (red9.A, red9.B, 0)
    hyp = gauss_reduce_isotropic_binary(parse_form("x^2+x*y"))
    assert hyp.hyperbolic
    with pytest.raises(FormError):
        gauss_reduce_isotropic_binary(parse_form("x^2+y^2"))
    with pytest.raises(FormError):
        gauss_reduce_isotropic_binary(parse_form("2*x^2+6*x*y"))


def test_gauss_reduce_idempotent_and_witnessed():
    rng = random.Random(31)
    for _ in range(25):
        b = rng.randint(2, 40)
        choices = [a for a in range(1, b) if math.gcd(a, b) == 1]
        base = make_form(2, (rng.choice(choices), b, 0))
        assert gauss_reduce_isotropic_binary(base).as_form() == base
        twisted = transform(base, random_sl2(rng))
        red = gauss_reduce_isotropic_binary(twisted)
        assert red.as_form() == base  # the reduced pair is canonical
        assert transform(twisted, red.witness).coeffs == (red.A, red.B, 0)
