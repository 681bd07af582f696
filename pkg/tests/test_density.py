import json
import random
from fractions import Fraction

import pytest

from conftest import random_form, random_isotropic_binary
from qfdensity.density import (
    DensityError,
    NoFiniteSupportError,
    delta_loc_truncated,
    density,
    density_isotropic_binary_closed_form,
    dyadic_isotropic_binary_density,
    locally_represented,
    residue_sieve,
    support_primes,
    theorem_checks,
)
from qfdensity.forms import make_form, parse_form, scale, signature
from qfdensity.local import representation_table, truncated_local_density
from qfdensity.numtheory import valuation


def test_support_primes():
    assert support_primes(parse_form("x^2+y^2+z^2")) == [2]
    assert support_primes(parse_form("x^2-y^2")) == [2]
    f2023 = scale(parse_form("x^2+y^2+z^2+w^2"), 2023)
    assert support_primes(f2023) == [2, 7, 17]
    with pytest.raises(NoFiniteSupportError):
        support_primes(parse_form("x^2+y^2"))
    with pytest.raises(NoFiniteSupportError):
        support_primes(parse_form("5*x^2"))


def test_density_examples():
    assert density(parse_form("x^2+y^2+z^2")).density == Fraction(5, 6)
    assert density(parse_form("x^2+y^2+z^2+w^2")).density == 1
    f2023 = scale(parse_form("x^2+y^2+z^2+w^2"), 2023)
    assert density(f2023).density == Fraction(1, 2023)
    assert density(parse_form("x^2-y^2")).density == Fraction(3, 4)
    assert density(make_form(2, (0, 1, 0))).density == 1
    r = density(parse_form("x^2+y^2"))
    assert r.density == 0 and r.case_tag == "anisotropic-binary-zero"
    r = density(parse_form("7*x^2"))
    assert r.density == 0 and r.case_tag == "unary-zero"


def test_density_report_json():
    report = density(parse_form("x^2+y^2+z^2"))
    payload = report.to_json_dict()
    assert payload == {"density": "5/6", "factors": {"2": "5/6"}, "case": "product"}
    assert json.loads(json.dumps(payload)) == payload
    assert Fraction(payload["density"]) == report.density


def test_closed_form_binary_example():
    f = parse_form("x^2-9*y^2")  # Delta 36: a_2 = 1, a_3 = 2
    expected = Fraction(3, 4) * (Fraction(3) + Fraction(1, 3) + Fraction(2, 9)) / 8
    assert expected == Fraction(1, 3)
    assert density_isotropic_binary_closed_form(f) == expected
    assert density(f).density == expected


def test_closed_form_matches_product():
    rng = random.Random(61)
    for _ in range(25):
        f = random_isotropic_binary(rng)
        assert density_isotropic_binary_closed_form(f) == density(f).density, f


def test_dyadic_closed_form_values():
    assert dyadic_isotropic_binary_density(0) == 1
    assert dyadic_isotropic_binary_density(1) == Fraction(3, 4)
    assert dyadic_isotropic_binary_density(2) == Fraction(7, 16)


def test_locally_represented_examples():
    f3 = parse_form("x^2+y^2+z^2")
    assert not locally_represented(f3, 7)
    assert locally_represented(f3, 5)
    assert not locally_represented(f3, -1)
    watson = parse_form("x^2+y^2+7*z^2+7*w^2")
    for m in range(1, 60):
        assert locally_represented(watson, m)
    # anisotropic binary fallback: sums of two squares
    f2 = parse_form("x^2+y^2")
    for m in range(1, 80):
        v3 = valuation(m, 3).v if m % 3 == 0 else 0
        v7 = valuation(m, 7).v if m % 7 == 0 else 0
        v11 = valuation(m, 11).v if m % 11 == 0 else 0
        classical = all(
            valuation(m, p).v % 2 == 0
            for p in (3, 7, 11, 19, 23, 31, 43, 47, 59, 67, 71, 79)
            if m % p == 0
        )
        assert locally_represented(f2, m) == classical, m
    # unary forms reduce to an exact square test
    u = parse_form("3*x^2")
    assert locally_represented(u, 12) and not locally_represented(u, 6)
    with pytest.raises(DensityError):
        locally_represented(f3, 0)


def test_residue_sieve_three_squares():
    f = parse_form("x^2+y^2+z^2")
    sieve = residue_sieve(f, 4)
    assert sieve.modulus == 64
    assert sieve.density == truncated_local_density(representation_table(f, 2), 4)
    assert sieve.density == Fraction(25, 32)
    assert sieve.density == delta_loc_truncated(f, 4)
    # excluded residues below the cutoff are exactly 7 * 4^a patterns
    classes = set(sieve.classes())
    for a in range(64):
        v = valuation(a, 2).v if a else 99
        in_sieve = a in classes
        if v >= 4:
            assert not in_sieve
        else:
            tt = a
            while tt % 4 == 0:
                tt //= 4
            assert in_sieve == (tt % 8 != 7), a


def test_residue_sieve_membership_matches_local():
    f = parse_form("x^2+y^2+7*z^2+7*w^2")
    K = 2
    sieve = residue_sieve(f, K)
    for m in range(1, 400):
        expected = locally_represented(f, m) and all(
            valuation(m, p).v < K for p in (2, 7)
        )
        assert sieve.contains(m) == expected, m


def test_sieve_cutoff_zero_empty():
    f = parse_form("x^2+y^2+z^2")
    sieve = residue_sieve(f, 0)
    assert sieve.class_count == 0 and sieve.density == 0


def test_truncation_monotone_with_gap_bound():
    rng = random.Random(67)
    forms = [parse_form("x^2+y^2+z^2"), parse_form("x^2-y^2")] + [
        random_form(rng, 3, 6) for _ in range(5)
    ]
    for f in forms:
        if f.n == 2 and density(f).case_tag != "product":
            continue
        d = density(f).density
        prev = Fraction(0)
        for K in range(7):
            cur = delta_loc_truncated(f, K)
            assert prev <= cur <= d
            prev = cur
        K = 6
        slack = sum(Fraction(1, p**K) for p in support_primes(f))
        bound = slack + (1 - _prod(1 - Fraction(1, p**K) for p in support_primes(f)))
        assert d - delta_loc_truncated(f, K) <= bound


def _prod(items):
    out = Fraction(1)
    for x in items:
        out *= x
    return out


def test_density_scaling_by_squares():
    for expr, c in [("x^2+y^2+z^2", 2), ("x^2+y^2+z^2", 3), ("x^2-y^2", 5)]:
        f = parse_form(expr)
        assert density(scale(f, c * c)).density == density(f).density / (c * c)


def test_theorem_checks_three_squares():
    out = theorem_checks(parse_form("x^2+y^2+z^2"))
    assert out["density"] == "5/6"
    assert out["positive_density"] == {"applies": True, "holds": True}
    assert out["anisotropic_ternary_below_one"] == {"applies": True, "holds": True}
    assert out["negative_v2"] == {"applies": True, "v2": -1, "holds": True}
    assert out["anisotropic_places"]["applies"] and out["anisotropic_places"]["even_count"]


def test_theorem_checks_universal():
    out = theorem_checks(parse_form("x^2+y^2+z^2+w^2"))
    eq = out["universality_equivalence"]
    assert eq["locally_universal"] and eq["locally_adc"] and eq["density_one"]
    assert eq["holds"]


def test_theorem_checks_scaled_quaternary():
    for p in (3, 5):
        entries = [1] + [p * p] * 3
        coeffs = []
        for i in range(4):
            coeffs.append(entries[i])
            coeffs.extend([0] * (4 - i - 1))
        f = make_form(4, coeffs)
        d = density(f).density
        assert d == Fraction(p * p - p + 2, 2 * p * p) <= 1 - Fraction(1, p) + Fraction(1, p * p)
