"""Global density of the set of integers represented by a form.

The density factors as a product of local measures over a finite support
set of primes; unary and anisotropic binary forms are the degenerate
cases with density zero.  Also here: the locally-represented predicate,
the residue-class sieve of truncated local conditions, and a bundle of
structural checks on the computed density.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .forms import (
    QuadraticForm,
    anisotropic_places,
    binary_Delta,
    doubled_det,
    is_isotropic_local,
    is_isotropic_over_Q,
    is_primitive,
    signature,
)
from .local import (
    is_adc_local,
    is_locally_universal,
    local_density,
    representation_table,
    truncated_local_density,
)
from .numtheory import factorize, is_rational_square, valuation


class DensityError(ValueError):
    pass


class NoFiniteSupportError(DensityError):
    """Unary and anisotropic binary forms have no finite support set."""


# ---------------------------------------------------------------------------


def support_primes(f: QuadraticForm) -> list:
    """Primes where the form might fail to be Z_p-universal.

    Always contains 2; otherwise only odd primes dividing det(2A) qualify.
    """
    if f.n == 1 or (f.n == 2 and not is_isotropic_over_Q(f)):
        raise NoFiniteSupportError("no finite support")
    return [2] + [p for p in sorted(factorize(doubled_det(f))) if p != 2]


@dataclass(frozen=True)
class GlobalDensityReport:
    density: Fraction
    factors: dict  # prime -> exact local density, primes with factor 1 omitted
    case_tag: str  # unary-zero | anisotropic-binary-zero | product

    def to_json_dict(self) -> dict:
        return {
            "density": str(self.density),
            "factors": {str(p): str(v) for p, v in sorted(self.factors.items())},
            "case": self.case_tag,
        }


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("QFD_THREADS", "1")))
    except ValueError:
        return 1


def density(f: QuadraticForm, threads: int | None = None) -> GlobalDensityReport:
    """Exact density of the represented integers, with per-prime factors."""
    if f.n == 1:
        return GlobalDensityReport(Fraction(0), {}, "unary-zero")
    if f.n == 2 and not is_isotropic_over_Q(f):
        return GlobalDensityReport(Fraction(0), {}, "anisotropic-binary-zero")
    primes = support_primes(f)
    threads = _thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            locals_ = list(pool.map(lambda p: local_density(f, p), primes))
    else:
        locals_ = [local_density(f, p) for p in primes]
    total = Fraction(1)
    factors = {}
    for p, d in zip(primes, locals_):
        total *= d
        if d != 1:
            factors[p] = d
    return GlobalDensityReport(total, factors, "product")


# ---------------------------------------------------------------------------
# closed form for primitive isotropic binary forms


def dyadic_isotropic_binary_density(a: int) -> Fraction:
    """delta_2 of a primitive isotropic binary with a = v_2(Delta) / 2."""
    if a == 0:
        return Fraction(1)
    if a == 1:
        return Fraction(3, 4)
    return (
        Fraction(2)
        + Fraction(2) ** (4 - 2 * a)
        + Fraction(2) ** (5 - 2 * a)
        + Fraction(2) ** (2 - 2 * a)
    ) / 12


def odd_isotropic_binary_density(p: int, a: int) -> Fraction:
    """delta_p of a primitive isotropic binary with a = v_p(Delta), p odd."""
    return (Fraction(p) + Fraction(p) ** (1 - a) + 2 * Fraction(p) ** (-a)) / (2 * p + 2)


def density_isotropic_binary_closed_form(f: QuadraticForm) -> Fraction:
    """Product of the per-prime closed forms over the primes dividing Delta."""
    if f.n != 2:
        raise DensityError("closed form needs a binary form")
    if not is_primitive(f):
        raise DensityError("closed form needs a primitive form")
    delta = binary_Delta(f)
    if not (delta > 0 and is_rational_square(delta)):
        raise DensityError("closed form needs an isotropic form")
    total = dyadic_isotropic_binary_density(valuation(delta, 2).v // 2)
    for p in sorted(factorize(delta)):
        if p != 2:
            total *= odd_isotropic_binary_density(p, factorize(delta)[p])
    return total


# ---------------------------------------------------------------------------
# local representability of integers


def _real_ok(f: QuadraticForm, m: int) -> bool:
    sig = signature(f)
    if sig.s == 0 and m < 0:
        return False
    if sig.r == 0 and m > 0:
        return False
    return True


def locally_represented(f: QuadraticForm, m: int) -> bool:
    """Is m represented over the reals and over every Z_p?

    Off the support set the form is Z_p-universal, so only finitely many
    tables are consulted.  Anisotropic binary forms fall back to the
    primes dividing 2 * Delta * m; unary forms reduce to a square test.
    """
    if m == 0:
        raise DensityError("zero is excluded from representation sets")
    if not _real_ok(f, m):
        return False
    if f.n == 1:
        return is_rational_square(Fraction(m, f.coeffs[0]))
    if f.n == 2 and not is_isotropic_over_Q(f):
        primes = {2} | set(factorize(binary_Delta(f))) | set(factorize(m))
        return all(representation_table(f, p).contains(m) for p in sorted(primes))
    return all(representation_table(f, p).contains(m) for p in support_primes(f))


# ---------------------------------------------------------------------------
# residue sieve of truncated local conditions


@dataclass(frozen=True)
class ResidueSieve:
    """Residues mod M of the integers satisfying all truncated local tests.

    Membership of an integer means: at every support prime, its class is
    represented and its valuation is below the cutoff.  Stored per prime;
    the combined class list mod M is materialized only on request.
    """

    modulus: int
    cutoff: int
    per_prime: tuple  # ((p, p^(K+2), frozenset of residues), ...)

    @property
    def class_count(self) -> int:
        count = 1
        for _, _, residues in self.per_prime:
            count *= len(residues)
        return count

    @property
    def density(self) -> Fraction:
        return Fraction(self.class_count, self.modulus)

    def contains(self, m: int) -> bool:
        return all(m % q in residues for _, q, residues in self.per_prime)

    def classes(self, limit: int = 2_000_000) -> list:
        """Sorted residues mod M; guarded by a size limit."""
        if self.class_count > limit:
            raise DensityError("sieve too large to materialize")
        return sorted(a for a in range(self.modulus) if self.contains(a))


def residue_sieve(f: QuadraticForm, K: int) -> ResidueSieve:
    per_prime = []
    modulus = 1
    for p in support_primes(f):
        q = p ** (K + 2)
        table = representation_table(f, p)
        residues = set()
        for a in range(1, q):
            v = valuation(a, p).v
            if v < K and table.contains(a):
                residues.add(a)
        per_prime.append((p, q, frozenset(residues)))
        modulus *= q
    return ResidueSieve(modulus, K, tuple(per_prime))


def delta_loc_truncated(f: QuadraticForm, K: int) -> Fraction:
    """Product over the support of the valuation-truncated local measures."""
    total = Fraction(1)
    for p in support_primes(f):
        total *= truncated_local_density(representation_table(f, p), K)
    return total


# ---------------------------------------------------------------------------
# structural checks


def _v2(x: Fraction):
    return valuation(x, 2).v if x != 0 else None


def theorem_checks(f: QuadraticForm) -> dict:
    """Evaluate the structural properties the density is known to satisfy.

    A failed check on valid input is a library bug, so each 'holds' entry
    is expected true whenever the corresponding 'applies' entry is.
    """
    report = density(f)
    sig = signature(f)
    out = {
        "n": f.n,
        "signature": [sig.r, sig.s],
        "density": str(report.density),
        "case": report.case_tag,
        "factors": {str(p): str(v) for p, v in sorted(report.factors.items())},
    }
    out["positive_density"] = {
        "applies": f.n >= 3,
        "holds": (report.density > 0) if f.n >= 3 else None,
    }
    aniso_ternary = f.n == 3 and not is_isotropic_over_Q(f)
    out["anisotropic_ternary_below_one"] = {
        "applies": aniso_ternary,
        "holds": (report.density < 1) if aniso_ternary else None,
    }
    eq_applies = f.n >= 4 or (f.n == 3 and is_isotropic_over_Q(f))
    if eq_applies:
        primes = support_primes(f)
        lu = all(is_locally_universal(f, p) for p in primes)
        ladc = all(is_adc_local(f, p) for p in primes)
        done = report.density == 1
        out["universality_equivalence"] = {
            "applies": True,
            "locally_universal": lu,
            "locally_adc": ladc,
            "density_one": done,
            "holds": lu == ladc == done,
        }
    else:
        out["universality_equivalence"] = {"applies": False}
    out["rational"] = True  # densities are exact rationals by construction
    if f.n == 3:
        places = anisotropic_places(f)
        out["anisotropic_places"] = {
            "applies": True,
            "places": [str(v) for v in places],
            "even_count": len(places) % 2 == 0,
        }
    else:
        out["anisotropic_places"] = {"applies": False}
    neg_applies = False
    if f.n == 3 and sig == (3, 0):
        primes = support_primes(f)
        adc_at_2 = is_adc_local(f, 2)
        adc_at_u = all(
            is_adc_local(f, p)
            for p in primes
            if p % 4 == 3 and is_isotropic_local(f, p)
        )
        neg_applies = adc_at_2 and adc_at_u
    if neg_applies:
        out["negative_v2"] = {
            "applies": True,
            "v2": _v2(report.density),
            "holds": _v2(report.density) < 0,
        }
    else:
        out["negative_v2"] = {"applies": False}
    return out
