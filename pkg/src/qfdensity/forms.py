"""Integral quadratic forms and their rational invariants.

A form is stored by its integer coefficients c_ij (i <= j) for
f = sum c_ij t_i t_j.  The Gram matrix A has A_ii = c_ii and
A_ij = c_ij / 2, so the doubled Gram matrix 2A is integral.
Nondegeneracy (det A != 0) is enforced at construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from .numtheory import (
    REAL,
    factorize,
    hilbert_symbol,
    is_padic_square,
    is_rational_square,
)


class FormError(ValueError):
    pass


class DegenerateFormError(FormError):
    pass


class Signature(NamedTuple):
    r: int  # positive eigenvalues of the Gram matrix
    s: int  # negative eigenvalues


@dataclass(frozen=True)
class QuadraticForm:
    n: int
    coeffs: tuple  # c_ij for 1 <= i <= j <= n, row-major upper triangle

    def coeff(self, i: int, j: int) -> int:
        """c_ij with 0-based i <= j."""
        if i > j:
            i, j = j, i
        return self.coeffs[i * self.n - i * (i - 1) // 2 + (j - i)]

    def doubled_gram(self) -> list:
        """The integer matrix 2A."""
        n = self.n
        return [
            [2 * self.coeff(i, i) if i == j else self.coeff(i, j) for j in range(n)]
            for i in range(n)
        ]

    def gram(self) -> list:
        return [[Fraction(x, 2) for x in row] for row in self.doubled_gram()]

    def __call__(self, vec) -> int:
        n = self.n
        total = 0
        for i in range(n):
            vi = vec[i]
            if vi == 0:
                continue
            total += self.coeff(i, i) * vi * vi
            for j in range(i + 1, n):
                total += self.coeff(i, j) * vi * vec[j]
        return total

    def gradient(self, vec) -> list:
        """The vector 2A @ vec."""
        b = self.doubled_gram()
        return [sum(b[i][j] * vec[j] for j in range(self.n)) for i in range(self.n)]

    def __str__(self):
        return form_to_str(self)


def make_form(n: int, coeffs) -> QuadraticForm:
    """Validated nondegenerate form from upper-triangle coefficients."""
    coeffs = tuple(int(c) for c in coeffs)
    if n < 1:
        raise FormError("arity must be at least 1")
    if len(coeffs) != n * (n + 1) // 2:
        raise FormError(
            f"need {n * (n + 1) // 2} coefficients for arity {n}, got {len(coeffs)}"
        )
    f = QuadraticForm(n, coeffs)
    if _det(f.gram()) == 0:
        raise DegenerateFormError("degenerate form")
    return f


def _det(m) -> Fraction:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    m = [row[:] for row in m]
    n = len(m)
    det = Fraction(1)
    for i in range(n):
        piv = next((k for k in range(i, n) if m[k][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        inv = Fraction(1, 1) / m[i][i]
        for k in range(i + 1, n):
            if m[k][i]:
                factor = m[k][i] * inv
                m[k] = [m[k][j] - factor * m[i][j] for j in range(n)]
    return det


# ---------------------------------------------------------------------------
# parsing

_VAR_ALIASES = {"x": 1, "y": 2, "z": 3, "w": 4}
_TERM_RE = re.compile(r"^(?:(\d+)\*?)?([a-zA-Z]\w*)(?:\^2|\*([a-zA-Z]\w*))?$")


def _var_index(name: str) -> int:
    if name in _VAR_ALIASES:
        return _VAR_ALIASES[name]
    m = re.fullmatch(r"x(\d+)", name)
    if m and int(m.group(1)) >= 1:
        return int(m.group(1))
    raise FormError(f"unknown variable {name!r}")


def parse_form(text: str) -> QuadraticForm:
    """Parse expressions like ``x^2+5*x*y`` or ``3*x1^2-4*x2*x3``.

    Monomials are c*xi^2 and c*xi*xj joined by + or -; variables are
    x1..xn with x, y, z, w accepted as aliases of x1..x4.
    """
    s = text.replace(" ", "")
    if not s:
        raise FormError("empty form expression")
    if s[0] not in "+-":
        s = "+" + s
    terms = re.findall(r"[+-][^+-]+", s)
    if sum(len(t) for t in terms) != len(s):
        raise FormError(f"cannot parse form {text!r}")
    acc: dict = {}
    nmax = 0
    for term in terms:
        sign = -1 if term[0] == "-" else 1
        m = _TERM_RE.match(term[1:])
        if not m:
            raise FormError(f"cannot parse monomial {term!r}")
        coeff_s, v1, v2 = m.groups()
        coeff = sign * (int(coeff_s) if coeff_s else 1)
        i = _var_index(v1)
        if v2 is None and not term.endswith("^2"):
            raise FormError(f"monomial {term!r} is not quadratic")
        j = _var_index(v2) if v2 is not None else i
        if i == j and v2 is not None:
            raise FormError(f"write squares as {v1}^2, not {v1}*{v1}")
        lo, hi = min(i, j), max(i, j)
        acc[(lo, hi)] = acc.get((lo, hi), 0) + coeff
        nmax = max(nmax, hi)
    coeffs = [acc.get((i, j), 0) for i in range(1, nmax + 1) for j in range(i, nmax + 1)]
    return make_form(nmax, coeffs)


def form_to_str(f: QuadraticForm) -> str:
    names = (
        ["x", "y", "z", "w"][: f.n] if f.n <= 4 else [f"x{i + 1}" for i in range(f.n)]
    )
    parts = []
    for i in range(f.n):
        for j in range(i, f.n):
            c = f.coeff(i, j)
            if c == 0:
                continue
            mono = f"{names[i]}^2" if i == j else f"{names[i]}*{names[j]}"
            if abs(c) != 1:
                mono = f"{abs(c)}*{mono}"
            parts.append(("-" if c < 0 else "+", mono))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sgn, mono in parts[1:]:
        out += sgn + mono
    return out


# ---------------------------------------------------------------------------
# basic invariants


def discriminant(f: QuadraticForm) -> Fraction:
    """det of the Gram matrix, an exact rational."""
    return _det(f.gram())


def doubled_det(f: QuadraticForm) -> int:
    """det(2A), always a nonzero integer."""
    d = _det([[Fraction(x) for x in row] for row in f.doubled_gram()])
    assert d.denominator == 1
    return int(d)


def binary_Delta(f: QuadraticForm) -> int:
    """B^2 - 4AC for a binary form."""
    if f.n != 2:
        raise FormError("Discriminant is defined for binary forms only")
    a, b, c = f.coeffs
    return b * b - 4 * a * c


def content(f: QuadraticForm) -> int:
    return math.gcd(*f.coeffs)


def is_primitive(f: QuadraticForm) -> bool:
    return content(f) == 1


def primitive_part(f: QuadraticForm) -> tuple:
    """(content, f / content)."""
    c = content(f)
    return c, make_form(f.n, tuple(x // c for x in f.coeffs))


def scale(f: QuadraticForm, c: int) -> QuadraticForm:
    if c == 0:
        raise FormError("zero scaling")
    return make_form(f.n, tuple(c * x for x in f.coeffs))


def transform(f: QuadraticForm, U) -> QuadraticForm:
    """The form f(U t) for an integral change of variables U (columns)."""
    n = f.n
    b = f.doubled_gram()
    # B' = U^T (2A) U
    bu = [[sum(b[i][k] * U[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    bp = [[sum(U[k][i] * bu[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    coeffs = []
    for i in range(n):
        assert bp[i][i] % 2 == 0
        coeffs.append(bp[i][i] // 2)
        coeffs.extend(bp[i][j] for j in range(i + 1, n))
    return make_form(n, coeffs)


def diagonalize_over_Q(f: QuadraticForm) -> list:
    """Rationals d_1..d_n with f isomorphic to sum d_i t_i^2 over Q.

    Symmetric Gaussian elimination; a zero pivot is repaired by adding the
    first row with nonzero coupling.  Pivot order is deterministic.
    """
    n = f.n
    a = f.gram()
    diag = []
    idx = list(range(n))
    while idx:
        piv = next((i for i in idx if a[i][i] != 0), None)
        if piv is None:
            i = idx[0]
            j = next(k for k in idx[1:] if a[i][k] != 0)
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            piv = i
        d = a[piv][piv]
        diag.append(d)
        idx.remove(piv)
        for i in idx:
            if a[i][piv]:
                factor = a[i][piv] / d
                for k in range(n):
                    a[i][k] -= factor * a[piv][k]
                for k in range(n):
                    a[k][i] -= factor * a[k][piv]
    return diag


def signature(f: QuadraticForm) -> Signature:
    d = diagonalize_over_Q(f)
    r = sum(1 for x in d if x > 0)
    return Signature(r, f.n - r)


def is_positive_definite(f: QuadraticForm) -> bool:
    return signature(f).s == 0


def is_negative_definite(f: QuadraticForm) -> bool:
    return signature(f).r == 0


# ---------------------------------------------------------------------------
# Hasse / Witt invariants and isotropy


def hasse_invariant(f: QuadraticForm, place) -> int:
    """Product of hilbert(d_i, d_j) over i < j for any Q-diagonalization."""
    d = diagonalize_over_Q(f)
    eps = 1
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            eps *= hilbert_symbol(d[i], d[j], place)
    return eps


def witt_invariant(f: QuadraticForm, place) -> int:
    """hasse_invariant times hilbert(-1, -disc); -1 iff a ternary is anisotropic."""
    return hasse_invariant(f, place) * hilbert_symbol(-1, -discriminant(f), place)


def _is_local_square(x: Fraction, place) -> bool:
    if place == REAL:
        return x > 0
    return is_padic_square(x, place)


def is_isotropic_local(f: QuadraticForm, place) -> bool:
    """Does f have a nontrivial zero over the completion at the place?"""
    if place == REAL:
        sig = signature(f)
        return sig.r > 0 and sig.s > 0
    n = f.n
    if n == 1:
        return False
    disc = discriminant(f)
    if n == 2:
        return _is_local_square(-disc, place)
    if n == 3:
        return witt_invariant(f, place) == 1
    if n == 4:
        return not (
            _is_local_square(disc, place)
            and hasse_invariant(f, place) == -hilbert_symbol(-1, -1, place)
        )
    return True


def anisotropic_places(f: QuadraticForm) -> list:
    """Places among {real} + {p | 2 det(2A)} where f has no nontrivial zero."""
    places = [REAL, 2] + [p for p in sorted(factorize(doubled_det(f))) if p != 2]
    return [v for v in places if not is_isotropic_local(f, v)]


def is_isotropic_over_Q(f: QuadraticForm) -> bool:
    if f.n == 2:
        delta = binary_Delta(f)
        return delta > 0 and is_rational_square(delta)
    if f.n == 1:
        return False
    # Hasse-Minkowski: isotropic everywhere locally suffices.
    return not anisotropic_places(f)


# ---------------------------------------------------------------------------
# Gauss reduction of isotropic binary forms


@dataclass(frozen=True)
class ReducedIsotropicBinary:
    """Shape A t1^2 + B t1 t2 reached by an SL2(Z) change of variables.

    For Discriminant 1 the form is equivalent to t1*t2 and the flag is set;
    the stored (A, B) = (1, 1) still satisfies f(witness @ v) = A s^2 + B s t.
    Otherwise 1 <= A < B and gcd(A, B) = 1.
    """

    A: int
    B: int
    hyperbolic: bool
    witness: tuple  # 2x2 SL2(Z) matrix, rows

    def as_form(self) -> QuadraticForm:
        return make_form(2, (self.A, self.B, 0))


def _polar(f: QuadraticForm, u, v) -> int:
    """Bilinear pairing f(u+v) - f(u) - f(v)."""
    return f((u[0] + v[0], u[1] + v[1])) - f(u) - f(v)


def _primitive(vec) -> tuple:
    g = math.gcd(vec[0], vec[1])
    return (vec[0] // g, vec[1] // g)


def gauss_reduce_isotropic_binary(f: QuadraticForm) -> ReducedIsotropicBinary:
    """Reduce a primitive isotropic binary form to A t1^2 + B t1 t2.

    Picks the isotropic line whose oriented pairing is +sqrt(Delta), then
    shears the companion basis vector until 1 <= A < B.  The witness matrix
    U satisfies f(U t) = A t1^2 + B t1 t2 exactly.
    """
    if f.n != 2:
        raise FormError("gauss reduction needs a binary form")
    if not is_primitive(f):
        raise FormError("gauss reduction needs a primitive form")
    delta = binary_Delta(f)
    b = math.isqrt(delta) if delta > 0 else 0
    if delta <= 0 or b * b != delta:
        raise FormError("form is not isotropic over Q")
    a0, b0, _c0 = f.coeffs
    if a0 != 0:
        lines = [_primitive((b - b0, 2 * a0)), _primitive((-b - b0, 2 * a0))]
    else:
        other = _primitive((-f.coeffs[2], b0)) if f.coeffs[2] != 0 else (0, 1)
        lines = [(1, 0), other]
    for v in lines:
        assert f(v) == 0
        # complete v to an SL2 basis: w with w1*v2 - w2*v1 = 1
        g, x, y = _ext_gcd(v[1], -v[0])
        assert g == 1
        w = (x, y)
        bpair = _polar(f, w, v)
        if bpair > 0:
            break
    else:
        raise AssertionError("no positively paired isotropic line")
    assert bpair == b
    A = f(w)
    if b == 1:
        k = 1 - A
        w = (w[0] + k * v[0], w[1] + k * v[1])
        red = ReducedIsotropicBinary(1, 1, True, ((w[0], v[0]), (w[1], v[1])))
    else:
        Anorm = A % b
        if Anorm == 0:
            raise AssertionError("reduced leading coefficient shares a factor with B")
        k = (Anorm - A) // b
        w = (w[0] + k * v[0], w[1] + k * v[1])
        red = ReducedIsotropicBinary(Anorm, b, False, ((w[0], v[0]), (w[1], v[1])))
    check = transform(f, red.witness)
    if check.coeffs != (red.A, red.B, 0):
        raise AssertionError(f"gauss reduction witness check failed: {check.coeffs}")
    return red


def _ext_gcd(a: int, b: int) -> tuple:
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


@lru_cache(maxsize=None)
def gauss_reduce_cached(f: QuadraticForm) -> ReducedIsotropicBinary:
    return gauss_reduce_isotropic_binary(f)
