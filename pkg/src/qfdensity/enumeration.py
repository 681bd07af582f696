"""Ground-truth enumeration: represented sets, exceptions, empirical density.

Positive definite forms are enumerated by a lattice walk (a bitmask
convolution when the form is diagonal); isotropic binary forms by the
divisor criterion on their reduced shape A x^2 + B xy.  Exception sets
compare the enumerated truth against the local conditions.

Membership structures are flat bitmasks, one bit per integer; a bitmap
file format (magic ``QFD1``) is provided for export.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .density import locally_represented
from .forms import (
    QuadraticForm,
    ReducedIsotropicBinary,
    binary_Delta,
    gauss_reduce_cached,
    is_isotropic_over_Q,
    make_form,
    scale,
    signature,
)
from .numtheory import factorize


class EnumerationError(ValueError):
    pass


class IndefiniteTernaryError(EnumerationError):
    """Exact enumeration for indefinite ternaries is refused.

    Their exceptions lie in finitely many square classes but certifying a
    single representation needs machinery out of scope here; a local-proxy
    superset is available behind an explicit flag.
    """


# ---------------------------------------------------------------------------
# represented sets


@dataclass(frozen=True)
class RepresentedSet:
    """Membership of D_f on [-X, X]; bit m of pos_bits marks +m, etc."""

    X: int
    method_tag: str  # lattice-walk | divisor | local-proxy
    pos_bits: int
    neg_bits: int

    def contains(self, m: int) -> bool:
        if m == 0 or abs(m) > self.X:
            return False
        return bool((self.pos_bits >> m) & 1) if m > 0 else bool((self.neg_bits >> -m) & 1)

    @property
    def count_positive(self) -> int:
        return self.pos_bits.bit_count()

    @property
    def count_negative(self) -> int:
        return self.neg_bits.bit_count()

    def positive_members(self) -> list:
        return _bits_to_list(self.pos_bits)


def _bits_to_list(bits: int) -> list:
    out = []
    m = bits
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


def _diagonal_coeffs(f: QuadraticForm):
    if all(
        f.coeff(i, j) == 0 for i in range(f.n) for j in range(i + 1, f.n)
    ):
        return [f.coeff(i, i) for i in range(f.n)]
    return None


def _diagonal_value_mask(coeffs, X: int) -> int:
    """Bitmask of {sum a_i x_i^2 <= X} for positive diagonal coefficients."""
    full = (1 << (X + 1)) - 1
    acc = 1  # value 0
    for a in coeffs:
        shifts = []
        k = 0
        while a * k * k <= X:
            shifts.append(a * k * k)
            k += 1
        nxt = 0
        for s in shifts:
            nxt |= acc << s
        acc = nxt & full
    return acc


def _ldl(f: QuadraticForm):
    """A = L D L^T for a positive definite Gram matrix; exact rationals."""
    n = f.n
    a = f.gram()
    d = []
    lower = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        piv = a[i][i]
        if piv <= 0:
            raise EnumerationError("form is not positive definite")
        d.append(piv)
        lower[i][i] = Fraction(1)
        for j in range(i + 1, n):
            lower[j][i] = a[i][j] / piv
        for j in range(i + 1, n):
            fj = a[i][j] / piv
            for k in range(j, n):
                a[j][k] -= fj * a[i][k]
                a[k][j] = a[j][k]
    return d, lower


def _floor_sqrt(x: Fraction) -> int:
    if x < 0:
        return -1
    return math.isqrt(x.numerator * x.denominator) // x.denominator


def _walk_values(f: QuadraticForm, X: int) -> int:
    """Bitmask of f-values in [0, X] for a positive definite form.

    Enumerates x_i from the last variable down; the completed-squares
    decomposition bounds each coordinate exactly, no value is missed.
    """
    n = f.n
    d, lower = _ldl(f)
    bits = 0

    def rec(i: int, rem: Fraction, tail):
        nonlocal bits
        if i < 0:
            bits |= 1 << int(X - rem)
            return
        center = -tail[i]
        radius = _floor_sqrt(rem / d[i])
        for xi in range(math.ceil(center - radius) - 1, math.floor(center + radius) + 2):
            off = xi + tail[i]
            term = d[i] * off * off
            if term > rem:
                continue
            rec(i - 1, rem - term, [tail[k] + lower[i][k] * xi for k in range(i)])

    rec(n - 1, Fraction(X), [Fraction(0)] * n)
    return bits


def represented_set_positive(f: QuadraticForm, X: int) -> RepresentedSet:
    """Exact f(Z^n) intersected with [1, X] for a positive definite form."""
    if X < 1:
        raise EnumerationError("bound must be at least 1")
    if signature(f).s != 0:
        raise EnumerationError("form is not positive definite")
    diag = _diagonal_coeffs(f)
    if diag is not None:
        mask = _diagonal_value_mask(diag, X)
    else:
        mask = _walk_values(f, X)
    mask &= ((1 << (X + 1)) - 1) & ~1
    return RepresentedSet(X, "lattice-walk", mask, 0)


def _mirror(rs: RepresentedSet) -> RepresentedSet:
    return RepresentedSet(rs.X, rs.method_tag, rs.neg_bits, rs.pos_bits)


# ---------------------------------------------------------------------------
# isotropic binary forms: divisor criterion


def _signed_divisors(m: int):
    out = []
    n = abs(m)
    fac = factorize(n)
    divs = [1]
    for p, e in fac.items():
        divs = [d * p ** k for d in divs for k in range(e + 1)]
    for d in divs:
        out.append(d)
        out.append(-d)
    return out


def isotropic_binary_witness(f: QuadraticForm, m: int):
    """(x, y) with f(x, y) = m via the reduced shape, or None.

    Scans divisors x of m (both signs) for A x = m / x mod B; the witness
    is mapped back through the reduction matrix.
    """
    if m == 0:
        raise EnumerationError("zero is excluded from representation sets")
    red = gauss_reduce_cached(f)
    A, B = red.A, red.B
    for x in _signed_divisors(m):
        q = m // x
        if (q - A * x) % B == 0:
            y = (q - A * x) // B
            (w11, w12), (w21, w22) = red.witness
            vec = (w11 * x + w12 * y, w21 * x + w22 * y)
            assert f(vec) == m
            return vec
    return None


def represents_isotropic_binary(f: QuadraticForm, m: int) -> bool:
    red = gauss_reduce_cached(f)
    if red.hyperbolic:
        return m != 0
    return isotropic_binary_witness(f, m) is not None


def represented_set_isotropic_binary(f: QuadraticForm, X: int) -> RepresentedSet:
    """D_f on [-X, X] by sieving the progressions m = x * (A x + B y)."""
    red = gauss_reduce_cached(f)
    A, B = red.A, red.B
    pos = np.zeros(X + 1, dtype=bool)
    neg = np.zeros(X + 1, dtype=bool)
    if red.hyperbolic:
        pos[1:] = True
        neg[1:] = True
    else:
        for d in range(1, X + 1):
            step = d * B
            r = (A * d) % B
            # positive values d*k, k = r mod B, k >= 1
            k0 = r if r else B
            if d * k0 <= X:
                pos[d * k0::step] = True
            # negative values: largest k <= -1 in the class
            k1 = r - B * ((r + B) // B)
            if d * -k1 <= X:
                neg[d * -k1::step] = True
    pos_bits = _bool_array_to_bits(pos)
    neg_bits = _bool_array_to_bits(neg)
    return RepresentedSet(X, "divisor", pos_bits, neg_bits)


def _bool_array_to_bits(arr) -> int:
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


# ---------------------------------------------------------------------------
# exception sets and empirical densities


@dataclass(frozen=True)
class ExceptionSet:
    members: tuple
    X: int


def _represented_set(f: QuadraticForm, X: int) -> RepresentedSet:
    sig = signature(f)
    if sig.s == 0:
        return represented_set_positive(f, X)
    if sig.r == 0:
        return _mirror(represented_set_positive(scale(f, -1), X))
    if f.n == 2 and is_isotropic_over_Q(f):
        return represented_set_isotropic_binary(f, X)
    if f.n >= 4:
        # indefinite forms in >= 4 variables are regular: local truth is truth
        pos = 0
        neg = 0
        for m in range(1, X + 1):
            if locally_represented(f, m):
                pos |= 1 << m
            if locally_represented(f, -m):
                neg |= 1 << m
        return RepresentedSet(X, "local-proxy", pos, neg)
    if f.n == 3:
        raise IndefiniteTernaryError(
            "exceptions lie in finitely many square classes; exact enumeration unsupported"
        )
    raise EnumerationError("no ground-truth enumeration for this form")


def exceptional_set(f: QuadraticForm, X: int) -> ExceptionSet:
    """Locally represented but not represented integers up to the bound."""
    rs = _represented_set(f, X)
    sig = signature(f)
    members = []
    if f.n == 1:
        return ExceptionSet((), X)  # local and global agree for a*x^2
    if rs.method_tag == "local-proxy":
        return ExceptionSet((), X)
    sides = []
    if sig.s == 0:
        sides = [1]
    elif sig.r == 0:
        sides = [-1]
    else:
        sides = [-1, 1]
    for side in sides:
        for m in range(1, X + 1):
            sm = side * m
            if not rs.contains(sm) and locally_represented(f, sm):
                members.append(sm)
    return ExceptionSet(tuple(sorted(members)), X)


def empirical_density(f: QuadraticForm, X: int) -> Fraction:
    """Counting density of D_f up to X, one-sided for definite forms."""
    sig = signature(f)
    if f.n == 1:
        a = f.coeffs[0]
        count = math.isqrt(X // abs(a))
        return Fraction(count, X)
    if sig.s == 0:
        return Fraction(represented_set_positive(f, X).count_positive, X)
    if sig.r == 0:
        return Fraction(represented_set_positive(scale(f, -1), X).count_positive, X)
    rs = _represented_set(f, X)
    return Fraction(rs.count_positive + rs.count_negative, 2 * X)


# ---------------------------------------------------------------------------
# bitmap export: magic "QFD1", X as 8-byte little-endian, then the bitmap
# of [1, X] (bit i-1 of the stream marks membership of the integer i)


def bitmap_bytes(members_bits: int, X: int) -> bytes:
    body = (members_bits >> 1).to_bytes((X + 7) // 8, "little")
    return b"QFD1" + struct.pack("<Q", X) + body


def write_bitmap(path, members_bits: int, X: int) -> None:
    with open(path, "wb") as fh:
        fh.write(bitmap_bytes(members_bits, X))


def read_bitmap(path) -> tuple:
    """Returns (X, bits) with bit m marking membership of m."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != b"QFD1":
        raise EnumerationError("bad bitmap magic")
    (X,) = struct.unpack("<Q", blob[4:12])
    bits = int.from_bytes(blob[12:12 + (X + 7) // 8], "little") << 1
    bits &= (1 << (X + 1)) - 1
    return X, bits
