"""Representability over Z_p: decision procedure, tables, local densities.

The central object is the representation table of a form at p: for each
square class of Q_p, the minimal valuation of a represented element of
that class (infinity when the class is missed).  The table determines the
Haar measure of the represented set exactly:

    delta_p(f) = sum over classes of 1 / (nu * p^(v_s - 1) * (p + 1)).

Three routes compute related quantities and are tested against each other:
the generic decision procedure (this module's zp_represents), the closed
nondyadic case tables (nondyadic_table_fastpath), and an image-measure
oracle working directly on residues (local_density_bruteforce).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .forms import QuadraticForm, diagonalize_over_Q, discriminant, is_isotropic_local, doubled_det, make_form
from .numtheory import (
    SquareClassSystem,
    legendre_symbol,
    least_nonresidue,
    square_class_of,
    unit_residue,
    valuation,
)

#: Sentinel for "class not represented".  Used only for comparisons and
#: display, never in arithmetic.
INF = math.inf


class LocalError(ValueError):
    pass


class UnmatchedCaseError(LocalError):
    """The nondyadic fast path met a diagonal shape outside its case list."""


class ScanCeilingError(AssertionError):
    """Minimal-valuation scan exceeded its bound; indicates a logic bug."""


# ---------------------------------------------------------------------------
# Jordan diagonalization over Z_p, odd p


def jordan_diagonal_odd(f: QuadraticForm, p: int) -> list:
    """Diagonalize f over Z_p (p odd) as a list of (exponent, unit) pairs.

    Entries are sorted by exponent; units are p-free exact rationals.
    Symmetric elimination picks a pivot of minimal valuation, repairing
    the diagonal with a row/column add when the minimum sits off-diagonal.
    """
    if p == 2:
        raise LocalError("Jordan diagonalization implemented for odd p only")
    n = f.n
    a = f.gram()

    def val(x):
        return valuation(x, p).v if x != 0 else None

    idx = list(range(n))
    out = []
    while idx:
        best_diag, best_v = None, None
        for i in idx:
            v = val(a[i][i])
            if v is not None and (best_v is None or v < best_v):
                best_diag, best_v = i, v
        off_v = None
        off: tuple = ()
        for ii, i in enumerate(idx):
            for j in idx[ii + 1:]:
                v = val(a[i][j])
                if v is not None and (off_v is None or v < off_v):
                    off_v, off = v, (i, j)
        if best_v is None or (off_v is not None and off_v < best_v):
            # 2 is a unit, so x_i += x_j makes the (i,i) entry valuation off_v
            i, j = off
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            best_diag = i
        piv = best_diag
        d = a[piv][piv]
        out.append(d)
        idx.remove(piv)
        for i in idx:
            if a[i][piv]:
                factor = a[i][piv] / d
                for k in range(n):
                    a[i][k] -= factor * a[piv][k]
                for k in range(n):
                    a[k][i] -= factor * a[k][piv]
    pairs = []
    for d in out:
        pv = valuation(d, p)
        pairs.append((pv.v, pv.unit))
    pairs.sort(key=lambda t: t[0])
    return pairs


@lru_cache(maxsize=None)
def _jordan_cached(f: QuadraticForm, p: int) -> tuple:
    return tuple(jordan_diagonal_odd(f, p))


# ---------------------------------------------------------------------------
# representability over Z_p


def _chi(u, p: int) -> int:
    return legendre_symbol(unit_residue(u, p), p)


def _odd_diag_represents(diag, p: int, t: int) -> bool:
    """Does sum u_i p^(e_i) x_i^2 represent t over Z_p, p odd?

    Valuation peeling: strip the minimal exponent, decide at unit level by
    residue counting (a unit-level good point lifts by Hensel), otherwise
    force the unit-level variables divisible by p and descend.
    """
    exps = [e for e, _ in diag]
    units = [u for _, u in diag]
    tv = valuation(t, p)
    t_v, t_unit = tv.v, tv.unit
    while True:
        m = min(exps)
        if t_v < m:
            return False
        if m:
            t_v -= m
            exps = [e - m for e in exps]
        level = [units[i] for i in range(len(exps)) if exps[i] == 0]
        n0 = len(level)
        if t_v == 0:
            if n0 >= 2:
                return True
            return _chi(t_unit, p) == _chi(level[0], p)
        if n0 >= 3 or (n0 == 2 and _chi(-level[0] * level[1], p) == 1):
            return True
        # all unit-level variables are divisible by p; divide the form by p
        exps = [1 if e == 0 else e - 1 for e in exps]
        t_v -= 1


@lru_cache(maxsize=200_000)
def _dyadic_primitive_represents(f: QuadraticForm, t: int) -> bool:
    """Is t = f(x) for some primitive x in Z_2^n?

    Class refinement: a class x mod 2^l whose gradient has valuation
    e < l is settled (its fiber takes exactly the values f(x) + 2^(l+e) Z_2);
    otherwise its lifts are scanned, pruned by f(x) = t mod 2^(l+1).
    Primitive vectors have gradient valuation at most v_2(det 2A), so the
    refinement stops by that level.
    """
    n = f.n
    e_cap = valuation(doubled_det(f), 2).v
    frontier = [
        x
        for x in _nonzero_bit_vectors(n)
        if (f(x) - t) % 2 == 0
    ]
    level = 1
    while frontier:
        if level > e_cap + 1:
            raise ScanCeilingError("dyadic refinement ran past its gradient bound")
        mod_next = 1 << (level + 1)
        nxt = []
        for x in frontier:
            grad = f.gradient(x)
            e = min((_v2(g) for g in grad if g), default=None)
            if e is not None and e < level:
                if (t - f(x)) % (1 << (level + e)) == 0:
                    return True
                continue
            for bits in _bit_vectors(n):
                y = tuple(x[i] + (bits[i] << level) for i in range(n))
                if (f(y) - t) % mod_next == 0:
                    nxt.append(y)
        frontier = nxt
        level += 1
    return False


def _v2(x: int) -> int:
    return (x & -x).bit_length() - 1


@lru_cache(maxsize=None)
def _bit_vectors(n: int) -> tuple:
    out = []
    for mask in range(1 << n):
        out.append(tuple((mask >> i) & 1 for i in range(n)))
    return tuple(out)


def _nonzero_bit_vectors(n: int) -> tuple:
    return _bit_vectors(n)[1:]


def zp_represents(f: QuadraticForm, p: int, t: int) -> bool:
    """Is there x in Z_p^n with f(x) = t (t a nonzero integer)?"""
    if t == 0:
        raise LocalError("representability of zero is excluded")
    if p == 2:
        v = valuation(t, 2).v
        for j in range(v // 2 + 1):
            if _dyadic_primitive_represents(f, t >> (2 * j)):
                return True
        return False
    return _odd_diag_represents(_jordan_cached(f, p), p, t)


def qp_represents_class(f: QuadraticForm, p: int, s_index: int) -> bool:
    """Does f represent the square class over the field Q_p?"""
    sys = SquareClassSystem.for_prime(p)
    n = f.n
    if n >= 4 or (n == 3 and is_isotropic_local(f, p)):
        return True
    if n == 3:
        return square_class_of(-discriminant(f), p)[0] != s_index
    if n == 1:
        return square_class_of(f.coeffs[0], p)[0] == s_index
    # binary: f represents s over Q_p iff <d1, d2, -s> is isotropic there
    d1, d2 = diagonalize_over_Q(f)
    s = sys.reps[s_index]
    aux = make_form(
        3,
        (
            d1.numerator * d1.denominator,
            0,
            0,
            d2.numerator * d2.denominator,
            0,
            -s,
        ),
    )
    return is_isotropic_local(aux, p)


# ---------------------------------------------------------------------------
# representation tables


@dataclass(frozen=True)
class RepresentationTable:
    """Minimal represented valuation per square class (INF when missed)."""

    p: int
    reps: tuple
    entries: tuple

    def contains(self, m) -> bool:
        """Z_p-membership of a nonzero integer via the table."""
        idx, v = square_class_of(m, self.p)
        return self.entries[idx] <= v

    def is_universal(self) -> bool:
        return all(e == valuation(r, self.p).v for e, r in zip(self.entries, self.reps))

    def is_adc(self) -> bool:
        """Every represented class is represented at its minimal valuation."""
        return all(
            e == INF or e == valuation(r, self.p).v
            for e, r in zip(self.entries, self.reps)
        )

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "reps": list(self.reps),
            "v": [("inf" if e == INF else int(e)) for e in self.entries],
        }


def scan_ceiling(f: QuadraticForm, p: int) -> int:
    return valuation(4 * doubled_det(f), p).v + 2 * f.n + 4


@lru_cache(maxsize=None)
def representation_table(f: QuadraticForm, p: int) -> RepresentationTable:
    """Compute the table by scanning valuations with zp_represents."""
    sys = SquareClassSystem.for_prime(p)
    ceiling = scan_ceiling(f, p)
    entries = []
    for idx, rep in enumerate(sys.reps):
        if not qp_represents_class(f, p, idx):
            entries.append(INF)
            continue
        base = valuation(rep, p).v
        i = 0
        while True:
            v = base + 2 * i
            if v > ceiling:
                raise ScanCeilingError(
                    f"no represented element of class {rep} below p^{ceiling}"
                )
            if zp_represents(f, p, rep * p ** (2 * i)):
                entries.append(v)
                break
            i += 1
    return RepresentationTable(p, sys.reps, tuple(entries))


def table_density(table: RepresentationTable) -> Fraction:
    """Exact measure of the represented set from the table."""
    p, nu = table.p, SquareClassSystem.for_prime(table.p).nu
    total = Fraction(0)
    for v in table.entries:
        if v != INF:
            total += Fraction(p, nu * (p + 1)) / p ** int(v)
    return total


def local_density(f: QuadraticForm, p: int) -> Fraction:
    """Haar measure of f(Z_p^n) as an exact rational in (0, 1]."""
    return table_density(representation_table(f, p))


def truncated_local_density(table: RepresentationTable, K: int) -> Fraction:
    """Measure of the represented elements of valuation below K."""
    p, nu = table.p, SquareClassSystem.for_prime(table.p).nu
    total = Fraction(0)
    for v_s in table.entries:
        if v_s == INF:
            continue
        v = int(v_s)
        while v < K:
            total += Fraction(p - 1, nu * p ** (v + 1))
            v += 2
    return total


def is_locally_universal(f: QuadraticForm, p: int) -> bool:
    return representation_table(f, p).is_universal()


def is_adc_local(f: QuadraticForm, p: int) -> bool:
    return representation_table(f, p).is_adc()


# ---------------------------------------------------------------------------
# nondyadic closed-form tables (fast path)


def _remark_transform(base: tuple, eps: int, k: int) -> tuple:
    """Table of (r^eps * u^2 * p^k) * g from the table of g."""

    def add(x):
        return INF if x == INF else x + k

    a, b, c, d = base
    if eps == 0 and k % 2 == 0:
        out = (a, b, c, d)
    elif eps == 0:
        out = (c, d, a, b)
    elif k % 2 == 0:
        out = (b, a, d, c)
    else:
        out = (d, c, b, a)
    return tuple(add(x) for x in out)


def _base_table_binary(k: int, w, p: int) -> tuple:
    if k % 2 == 0:
        if _chi(-w, p) == 1:
            return (0, k, k + 1, k + 1)
        return (0, k, INF, INF)
    if _chi(w, p) == 1:
        return (0, INF, k, INF)
    return (0, INF, INF, k)


def _base_table_ternary(k2: int, w2, k3: int, w3, p: int) -> tuple:
    chi = lambda u: _chi(u, p)
    if k2 % 2 == 0:
        if chi(-w2) == 1:
            return (0, k2, k2 + 1, k2 + 1)
        if k3 % 2 == 0:
            return (0, k2, k3 + 1, k3 + 1)
        if chi(w3) == 1:
            return (0, k2, k3, INF)
        return (0, k2, INF, k3)
    if chi(w2) == 1:
        if k3 % 2 == 0:
            if chi(-w3) == 1:
                return (0, k3, k2, k3 + 1)
            return (0, k3, k2, INF)
        if chi(-w3) == 1:
            return (0, k3 + 1, k2, k3)
        return (0, INF, k2, k3)
    if k3 % 2 == 0:
        if chi(-w3) == 1:
            return (0, k3, k3 + 1, k2)
        return (0, k3, INF, k2)
    if chi(-w3) == -1:
        return (0, k3 + 1, k3, k2)
    return (0, INF, k3, k2)


def _base_table_quaternary(tail, p: int) -> tuple:
    evens = [(k, w) for k, w in tail if k % 2 == 0]
    odds = [(k, w) for k, w in tail if k % 2 == 1]
    if len(evens) != 1 or len(odds) != 2:
        raise UnmatchedCaseError("quaternary shape outside the catalogued cases")
    kb, wb = evens[0]
    if _chi(-wb, p) != -1:
        raise UnmatchedCaseError("quaternary even entry is not of nonresidue type")
    for (kd, wd), (kc, wc) in ((odds[0], odds[1]), (odds[1], odds[0])):
        if _chi(wd, p) == -1 and _chi(-wc, p) == 1 and kd <= kc:
            return (0, kb, kc, kd)
    for (kc, wc), (kd, wd) in ((odds[0], odds[1]), (odds[1], odds[0])):
        if _chi(wc, p) == 1 and _chi(-wd, p) == -1 and kc <= kd:
            return (0, kb, kc, kd)
    raise UnmatchedCaseError("quaternary odd entries outside the catalogued cases")


def nondyadic_table_fastpath(f: QuadraticForm, p: int) -> RepresentationTable:
    """Closed-form table for n <= 4 and odd p, via the diagonal shape catalogue.

    The diagonal is normalized by its leading coefficient, matched against
    the catalogued shapes, and the resulting table is shifted/permuted back.
    Raises UnmatchedCaseError on quaternary shapes outside the catalogue.
    """
    if p == 2:
        raise LocalError("fast path is nondyadic")
    if f.n > 4:
        raise LocalError("fast path covers n <= 4")
    diag = _jordan_cached(f, p)
    e1, u1 = diag[0]
    eps = 0 if _chi(u1, p) == 1 else 1
    tail = [(e - e1, Fraction(u) / Fraction(u1)) for e, u in diag[1:]]
    tail.sort(key=lambda t: t[0])
    if f.n == 1:
        base: tuple = (0, INF, INF, INF)
    elif f.n == 2:
        base = _base_table_binary(tail[0][0], tail[0][1], p)
    elif f.n == 3:
        base = _base_table_ternary(tail[0][0], tail[0][1], tail[1][0], tail[1][1], p)
    else:
        base = _base_table_quaternary(tail, p)
    sys = SquareClassSystem.for_prime(p)
    return RepresentationTable(p, sys.reps, _remark_transform(base, eps, e1))


# ---------------------------------------------------------------------------
# brute-force image measure (oracle)

_ORACLE_SPACE_CAP = 40_000_000


def _primitive_image_cosets(f: QuadraticForm, p: int, cap: int) -> list:
    """Cosets (value, step) covering {f(x) mod p^cap : x primitive} exactly.

    Classes are refined mod p, p^2, ... ; a class with gradient valuation
    e < l contributes the full progression f(x) + p^(l+e) Z.  Stops at the
    gradient bound v_p(det 2A) or at full precision, whichever is first.
    """
    n = f.n
    if p ** n > 2_000_000:
        raise LocalError("oracle refinement infeasible for this prime")
    e_cap = valuation(doubled_det(f), p).v
    out = []
    frontier = []
    for x in _tuples_mod(n, p):
        if any(x):
            frontier.append(x)
    level = 1
    while frontier:
        if level == cap:
            out.extend((f(x) % p ** cap, cap) for x in frontier)
            break
        if level > e_cap + 1:
            raise ScanCeilingError("image refinement ran past its gradient bound")
        nxt = []
        for x in frontier:
            grad = f.gradient(x)
            e = min((valuation(g, p).v for g in grad if g), default=None)
            if e is not None and e < level:
                s = min(level + e, cap)
                out.append((f(x) % p ** s, s))
            else:
                base = p ** level
                for bump in _tuples_mod(n, p):
                    nxt.append(tuple(x[i] + bump[i] * base for i in range(n)))
        frontier = nxt
        level += 1
    return out


@lru_cache(maxsize=None)
def _tuples_mod(n: int, p: int) -> tuple:
    out = [()]
    for _ in range(n):
        out = [t + (a,) for t in out for a in range(p)]
    return tuple(out)


def image_residues(f: QuadraticForm, p: int, m: int):
    """Boolean array over Z/p^m marking {f(x) mod p^m : x in (Z/p^m)^n}.

    Assembled from the primitive-class cosets rescaled by even powers of p,
    plus the zero vector; never consults the table machinery.
    """
    if p ** m > _ORACLE_SPACE_CAP:
        raise LocalError("oracle modulus too large")
    pm = p ** m
    hit = np.zeros(pm, dtype=bool)
    hit[0] = True
    cosets = _primitive_image_cosets(f, p, m)
    j = 0
    while 2 * j < m:
        scale = p ** (2 * j)
        for value, s in cosets:
            step = p ** min(s + 2 * j, m)
            hit[(value * scale) % step::step] = True
        j += 1
    return hit


def local_density_bruteforce(f: QuadraticForm, p: int, K: int, m: int) -> Fraction:
    """Measure of {a mod p^m : v_p(a) < K, a is hit by f mod p^m}.

    Works on residues only, independently of the table machinery; the
    result is nonincreasing in m and stabilizes at the truncated density.
    """
    if m < K + 2:
        raise LocalError("modulus exponent must be at least K + 2")
    hit = image_residues(f, p, m)
    # v_p(a) < K means p^K does not divide the residue a (a = 0 has v >= m)
    pk = p ** K
    pattern = np.ones(pk, dtype=bool)
    pattern[0] = False
    count = int(hit.reshape(-1, pk)[:, pattern].sum())
    return Fraction(count, p ** m)


def stabilized_bruteforce_density(f: QuadraticForm, p: int, K: int, m_cap: int):
    """First m with oracle(m) == oracle(m+1); returns (m, value)."""
    m = K + 2
    prev = local_density_bruteforce(f, p, K, m)
    while m < m_cap:
        cur = local_density_bruteforce(f, p, K, m + 1)
        if cur == prev:
            return m, prev
        prev = cur
        m += 1
    raise LocalError(f"no stabilization below m = {m_cap}")
