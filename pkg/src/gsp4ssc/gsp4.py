"""The group GSp(4) over Q_p at working precision.

Elements satisfy t(g) J g = mu(g) J for the antidiagonal form J.  Internally
an element is stored as p^(-shift) * M where M is an integer matrix reduced
modulo p^(shift + A); A is the uniform absolute precision of the entries.
This keeps every operation exact integer arithmetic while the public surface
(`matrix`, `entry`) speaks truncated p-adic numbers.  The symplectic relation
g^(-1) = mu^(-1) J^(-1) t(g) J supplies inverses without generic elimination.

Besides element arithmetic the module houses the congruence subgroup
membership tests (Iwahori pro-unipotent radical, Klingen, paramodular and its
level-5 conjugate), the special elements (Weyl generators, Atkin-Lehner
elements, unipotents), the coset representatives of H d K(5) used by the
newvector, compositional samplers for the congruence subgroups, and a BFS
order count of the residue group GSp4(F_q).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .padic import DEFAULT_PRECISION, PAdic, PrecisionExhausted, ppow

Rational = Union[int, Fraction]


class NotInGroup(ValueError):
    """The symplectic similitude identity fails at working precision."""


class NotInH(ValueError):
    """Decomposition as (center) * (pro-unipotent Iwahori) does not exist."""


class BadParameter(ValueError):
    """A special-element constructor received out-of-contract parameters."""


class BudgetExceeded(RuntimeError):
    """A closure computation exceeded its configured cap."""


# 0-based index permutation and signs realizing g^(-1) = -mu^(-1) J t(g) J
_SIGMA = (3, 2, 1, 0)
_ROW_SIGN = (1, 1, -1, -1)
_COL_SIGN = (-1, -1, 1, 1)

# J as (i, j, sign): entries of the defining antidiagonal form
_J_ENTRIES = ((0, 3, 1), (1, 2, 1), (2, 1, -1), (3, 0, -1))


def _vp(n: int, p: int, cap: int) -> int:
    """Valuation of n mod p^cap; returns cap when n is 0 there."""
    if n == 0:
        return cap
    v = 0
    while n % p == 0 and v < cap:
        n //= p
        v += 1
    return v


class GSp4Element:
    """Immutable symplectic-similitude matrix with cached multiplier."""

    __slots__ = ("p", "shift", "m", "A", "mu")

    def __init__(self, p: int, shift: int, m: tuple, A: int, mu: PAdic):
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "mu", mu)

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("GSp4Element is immutable")

    # -- construction --------------------------------------------------------

    @staticmethod
    def _pack(p: int, entries, verify: bool) -> "GSp4Element":
        """Build from a 4x4 of PAdic; entries share the minimum precision."""
        flat = [entries[i][j] for i in range(4) for j in range(4)]
        A = min(e.A for e in flat)
        vals = [e.v for e in flat if not e.is_zero()]
        if not vals:
            raise NotInGroup("zero matrix")
        shift = max(0, -min(vals))
        K = A + shift
        if K < 1:
            raise PrecisionExhausted("no significant digits at common precision")
        mod = ppow(p, K)
        m = tuple(0 if e.is_zero() or e.v + shift >= K
                  else (e.u * ppow(p, e.v + shift)) % mod
                  for e in flat)
        elem = GSp4Element(p, shift, m, A, None)
        mu = elem._compute_mu(verify=verify)
        return GSp4Element(p, shift, m, A, mu)

    def _compute_mu(self, verify: bool) -> PAdic:
        p, s, K = self.p, self.shift, self.A + self.shift
        a_t = self.A - s
        if a_t < 1:
            raise PrecisionExhausted("insufficient precision to certify the multiplier")
        modt = ppow(p, 2 * s + a_t)
        tg = tuple(self.m[4 * j + i] for i in range(4) for j in range(4))
        tgj = _mat_mul_j(tg, p, K)          # t(g) J, exact rearrangement
        # t(g) J g = p^(-2 shift) * T with T known mod p^(2s + (A - s))
        t = _mat_mul(tgj, self.m, modt, p)
        mu_int = t[3]
        if mu_int % modt == 0:
            raise NotInGroup("similitude multiplier vanishes at working precision")
        w = _vp(mu_int, p, 2 * s + a_t)
        mu = PAdic(p, w - 2 * s, mu_int // ppow(p, w), a_t)
        if verify:
            expect = [0] * 16
            expect[3] = mu_int
            expect[6] = mu_int
            expect[9] = (-mu_int) % modt
            expect[12] = (-mu_int) % modt
            if list(t) != expect:
                raise NotInGroup("t(g) J g != mu J at working precision")
        return mu

    @staticmethod
    def from_entries(entries: Sequence[Sequence[PAdic]], p: int) -> "GSp4Element":
        return GSp4Element._pack(p, entries, verify=True)

    @staticmethod
    def from_rationals(rows: Sequence[Sequence[Rational]], p: int,
                       prec: int = DEFAULT_PRECISION) -> "GSp4Element":
        ent = [[PAdic.from_rational(Fraction(x), p, prec) for x in row]
               for row in rows]
        return GSp4Element._pack(p, ent, verify=True)

    # -- views ----------------------------------------------------------------

    def entry(self, i: int, j: int) -> PAdic:
        raw = self.m[4 * i + j]
        K = self.A + self.shift
        if raw % ppow(self.p, K) == 0:
            return PAdic.zero(self.p, self.A)
        w = _vp(raw, self.p, K)
        return PAdic(self.p, w - self.shift, raw // ppow(self.p, w), self.A)

    @property
    def matrix(self) -> tuple:
        return tuple(tuple(self.entry(i, j) for j in range(4)) for i in range(4))

    def __repr__(self):
        rows = []
        for i in range(4):
            rows.append("[" + " ".join(_fmt_entry(self, i, j) for j in range(4)) + "]")
        return f"GSp4(p={self.p}, A={self.A})" + "".join(rows)

    # -- arithmetic -----------------------------------------------------------

    def __mul__(self, other: "GSp4Element") -> "GSp4Element":
        if self.p != other.p:
            raise ValueError("mixed primes")
        p = self.p
        shift = self.shift + other.shift
        A = min(self.A - other.shift, other.A - self.shift)
        K = A + shift
        if K < 1:
            raise PrecisionExhausted("product loses all significant digits")
        m = _mat_mul(self.m, other.m, ppow(p, K), p)
        shift, m = _strip_common_power(p, shift, m, K)
        return GSp4Element(p, shift, m, A, self.mu * other.mu)

    def inverse(self) -> "GSp4Element":
        p = self.p
        mu_inv = self.mu.inverse()
        vmu, umu, rel = mu_inv.v, mu_inv.u, mu_inv.relative_precision
        shift = max(0, self.shift - vmu)
        A = min(self.A + vmu, -self.shift + vmu + rel)
        K = A + shift
        if K < 1:
            raise PrecisionExhausted("inverse loses all significant digits")
        mod = ppow(p, K)
        lift = ppow(p, shift - (self.shift - vmu))
        um = (-umu * lift) % mod
        m = [0] * 16
        for i in range(4):
            si = _ROW_SIGN[i]
            for j in range(4):
                raw = self.m[4 * _SIGMA[j] + _SIGMA[i]]
                m[4 * i + j] = (si * _COL_SIGN[j] * um * raw) % mod
        shift, m = _strip_common_power(p, shift, tuple(m), K)
        return GSp4Element(p, shift, m, A, mu_inv)

    def transpose(self) -> "GSp4Element":
        m = tuple(self.m[4 * j + i] for i in range(4) for j in range(4))
        return GSp4Element(self.p, self.shift, m, self.A, self.mu)

    def scaled(self, c: PAdic) -> "GSp4Element":
        """Scalar multiple c * g (c nonzero)."""
        p = self.p
        shift = max(0, self.shift - c.v)
        A = min(self.A + c.v, -self.shift + c.v + c.relative_precision)
        K = A + shift
        if K < 1:
            raise PrecisionExhausted("scaling loses all significant digits")
        mod = ppow(p, K)
        u = (c.u * ppow(p, shift - (self.shift - c.v))) % mod
        m = tuple((u * x) % mod for x in self.m)
        shift, m = _strip_common_power(p, shift, m, K)
        return GSp4Element(p, shift, m, A, self.mu * c * c)

    # -- predicates -----------------------------------------------------------

    def _entry_in_ideal(self, i: int, j: int, k: int) -> bool:
        if self.A <= k:
            raise PrecisionExhausted(
                f"entry ideal test at depth {k} needs precision > {k}, have {self.A}")
        d = self.shift + k
        if d <= 0:
            return True
        return self.m[4 * i + j] % ppow(self.p, d) == 0

    def congruent_to(self, other: "GSp4Element", k: int) -> bool:
        """Entry-wise congruence modulo p^k."""
        for i in range(4):
            for j in range(4):
                if not (self.entry(i, j) - other.entry(i, j)).in_ideal(k):
                    return False
        return True

    def is_identity(self, k: int = 1) -> bool:
        return self.congruent_to(identity(self.p, max(k + 1, 2)), k)

    def is_central(self, k: int = 1) -> bool:
        """Scalar matrix up to entries in p^k."""
        z = self.entry(0, 0)
        for i in range(4):
            for j in range(4):
                e = self.entry(i, j)
                if i == j:
                    if not (e - z).in_ideal(k):
                        return False
                elif not e.in_ideal(k):
                    return False
        return True


def _val(x: Rational, p: int) -> int:
    x = Fraction(x)
    if x == 0:
        return 0
    v, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _fmt_entry(g, i, j):
    e = g.entry(i, j)
    if e.is_zero():
        return "0"
    return f"{g.p}^{e.v}*{e.u % g.p}.."


def _mat_mul(a: tuple, b: tuple, mod: int, p: int) -> tuple:
    """Unrolled 4x4 integer matrix product modulo mod."""
    a0, a1, a2, a3, a4, a5, a6, a7, a8, a9, a10, a11, a12, a13, a14, a15 = a
    b0, b1, b2, b3, b4, b5, b6, b7, b8, b9, b10, b11, b12, b13, b14, b15 = b
    return (
        (a0 * b0 + a1 * b4 + a2 * b8 + a3 * b12) % mod,
        (a0 * b1 + a1 * b5 + a2 * b9 + a3 * b13) % mod,
        (a0 * b2 + a1 * b6 + a2 * b10 + a3 * b14) % mod,
        (a0 * b3 + a1 * b7 + a2 * b11 + a3 * b15) % mod,
        (a4 * b0 + a5 * b4 + a6 * b8 + a7 * b12) % mod,
        (a4 * b1 + a5 * b5 + a6 * b9 + a7 * b13) % mod,
        (a4 * b2 + a5 * b6 + a6 * b10 + a7 * b14) % mod,
        (a4 * b3 + a5 * b7 + a6 * b11 + a7 * b15) % mod,
        (a8 * b0 + a9 * b4 + a10 * b8 + a11 * b12) % mod,
        (a8 * b1 + a9 * b5 + a10 * b9 + a11 * b13) % mod,
        (a8 * b2 + a9 * b6 + a10 * b10 + a11 * b14) % mod,
        (a8 * b3 + a9 * b7 + a10 * b11 + a11 * b15) % mod,
        (a12 * b0 + a13 * b4 + a14 * b8 + a15 * b12) % mod,
        (a12 * b1 + a13 * b5 + a14 * b9 + a15 * b13) % mod,
        (a12 * b2 + a13 * b6 + a14 * b10 + a15 * b14) % mod,
        (a12 * b3 + a13 * b7 + a14 * b11 + a15 * b15) % mod,
    )


def _strip_common_power(p: int, shift: int, m: tuple, K: int):
    """Tighten the shift by dividing out a common p-power of the entries.

    Keeps the absolute precision: p^(-s) (M mod p^K) = p^(-(s-j)) (M/p^j
    mod p^(K-j)).  Pessimistic shifts otherwise compound through products
    and waste precision in later congruence tests.
    """
    if shift == 0:
        return shift, m
    j = shift
    for x in m:
        if x:
            v = _vp(x, p, j)
            if v < j:
                j = v
                if j == 0:
                    return shift, m
    if j == 0 or j == K:
        return shift, m
    pj = ppow(p, j)
    return shift - j, tuple(x // pj for x in m)


def _mat_mul_j(a: tuple, p: int, K: int) -> tuple:
    """a * J as an exact column rearrangement with signs.

    (aJ)_{il} = sum_k a_{ik} J_{kl}; J is nonzero at (0,3),(1,2),(2,1),(3,0).
    """
    mod = ppow(p, K)
    out = [0] * 16
    for i in range(4):
        row = a[4 * i: 4 * i + 4]
        out[4 * i + 3] = row[0] % mod
        out[4 * i + 2] = row[1] % mod
        out[4 * i + 1] = (-row[2]) % mod
        out[4 * i + 0] = (-row[3]) % mod
    return tuple(out)


# -- constructors -------------------------------------------------------------


def make(entries, p: int, prec: int = DEFAULT_PRECISION) -> GSp4Element:
    """Build an element from a 4x4 of PAdic or rational entries."""
    if entries and isinstance(entries[0][0], PAdic):
        return GSp4Element.from_entries(entries, p)
    return GSp4Element.from_rationals(entries, p, prec)


def identity(p: int, prec: int = DEFAULT_PRECISION) -> GSp4Element:
    return GSp4Element.from_rationals(
        [[1 if i == j else 0 for j in range(4)] for i in range(4)], p, prec)


def weyl_s1(p: int, prec: int = DEFAULT_PRECISION) -> GSp4Element:
    return GSp4Element.from_rationals(
        [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], p, prec)


def weyl_s2(p: int, prec: int = DEFAULT_PRECISION) -> GSp4Element:
    return GSp4Element.from_rationals(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, -1, 0, 0], [0, 0, 0, 1]], p, prec)


def d_elem(alpha: Rational, beta: Rational, p: int,
           prec: int = DEFAULT_PRECISION) -> GSp4Element:
    """diag(alpha^2 beta, alpha beta, alpha, 1)."""
    a, b = Fraction(alpha), Fraction(beta)
    if a == 0 or b == 0:
        raise BadParameter("alpha, beta must be nonzero")
    return GSp4Element.from_rationals(
        [[a * a * b, 0, 0, 0], [0, a * b, 0, 0], [0, 0, a, 0], [0, 0, 0, 1]],
        p, prec)


def d_elem_padic(alpha: PAdic, beta: PAdic) -> GSp4Element:
    p = alpha.p
    z = PAdic.zero(p, alpha.A + beta.A)
    one_ = PAdic(p, 0, 1, alpha.A + beta.A)
    rows = [[alpha * alpha * beta, z, z, z],
            [z, alpha * beta, z, z],
            [z, z, alpha, z],
            [z, z, z, one_]]
    return GSp4Element.from_entries(rows, p)


def gchi_elem(p: int, t1: int = 1, t2: int = 1, t3: int = 1,
              prec: int = DEFAULT_PRECISION) -> GSp4Element:
    """Normalizer of the Iwahori radical attached to chi_{t1,t2,t3}."""
    if t1 % p == 0 or t2 % p == 0 or t3 % p == 0:
        raise BadParameter("t1, t2, t3 must be units")
    c = Fraction(p * t2, t3)
    return GSp4Element.from_rationals(
        [[0, 0, 1, 0], [0, 0, 0, -1], [-c, 0, 0, 0], [0, c, 0, 0]], p, prec)


def atkin_lehner(n: int, p: int, prec: int = DEFAULT_PRECISION) -> GSp4Element:
    """The level-n Atkin-Lehner element u_n."""
    q = Fraction(p) ** n
    return GSp4Element.from_rationals(
        [[0, 0, 1, 0], [0, 0, 0, -1], [q, 0, 0, 0], [0, -q, 0, 0]], p, prec)


def paramodular_t(n: int, p: int, prec: int = DEFAULT_PRECISION) -> GSp4Element:
    """The corner element t_n in the paramodular/Klingen coset decomposition."""
    q = Fraction(p) ** n
    return GSp4Element.from_rationals(
        [[0, 0, 0, -1 / q], [0, 1, 0, 0], [0, 0, 1, 0], [q, 0, 0, 0]], p, prec)


def borel_unipotent(a: PAdic, b: PAdic, c: PAdic, e: PAdic) -> GSp4Element:
    """u(a,b,c,e): the upper unipotent with (1,2)=a, (2,3)=e, (2,4)=b, (1,4)=c+ab."""
    p = a.p
    A = min(x.A for x in (a, b, c, e)) + 8
    z = PAdic.zero(p, A)
    one_ = PAdic(p, 0, 1, A)
    rows = [[one_, a, b + a * e, c + a * b],
            [z, one_, e, b],
            [z, z, one_, -a],
            [z, z, z, one_]]
    return GSp4Element.from_entries(rows, p)


def unchecked_element(rows: Sequence[Sequence[PAdic]], p: int,
                      mu: PAdic) -> GSp4Element:
    """Pack an element from entries known symplectic by construction.

    Skips the similitude verification (two matrix products); meant for the
    cell loops of the lattice integrals where the factors are unipotents and
    torus elements whose group membership is structural.
    """
    flat = [rows[i][j] for i in range(4) for j in range(4)]
    A = min(e.A for e in flat)
    vals = [e.v for e in flat if not e.is_zero()]
    shift = max(0, -min(vals)) if vals else 0
    K = A + shift
    if K < 1:
        raise PrecisionExhausted("no significant digits at common precision")
    mod = ppow(p, K)
    m = tuple(0 if e.is_zero() or e.v + shift >= K
              else (e.u * ppow(p, e.v + shift)) % mod
              for e in flat)
    return GSp4Element(p, shift, m, A, mu)


def borel_unipotent_fast(a: PAdic, b: PAdic, c: PAdic, e: PAdic,
                         one_mu: PAdic) -> GSp4Element:
    p = a.p
    A = min(x.A for x in (a, b, c, e)) + 8
    z = PAdic.zero(p, A)
    one_ = PAdic(p, 0, 1, A)
    rows = ((one_, a, b + a * e, c + a * b),
            (z, one_, e, b),
            (z, z, one_, -a),
            (z, z, z, one_))
    return unchecked_element(rows, p, one_mu)


def borel_unipotent_q(p: int, a: Rational, b: Rational, c: Rational, e: Rational,
                      prec: int = DEFAULT_PRECISION) -> GSp4Element:
    mk = lambda x: PAdic.from_rational(Fraction(x), p, prec)
    return borel_unipotent(mk(a), mk(b), mk(c), mk(e))


def siegel_unipotent(p: int, u: Rational, w: Rational, z: Rational,
                     prec: int = DEFAULT_PRECISION) -> GSp4Element:
    """n(u,w,z): unipotent radical of the Siegel parabolic."""
    return GSp4Element.from_rationals(
        [[1, 0, u, z], [0, 1, w, u], [0, 0, 1, 0], [0, 0, 0, 1]], p, prec)


def bessel_torus(p: int, y: Rational, a: Rational, c: Rational = 1,
                 prec: int = DEFAULT_PRECISION) -> GSp4Element:
    """Embedded torus element (x=1) of T_S for S = diag(a, c)."""
    y, a, c = Fraction(y), Fraction(a), Fraction(c)
    return GSp4Element.from_rationals(
        [[1, c * y, 0, 0], [-a * y, 1, 0, 0],
         [0, 0, 1, -c * y], [0, 0, a * y, 1]], p, prec)


def block_gl2(p: int, a: Rational, b: Rational, c: Rational, d: Rational,
              prec: int = DEFAULT_PRECISION) -> GSp4Element:
    """diag(det A, A, 1) for A = [[a,b],[c,d]] in GL(2)."""
    det = Fraction(a) * Fraction(d) - Fraction(b) * Fraction(c)
    if det == 0:
        raise BadParameter("singular GL2 block")
    return GSp4Element.from_rationals(
        [[det, 0, 0, 0], [0, a, b, 0], [0, c, d, 0], [0, 0, 0, 1]], p, prec)


def zeta_torus(p: int, gamma: PAdic, x: PAdic) -> GSp4Element:
    """diag(gamma, gamma, 1, 1) with an (3,2)-entry x, the zeta integration domain."""
    A = min(gamma.A, x.A)
    z = PAdic.zero(p, A + 6)
    one_ = PAdic(p, 0, 1, A + 6)
    rows = [[gamma, z, z, z], [z, gamma, z, z], [z, x, one_, z], [z, z, z, one_]]
    return GSp4Element.from_entries(rows, p)


def scalar_elem(z: PAdic) -> GSp4Element:
    p = z.p
    zero_ = PAdic.zero(p, z.A + abs(z.v) + 2)
    rows = [[z if i == j else zero_ for j in range(4)] for i in range(4)]
    return GSp4Element.from_entries(rows, p)


_SPECIALS: dict[str, Callable] = {
    "s1": lambda p, prec, **kw: weyl_s1(p, prec),
    "s2": lambda p, prec, **kw: weyl_s2(p, prec),
    "d": lambda p, prec, alpha, beta, **kw: d_elem(alpha, beta, p, prec),
    "gchi": lambda p, prec, t1=1, t2=1, t3=1, **kw: gchi_elem(p, t1, t2, t3, prec),
    "u_n": lambda p, prec, n, **kw: atkin_lehner(n, p, prec),
    "t_n": lambda p, prec, n, **kw: paramodular_t(n, p, prec),
    "u": lambda p, prec, a, b, c, e, **kw: borel_unipotent_q(p, a, b, c, e, prec),
    "n": lambda p, prec, u, w, z, **kw: siegel_unipotent(p, u, w, z, prec),
}


def special(name: str, p: int, prec: int = DEFAULT_PRECISION, **params) -> GSp4Element:
    try:
        ctor = _SPECIALS[name]
    except KeyError:
        raise BadParameter(f"unknown special element {name!r}") from None
    return ctor(p, prec, **params)


# -- subgroup membership -------------------------------------------------------

# entry-ideal patterns; None means only integrality
_KLINGEN_PATTERN = lambda n: (
    (0, 0, 0, 0),
    (n, 0, 0, 0),
    (n, 0, 0, 0),
    (n, n, n, 0),
)

_PARAMODULAR_PATTERN = lambda n: (
    (0, 0, 0, -n),
    (n, 0, 0, 0),
    (n, 0, 0, 0),
    (n, n, n, 0),
)


def _pattern_member(g: GSp4Element, pattern) -> bool:
    for i in range(4):
        for j in range(4):
            if not g._entry_in_ideal(i, j, pattern[i][j]):
                return False
    return True


def in_maximal_compact(g: GSp4Element) -> bool:
    """g in GSp4(o): integral entries and unit multiplier."""
    return _pattern_member(g, ((0,) * 4,) * 4) and g.mu.is_unit()


def in_kprime(g: GSp4Element) -> bool:
    """The pro-unipotent radical of the Iwahori subgroup."""
    if g.A < 2:
        raise PrecisionExhausted("Iwahori radical test needs precision >= 2")
    for i in range(4):
        for j in range(4):
            if i == j:
                if not (g.entry(i, i) - PAdic(g.p, 0, 1, g.A)).in_ideal(1):
                    return False
            elif i > j:
                if not g._entry_in_ideal(i, j, 1):
                    return False
            else:
                if not g._entry_in_ideal(i, j, 0):
                    return False
    return True


def in_klingen(g: GSp4Element, n: int) -> bool:
    return _pattern_member(g, _KLINGEN_PATTERN(n))


def in_paramodular(g: GSp4Element, n: int) -> bool:
    return _pattern_member(g, _PARAMODULAR_PATTERN(n)) and g.mu.is_unit()


# entry pattern of d K(5) d^(-1): conjugation scales entry (i,j) by d_i / d_j
_SHIFTED5_PATTERN = (
    (0, 1, 2, -2),
    (4, 0, 1, 2),
    (3, -1, 0, 1),
    (2, 3, 4, 0),
)


def in_paramodular_shifted5(g: GSp4Element) -> bool:
    """The conjugate d K(5) d^(-1) of the level-5 paramodular group.

    Unit multiplier plus the printed entry pattern; equivalent to conjugating
    back into K(5) but without the precision cost of two extra products.
    """
    return _pattern_member(g, _SHIFTED5_PATTERN) and g.mu.is_unit()


def in_center(g: GSp4Element) -> bool:
    z = g.entry(0, 0)
    if z.is_zero():
        return False
    return g.is_central(k=min(z.v + 2, g.A - 1))


def in_even_multiplier_subgroup(g: GSp4Element) -> bool:
    """The index-2 subgroup E: even valuation of the multiplier."""
    return g.mu.valuation() % 2 == 0


@dataclass(frozen=True)
class SubgroupTag:
    kind: str
    level: int = 0


def member(g: GSp4Element, tag: SubgroupTag,
           gchi: Optional[GSp4Element] = None) -> bool:
    kind = tag.kind
    if kind == "K":
        return in_maximal_compact(g)
    if kind == "Kprime":
        return in_kprime(g)
    if kind == "Klingen":
        return in_klingen(g, tag.level)
    if kind == "Paramodular":
        return in_paramodular(g, tag.level)
    if kind == "ParamodularShifted5":
        return in_paramodular_shifted5(g)
    if kind == "Z":
        return in_center(g)
    if kind == "E":
        return in_even_multiplier_subgroup(g)
    if kind == "H":
        return try_decompose_H(g) is not None
    if kind == "Hprime":
        if gchi is None:
            raise BadParameter("Hprime membership needs the chi-normalizer")
        return member_Hprime(g, gchi) != "Neither"
    raise BadParameter(f"unknown subgroup tag {kind!r}")


# -- H = Z K' decomposition ----------------------------------------------------


def try_decompose_H(g: GSp4Element):
    """Return (z, kprime) with g = z * kprime, z central, or None.

    Uses that the Iwahori radical pins the (4,4) entry to 1 + p, so the
    central part can be read off as z = g_44 up to a (1+p)-unit absorbed
    into the radical.
    """
    p = g.p
    K = g.A + g.shift
    raw = g.m[15]
    w_min = K
    for x in g.m:
        if x:
            v = _vp(x, p, w_min)
            if v < w_min:
                w_min = v
                if w_min == 0:
                    break
    if w_min == K:
        raise PrecisionExhausted("matrix vanishes at working precision")
    # the central part has the valuation of g_44; every entry of z k' sits
    # at or above v(z), so a strictly shallower entry rules membership out
    if raw == 0 or _vp(raw, p, K) > w_min:
        return None
    w = w_min
    ak = g.A + g.shift - w  # absolute precision of g / g44
    if ak < 2:
        raise PrecisionExhausted("H decomposition needs 2 digits past the center")
    pw = ppow(p, w)
    mod = ppow(p, ak)
    uz = raw // pw
    uz_inv = pow(uz, -1, mod)
    n = tuple(((x // pw) * uz_inv) % mod for x in g.m)
    # pattern of the Iwahori radical: diag in 1+p, strictly-lower in p
    if (n[0] - 1) % p or (n[5] - 1) % p or (n[10] - 1) % p or (n[15] - 1) % p:
        return None
    if n[4] % p or n[8] % p or n[9] % p or n[12] % p or n[13] % p or n[14] % p:
        return None
    z = PAdic(p, w - g.shift, uz % ppow(p, ak), w - g.shift + ak)
    kp = GSp4Element(p, 0, n, ak, g.mu * z.inverse() * z.inverse())
    return z, kp


def decompose_H(g: GSp4Element) -> tuple[PAdic, GSp4Element]:
    res = try_decompose_H(g)
    if res is None:
        raise NotInH("element is not in Z K'")
    return res


def member_Hprime(g: GSp4Element, gchi: GSp4Element) -> str:
    """Classify g within H' = H | gchi H: 'InH', 'InGchiH' or 'Neither'."""
    if g.mu.valuation() % 2 == 0:
        return "InH" if try_decompose_H(g) is not None else "Neither"
    h = gchi.inverse() * g
    return "InGchiH" if try_decompose_H(h) is not None else "Neither"


# -- coset representatives of H d K(5) -----------------------------------------


def _diag_uv(p: int, u: int, v: int, prec: int) -> GSp4Element:
    return GSp4Element.from_rationals(
        [[u * v, 0, 0, 0], [0, u, 0, 0], [0, 0, v, 0], [0, 0, 0, 1]], p, prec)


def _lower32(p: int, x: Rational, prec: int) -> GSp4Element:
    return GSp4Element.from_rationals(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, x, 1, 0], [0, 0, 0, 1]], p, prec)


def _upper14(p: int, c: Rational, prec: int) -> GSp4Element:
    return GSp4Element.from_rationals(
        [[1, 0, 0, c], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], p, prec)


def representatives_S_by_family(p: int, prec: int = 26) -> tuple[
        list[GSp4Element], list[GSp4Element], list[GSp4Element], list[GSp4Element]]:
    """Representatives of H \\ H d_{pi,pi} K(5), grouped by the four families.

    Parametrized as printed in the coset decomposition: units u, v mod p and
    x, y (or z) over the stated residue ranges.
    """
    d = d_elem(p, p, p, prec)
    w1 = GSp4Element.from_rationals(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, -1, 0, 0], [0, 0, 0, 1]], p, prec)
    q5 = Fraction(p) ** 5
    t3 = GSp4Element.from_rationals(
        [[0, 0, 0, 1 / q5], [0, 0, 1, 0], [0, -1, 0, 0], [-q5, 0, 0, 0]], p, prec)
    t4 = GSp4Element.from_rationals(
        [[0, 0, 0, 1 / q5], [0, 1, 0, 0], [0, 0, 1, 0], [-q5, 0, 0, 0]], p, prec)
    units = range(1, p)
    fams: tuple[list, list, list, list] = ([], [], [], [])
    for u in units:
        for v in units:
            dd = d * _diag_uv(p, u, v, prec)
            for x in range(p * p):
                base = dd * _lower32(p, x, prec)
                for y in range(p * p):
                    fams[0].append(base * _upper14(p, Fraction(y, p ** 5), prec) * w1)
            for x in range(p):
                base = dd * _lower32(p, x * p, prec)
                for y in range(p * p):
                    fams[1].append(base * _upper14(p, Fraction(y, p ** 5), prec))
            for x in range(p * p):
                base = dd * _lower32(p, x, prec)
                for z in range(p):
                    fams[2].append(base * _upper14(p, Fraction(z, p ** 4), prec) * t3)
            for x in range(p):
                base = dd * _lower32(p, x * p, prec)
                for z in range(p):
                    fams[3].append(base * _upper14(p, Fraction(z, p ** 4), prec) * t4)
    return fams


def representatives_S(p: int, prec: int = 26) -> list[GSp4Element]:
    """All (q-1)^2 q^2 (q+1)^2 representatives of H \\ H d_{pi,pi} K(5)."""
    fams = representatives_S_by_family(p, prec)
    return [r for fam in fams for r in fam]


def family_sizes(p: int) -> tuple[int, int, int, int]:
    q = p
    return ((q - 1) ** 2 * q ** 4, (q - 1) ** 2 * q ** 3,
            (q - 1) ** 2 * q ** 3, (q - 1) ** 2 * q ** 2)


@dataclass
class CosetReport:
    n_reps: int
    pairwise_disjoint: bool
    disjoint_violations: list = field(default_factory=list)
    sample_hits: list = field(default_factory=list)
    complete: bool = True

    @property
    def ok(self) -> bool:
        return self.pairwise_disjoint and self.complete


def verify_coset_partition(reps: Sequence[GSp4Element],
                           coset_test: Callable[[GSp4Element], bool],
                           samples: Iterable[GSp4Element] = (),
                           max_violations: int = 10) -> CosetReport:
    """Check pairwise disjointness of cosets (left factor given by coset_test)
    and, on the provided ambient samples, completeness: each sample must land
    in exactly one coset.  Sampling makes the completeness check probabilistic.
    """
    inv = [r.inverse() for r in reps]
    report = CosetReport(n_reps=len(reps), pairwise_disjoint=True)
    for i, r in enumerate(reps):
        for j in range(len(reps)):
            if i == j:
                continue
            if coset_test(r * inv[j]):
                report.disjoint_violations.append((i, j))
                report.pairwise_disjoint = False
                if len(report.disjoint_violations) >= max_violations:
                    return report
    for s in samples:
        hits = sum(1 for rinv in inv if coset_test(s * rinv))
        report.sample_hits.append(hits)
        if hits != 1:
            report.complete = False
    return report


# -- compositional samplers ------------------------------------------------------


def random_unit(p: int, rng: random.Random, depth: int = 4) -> int:
    return rng.randrange(1, p) + p * rng.randrange(0, ppow(p, depth - 1))


def random_kprime(p: int, rng: random.Random, prec: int = 26) -> GSp4Element:
    """Random element of the Iwahori radical: torus(1+p) times root elements."""
    t1 = 1 + p * rng.randrange(0, ppow(p, 3))
    t2 = 1 + p * rng.randrange(0, ppow(p, 3))
    m = 1 + p * rng.randrange(0, ppow(p, 3))
    torus = GSp4Element.from_rationals(
        [[t1, 0, 0, 0], [0, t2, 0, 0], [0, 0, Fraction(m, t2), 0],
         [0, 0, 0, Fraction(m, t1)]], p, prec)
    g = torus
    for _ in range(2):
        coords = [rng.randrange(0, ppow(p, 3)) for _ in range(4)]
        g = g * borel_unipotent_q(p, *coords, prec=prec)
        coords = [p * rng.randrange(0, ppow(p, 2)) for _ in range(4)]
        g = g * borel_unipotent_q(p, *coords, prec=prec).transpose()
    return g


def random_center(p: int, rng: random.Random, prec: int = 26,
                  val_range: tuple[int, int] = (-2, 2)) -> GSp4Element:
    v = rng.randint(*val_range)
    u = random_unit(p, rng)
    z = PAdic.from_rational(Fraction(u * ppow(p, max(v, 0)), ppow(p, max(-v, 0))),
                            p, prec)
    return scalar_elem(z)


def random_h(p: int, rng: random.Random, prec: int = 26) -> GSp4Element:
    return random_center(p, rng, prec) * random_kprime(p, rng, prec)


def random_hprime(p: int, rng: random.Random, gchi: GSp4Element,
                  prec: int = 26) -> GSp4Element:
    h = random_h(p, rng, prec)
    return gchi * h if rng.random() < 0.5 else h


def random_klingen(p: int, n: int, rng: random.Random, prec: int = 26) -> GSp4Element:
    upper = borel_unipotent_q(
        p, rng.randrange(0, ppow(p, 3)), rng.randrange(0, ppow(p, 3)),
        rng.randrange(0, ppow(p, 3)), 0, prec)
    qn = ppow(p, n)
    lower = borel_unipotent_q(
        p, qn * rng.randrange(0, p * p), qn * rng.randrange(0, p * p),
        qn * rng.randrange(0, p * p), 0, prec).transpose()
    while True:
        a, b = rng.randrange(0, ppow(p, 2)), rng.randrange(0, ppow(p, 2))
        c, dd = rng.randrange(0, ppow(p, 2)), rng.randrange(0, ppow(p, 2))
        if (a * dd - b * c) % p:
            break
    blk = block_gl2(p, a, b, c, dd, prec)
    z = scalar_elem(PAdic.from_rational(random_unit(p, rng), p, prec))
    return upper * lower * blk * z


def random_paramodular(p: int, n: int, rng: random.Random,
                       prec: int = 26) -> GSp4Element:
    kl = random_klingen(p, n, rng, prec)
    if rng.randrange(0, p + 1) < p:
        y = rng.randrange(0, ppow(p, n))
        return _upper14(p, Fraction(y, ppow(p, n)), prec) * kl
    z = rng.randrange(0, ppow(p, n - 1))
    return paramodular_t(n, p, prec) * _upper14(p, Fraction(z, ppow(p, n - 1)), prec) * kl


def random_element(p: int, rng: random.Random, prec: int = 26) -> GSp4Element:
    """Generic element across valuation classes."""
    i, j = rng.randint(-2, 2), rng.randint(-2, 2)
    g = d_elem(Fraction(random_unit(p, rng) * ppow(p, max(i, 0)), ppow(p, max(-i, 0))),
               Fraction(random_unit(p, rng) * ppow(p, max(j, 0)), ppow(p, max(-j, 0))),
               p, prec)
    for _ in range(rng.randint(0, 2)):
        g = g * rng.choice([weyl_s1(p, prec), weyl_s2(p, prec)])
        num = lambda: Fraction(rng.randrange(-ppow(p, 2), ppow(p, 2)), ppow(p, rng.randint(0, 2)))
        g = g * borel_unipotent_q(p, num(), num(), num(), num(), prec)
    return g


# -- residue group order by BFS ---------------------------------------------------


def _residue_generators(p: int) -> list[np.ndarray]:
    """Weyl generators, the four positive root elements, and a similitude
    torus element: together they generate GSp4(F_p)."""
    gens = []

    def mat(rows):
        gens.append(np.array(rows, dtype=np.int64) % p)

    g0 = _primitive_root(p)
    mat([[g0, 0, 0, 0], [0, g0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    mat([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    mat([[1, 0, 0, 0], [0, 0, 1, 0], [0, -1, 0, 0], [0, 0, 0, 1]])
    for coords in ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)):
        a, b, c, e = coords
        mat([[1, a, b + a * e, c + a * b], [0, 1, e, b], [0, 0, 1, -a],
             [0, 0, 0, 1]])
    return gens


def _h_cap_k_generators(p: int) -> list[np.ndarray]:
    gens = [np.eye(4, dtype=np.int64) * _primitive_root(p) % p]
    for coords in ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)):
        a, b, c, e = coords
        gens.append(np.array(
            [[1, a, b + a * e, c + a * b], [0, 1, e, b], [0, 0, 1, -a], [0, 0, 0, 1]],
            dtype=np.int64) % p)
    return gens


def _primitive_root(p: int) -> int:
    for g in range(2, p):
        seen, x = set(), 1
        for _ in range(p - 1):
            x = x * g % p
            seen.add(x)
        if len(seen) == p - 1:
            return g
    raise BadParameter(f"{p} is not prime")


def _bfs_closure(p: int, gens: list[np.ndarray], cap: int,
                 chunk: int = 1_500_000) -> int:
    """Order of the subgroup of GL4(F_p) generated by gens (vectorized BFS).

    Elements are encoded base-p into int64 codes; the visited set is a sorted
    code array, frontiers are expanded in chunks to bound peak memory.
    """
    powers = (np.int64(p) ** np.arange(16)).astype(np.int64)

    def encode(batch: np.ndarray) -> np.ndarray:
        return (batch.reshape(-1, 16) * powers).sum(axis=1)

    def decode(codes: np.ndarray) -> np.ndarray:
        return (codes[:, None] // powers[None, :] % p).reshape(-1, 4, 4)

    visited = np.sort(encode(np.eye(4, dtype=np.int64)[None, :, :]))
    frontier = visited.copy()
    while len(frontier):
        cands = []
        for lo in range(0, len(frontier), chunk):
            batch = decode(frontier[lo:lo + chunk])
            for g in gens:
                nxt = np.einsum("nij,jk->nik", batch, g) % p
                cands.append(np.unique(encode(nxt)))
        codes = np.unique(np.concatenate(cands))
        del cands
        idx = np.clip(np.searchsorted(visited, codes), 0, len(visited) - 1)
        frontier = codes[visited[idx] != codes]
        if len(frontier) == 0:
            break
        visited = np.union1d(visited, frontier)
        if len(visited) > cap:
            raise BudgetExceeded(f"closure exceeded cap {cap}")
    return int(len(visited))


def residue_group_order(p: int, cap: int = 50_000_000) -> tuple[int, int]:
    """(|GSp4(F_p)|, |image of H cap K mod p|), both by BFS closure."""
    full = _bfs_closure(p, _residue_generators(p), cap)
    himg = _bfs_closure(p, _h_cap_k_generators(p), cap)
    return full, himg
