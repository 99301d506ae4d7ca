"""Exact arithmetic in the cyclotomic fields Q(zeta_{p^M}).

Values are stored in the power basis {zeta^j : 0 <= j < phi(p^M)} after
reduction by the relation 1 + zeta^{p^(M-1)} + zeta^{2 p^(M-1)} + ... +
zeta^{(p-1) p^(M-1)} = 0, with exact rational coefficients.  Level M = 0
means the rational subfield.  Equality is decidable: values are embedded
into a common level and compared coefficient-wise (the power basis is a
Q-basis at each level, and level raising is injective).

These are the values of the additive characters psi, psi0 and of every
finite character sum the local integrals reduce to; the measure factors
multiply in as rationals.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .padic import PAdic, ppow

MAX_LEVEL = 6


class NotRational(ArithmeticError):
    """The value has a nonzero component outside the rational subfield."""


class LevelCapExceeded(ValueError):
    """A root of unity beyond level MAX_LEVEL was requested."""


def phi_pk(p: int, m: int) -> int:
    """Euler phi of p^m."""
    return 1 if m == 0 else ppow(p, m - 1) * (p - 1)


def _reduce(p: int, m: int, dense: list[Fraction]) -> tuple[Fraction, ...]:
    """Reduce coefficients on arbitrary exponents into the power basis."""
    d = phi_pk(p, m)
    if m == 0:
        return (sum(dense, Fraction(0)),)
    n = ppow(p, m)
    folded = [Fraction(0)] * n
    for e, c in enumerate(dense):
        if c != 0:
            folded[e % n] += c
    step = ppow(p, m - 1)
    out = folded[:d]
    # zeta^(d + r) = -sum_{j=0..p-2} zeta^(r + j*step)  for 0 <= r < step
    for e in range(d, n):
        c = folded[e]
        if c == 0:
            continue
        r = e - d
        for j in range(p - 1):
            out[r + j * step] -= c
    return tuple(out)


class Cyclotomic:
    """Immutable element of Q(zeta_{p^M}) in reduced power-basis form."""

    __slots__ = ("p", "level", "coeffs")

    def __init__(self, p: int, level: int, coeffs: tuple[Fraction, ...]):
        if len(coeffs) != phi_pk(p, level):
            raise ValueError("coefficient vector has wrong length for level")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, *args):  # pragma: no cover
        raise AttributeError("Cyclotomic values are immutable")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def rational(x: Union[int, Fraction], p: int) -> "Cyclotomic":
        return Cyclotomic(p, 0, (Fraction(x),))

    @staticmethod
    def zeta_power(p: int, level: int, k: int) -> "Cyclotomic":
        """zeta_{p^level}^k, reduced."""
        if level > MAX_LEVEL:
            raise LevelCapExceeded(f"level {level} exceeds cap {MAX_LEVEL}")
        if level == 0:
            return Cyclotomic.rational(1, p)
        k %= ppow(p, level)
        dense = [Fraction(0)] * (k + 1)
        dense[k] = Fraction(1)
        return Cyclotomic(p, level, _reduce(p, level, dense))

    # -- level handling ------------------------------------------------------

    def raised(self, level: int) -> "Cyclotomic":
        """Embed into Q(zeta_{p^level}) via zeta_{p^M} -> zeta_{p^level}^(p^(level-M))."""
        if level == self.level:
            return self
        if level < self.level:
            raise ValueError("can only raise the level")
        if level > MAX_LEVEL:
            raise LevelCapExceeded(f"level {level} exceeds cap {MAX_LEVEL}")
        stretch = ppow(self.p, level - self.level)
        dense = [Fraction(0)] * (phi_pk(self.p, self.level) * stretch)
        for j, c in enumerate(self.coeffs):
            dense[j * stretch] = c
        return Cyclotomic(self.p, level, _reduce(self.p, level, dense))

    # -- ring operations -----------------------------------------------------

    def _pair(self, other: "Cyclotomic") -> tuple["Cyclotomic", "Cyclotomic"]:
        if self.p != other.p:
            raise ValueError("mixed primes")
        m = max(self.level, other.level)
        return self.raised(m), other.raised(m)

    def __add__(self, other: "Cyclotomic") -> "Cyclotomic":
        a, b = self._pair(other)
        return Cyclotomic(a.p, a.level,
                          tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    def __neg__(self) -> "Cyclotomic":
        return Cyclotomic(self.p, self.level, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Cyclotomic") -> "Cyclotomic":
        return self + (-other)

    def __mul__(self, other: "Cyclotomic") -> "Cyclotomic":
        a, b = self._pair(other)
        if a.level == 0:
            return Cyclotomic(a.p, 0, (a.coeffs[0] * b.coeffs[0],))
        dense = [Fraction(0)] * (2 * len(a.coeffs) - 1)
        for i, ci in enumerate(a.coeffs):
            if ci == 0:
                continue
            for j, cj in enumerate(b.coeffs):
                if cj != 0:
                    dense[i + j] += ci * cj
        return Cyclotomic(a.p, a.level, _reduce(a.p, a.level, dense))

    def scale(self, r: Union[int, Fraction]) -> "Cyclotomic":
        r = Fraction(r)
        return Cyclotomic(self.p, self.level, tuple(c * r for c in self.coeffs))

    def conjugate(self) -> "Cyclotomic":
        """Complex conjugation: zeta -> zeta^(-1)."""
        if self.level == 0:
            return self
        n = ppow(self.p, self.level)
        dense = [Fraction(0)] * n
        for j, c in enumerate(self.coeffs):
            dense[(n - j) % n] += c
        return Cyclotomic(self.p, self.level, _reduce(self.p, self.level, dense))

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyclotomic.rational(other, self.p)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._pair(other)
        return a.coeffs == b.coeffs

    __hash__ = None  # semantic equality across levels; not hashable

    def to_rational(self) -> Fraction:
        if any(c != 0 for c in self.coeffs[1:]):
            raise NotRational(f"nonconstant coefficients present: {self}")
        return self.coeffs[0]

    def __repr__(self):
        if self.level == 0:
            return f"Cyclo({self.coeffs[0]})"
        terms = [(j, c) for j, c in enumerate(self.coeffs) if c != 0]
        if not terms:
            return "Cyclo(0)"
        body = " + ".join(f"{c}*z^{j}" if j else f"{c}" for j, c in terms)
        return f"Cyclo[{self.p}^{self.level}]({body})"

    def render(self) -> str:
        """Stable exact rendering: rational as num/den, else coefficient list."""
        try:
            r = self.to_rational()
            return f"{r.numerator}/{r.denominator}" if r.denominator != 1 else str(r.numerator)
        except NotRational:
            coeffs = ";".join(f"{j}:{c.numerator}/{c.denominator}"
                              for j, c in enumerate(self.coeffs) if c != 0)
            return f"zeta[{self.p}^{self.level}]{{{coeffs}}}"


# -- characters --------------------------------------------------------------

def root_of_unity(a: Union[Fraction, int], p: int) -> Cyclotomic:
    """e^(2 pi i a) for rational a with denominator a power of p, times an
    optional factor 2 (a sign, still rational for odd p)."""
    a = Fraction(a)
    den = a.denominator
    m = 0
    while den % p == 0:
        den //= p
        m += 1
    sign = 1
    if den == 2:
        sign, den = -1, 1
        a = a - Fraction(1, 2)
    if den != 1:
        raise ValueError(f"denominator of {a} is not a power of {p} (times 2)")
    k = a.numerator * ppow(p, m) // a.denominator  # a = k / p^m
    z = Cyclotomic.zeta_power(p, m, k)
    return z if sign == 1 else z.scale(-1)


def psi(x: PAdic) -> Cyclotomic:
    """Additive character trivial on o, nontrivial on p^(-1)."""
    return root_of_unity(x.fractional_part(), x.p)


def psi0(x: PAdic) -> Cyclotomic:
    """psi0(x) = psi(x / pi): trivial on p, nontrivial on o."""
    from .padic import uniformizer
    return psi(x * uniformizer(x.p, max(x.relative_precision, 2)).inverse())


def exponent_of_psi(x: PAdic) -> Fraction:
    """The fraction e in [0,1) with psi(x) = e^(2 pi i e)."""
    return x.fractional_part()


def ledger_to_value(ledger: dict[Fraction, Fraction], p: int) -> Cyclotomic:
    """Sum w * e^(2 pi i e) over a map of exponent fractions to exact weights."""
    total = Cyclotomic.rational(0, p)
    for e, w in sorted(ledger.items()):
        if w != 0:
            total = total + root_of_unity(e, p).scale(w)
    return total
