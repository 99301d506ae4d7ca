"""Exact truncated p-adic arithmetic over Q_p with hard precision tracking.

A number is stored as p^v * u where u is a unit known modulo p^(A-v); the
absolute precision A means the value is known exactly modulo p^A.  The
uniformizer is fixed to the rational prime p itself, so fractional parts are
literal base-p expansions.  There is no floating point anywhere: every
operation either returns an exact result at the correct precision or raises.

Zero is the special value with valuation +infinity; it represents "congruent
to 0 mod p^A".  Precision failures raise PrecisionExhausted rather than
truncating silently, because all downstream identities are exact equalities.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Union

DEFAULT_PRECISION = 12

_INF = None  # valuation marker for zero


class PrecisionExhausted(ArithmeticError):
    """A test or operation needs digits below the known precision."""


class DivisionByZero(ZeroDivisionError):
    """Inversion of a value that is zero at its working precision."""


_POW_CACHE: dict[int, list[int]] = {}


def ppow(p: int, k: int) -> int:
    """p**k with a per-prime cache (k >= 0)."""
    try:
        tab = _POW_CACHE[p]
    except KeyError:
        tab = _POW_CACHE[p] = [1]
    while len(tab) <= k:
        tab.append(tab[-1] * p)
    return tab[k]


class PAdic:
    """Immutable truncated element of Q_p.

    Fields: prime p, valuation v (int, or None for zero), unit u reduced
    modulo p^(A-v), absolute precision A.
    """

    __slots__ = ("p", "v", "u", "A")

    def __init__(self, p: int, v: Union[int, None], u: int, A: int):
        if v is not None:
            rel = A - v
            if rel < 1:
                raise PrecisionExhausted(
                    f"no significant digit: v={v} >= A={A}")
            u %= ppow(p, rel)
            if u % p == 0:
                raise ValueError("unit part divisible by p; renormalize first")
        else:
            u = 0
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "A", A)

    def __setattr__(self, *args):  # pragma: no cover
        raise AttributeError("PAdic values are immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(p: int, A: int) -> "PAdic":
        return PAdic(p, _INF, 0, A)

    @staticmethod
    def from_rational(x: Union[int, Fraction], p: int,
                      prec: int = DEFAULT_PRECISION) -> "PAdic":
        """Truncate the exact rational x at relative precision `prec` digits.

        >>> PAdic.from_rational(Fraction(5, 9), 3, 4)
        PAdic(3^-2 * 5 mod 3^4)
        """
        x = Fraction(x)
        if x == 0:
            return PAdic.zero(p, prec)
        num, den = x.numerator, x.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        mod = ppow(p, prec)
        u = (num * pow(den, -1, mod)) % mod
        return PAdic(p, v, u, v + prec)

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.v is None

    @property
    def relative_precision(self) -> int:
        if self.is_zero():
            return 0
        return self.A - self.v

    def valuation(self) -> int:
        """v(x); raises on zero-at-precision (unbounded below by the data)."""
        if self.is_zero():
            raise PrecisionExhausted(f"valuation of 0 mod p^{self.A} is >= {self.A}, unknown")
        return self.v

    def abs_exponent(self) -> int:
        """|x| = q^(-v); returns -v, the exponent of q."""
        return -self.valuation()

    def __repr__(self):
        if self.is_zero():
            return f"PAdic(0 mod {self.p}^{self.A})"
        return f"PAdic({self.p}^{self.v} * {self.u} mod {self.p}^{self.relative_precision})"

    def __eq__(self, other):
        """Structural equality (same stored digits and precision)."""
        if not isinstance(other, PAdic):
            return NotImplemented
        return (self.p, self.v, self.u, self.A) == (other.p, other.v, other.u, other.A)

    def __hash__(self):
        return hash((self.p, self.v, self.u, self.A))

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "PAdic"):
        if self.p != other.p:
            raise ValueError("mixed primes")

    def __add__(self, other: "PAdic") -> "PAdic":
        self._check(other)
        p = self.p
        A = min(self.A, other.A)
        if self.is_zero():
            return _truncate(other, A)
        if other.is_zero():
            return _truncate(self, A)
        x, y = self, other
        if x.v > y.v:
            x, y = y, x
        v = x.v
        if v >= A:
            return PAdic.zero(p, A)
        rel = A - v
        s = (x.u + y.u * ppow(p, y.v - v)) % ppow(p, rel)
        if s == 0:
            return PAdic.zero(p, A)
        w = 0
        while s % p == 0:
            s //= p
            w += 1
        return PAdic(p, v + w, s, A)

    def __neg__(self) -> "PAdic":
        if self.is_zero():
            return self
        return PAdic(self.p, self.v, -self.u, self.A)

    def __sub__(self, other: "PAdic") -> "PAdic":
        return self + (-other)

    def __mul__(self, other: "PAdic") -> "PAdic":
        self._check(other)
        p = self.p
        if self.is_zero() or other.is_zero():
            # x = 0 mod p^Ax times y: valuation shifts the guarantee
            if self.is_zero() and other.is_zero():
                return PAdic.zero(p, self.A + other.A)
            z, y = (self, other) if self.is_zero() else (other, self)
            return PAdic.zero(p, z.A + y.v)
        rel = min(self.relative_precision, other.relative_precision)
        v = self.v + other.v
        return PAdic(p, v, (self.u * other.u) % ppow(p, rel), v + rel)

    def inverse(self) -> "PAdic":
        if self.is_zero():
            raise DivisionByZero(f"inverse of 0 mod {self.p}^{self.A}")
        rel = self.relative_precision
        u = pow(self.u, -1, ppow(self.p, rel))
        return PAdic(self.p, -self.v, u, -self.v + rel)

    def __truediv__(self, other: "PAdic") -> "PAdic":
        return self * other.inverse()

    # -- queries -----------------------------------------------------------

    def in_ideal(self, k: int) -> bool:
        """x in p^k * o.  Needs A > k to be decidable."""
        if self.A <= k:
            raise PrecisionExhausted(f"in_ideal({k}) undecidable at A={self.A}")
        if self.is_zero():
            return True
        return self.v >= k

    def is_integral(self) -> bool:
        return self.in_ideal(0)

    def is_unit(self) -> bool:
        if self.A <= 0:
            raise PrecisionExhausted(f"is_unit undecidable at A={self.A}")
        return (not self.is_zero()) and self.v == 0

    def in_one_plus_p(self) -> bool:
        """x in 1 + p."""
        one = PAdic(self.p, 0, 1, max(self.A, 2))
        return (self - one).in_ideal(1)

    def fractional_part(self) -> Fraction:
        """The unique a/p^m in [0,1) with x - a/p^m integral.

        >>> PAdic.from_rational(Fraction(5, 9), 3).fractional_part()
        Fraction(5, 9)
        """
        if self.A < 0:
            raise PrecisionExhausted(f"fractional part needs A >= 0, have {self.A}")
        if self.is_zero() or self.v >= 0:
            return Fraction(0)
        m = -self.v
        return Fraction(self.u % ppow(self.p, m), ppow(self.p, m))

    def residue(self, k: int) -> int:
        """x mod p^k as an integer in [0, p^k), defined for integral x."""
        if not self.in_ideal(0):
            raise ValueError("residue of a non-integral value")
        if self.A < k:
            raise PrecisionExhausted(f"residue mod p^{k} needs A >= {k}")
        if self.is_zero() or self.v >= k:
            return 0
        return (self.u * ppow(self.p, self.v)) % ppow(self.p, k)

    def congruent(self, other: "PAdic", k: int) -> bool:
        """x - y in p^k * o."""
        return (self - other).in_ideal(k)


def _truncate(x: PAdic, A: int) -> PAdic:
    if x.A == A:
        return x
    if x.is_zero() or x.v >= A:
        return PAdic.zero(x.p, A)
    return PAdic(x.p, x.v, x.u, A)


# -- module-level operation aliases (functional surface) --------------------

def add(x: PAdic, y: PAdic) -> PAdic:
    return x + y


def mul(x: PAdic, y: PAdic) -> PAdic:
    return x * y


def neg(x: PAdic) -> PAdic:
    return -x


def inv(x: PAdic) -> PAdic:
    return x.inverse()


def fractional_part(x: PAdic) -> Fraction:
    return x.fractional_part()


def in_ideal(x: PAdic, k: int) -> bool:
    return x.in_ideal(k)


def is_unit(x: PAdic) -> bool:
    return x.is_unit()


def in_one_plus_p(x: PAdic) -> bool:
    return x.in_one_plus_p()


def enumerate_residues(p: int, k_low: int, k_high: int) -> Iterator[PAdic]:
    """Representatives of p^k_low * o / p^k_high * o, in increasing digit order.

    Yields exactly p^(k_high - k_low) values, each at absolute precision k_high.
    """
    if k_low > k_high:
        raise ValueError("k_low must be <= k_high")
    n = ppow(p, k_high - k_low)
    for a in range(n):
        if a == 0:
            yield PAdic.zero(p, k_high)
            continue
        w, aa = 0, a
        while aa % p == 0:
            aa //= p
            w += 1
        yield PAdic(p, k_low + w, aa, k_high)


def uniformizer(p: int, prec: int = DEFAULT_PRECISION) -> PAdic:
    return PAdic(p, 1, 1, 1 + prec)


def one(p: int, prec: int = DEFAULT_PRECISION) -> PAdic:
    return PAdic(p, 0, 1, prec)
