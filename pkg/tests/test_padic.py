from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gsp4ssc.padic import (
    DivisionByZero,
    PAdic,
    PrecisionExhausted,
    enumerate_residues,
    one,
    ppow,
    uniformizer,
)

P = 3


def num(x, prec=12, p=P):
    return PAdic.from_rational(Fraction(x), p, prec)


class TestAdd:
    def test_additive_inverse_cancels_to_zero(self):
        x = PAdic(P, 0, 1, 12)
        y = PAdic(P, 0, -1, 12)
        assert (x + y).is_zero()

    def test_digit_arithmetic(self):
        x = PAdic(P, 1, 1, 13)  # pi
        y = PAdic(P, 0, 1, 12)  # 1
        z = x + y
        assert z.v == 0 and z.u == 1 + P

    def test_thirds_sum_to_one(self):
        z = num(Fraction(1, 3)) + num(Fraction(2, 3))
        assert z.v == 0 and z.u == 1

    def test_precision_is_min(self):
        z = num(1, prec=5) + num(1, prec=9)
        assert z.A == 5


class TestMulInv:
    def test_uniformizer_times_inverse(self):
        pi = uniformizer(P)
        z = pi * pi.inverse()
        assert z.v == 0 and z.u == 1

    def test_unit_inverse_roundtrip(self):
        u = num(7)
        z = u * u.inverse()
        assert z.v == 0 and z.u == 1

    def test_inverse_of_two_matches_extended_euclid(self):
        # independent oracle: extended Euclid modulo 3^N via pow()
        for N in (4, 8, 12):
            x = num(2, prec=N)
            inv = x.inverse()
            expected = pow(2, -1, ppow(P, N))
            assert inv.u == expected
            assert inv.u % P == 2
            assert (inv.u * 2) % ppow(P, N) == 1

    def test_inverse_of_zero_raises(self):
        with pytest.raises(DivisionByZero):
            PAdic.zero(P, 5).inverse()


class TestFractionalPart:
    def test_integral_gives_zero(self):
        assert num(7).fractional_part() == 0

    def test_inverse_uniformizer(self):
        assert uniformizer(P).inverse().fractional_part() == Fraction(1, P)

    def test_five_ninths(self):
        assert num(Fraction(5, 9)).fractional_part() == Fraction(5, 9)

    def test_needs_nonnegative_precision(self):
        x = PAdic(P, -4, 1, -1)
        with pytest.raises(PrecisionExhausted):
            x.fractional_part()

    def test_shift_by_integral_is_invisible(self):
        x = num(Fraction(5, 9))
        y = num(4)
        assert (x + y).fractional_part() == x.fractional_part()


class TestResidues:
    def test_unit_interval(self):
        reps = list(enumerate_residues(P, 0, 1))
        vals = sorted(r.residue(1) for r in reps)
        assert vals == [0, 1, 2]

    def test_ninths(self):
        reps = list(enumerate_residues(P, -1, 1))
        assert len(reps) == 9
        fracs = {r.fractional_part() for r in reps}
        assert fracs == {Fraction(a % 3, 3) for a in range(9)}

    def test_cardinality(self):
        assert len(list(enumerate_residues(P, -2, 2))) == ppow(P, 4)

    def test_pairwise_noncongruent_and_covering(self):
        # brute-force oracle at p=3: reps of p^-1 o / p^2 o differ pairwise
        reps = list(enumerate_residues(P, -1, 2))
        seen = set()
        for r in reps:
            key = (r.fractional_part(), 0 if r.is_zero() else r.residue(2) if r.v >= 0 else None,
                   None if r.is_zero() else r.v)
            # canonical digit string from -1 up to 2
            digits = []
            x = r
            frac = x.fractional_part()
            digits.append(int(frac * 3) % 3)
            rest = x + PAdic.from_rational(-frac, P, 6)
            digits.append(rest.residue(1))
            digits.append((rest.residue(2) - rest.residue(1)) // 3)
            seen.add(tuple(digits))
        assert len(seen) == 27


class TestMembership:
    def test_pi_squared_in_p(self):
        pi2 = uniformizer(P) * uniformizer(P)
        assert pi2.in_ideal(1)

    def test_one_plus_pi(self):
        assert (one(P) + uniformizer(P)).in_one_plus_p()

    def test_pi_inverse_not_integral(self):
        assert not uniformizer(P).inverse().in_ideal(0)

    def test_undecidable_raises(self):
        x = PAdic(P, 0, 1, 2)
        with pytest.raises(PrecisionExhausted):
            x.in_ideal(2)


padics = st.builds(
    lambda v, u, p: PAdic(p, v, u if u % p else u + 1, v + 10),
    st.integers(-4, 4), st.integers(1, 3**6), st.sampled_from([3, 5]),
)


class TestRingLaws:
    @settings(max_examples=200, deadline=None, derandomize=True)
    @given(padics, padics, padics)
    def test_associativity_and_commutativity(self, x, y, z):
        if not (x.p == y.p == z.p):
            return
        lhs = (x + y) + z
        rhs = x + (y + z)
        assert (lhs - rhs).is_zero()
        assert ((x * y) - (y * x)).is_zero()

    @settings(max_examples=200, deadline=None, derandomize=True)
    @given(padics, padics, padics)
    def test_distributivity(self, x, y, z):
        if not (x.p == y.p == z.p):
            return
        lhs = x * (y + z)
        rhs = x * y + x * z
        assert (lhs - rhs).is_zero()

    @settings(max_examples=200, deadline=None, derandomize=True)
    @given(padics)
    def test_abs_is_q_to_minus_valuation(self, x):
        assert x.abs_exponent() == -x.v
