import random
from fractions import Fraction

import pytest

from gsp4ssc import gsp4, reps
from gsp4ssc.cyclo import Cyclotomic
from gsp4ssc.gsp4 import NotInH, d_elem, identity, random_h, random_paramodular
from gsp4ssc.padic import PAdic

P = 3
CHI = reps.Character(P)
CTX = reps.context(CHI)


def one():
    return Cyclotomic.rational(1, P)


def rand_padic(depth, rng, prec=16):
    k = rng.randrange(0, P ** 5)
    x = Fraction(k, P ** (-depth)) if depth < 0 else Fraction(k * P ** depth)
    return PAdic.from_rational(x, P, prec)


class TestCharacter:
    def test_identity_value(self):
        assert reps.chi_eval(CHI, identity(P, 14)) == one()

    def test_trivial_on_center(self):
        rng = random.Random(0)
        for _ in range(10):
            z = gsp4.random_center(P, rng)
            assert reps.chi_eval(CHI, z) == one()

    def test_gchi_conjugation_invariance(self):
        rng = random.Random(1)
        for _ in range(50):
            h = random_h(P, rng)
            assert reps.chi_eval(CHI, CTX.gchi_inv * h * CTX.gchi) == \
                reps.chi_eval(CHI, h)

    def test_homomorphism(self):
        rng = random.Random(2)
        for _ in range(50):
            h1, h2 = random_h(P, rng), random_h(P, rng)
            assert reps.chi_eval(CHI, h1 * h2) == \
                reps.chi_eval(CHI, h1) * reps.chi_eval(CHI, h2)

    def test_off_H_raises(self):
        with pytest.raises(NotInH):
            reps.chi_eval(CHI, d_elem(3, 3, P, 14))


class TestOrbits:
    def test_identity_action(self):
        assert reps.orbit_act(CHI, 1, 1, 1) == CHI

    def test_normalizing_move(self):
        chi = reps.Character(P, t1=2, t2=2, t3=1)
        # m = diag(1, t1, t1 t2, t1^2 t2) sends chi_{t1,t2,t3} to chi_{1,1,t} form
        moved = reps.orbit_act(chi, 1, chi.t1, chi.t1 * chi.t1 * chi.t2 % P)
        assert moved.t1 % P == 1 and moved.t2 % P == 1
        assert reps.orbit_invariant(moved) == reps.orbit_invariant(chi)

    def test_invariant_constant_on_random_orbit_walk(self):
        rng = random.Random(3)
        chi = reps.Character(P, t1=2, t2=1, t3=2)
        inv = reps.orbit_invariant(chi)
        for _ in range(30):
            a, b, c = (rng.randrange(1, P) for _ in range(3))
            chi = reps.orbit_act(chi, a, b, c)
            assert reps.orbit_invariant(chi) == inv

    def test_transporter_conjugates_chi_to_eta(self):
        chi = reps.Character(P, 1, 1, 1)
        eta = reps.Character(P, 2, 1, 1)  # invariant 4 = 1 mod 3: same orbit
        assert reps.orbit_invariant(chi) == reps.orbit_invariant(eta)
        m0 = reps.transporter(chi, eta)
        m0_inv = m0.inverse()
        rng = random.Random(4)
        for _ in range(50):
            h = random_h(P, rng)
            assert reps.chi_eval(CHI if False else chi, m0 * h * m0_inv) == \
                reps.chi_eval(eta, h)


class TestModelVectors:
    def test_minimal_values(self):
        fplus = reps.minimal_vector(CHI, 1)
        fminus = reps.minimal_vector(CHI, -1)
        assert reps.eval_vector(fplus, identity(P, 14)) == one()
        assert reps.eval_vector(fplus, CTX.gchi) == one()
        assert reps.eval_vector(fminus, CTX.gchi) == one().scale(-1)

    def test_new_vector_values(self):
        f = reps.new_vector(CHI, 1)
        assert reps.eval_vector(f, CTX.d) == one()
        assert reps.eval_vector(f, identity(P, 14)).is_zero()

    def test_new_vector_right_K5_invariance(self):
        rng = random.Random(5)
        f = reps.new_vector(CHI, 1)
        for _ in range(8):
            g = gsp4.random_hprime(P, rng, CTX.gchi) * CTX.d * \
                random_paramodular(P, 5, rng)
            k = random_paramodular(P, 5, rng)
            assert reps.eval_vector(f, g * k) == reps.eval_vector(f, g)

    def test_shifted_new_right_invariance_under_conjugated_group(self):
        rng = random.Random(6)
        f = reps.shifted_new_vector(CHI, 1)
        g = CTX.d * random_paramodular(P, 5, rng) * CTX.d_inv
        k = CTX.d * random_paramodular(P, 5, rng) * CTX.d_inv
        assert reps.eval_vector(f, g * k) == reps.eval_vector(f, g)

    def test_left_equivariance(self):
        rng = random.Random(7)
        for kind in ("minimal", "new"):
            f = reps.ModelVector(kind, -1, CHI)
            for _ in range(6):
                h = gsp4.random_hprime(P, rng, CTX.gchi)
                g = CTX.d * random_paramodular(P, 5, rng) if kind == "new" \
                    else gsp4.random_hprime(P, rng, CTX.gchi)
                val = reps.hprime_exponent(CTX, -1, h)
                lhs = reps.eval_vector(f, h * g)
                rhs = reps.eval_vector(f, g).scale(val[0]) * \
                    reps.root_of_unity(val[1], P)
                assert lhs == rhs

    def test_minimal_is_own_matrix_coefficient(self):
        # <translate(f,g), f> equals f(g) pointwise across valuation classes
        rng = random.Random(8)
        f = reps.minimal_vector(CHI, 1)
        for _ in range(25):
            g = gsp4.random_element(P, rng)
            phi = reps.inner_product(reps.translate(f, g), f)
            assert phi == reps.eval_vector(f, g)


class TestInnerProducts:
    def test_minimal_norm_one(self):
        f = reps.minimal_vector(CHI, 1)
        assert reps.inner_product(f, f) == one()

    def test_new_norm(self):
        f = reps.new_vector(CHI, 1)
        q = P
        assert reps.inner_product(f, f).to_rational() == \
            (q - 1) ** 2 * q ** 2 * (q + 1) ** 2

    def test_disjoint_supports_orthogonal(self):
        f = reps.minimal_vector(CHI, 1)
        assert reps.inner_product(f, reps.translate(f, CTX.d)).is_zero()


class TestNewvectorExpansion:
    def test_on_and_off_support(self):
        pts = [CTX.d, identity(P, 26)]
        rng = random.Random(9)
        for _ in range(4):
            pts.append(gsp4.random_hprime(P, rng, CTX.gchi) * CTX.d *
                       random_paramodular(P, 5, rng))
            pts.append(gsp4.random_element(P, rng))
        assert all(reps.newvector_expansion_check(CHI, 1, pts))
        assert all(reps.newvector_expansion_check(CHI, -1, pts[:4]))


class TestMatrixCoefficients:
    def test_value_at_identity_is_coset_count(self):
        z = PAdic.zero(P, 20)
        val = reps.matcoeff_new_bruteforce(CHI, z, z, z, z)
        assert val.to_rational() == 576

    def test_outside_all_boxes_vanishes(self):
        a = PAdic.from_rational(Fraction(1, P ** 3), P, 16)
        z = PAdic.zero(P, 16)
        assert reps.matcoeff_new_bruteforce(CHI, a, z, z, z).is_zero()

    def test_family2_at_zero_abe(self):
        # all psi-arguments vanish: q^2 * (q-1)^2 * q
        z = PAdic.zero(P, 16)
        c = PAdic.from_rational(Fraction(2, P ** 2), P, 16)
        val = reps.matcoeff_new_family(CHI, 2, z, z, c, z)
        assert val.to_rational() == P ** 3 * (P - 1) ** 2

    def test_family1_at_zero_ab(self):
        # condition a pi x + b in p always holds: (q-1)^2 q^4
        z = PAdic.zero(P, 16)
        val = reps.matcoeff_new_family(CHI, 1, z, z, z, z)
        assert val.to_rational() == (P - 1) ** 2 * P ** 4

    @pytest.mark.parametrize("fam", [1, 2, 3, 4])
    def test_family_matches_restricted_bruteforce(self, fam):
        rng = random.Random(100 + fam)
        da, db, dc, de = reps.FAMILY_BOXES[fam]
        for _ in range(5):
            a, b = rand_padic(da, rng), rand_padic(db, rng)
            c, e = rand_padic(dc, rng), rand_padic(de, rng)
            assert reps.matcoeff_new_family(CHI, fam, a, b, c, e) == \
                reps.matcoeff_new_bruteforce(CHI, a, b, c, e, family=fam)

    def test_bruteforce_splits_into_families(self):
        rng = random.Random(11)
        # a point in every family's box: intersection of boxes is o-ish deep box
        z = PAdic.zero(P, 16)
        b = PAdic.from_rational(3, P, 16)
        total = reps.matcoeff_new_bruteforce(CHI, z, b, z, z)
        parts = sum((reps.matcoeff_new_family(CHI, i, z, b, z, z)
                     for i in (2, 3, 4)),
                    reps.matcoeff_new_family(CHI, 1, z, b, z, z))
        assert total == parts


class TestHecke:
    def test_all_four_sums_vanish(self):
        for sign in (1, -1):
            vals = reps.hecke_T01_values(CHI, sign)
            for key in ("A", "B", "C", "D", "total"):
                assert vals[key].is_zero(), key

    def test_term_counts(self):
        q = P
        assert q ** 3 + q ** 2 + q ** 2 + q == 48 if P == 3 else True


class TestAtkinLehner:
    def test_sign_relation(self):
        rng = random.Random(12)
        pts = [CTX.d] + [gsp4.random_hprime(P, rng, CTX.gchi) * CTX.d *
                         random_paramodular(P, 5, rng) for _ in range(6)]
        assert all(reps.atkin_lehner_check(CHI, 1, pts))
        assert all(reps.atkin_lehner_check(CHI, -1, pts))


class TestInvolution:
    def test_squared_involution_and_equivariance(self):
        rng = random.Random(13)
        pts = [identity(P, 26), CTX.d,
               gsp4.random_hprime(P, rng, CTX.gchi) * CTX.d *
               random_paramodular(P, 5, rng)]
        assert all(reps.involution_check(CHI, 1, pts, rng))
        assert all(reps.involution_check(CHI, -1, pts, rng))


class TestDimensionFormula:
    def test_known_values(self):
        assert reps.dim_Astar(5) == 1
        assert reps.dim_Astar(4) == 0
        assert reps.dim_Astar(9) == 9

    def test_floor_formula(self):
        expected = [0, 0, 0, 0, 0, 1, 2, 4, 6, 9, 12, 16, 20]
        for n in range(13):
            formula = (n - 3) ** 2 // 4 if n >= 5 else 0
            assert reps.dim_Astar(n) == formula == expected[n]


class TestSupportCriterion:
    def test_admissible_pair_clean(self):
        rng = random.Random(14)
        rep = reps.support_criterion_check(CHI, 1, 1, 5, 300, rng)
        assert rep.admissible and rep.hits > 0 and rep.violations == 0

    def test_inadmissible_i_zero(self):
        rng = random.Random(15)
        rep = reps.support_criterion_check(CHI, 0, 1, 5, 300, rng)
        assert not rep.admissible and rep.violations > 0

    def test_inadmissible_level_four(self):
        rng = random.Random(16)
        rep = reps.support_criterion_check(CHI, 1, 1, 4, 300, rng)
        assert not rep.admissible and rep.violations > 0
