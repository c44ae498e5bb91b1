import numpy as np

from django.test import SimpleTestCase

from baxterq.numerics import DegenerateParameterError, SingularPointError
from baxterq.representation import (
    OffSpaceError,
    ThetaBasis,
    apply_difference_op,
    commutation_residual,
    expand_in_basis,
    expand_many,
    intertwining_residual,
    is_generic,
    pauli_identification,
    pauli_residual,
    rep_matrices,
    structure_constants,
    u_matrices,
    u_relation_residual,
)
from baxterq.theta import ModelParams, random_cell_points, theta11, za_bracket_k


P1 = ModelParams(tau=1j, eta=0.15, l="1/2", N=2)
P2 = ModelParams(tau=1j, eta=0.11, l="1", N=2)
P4 = ModelParams(tau=0.9j, eta=0.07, l="3/2", N=2)


class TestThetaBasis(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.basis = ThetaBasis.build(P2, seed=1)

    def test_dimension(self):
        self.assertEqual(self.basis.dim, 3)
        self.assertEqual(self.basis.values(0.3 + 0.2j).shape, (3,))
        self.assertEqual(self.basis.values(np.zeros((4, 5))).shape, (4, 5, 3))

    def test_condition_below_cap(self):
        self.assertLess(self.basis.condition, 1e8)

    def test_same_seed_same_points(self):
        other = ThetaBasis.build(P2, seed=1)
        np.testing.assert_array_equal(other.points, self.basis.points)

    def test_space_laws(self):
        zs = random_cell_points(P2, 20, np.random.default_rng(2))
        self.assertLess(self.basis.space_law_residual(zs), 1e-10)

    def test_expand_basis_vector(self):
        coefficients = expand_in_basis(self.basis, self.basis.function(1))
        np.testing.assert_allclose(coefficients, [0, 1, 0], atol=1e-10)

    def test_expand_other_member(self):
        # e_k(z; c, d) lies in the same space for any c, d
        c, d = 0.11 + 0.05j, 0.37 - 0.2j

        def f(z):
            return za_bracket_k(z, c, 1, P2) * za_bracket_k(z, d, 1, P2)

        coefficients = expand_in_basis(self.basis, f)
        z = 0.61 + 0.33j
        self.assertAlmostEqual(abs(self.basis.evaluate(coefficients, z) - f(z)) / abs(f(z)), 0, places=9)

    def test_expand_many_matches_single(self):
        def family(z):
            return np.stack([self.basis.function(k)(z) for k in range(3)])

        np.testing.assert_allclose(expand_many(self.basis, family), np.eye(3), atol=1e-10)

    def test_off_space_function_rejected(self):
        with self.assertRaises(OffSpaceError) as cm:
            expand_in_basis(self.basis, lambda z: theta11(z, P2))
        self.assertGreater(cm.exception.residual, 1e-8)

    def test_non_generic_parameters(self):
        self.assertFalse(is_generic(0.2, 0.2, 2, P2))
        self.assertTrue(is_generic(0.2313, -0.4177, 2, P2))
        with self.assertRaises(DegenerateParameterError):
            ThetaBasis.build(P2, a_param=0.2, b_param=0.2, resample_parameters=False)

    def test_non_generic_parameters_resampled(self):
        with self.assertLogs("baxterq.representation", level="WARNING"):
            basis = ThetaBasis.build(P2, a_param=0.2, b_param=0.2)
        self.assertTrue(is_generic(basis.a_param, basis.b_param, 2, P2))


class TestDifferenceOperators(SimpleTestCase):
    def test_denominator_guard(self):
        basis = ThetaBasis.build(P1, seed=1)
        image = apply_difference_op(0, basis.function(0), P1)
        with self.assertRaises(SingularPointError) as cm:
            image(np.array([0.3 + 0.1j, 0.5]))
        self.assertEqual(cm.exception.point, 0.5)

    def test_structure_constants_independent_of_u(self):
        first = structure_constants(P2, 0.3)
        second = structure_constants(P2, 0.71 + 0.2j)
        for key in first:
            self.assertAlmostEqual(abs(first[key] - second[key]), 0, places=10)


class RepresentationTests:
    params = None

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.basis = ThetaBasis.build(cls.params, seed=1)
        cls.rep = rep_matrices(cls.params, cls.basis)
        cls.U = u_matrices(cls.params, cls.basis)

    def test_commutation_relations(self):
        self.assertLess(commutation_residual(self.rep, self.params), 1e-9)

    def test_u_relations(self):
        self.assertLess(u_relation_residual(self.U, self.params), 1e-10)

    def test_u_intertwines_generators(self):
        self.assertLess(intertwining_residual(self.rep, self.U), 1e-9)

    def test_independent_of_collocation_seed(self):
        # Operators are basis-dependent only through (a, b), not the points
        other = rep_matrices(self.params, ThetaBasis.build(self.params, seed=2))
        for a in range(4):
            np.testing.assert_allclose(other[a], self.rep[a], atol=1e-8 * np.linalg.norm(self.rep[a]))


class TestSpinHalf(RepresentationTests, SimpleTestCase):
    params = P1

    def test_pauli_reduction(self):
        self.assertLess(pauli_residual(self.rep, self.params), 1e-10)

    def test_pauli_identification_is_invertible(self):
        P = pauli_identification(self.basis, self.params)
        self.assertEqual(P.shape, (2, 2))
        self.assertGreater(abs(np.linalg.det(P)), 1e-6)

    def test_u_squares_to_minus_one(self):
        for a in (1, 2, 3):
            np.testing.assert_allclose(self.U[a] @ self.U[a], -np.eye(2), atol=1e-10)


class TestSpinOne(RepresentationTests, SimpleTestCase):
    params = P2

    def test_pauli_identification_needs_spin_half(self):
        with self.assertRaises(ValueError):
            pauli_identification(self.basis, self.params)


class TestSpinThreeHalves(RepresentationTests, SimpleTestCase):
    params = P4
