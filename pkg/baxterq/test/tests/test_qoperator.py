import numpy as np

from django.test import SimpleTestCase

from baxterq.lattice import ChainSpace
from baxterq.numerics import IllConditionedError
from baxterq.qoperator import (
    ColumnSpec,
    SigmaSequence,
    draw_specs,
    gauge_step_residual,
    h_pm,
    lambda_sequence,
    phi_column,
    phi_columns,
    phi_pairing,
    phi_pairing_direct,
    phi_three_term_residual,
    q_relation_residuals,
    ql_qr_commutation_residual,
    ql_three_term_residual,
    qr_periodicity_residual,
    qr_three_term_residual,
    sample_column_specs,
    sigma_lambda_sum_residual,
    sigma_sequences,
    site_pairing_ratios,
    spec_is_generic,
    u_law_residuals,
)
from baxterq.representation import ThetaBasis, rep_matrices, u_matrices
from baxterq.sklyanin import gram_matrix, orthonormal_frame
from baxterq.theta import ModelParams, ParameterError


P1 = ModelParams(tau=1j, eta=0.15, l="1/2", N=2)
P2 = ModelParams(tau=1j, eta=0.11, l="1", N=2)
P3 = ModelParams(tau=1j, eta=0.15, l="1/2", N=4)


class TestSigmaSequences(SimpleTestCase):
    def test_two_sites(self):
        self.assertEqual([str(s) for s in sigma_sequences(2)], ["+-", "-+"])

    def test_four_sites(self):
        sequences = sigma_sequences(4)
        self.assertEqual(len(sequences), 6)
        self.assertTrue(all(sum(s) == 0 for s in sequences))

    def test_odd_chain_rejected(self):
        with self.assertRaises(ParameterError) as cm:
            sigma_sequences(3)
        self.assertEqual(cm.exception.field_name, "N")

    def test_unbalanced_signs_rejected(self):
        with self.assertRaises(ParameterError):
            SigmaSequence((1, 1))
        with self.assertRaises(ParameterError):
            SigmaSequence((1, 0))

    def test_lambda_sequence_closes(self):
        for sigma in sigma_sequences(4):
            with self.subTest(sigma=str(sigma)):
                lambdas = lambda_sequence(0.37, sigma, P3)
                self.assertEqual(len(lambdas), 5)
                self.assertAlmostEqual(lambdas[-1], lambdas[0], places=14)

    def test_sigma_lambda_sum(self):
        for sigma in sigma_sequences(4):
            with self.subTest(sigma=str(sigma)):
                self.assertLess(sigma_lambda_sum_residual(0.37, sigma, P3), 1e-12)


class TestColumnSpecs(SimpleTestCase):
    def test_key_depends_on_difference(self):
        sigma = sigma_sequences(2)[0]
        self.assertEqual(
            ColumnSpec(v=0.2, lam=0.5, sigma=sigma).key(),
            ColumnSpec(v=0.3, lam=0.6, sigma=sigma).key(),
        )

    def test_draws_are_seeded_and_generic(self):
        specs = draw_specs(P1, np.random.default_rng(5))
        again = draw_specs(P1, np.random.default_rng(5))
        self.assertEqual(specs, again)
        self.assertEqual(len(specs), P1.chain_dim)
        self.assertTrue(all(spec_is_generic(spec, P1) for spec in specs))
        self.assertEqual(len({spec.key() for spec in specs}), len(specs))

    def test_gauge_steps(self):
        for spec in draw_specs(P3, np.random.default_rng(5), count=6):
            self.assertLess(gauge_step_residual(spec, P3), 1e-12)

    def test_h_pm_sign(self):
        with self.assertRaises(ValueError):
            h_pm(0.2, 0, P1)
        self.assertEqual(h_pm(0.2, "+", P1), h_pm(0.2, 1, P1))


class TestPseudoVacuum(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.basis = ThetaBasis.build(P2, seed=1)
        cls.rep = rep_matrices(P2, cls.basis)
        cls.chain = ChainSpace(P2)
        cls.specs = draw_specs(P2, np.random.default_rng(3), count=3)

    def test_three_term_relation(self):
        for spec in self.specs:
            residual = phi_three_term_residual(
                0.27 + 0.19j, spec, self.rep, self.basis, P2, self.chain
            )
            self.assertLess(residual, 1e-8)

    def test_columns_match_single(self):
        us = [0.27 + 0.19j, 0.6 + 0.4j]
        columns = phi_columns(us, self.specs, self.basis, P2, self.chain)
        self.assertEqual(columns.shape, (2, 9, 3))
        for i, u in enumerate(us):
            for k, spec in enumerate(self.specs):
                np.testing.assert_allclose(
                    columns[i, :, k],
                    phi_column(u, spec, self.basis, P2, self.chain),
                    atol=1e-10,
                )

    def test_rank_deficient_for_two_spin_one_sites(self):
        with self.assertLogs("baxterq.qoperator", level="WARNING"):
            with self.assertRaises(IllConditionedError) as cm:
                sample_column_specs(P2, 1, self.basis, self.chain, max_resamples=1)
        self.assertGreater(cm.exception.condition, 1e8)


class TestQOperator(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.basis = ThetaBasis.build(P1, seed=1)
        cls.rep = rep_matrices(P1, cls.basis)
        cls.U = u_matrices(P1, cls.basis)
        cls.chain = ChainSpace(P1)
        cls.frame = orthonormal_frame(gram_matrix(cls.basis))
        cls.chain_frame = cls.frame.power(P1.N)
        cls.family = sample_column_specs(P1, 1, cls.basis, cls.chain)
        cls.u = 0.27 + 0.19j
        cls.u_prime = -0.41 + 0.07j

    def test_family(self):
        self.assertEqual(len(self.family.specs), 4)
        self.assertLess(self.family.condition_estimate, 1e8)
        data = self.family.as_dict()
        self.assertEqual(len(data["specs"]), 4)
        self.assertEqual(data["u0"], [self.family.u0.real, self.family.u0.imag])

    def test_seeded(self):
        other = sample_column_specs(P1, 1, self.basis, self.chain)
        self.assertEqual(other.specs, self.family.specs)
        self.assertEqual(other.u0, self.family.u0)

    def test_q_at_base_point_is_identity(self):
        np.testing.assert_allclose(self.family.q(self.family.u0), np.eye(4), atol=1e-6)

    def test_qr_three_term(self):
        self.assertLess(qr_three_term_residual(self.u, self.family, self.rep), 1e-8)

    def test_qr_periodicity(self):
        self.assertLess(qr_periodicity_residual(self.u, self.family), 1e-8)

    def test_ql_three_term(self):
        self.assertLess(
            ql_three_term_residual(self.u, self.family, self.rep, self.chain_frame), 1e-6
        )

    def test_ql_qr_commute(self):
        self.assertLess(
            ql_qr_commutation_residual(self.u, self.u_prime, self.family, self.chain_frame),
            1e-6,
        )

    def test_q_relations(self):
        bound = 1e-6 * self.family.condition_estimate
        residuals = q_relation_residuals(
            self.u, self.u_prime, self.family, self.rep, self.chain_frame
        )
        self.assertEqual(set(residuals), {"Q=QLQL", "QQ=QQ", "TQ=QT", "TQ", "QT"})
        for name, residual in residuals.items():
            with self.subTest(relation=name):
                self.assertLess(residual, bound)

    def test_u_laws(self):
        residuals = u_law_residuals(self.u, self.family, self.U, self.chain_frame)
        self.assertLess(residuals["QR"], 1e-8)
        self.assertLess(residuals["QL"], 1e-6)
        self.assertLess(residuals["Q"], 1e-6 * self.family.condition_estimate)

    def test_q_values(self):
        w = np.array([1.0, 0.5j, -0.25, 2.0])
        us = np.array([self.u, self.u_prime])
        expected = [np.vdot(w, self.family.q(x) @ w) / np.vdot(w, w) for x in us]
        np.testing.assert_allclose(self.family.q_values(us, w), expected, rtol=1e-8)

    def test_phi_pairing_factorises_over_sites(self):
        spec, spec_prime = self.family.specs[:2]
        product = phi_pairing(self.u, self.u_prime, spec, spec_prime, self.basis, self.frame, P1)
        direct = phi_pairing_direct(
            self.u, self.u_prime, spec, spec_prime, self.basis, self.chain_frame, P1, self.chain
        )
        self.assertLess(abs(product - direct) / abs(direct), 1e-10)

    def test_site_pairings_equal_closed_form(self):
        spec, spec_prime = self.family.specs[:2]
        ratios = site_pairing_ratios(
            self.u, self.u_prime, spec, spec_prime, self.basis, self.frame, P1
        )
        self.assertEqual(len(ratios), P1.N)
        for ratio in ratios:
            self.assertLess(abs(ratio - 1), 1e-6)
