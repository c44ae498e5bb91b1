import numpy as np

from django.test import SimpleTestCase

from baxterq.lattice import ChainSpace
from baxterq.qoperator import sample_column_specs
from baxterq.representation import ThetaBasis, rep_matrices, u_matrices
from baxterq.spectra import (
    BetheRoots,
    CollidingRootsError,
    Sector,
    bethe_equation_residual,
    compute_spectrum,
    direct_spectrum_residual,
    eigenvalue_reconstruction_residual,
    explicit_form_residual,
    fundamental_rectangle,
    split_points,
    q_quasi_periodicity_residual,
    recover_planted_roots,
    sector_decomposition,
    sector_residual,
    sum_rule_residual,
    tq_scalar_residual,
    u_grid,
)
from baxterq.theta import ModelParams


P1 = ModelParams(tau=1j, eta=0.15, l="1/2", N=2)


class TestSectors(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams(tau=1j, eta=0.11, l="1", N=2)
        basis = ThetaBasis.build(cls.params, seed=1)
        cls.U = u_matrices(cls.params, basis)
        cls.chain = ChainSpace(cls.params)
        cls.sectors = sector_decomposition(cls.U, cls.params, cls.chain)

    def test_labels(self):
        self.assertEqual([s.label for s in self.sectors], [(0, 0), (0, 1), (1, 0), (1, 1)])

    def test_dimensions_add_up(self):
        self.assertEqual(sum(s.dimension for s in self.sectors), 9)

    def test_sector_eigenvalues(self):
        for sector in self.sectors:
            with self.subTest(sector=sector.label):
                self.assertLess(sector_residual(sector, self.U, self.chain), 1e-10)

    def test_sectors_span_chain(self):
        stacked = np.hstack([s.basis for s in self.sectors])
        self.assertEqual(np.linalg.matrix_rank(stacked, tol=1e-8), 9)


class SpectrumTests:
    seed = None

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        basis = ThetaBasis.build(P1, seed=cls.seed)
        cls.rep = rep_matrices(P1, basis)
        U = u_matrices(P1, basis)
        cls.family = sample_column_specs(P1, cls.seed, basis)
        cls.spectrum = compute_spectrum(cls.family, cls.rep, U, P1)
        cls.us = u_grid(P1, 6)

    def test_one_eigenvector_per_dimension(self):
        self.assertEqual(len(self.spectrum.pairs), 4)
        self.assertEqual(len(self.spectrum.roots), 4)

    def test_joint_eigenvectors(self):
        bound = 1e-6 * self.family.condition_estimate
        for pair in self.spectrum.pairs:
            self.assertLess(pair.joint_residual(u_grid(P1), self.family.q), bound)

    def test_matches_direct_diagonalisation(self):
        residual = direct_spectrum_residual(
            self.spectrum.pairs, self.spectrum.pairs[0].T_eval, split_points(P1)
        )
        self.assertLess(residual, 1e-8)

    def test_scalar_tq_relation(self):
        for pair in self.spectrum.pairs:
            self.assertLess(tq_scalar_residual(pair, P1, self.us), 1e-5)

    def test_q_quasi_periodicity(self):
        for pair in self.spectrum.pairs:
            self.assertLess(q_quasi_periodicity_residual(pair, P1, self.us), 1e-5)

    def test_root_count(self):
        for roots in self.spectrum.roots:
            self.assertEqual(roots.count, P1.nl)
            for root in roots.roots:
                self.assertTrue(fundamental_rectangle(P1).contains(root))

    def test_sum_rule(self):
        for roots in self.spectrum.roots:
            self.assertLess(sum_rule_residual(roots, P1), 1e-6)

    def test_explicit_form(self):
        for pair, roots in zip(self.spectrum.pairs, self.spectrum.roots):
            self.assertLess(explicit_form_residual(pair, roots, P1, self.us), 1e-5)

    def test_bethe_equations(self):
        for roots in self.spectrum.roots:
            self.assertLess(bethe_equation_residual(roots, P1), 1e-5)

    def test_eigenvalue_reconstruction(self):
        for pair, roots in zip(self.spectrum.pairs, self.spectrum.roots):
            self.assertLess(
                eigenvalue_reconstruction_residual(pair, roots, self.us, P1), 1e-5
            )

    def test_rows(self):
        rows = list(self.spectrum.rows())
        self.assertEqual(len(rows), 4 * P1.nl)
        self.assertEqual(
            set(rows[0]),
            {"sector_nu1", "sector_nu3", "eigen_index", "root_index", "re_u", "im_u", "q_residual"},
        )


class TestSpectrumSeedOne(SpectrumTests, SimpleTestCase):
    seed = 1


class TestSpectrumSeedTwo(SpectrumTests, SimpleTestCase):
    seed = 2


class TestRoots(SimpleTestCase):
    def sector(self, nu1=0, nu3=0):
        return Sector(nu1=nu1, nu3=nu3, basis=np.zeros((4, 0)))

    def test_planted_roots_recovered(self):
        self.assertLess(recover_planted_roots([0.3 + 0.4j, 0.6 + 0.7j], P1), 1e-9)

    def test_canonical_roots_shift_first_root(self):
        roots = BetheRoots(roots=(0.3 + 0.6j, 0.7 + 0.6j), sector=self.sector(nu1=0), eigen_index=0)
        canonical = roots.canonical_roots(P1)
        self.assertAlmostEqual(canonical[0], 0.3 - 0.4j)
        self.assertEqual(canonical[1], 0.7 + 0.6j)

    def test_colliding_roots(self):
        roots = BetheRoots(roots=(0.3 + 0.2j, 1.3 + 0.2j), sector=self.sector(), eigen_index=0)
        with self.assertRaises(CollidingRootsError):
            bethe_equation_residual(roots, ModelParams(tau=1j, eta=0.15, l="1/2", N=4))

    def test_u_grid_inside_cell(self):
        us = u_grid(P1)
        self.assertEqual(len(us), 16)
        self.assertTrue(np.all((us.real > 0) & (us.real < 1)))
        self.assertTrue(np.all((us.imag > 0) & (us.imag < P1.t)))

    def test_half_periods_clear_of_cell_edges(self):
        cell = fundamental_rectangle(P1)
        for m, n in [(0, 0), (1, 0), (0, 1), (1, 1)]:
            u = (m + n * P1.tau) / 2
            with self.subTest(half_period=u):
                d = u - cell.corner
                self.assertTrue(cell.contains(u))
                self.assertGreaterEqual(
                    min(d.real, cell.width - d.real, d.imag, cell.height - d.imag), 0.2
                )
