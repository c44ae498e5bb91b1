"""
Theta functions, the Sklyanin algebra representation and its Hermitian form.
"""

import numpy as np

from baxterq.numerics import DegenerateParameterError
from baxterq.representation import (
    commutation_residual,
    intertwining_residual,
    pauli_residual,
    u_relation_residual,
)
from baxterq.sklyanin import (
    binomial_expansion_residual,
    dual_pairing_closed_form,
    dual_pairing_numeric,
    extremal_6j,
    frame_hermiticity_residual,
    gamma_coefficient,
    gamma_top_closed_form,
    omega_pair_closed_form,
    omega_pair_numeric,
    self_adjointness_residual,
    six_j_by_collocation,
    six_j_symbol,
    u_unitarity_residual,
)
from baxterq.suites.base import BaseSuite, check
from baxterq.theta import (
    jacobi_shift_residual,
    oddness_residual,
    quasi_periodicity_residual,
    random_cell_points,
    zero_set_residual,
)
from baxterq.utils import ratio_residual


THETA_POINTS = 200
BINOMIAL_POINTS = 5
PAIRING_DRAWS = 10
PAIRING_GRID = (128, 128)
MAX_DRAWS = 50


def draw_parameter(rng, params):
    return complex(rng.uniform(-0.45, 0.45), params.t * rng.uniform(0.05, 0.4))


def generic_draws(rng, params, count, evaluate):
    """
    Call ``evaluate`` on fresh complex parameter tuples of size ``count`` until
    it succeeds; non-generic draws are skipped.
    """
    for _ in range(MAX_DRAWS):
        values = [draw_parameter(rng, params) for _ in range(count)]
        try:
            return evaluate(*values)
        except DegenerateParameterError:
            continue
    raise DegenerateParameterError(f"No generic parameters in {MAX_DRAWS} draws")


class AlgebraSuite(BaseSuite):
    @check("theta-quasi-periodicity", "theta11-period", "theta")
    def check_theta_quasi_periodicity(self, context):
        zs = random_cell_points(context.params, THETA_POINTS, context.rng(1))
        return quasi_periodicity_residual(zs, context.params)

    @check("theta-oddness", "theta11-period", "theta")
    def check_theta_oddness(self, context):
        zs = random_cell_points(context.params, THETA_POINTS, context.rng(2))
        return oddness_residual(zs, context.params)

    @check("theta-zeros", "theta11-period", "theta")
    def check_theta_zeros(self, context):
        return zero_set_residual(context.params)

    @check("theta-half-periods", "theta11-period", "theta")
    def check_theta_half_periods(self, context):
        zs = random_cell_points(context.params, THETA_POINTS, context.rng(3))
        return jacobi_shift_residual(zs, context.params)

    @check("theta-space", "def:theta-space", "algebra")
    def check_theta_space(self, context):
        zs = random_cell_points(context.params, 20, context.rng(4))
        return context.basis.space_law_residual(zs), {
            "basis_condition": context.basis.condition
        }

    @check("commutation-relations", "comm_rel", "algebra")
    def check_commutation_relations(self, context):
        return commutation_residual(context.rep, context.params)

    @check(
        "pauli-reduction",
        "rep:pauli",
        "pauli",
        applies=lambda params: params.two_l == 1,
    )
    def check_pauli_reduction(self, context):
        return pauli_residual(context.rep, context.params)

    @check("u-relations", "def:Ua", "pauli")
    def check_u_relations(self, context):
        return u_relation_residual(context.U, context.params)

    @check("u-intertwining", "Ua:comm-rel", "algebra")
    def check_u_intertwining(self, context):
        return intertwining_residual(context.rep, context.U)

    @check("elliptic-binomial", "ell-binomial", "binomial")
    def check_elliptic_binomial(self, context):
        params = context.params
        rng = context.rng(5)
        worst = 0.0
        for k in range(params.two_l + 1):
            zs = random_cell_points(params, BINOMIAL_POINTS, rng)
            worst = max(
                worst,
                generic_draws(
                    rng,
                    params,
                    3,
                    lambda a, b, c: binomial_expansion_residual(k, a, b, c, params, zs),
                ),
            )
        return worst

    @check("extremal-6j", "RNN", "binomial")
    def check_extremal_6j(self, context):
        params = context.params
        Nn = params.two_l

        def compare(a, b, c, d):
            closed = extremal_6j(a, b, c, d, Nn, params)
            summed = six_j_symbol(Nn, Nn, a, b, c, d, Nn, params)
            collocated = six_j_by_collocation(Nn, a, b, c, d, Nn, params)[Nn]
            return max(abs(closed - summed), abs(closed - collocated)) / abs(closed)

        return generic_draws(context.rng(6), params, 4, compare)

    @check("six-j-symbols", "e=Re", "algebra")
    def check_six_j_symbols(self, context):
        params = context.params
        Nn = params.two_l

        def compare(a, b, c, d):
            worst = 0.0
            for k in range(Nn + 1):
                collocated = six_j_by_collocation(k, a, b, c, d, Nn, params)
                summed = np.array(
                    [six_j_symbol(j, k, a, b, c, d, Nn, params) for j in range(Nn + 1)]
                )
                scale = max(np.linalg.norm(collocated), np.linalg.norm(summed))
                worst = max(worst, float(np.linalg.norm(collocated - summed) / scale))
            return worst

        return generic_draws(context.rng(7), params, 4, compare)

    @check("gamma-top", "GammaNN", "theta")
    def check_gamma_top(self, context):
        params = context.params
        Nn = params.two_l

        def compare(c, d):
            general = gamma_coefficient(Nn, c, d, Nn, params)
            closed = gamma_top_closed_form(c, d, Nn, params)
            return abs(general - closed) / max(abs(general), abs(closed))

        return generic_draws(context.rng(8), params, 2, compare)

    @check("gram-matrix", "skl-form", "quadrature")
    def check_gram_matrix(self, context):
        gram = context.gram
        return gram.hermitian_residual, {
            "grid": list(gram.grid),
            "min_eigenvalue": gram.min_eigenvalue,
            "convergence_estimate": gram.convergence_estimate,
        }

    @check("self-adjointness", "Sa:self-adj", "quadrature")
    def check_self_adjointness(self, context):
        return max(
            self_adjointness_residual(context.gram, context.rep),
            frame_hermiticity_residual(context.frame, context.rep),
        )

    @check("orthonormal-frame", "skl-form", "theta")
    def check_orthonormal_frame(self, context):
        return context.frame.factorization_residual()

    @check("u-unitarity", "skl-form", "quadrature")
    def check_u_unitarity(self, context):
        return u_unitarity_residual(context.gram, context.U)

    @check("dual-orthogonality", "<el,ek>", "quadrature")
    def check_dual_orthogonality(self, context):
        """
        Off-diagonal pairings vanish and the diagonal ones equal the closed form.
        """
        params = context.params
        Nn = params.two_l
        rng = context.rng(9)
        off_diagonal = 0.0
        ratios = []

        for _ in range(PAIRING_DRAWS):

            def pairings(c, d):
                closed = [dual_pairing_closed_form(k, k, c, d, Nn, params) for k in range(Nn + 1)]
                numeric = np.array(
                    [
                        [
                            dual_pairing_numeric(k, m, c, d, Nn, params, PAIRING_GRID)
                            for k in range(Nn + 1)
                        ]
                        for m in range(Nn + 1)
                    ]
                )
                return closed, numeric

            closed, numeric = generic_draws(rng, params, 2, pairings)
            scale = float(np.max(np.abs(np.diag(numeric))))
            off = numeric - np.diag(np.diag(numeric))
            off_diagonal = max(off_diagonal, float(np.max(np.abs(off))) / scale)
            ratios.extend(np.diag(numeric) / np.asarray(closed))

        return max(off_diagonal, ratio_residual(ratios)), {
            "off_diagonal": off_diagonal,
            "normalisation_ratio": complex(ratios[0]),
        }

    @check("omega-pairing", "omega=e", "quadrature")
    def check_omega_pairing(self, context):
        """
        Quadrature pairings of two pseudo vacua equal the closed form.
        """
        params = context.params
        rng = context.rng(10)
        ratios = []
        for _ in range(PAIRING_DRAWS):
            u = complex(rng.uniform(0.05, 0.95), params.t * rng.uniform(0.05, 0.95))
            u_prime = complex(rng.uniform(0.05, 0.95), params.t * rng.uniform(0.05, 0.95))
            v, v_prime, lam, lam_prime = rng.uniform(0.05, 0.95, 4)
            sigma, sigma_prime = rng.choice((1, -1), 2)
            args = (u, u_prime, v, v_prime, lam, lam_prime, int(sigma), int(sigma_prime), params)
            numeric = omega_pair_numeric(*args, grid=PAIRING_GRID)
            ratios.append(numeric / omega_pair_closed_form(*args))
        return ratio_residual(ratios), {"normalisation_ratio": complex(ratios[0])}


Suite = AlgebraSuite
