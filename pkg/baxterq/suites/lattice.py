"""
L-operators, the transfer matrix and the gauge-twisted local pseudo vacua.
"""

from baxterq.lattice import (
    adjoint_block_residual,
    commutator_residual,
    eight_vertex_residual,
    gauge_evenness_residual,
    l_operator,
    l_operator_from_weights,
    omega_shift_residual,
    rll_residual,
    transfer_matrix,
    twisted_transfer_matrix,
    u_commutation_residual,
    u_on_omega_residual,
    vacuum_action_residual,
)
from baxterq.qoperator import (
    lambda_sequence,
    sigma_lambda_sum_residual,
    sigma_sequences,
    transfer_adjoint_residual,
)
from baxterq.suites.base import BaseSuite, check
from baxterq.utils import relative_residual


SAMPLES = 3


def draw_u(rng, params):
    return complex(rng.uniform(0.05, 0.95), params.t * rng.uniform(0.05, 0.95))


def draw_real(rng):
    return float(rng.uniform(0.05, 0.95))


class LatticeSuite(BaseSuite):
    def samples(self, context, stream):
        rng = context.rng(stream)
        for _ in range(self.options.get("SAMPLES", SAMPLES)):
            yield draw_u(rng, context.params), draw_real(rng), draw_real(rng)

    @check("l-operator", "def:L:alg", "lattice")
    def check_l_operator(self, context):
        return max(
            relative_residual(
                l_operator(u, context.rep, context.params).matrix,
                l_operator_from_weights(u, context.rep, context.params),
            )
            for u, _, _ in self.samples(context, 20)
        )

    @check("rll", "RLL", "lattice")
    def check_rll(self, context):
        rng = context.rng(21)
        return max(
            rll_residual(draw_u(rng, context.params), draw_u(rng, context.params), context.rep, context.params)
            for _ in range(SAMPLES)
        )

    @check(
        "eight-vertex",
        "rep:identify",
        "lattice",
        applies=lambda params: params.two_l == 1,
    )
    def check_eight_vertex(self, context):
        return max(
            eight_vertex_residual(u, context.rep, context.params)
            for u, _, _ in self.samples(context, 22)
        )

    @check("l-adjoint", "L+-", "quadrature")
    def check_l_adjoint(self, context):
        return max(
            adjoint_block_residual(u, context.rep, context.frame, context.params)
            for u, _, _ in self.samples(context, 23)
        )

    @check("transfer-commutation", "TT", "lattice")
    def check_transfer_commutation(self, context):
        rng = context.rng(24)
        worst = 0.0
        for _ in range(SAMPLES):
            T = transfer_matrix(draw_u(rng, context.params), context.rep, context.params, context.chain)
            T_prime = transfer_matrix(
                draw_u(rng, context.params), context.rep, context.params, context.chain
            )
            worst = max(worst, commutator_residual(T, T_prime))
        return worst

    @check("transfer-adjoint", "T", "quadrature")
    def check_transfer_adjoint(self, context):
        return max(
            transfer_adjoint_residual(
                u, context.rep, context.chain_frame, context.params, context.chain
            )
            for u, _, _ in self.samples(context, 25)
        )

    @check("u-commutation", "def:Ua", "lattice")
    def check_u_commutation(self, context):
        return max(
            u_commutation_residual(u, context.rep, context.U, context.params, context.chain)
            for u, _, _ in self.samples(context, 26)
        )

    @check("gauge-evenness", "M-lambda(-v)", "lattice")
    def check_gauge_evenness(self, context):
        return max(
            gauge_evenness_residual(lam, v, context.params)
            for _, lam, v in self.samples(context, 27)
        )

    @check("omega-shift", "lamba-shift=u-shift", "lattice")
    def check_omega_shift(self, context):
        return max(
            omega_shift_residual(lam, u, v, context.basis, context.params)
            for u, lam, v in self.samples(context, 28)
        )

    @check("vacuum-action", "action-on-vac", "lattice")
    def check_vacuum_action(self, context):
        return max(
            vacuum_action_residual(lam, u, v, 1, context.rep, context.basis, context.params)
            for u, lam, v in self.samples(context, 29)
        )

    @check("vacuum-action-reflected", "action-on-vac:-", "lattice")
    def check_vacuum_action_reflected(self, context):
        return max(
            vacuum_action_residual(lam, u, v, -1, context.rep, context.basis, context.params)
            for u, lam, v in self.samples(context, 30)
        )

    @check("u-on-pseudo-vacuum", "def:Ua", "lattice")
    def check_u_on_pseudo_vacuum(self, context):
        return max(
            u_on_omega_residual(lam, u, v, context.U, context.basis, context.params)
            for u, lam, v in self.samples(context, 31)
        )

    @check("sigma-lambda-sum", "sum-sigma=0", "theta")
    def check_sigma_lambda_sum(self, context):
        return max(
            sigma_lambda_sum_residual(lam, sigma, context.params)
            for _, lam, _ in self.samples(context, 32)
            for sigma in sigma_sequences(context.params.N)
        )

    @check("twisted-transfer", "T(u)=prod(twisted-L)", "lattice")
    def check_twisted_transfer(self, context):
        params = context.params
        sigma = sigma_sequences(params.N)[0]
        worst = 0.0
        for u, lam, v in self.samples(context, 33):
            lambdas = lambda_sequence(lam, sigma, params)
            twisted = twisted_transfer_matrix(u, v, lambdas, context.rep, params, context.chain)
            worst = max(
                worst,
                relative_residual(twisted, transfer_matrix(u, context.rep, params, context.chain)),
            )
        return worst


Suite = LatticeSuite
