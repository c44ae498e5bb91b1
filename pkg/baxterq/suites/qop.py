"""
Q_R, Q_L and Q: three-term relations, commutativity and the U-laws.
"""

from baxterq.qoperator import (
    draw_specs,
    gauge_step_residual,
    phi_pairing,
    phi_pairing_direct,
    phi_symmetry_residual,
    phi_three_term_residual,
    ql_qr_commutation_residual,
    ql_three_term_residual,
    q_relation_residuals,
    qr_periodicity_residual,
    qr_three_term_residual,
    site_pairing_ratios,
    u_law_residuals,
)
from baxterq.suites.base import BaseSuite, check
from baxterq.suites.lattice import draw_u
from baxterq.utils import ratio_residual, relative_residual


SAMPLES = 2


class QOperatorSuite(BaseSuite):
    def points(self, context, stream, count=SAMPLES):
        rng = context.rng(stream)
        return [
            (draw_u(rng, context.params), draw_u(rng, context.params))
            for _ in range(count)
        ]

    def specs(self, context, stream, count=SAMPLES):
        return draw_specs(context.params, context.rng(stream), count)

    def extra(self, context):
        return {"q_family": context.family.as_dict()}

    @check("gauge-step", "M(j+1)=M(j,4leta)", "lattice")
    def check_gauge_step(self, context):
        return max(gauge_step_residual(spec, context.params) for spec in self.specs(context, 40))

    @check("pseudo-vacuum-three-term", "T(u)phi", "qr")
    def check_pseudo_vacuum_three_term(self, context):
        specs = self.specs(context, 41)
        points = self.points(context, 42)
        return max(
            phi_three_term_residual(
                u, spec, context.rep, context.basis, context.params, context.chain
            )
            for spec, (u, _) in zip(specs, points)
        )

    @check("phi-symmetry", "def:Phi", "quadrature")
    def check_phi_symmetry(self, context):
        specs = self.specs(context, 43, count=2 * SAMPLES)
        return max(
            phi_symmetry_residual(
                u, u_prime, specs[2 * k], specs[2 * k + 1], context.basis, context.frame, context.params
            )
            for k, (u, u_prime) in enumerate(self.points(context, 44))
        )

    @check("phi-product", "Phi=prod", "quadrature")
    def check_phi_product(self, context):
        """
        The chain pairing of two columns is the product of the site pairings.
        """
        specs = self.specs(context, 45, count=2 * SAMPLES)
        worst = 0.0
        for k, (u, u_prime) in enumerate(self.points(context, 46)):
            spec, spec_prime = specs[2 * k], specs[2 * k + 1]
            worst = max(
                worst,
                relative_residual(
                    phi_pairing(u, u_prime, spec, spec_prime, context.basis, context.frame, context.params),
                    phi_pairing_direct(
                        u,
                        u_prime,
                        spec,
                        spec_prime,
                        context.basis,
                        context.chain_frame,
                        context.params,
                        context.chain,
                    ),
                ),
            )
        return worst

    @check("phi-factorisation", "Phi=FG", "quadrature")
    def check_phi_factorisation(self, context):
        specs = self.specs(context, 47, count=2 * SAMPLES)
        ratios = []
        for k, (u, u_prime) in enumerate(self.points(context, 48)):
            ratios.extend(
                site_pairing_ratios(
                    u, u_prime, specs[2 * k], specs[2 * k + 1], context.basis, context.frame, context.params
                )
            )
        return ratio_residual(ratios), {"normalisation_ratio": complex(ratios[0])}

    @check("qr-three-term", "TQR", "qr")
    def check_qr_three_term(self, context):
        return max(
            qr_three_term_residual(u, context.family, context.rep)
            for u, _ in self.points(context, 49)
        )

    @check("qr-periodicity", "def:QR", "qr")
    def check_qr_periodicity(self, context):
        return max(
            qr_periodicity_residual(u, context.family) for u, _ in self.points(context, 50)
        )

    @check("ql-three-term", "QLT", "quadrature")
    def check_ql_three_term(self, context):
        return max(
            ql_three_term_residual(u, context.family, context.rep, context.chain_frame)
            for u, _ in self.points(context, 51)
        )

    @check("ql-qr-commutation", "QLQR=QLQR", "quadrature")
    def check_ql_qr_commutation(self, context):
        return max(
            ql_qr_commutation_residual(u, u_prime, context.family, context.chain_frame)
            for u, u_prime in self.points(context, 52)
        )

    def relation(self, context, key):
        return max(
            q_relation_residuals(u, u_prime, context.family, context.rep, context.chain_frame)[key]
            for u, u_prime in self.points(context, 53)
        )

    @check("q-from-left", "Q=QLQL", "inversion", scale_by_condition=True)
    def check_q_from_left(self, context):
        return self.relation(context, "Q=QLQL")

    @check("q-commutation", "QQ=QQ:proof", "inversion", scale_by_condition=True)
    def check_q_commutation(self, context):
        return self.relation(context, "QQ=QQ")

    @check("tq-commutation", "TQ=QT", "inversion", scale_by_condition=True)
    def check_tq_commutation(self, context):
        return self.relation(context, "TQ=QT")

    @check("tq-relation", "tq", "inversion", scale_by_condition=True)
    def check_tq_relation(self, context):
        return self.relation(context, "TQ")

    @check("qt-relation", "tq", "inversion", scale_by_condition=True)
    def check_qt_relation(self, context):
        return self.relation(context, "QT")

    def u_law(self, context, key):
        return max(
            u_law_residuals(u, context.family, context.U, context.chain_frame)[key]
            for u, _ in self.points(context, 54)
        )

    @check("u-laws-qr", "U1-on-QR", "qr")
    def check_u_laws_qr(self, context):
        return self.u_law(context, "QR")

    @check("u-laws-ql", "U1-on-QL", "quadrature")
    def check_u_laws_ql(self, context):
        return self.u_law(context, "QL")

    @check("u-laws-q", "Ua-on-Q", "inversion", scale_by_condition=True)
    def check_u_laws_q(self, context):
        return self.u_law(context, "Q")


Suite = QOperatorSuite
