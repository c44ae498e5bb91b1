"""
Joint eigenvectors, Q-eigenvalues and their Bethe roots.
"""

import numpy as np

from baxterq.spectra import (
    bethe_equation_residual,
    direct_spectrum_residual,
    eigenvalue_reconstruction_residual,
    explicit_form_residual,
    q_quasi_periodicity_residual,
    recover_planted_roots,
    sector_residual,
    sum_rule_residual,
    tq_scalar_residual,
    u_grid,
)
from baxterq.suites.base import BaseSuite, check
from baxterq.suites.lattice import draw_u


def worst_over_pairs(context, evaluate):
    spectrum = context.spectrum
    return max(
        (evaluate(pair, roots) for pair, roots in zip(spectrum.pairs, spectrum.roots)),
        default=0.0,
    )


class SpectraSuite(BaseSuite):
    def extra(self, context):
        spectrum = context.spectrum
        return {
            "sectors": [
                {"nu1": s.nu1, "nu3": s.nu3, "dimension": s.dimension}
                for s in spectrum.sectors
            ],
            "bethe_roots": list(spectrum.rows()),
        }

    @check("sectors", "H=Hnu", "lattice")
    def check_sectors(self, context):
        sectors = context.spectrum.sectors
        return max(sector_residual(sector, context.U, context.chain) for sector in sectors), {
            "dimensions": {f"{s.nu1}{s.nu3}": s.dimension for s in sectors}
        }

    @check("joint-eigenvectors", "nuq", "inversion", scale_by_condition=True)
    def check_joint_eigenvectors(self, context):
        us = u_grid(context.params)
        return max(
            (pair.joint_residual(us, context.family.q) for pair in context.spectrum.pairs),
            default=0.0,
        )

    @check("direct-spectrum", "bethe-eigen-val", "spectra")
    def check_direct_spectrum(self, context):
        rng = context.rng(60)
        points = [draw_u(rng, context.params) for _ in range(2)]
        pairs = context.spectrum.pairs
        if not pairs:
            return 0.0
        return direct_spectrum_residual(pairs, pairs[0].T_eval, points)

    @check("scalar-tq", "tq", "spectra")
    def check_scalar_tq(self, context):
        us = u_grid(context.params, 8)
        return worst_over_pairs(
            context, lambda pair, roots: tq_scalar_residual(pair, context.params, us)
        )

    @check("q-quasi-periodicity", "nuq", "spectra")
    def check_q_quasi_periodicity(self, context):
        us = u_grid(context.params, 8)
        return worst_over_pairs(
            context, lambda pair, roots: q_quasi_periodicity_residual(pair, context.params, us)
        )

    @check("root-count", "q(u)", "spectra")
    def check_root_count(self, context):
        expected = context.params.nl
        counts = [roots.count for roots in context.spectrum.roots]
        return float(max((abs(c - expected) for c in counts), default=0)), {
            "expected": expected,
            "counts": counts,
        }

    @check("explicit-form", "q(u)", "spectra")
    def check_explicit_form(self, context):
        return worst_over_pairs(
            context, lambda pair, roots: explicit_form_residual(pair, roots, context.params)
        )

    @check("sum-rule", "sum-rule", "sum_rule")
    def check_sum_rule(self, context):
        return worst_over_pairs(
            context, lambda pair, roots: sum_rule_residual(roots, context.params)
        )

    @check("bethe-equation", "bethe-eq", "spectra")
    def check_bethe_equation(self, context):
        return worst_over_pairs(
            context, lambda pair, roots: bethe_equation_residual(roots, context.params)
        )

    @check("eigenvalue-reconstruction", "bethe-eigen-val", "spectra")
    def check_eigenvalue_reconstruction(self, context):
        us = u_grid(context.params)
        return worst_over_pairs(
            context,
            lambda pair, roots: eigenvalue_reconstruction_residual(pair, roots, us, context.params),
        )

    @check("planted-roots", "plumbing", "spectra")
    def check_planted_roots(self, context):
        params = context.params
        rng = context.rng(61)
        centres = [
            complex(rng.uniform(0.1, 0.9), params.t * rng.uniform(0.1, 0.9))
            for _ in range(max(1, params.nl))
        ]
        return float(recover_planted_roots(centres, params)), {
            "centres": np.array(centres)
        }


Suite = SpectraSuite
