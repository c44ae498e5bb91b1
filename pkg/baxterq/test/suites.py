from baxterq.numerics import DegenerateParameterError
from baxterq.suites.base import BaseSuite, check


class DummySuite(BaseSuite):
    """
    Constant residuals, so the loader, task and command plumbing can be tested
    without building a model.
    """

    @check("tiny", "theta11-period", "theta")
    def check_tiny(self, context):
        return 1e-15

    @check("large", "tq", "spectra")
    def check_large(self, context):
        if self.options.get("FAIL"):
            return 1.0, {"note": "forced"}
        return 0.0

    @check("broken", "def:QR", "qr")
    def check_broken(self, context):
        if self.options.get("BREAK"):
            raise DegenerateParameterError("Gauge matrix is singular")
        return 0.0

    @check("three-halves-only", "rep:pauli", "pauli", applies=lambda params: params.two_l == 3)
    def check_three_halves(self, context):
        return 0.0


Suite = DummySuite
