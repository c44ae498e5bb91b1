from django.test import SimpleTestCase, override_settings

from baxterq.config import RunConfig
from baxterq.report import CheckRecord
from baxterq.suites.base import clear_contexts
from baxterq.tasks import run_check_task


P1 = RunConfig.from_dict({"tau_im": 1.0, "eta": 0.15, "l": "1/2", "N": 2}).to_dict()


class TestRunCheckTask(SimpleTestCase):
    def setUp(self):
        clear_contexts()
        self.addCleanup(clear_contexts)

    def test_returns_record(self):
        result = run_check_task.enqueue("verify-algebra", "theta-oddness", P1)
        record = CheckRecord.from_dict(result.return_value)
        self.assertEqual(record.suite, "verify-algebra")
        self.assertEqual(record.check_id, "theta-oddness")
        self.assertTrue(record.passed)

    @override_settings(
        BAXTERQ_SUITES={"verify-qop": {"SUITE": "baxterq.test.suites", "BREAK": True}}
    )
    def test_exception_becomes_error_record(self):
        with self.assertLogs("baxterq.tasks", level="ERROR"):
            result = run_check_task.enqueue("verify-qop", "broken", P1)
        data = result.return_value
        self.assertFalse(data["pass"])
        self.assertEqual(data["error"], "Gauge matrix is singular")
        self.assertEqual(data["details"]["error_type"], "numerical")
        self.assertIsNone(data["residual"])

    @override_settings(BAXTERQ_SUITES={"verify-qop": {"SUITE": "baxterq.test.suites"}})
    def test_unknown_check_is_configuration_error(self):
        with self.assertLogs("baxterq.tasks", level="ERROR"):
            result = run_check_task.enqueue("verify-qop", "nope", P1)
        data = result.return_value
        self.assertEqual(data["details"]["error_type"], "configuration")
        self.assertEqual(data["details"]["field_name"], "check_id")
