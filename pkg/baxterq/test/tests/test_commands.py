import json
import os
import tempfile

from io import StringIO
from unittest import mock

from django.conf import settings
from django.core import management
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from baxterq.cli import run_command
from baxterq.report import read_report
from baxterq.suites.base import clear_contexts


P1_CONFIG = os.path.join(settings.CONFIG_DIR, "p1.json")

DUMMY_SUITES = {
    "verify-algebra": {"SUITE": "baxterq.test.suites"},
    "verify-lattice": {"SUITE": "baxterq.test.suites", "FAIL": True},
    "verify-qop": {"SUITE": "baxterq.test.suites", "BREAK": True},
}


@override_settings(BAXTERQ_SUITES=DUMMY_SUITES)
class TestQopCommand(SimpleTestCase):
    def setUp(self):
        clear_contexts()
        self.addCleanup(clear_contexts)
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def write_config(self, name, **data):
        path = self.path(name)
        with open(path, "w") as f:
            json.dump(data, f)
        return path

    def call(self, *args, **kwargs):
        stdout = StringIO()
        management.call_command("qop", *args, stdout=stdout, **kwargs)
        return stdout.getvalue()

    def test_passing_suite(self):
        out = self.path("algebra.json")
        output = self.call("verify-algebra", "--config", P1_CONFIG, "--out", out)
        self.assertIn("All 3 check(s) within bounds", output)
        self.assertIn("Report written to", output)

        report = read_report(out)
        self.assertTrue(report["passed"])
        self.assertEqual([c["check_id"] for c in report["checks"]], ["tiny", "large", "broken"])
        self.assertEqual(report["suite"], "verify-algebra")
        self.assertEqual(report["config"]["seed"], 1)
        self.assertNotIn("timing", report)

    def test_no_verbosity(self):
        output = self.call(
            "verify-algebra", "--config", P1_CONFIG, "--out", self.path("r.json"), verbosity=0
        )
        self.assertFalse(output)

    def test_reports_are_byte_identical(self):
        first, second = self.path("first.json"), self.path("second.json")
        self.call("verify-algebra", "--config", P1_CONFIG, "--out", first)
        clear_contexts()
        self.call("verify-algebra", "--config", P1_CONFIG, "--out", second)
        with open(first, "rb") as f, open(second, "rb") as g:
            self.assertEqual(f.read(), g.read())

    def test_timing_on_request(self):
        out = self.path("timed.json")
        self.call("verify-algebra", "--config", P1_CONFIG, "--out", out, "--with-timing")
        timing = read_report(out)["timing"]
        self.assertEqual(set(timing["checks"]), {"tiny", "large", "broken"})
        self.assertIn("total", timing)

    def test_seed_override(self):
        out = self.path("seeded.json")
        self.call("verify-algebra", "--config", P1_CONFIG, "--out", out, "--seed", "7")
        report = read_report(out)
        self.assertEqual(report["config"]["seed"], 7)
        self.assertEqual(report["checks"][0]["parameters"]["seed"], 7)

    def test_default_report_path(self):
        config = self.write_config(
            "p1.json", tau_im=1.0, eta=0.15, l="1/2", N=2, report_path=self.path("default.json")
        )
        self.call("verify-algebra", "--config", config)
        self.assertTrue(os.path.exists(self.path("default.json")))

    def test_residual_failure_exits_one(self):
        out = self.path("lattice.json")
        with self.assertRaises(CommandError) as cm:
            self.call("verify-lattice", "--config", P1_CONFIG, "--out", out)
        self.assertEqual(cm.exception.returncode, 1)
        self.assertIn("large", str(cm.exception))
        # The report is still written
        self.assertFalse(read_report(out)["passed"])

    def test_computation_failure_exits_two(self):
        out = self.path("qop.json")
        with self.assertRaises(CommandError) as cm:
            self.call("verify-qop", "--config", P1_CONFIG, "--out", out)
        self.assertEqual(cm.exception.returncode, 2)
        broken = [c for c in read_report(out)["checks"] if c["check_id"] == "broken"][0]
        self.assertEqual(broken["details"]["error_type"], "numerical")

    def test_invalid_config_names_field(self):
        config = self.write_config("odd.json", tau_im=1.0, eta=0.15, l="1/2", N=3)
        with self.assertRaises(CommandError) as cm:
            self.call("verify-algebra", "--config", config, "--out", self.path("x.json"))
        self.assertEqual(cm.exception.returncode, 2)
        self.assertIn("N", str(cm.exception))
        self.assertFalse(os.path.exists(self.path("x.json")))

    def test_missing_config(self):
        with self.assertRaises(CommandError) as cm:
            self.call("verify-algebra", "--config", self.path("missing.json"))
        self.assertEqual(cm.exception.returncode, 2)

    def test_merge(self):
        algebra, lattice = self.path("algebra.json"), self.path("lattice.json")
        self.call("verify-algebra", "--config", P1_CONFIG, "--out", algebra)
        with self.assertRaises(CommandError):
            self.call("verify-lattice", "--config", P1_CONFIG, "--out", lattice)

        merged = self.path("merged.json")
        with self.assertRaises(CommandError) as cm:
            self.call("report", "--merge", algebra, lattice, "--out", merged)
        self.assertEqual(cm.exception.returncode, 1)

        report = read_report(merged)
        self.assertEqual(len(report["checks"]), 6)
        self.assertEqual(
            [c["suite"] for c in report["checks"]], ["verify-algebra"] * 3 + ["verify-lattice"] * 3
        )

    def test_merge_same_report_twice(self):
        algebra = self.path("algebra.json")
        self.call("verify-algebra", "--config", P1_CONFIG, "--out", algebra)
        merged = self.path("merged.json")
        output = self.call("report", "--merge", algebra, algebra, "--out", merged)
        self.assertIn("Merged 2 report(s)", output)
        self.assertEqual(len(read_report(merged)["checks"]), 3)

    def test_merge_unreadable_report(self):
        with self.assertRaises(CommandError) as cm:
            self.call("report", "--merge", self.path("missing.json"), "--out", self.path("m.json"))
        self.assertEqual(cm.exception.returncode, 2)


@override_settings(BAXTERQ_SUITES=DUMMY_SUITES)
class TestRunCommand(SimpleTestCase):
    def setUp(self):
        clear_contexts()
        self.addCleanup(clear_contexts)
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def run_qop(self, *argv):
        with mock.patch("sys.stdout", new_callable=StringIO), mock.patch(
            "sys.stderr", new_callable=StringIO
        ):
            return run_command(list(argv))

    def test_exit_codes(self):
        out = os.path.join(self.tmp.name, "r.json")
        self.assertEqual(self.run_qop("verify-algebra", "--config", P1_CONFIG, "--out", out), 0)
        self.assertEqual(self.run_qop("verify-lattice", "--config", P1_CONFIG, "--out", out), 1)
        self.assertEqual(self.run_qop("verify-qop", "--config", P1_CONFIG, "--out", out), 2)

    def test_usage_error(self):
        self.assertNotEqual(self.run_qop("verify-algebra"), 0)
