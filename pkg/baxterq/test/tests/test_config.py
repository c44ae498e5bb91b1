import json
import os
import tempfile

from unittest import mock

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from baxterq.config import (
    DEFAULT_TOLERANCES,
    ConfigurationError,
    RunConfig,
    get_quadrature_config,
    get_tolerances,
    get_worker_count,
)


P1 = {"tau_im": 1.0, "eta": 0.15, "l": "1/2", "N": 2}


class TestRunConfig(SimpleTestCase):
    def assertFieldError(self, field_name, **changes):
        with self.assertRaises(ConfigurationError) as cm:
            RunConfig.from_dict(dict(P1, **changes))
        self.assertEqual(cm.exception.field_name, field_name)
        return cm.exception

    def test_defaults(self):
        config = RunConfig.from_dict(P1)
        self.assertEqual(config.seed, 1)
        self.assertEqual(config.grid, (64, 64))
        self.assertEqual(config.u0_candidates, 8)
        self.assertEqual(config.report_path, "report.json")
        self.assertEqual(config.tolerances, DEFAULT_TOLERANCES)

    def test_spin_normalised(self):
        self.assertEqual(RunConfig.from_dict(dict(P1, l="1")).l, "1")
        self.assertEqual(RunConfig.from_dict(dict(P1, l=0.5)).l, "1/2")

    def test_params(self):
        params = RunConfig.from_dict(dict(P1, l="3/2", tau_im=0.9, eta=0.07)).params()
        self.assertEqual(params.tau, 0.9j)
        self.assertEqual(params.two_l, 3)

    def test_unknown_field(self):
        error = self.assertFieldError("temperature", temperature=3)
        self.assertIn("temperature", str(error))

    def test_missing_field(self):
        with self.assertRaises(ConfigurationError) as cm:
            RunConfig.from_dict({"eta": 0.15, "l": "1/2", "N": 2})
        self.assertEqual(cm.exception.field_name, "tau_im")

    def test_not_an_object(self):
        with self.assertRaises(ConfigurationError):
            RunConfig.from_dict([1, 2])

    def test_odd_chain(self):
        error = self.assertFieldError("N", N=3)
        self.assertIn("even", str(error))

    def test_non_integer_chain(self):
        self.assertFieldError("N", N=2.5)
        self.assertFieldError("N", N=True)

    def test_eta_out_of_range(self):
        self.assertFieldError("eta", eta=0.3)

    def test_tau_not_positive(self):
        self.assertFieldError("tau_im", tau_im=0)
        self.assertFieldError("tau_im", tau_im="i")

    def test_bad_spin(self):
        self.assertFieldError("l", l="1/3")

    def test_small_grid(self):
        self.assertFieldError("grid", grid=[16, 64])
        self.assertFieldError("grid", grid=[64])

    def test_bad_tolerance(self):
        self.assertFieldError("tolerances.qr", tolerances={"qr": -1})
        self.assertFieldError("tolerances", tolerances=[1e-8])

    def test_tolerances_merged(self):
        config = RunConfig.from_dict(dict(P1, tolerances={"qr": 1e-7}))
        self.assertEqual(config.tolerance("qr"), 1e-7)
        self.assertEqual(config.tolerance("theta"), 1e-12)

    def test_unknown_tolerance(self):
        with self.assertRaises(ConfigurationError) as cm:
            RunConfig.from_dict(P1).tolerance("nope")
        self.assertEqual(cm.exception.field_name, "tolerances.nope")

    def test_to_dict_round_trip(self):
        config = RunConfig.from_dict(dict(P1, seed=4, grid=[128, 64]))
        data = config.to_dict()
        self.assertEqual(data["grid"], [128, 64])
        self.assertEqual(RunConfig.from_dict(data), config)
        json.dumps(data)

    def test_fingerprint(self):
        config = RunConfig.from_dict(P1)
        self.assertEqual(len(config.fingerprint()), 16)
        self.assertEqual(
            config.fingerprint(),
            RunConfig.from_dict(dict(P1, report_path="elsewhere.json")).fingerprint(),
        )
        self.assertNotEqual(
            config.fingerprint(), RunConfig.from_dict(dict(P1, seed=2)).fingerprint()
        )


class TestLoad(SimpleTestCase):
    def test_bundled_configs(self):
        expected = {"p1": ("1/2", 2), "p2": ("1", 2), "p3": ("1/2", 4), "p4": ("3/2", 2)}
        for name, (l, N) in expected.items():
            with self.subTest(config=name):
                config = RunConfig.load(os.path.join(settings.CONFIG_DIR, f"{name}.json"))
                self.assertEqual((config.l, config.N), (l, N))
                self.assertEqual(config.report_path, f"{name}-report.json")

    def test_missing_file(self):
        with self.assertRaises(ConfigurationError):
            RunConfig.load(os.path.join(settings.CONFIG_DIR, "missing.json"))

    def test_invalid_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.json")
            with open(path, "w") as f:
                f.write("{tau_im: 1")
            with self.assertRaises(ConfigurationError) as cm:
                RunConfig.load(path)
        self.assertIn("not valid JSON", str(cm.exception))


class TestSettings(SimpleTestCase):
    @override_settings(BAXTERQ_TOLERANCES={"theta": 1e-11})
    def test_tolerance_setting(self):
        self.assertEqual(get_tolerances()["theta"], 1e-11)
        self.assertEqual(get_tolerances()["qr"], 1e-8)
        self.assertEqual(RunConfig.from_dict(P1).tolerance("theta"), 1e-11)

    def test_config_tolerance_beats_setting(self):
        with override_settings(BAXTERQ_TOLERANCES={"qr": 1e-7}):
            config = RunConfig.from_dict(dict(P1, tolerances={"qr": 1e-6}))
        self.assertEqual(config.tolerance("qr"), 1e-6)

    @override_settings(BAXTERQ_QUADRATURE={"GRID": [128, 128]})
    def test_quadrature_setting(self):
        quadrature = get_quadrature_config()
        self.assertEqual(quadrature["GRID"], (128, 128))
        self.assertEqual(quadrature["MAX_GRID"], 512)
        self.assertEqual(RunConfig.from_dict(P1).grid, (128, 128))

    @mock.patch.dict(os.environ, {"QOP_WORKERS": "4"})
    def test_worker_env(self):
        self.assertEqual(get_worker_count(), 4)

    @mock.patch.dict(os.environ, {"QOP_WORKERS": "0"})
    def test_at_least_one_worker(self):
        self.assertEqual(get_worker_count(), 1)

    @mock.patch.dict(os.environ, {"QOP_WORKERS": "many"})
    def test_bad_worker_env(self):
        with self.assertRaises(ConfigurationError) as cm:
            get_worker_count()
        self.assertEqual(cm.exception.field_name, "workers")

    @override_settings(BAXTERQ_WORKERS=3)
    def test_worker_setting(self):
        with mock.patch.dict(os.environ):
            os.environ.pop("QOP_WORKERS", None)
            self.assertEqual(get_worker_count(), 3)
