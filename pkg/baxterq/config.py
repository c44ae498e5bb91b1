import copy
import hashlib
import json
import os

from dataclasses import asdict, dataclass, field

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from baxterq.theta import ModelParams, ParameterError, as_spin
from baxterq.utils import deep_update


DEFAULT_TOLERANCES = {
    "theta": 1e-12,
    "algebra": 1e-9,
    "pauli": 1e-10,
    "binomial": 1e-9,
    "quadrature": 1e-6,
    "lattice": 1e-9,
    "qr": 1e-8,
    "inversion": 1e-6,
    "spectra": 1e-5,
    "sum_rule": 1e-6,
}

DEFAULT_QUADRATURE = {
    "GRID": (64, 64),
    "MAX_GRID": 512,
    "RTOL": 1e-8,
}

CONFIG_FIELDS = (
    "tau_im",
    "eta",
    "l",
    "N",
    "seed",
    "grid",
    "tolerances",
    "u0_candidates",
    "report_path",
    "series_truncation",
)


class ConfigurationError(ImproperlyConfigured):
    def __init__(self, *args, field_name=None):
        self.field_name = field_name
        super().__init__(*args)


def get_tolerances():
    tolerances = copy.deepcopy(DEFAULT_TOLERANCES)
    return deep_update(tolerances, getattr(settings, "BAXTERQ_TOLERANCES", {}))


def get_quadrature_config():
    quadrature = dict(DEFAULT_QUADRATURE)
    quadrature.update(getattr(settings, "BAXTERQ_QUADRATURE", {}))
    quadrature["GRID"] = tuple(quadrature["GRID"])
    return quadrature


def get_worker_count():
    """
    Size of the check pool; ``QOP_WORKERS`` in the environment wins over the
    ``BAXTERQ_WORKERS`` setting.
    """
    value = os.environ.get("QOP_WORKERS") or getattr(settings, "BAXTERQ_WORKERS", 1)
    try:
        workers = int(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(
            f"QOP_WORKERS must be a positive integer, got {value!r}",
            field_name="workers",
        ) from e
    return max(1, workers)


@dataclass
class RunConfig:
    tau_im: float
    eta: float
    l: str
    N: int
    seed: int = 1
    grid: tuple = None
    tolerances: dict = field(default_factory=dict)
    u0_candidates: int = 8
    report_path: str = "report.json"
    series_truncation: int = 0

    def __post_init__(self):
        self.tau_im = self._number("tau_im", self.tau_im)
        if self.tau_im <= 0:
            raise ConfigurationError(
                f"tau_im must be positive, got {self.tau_im}", field_name="tau_im"
            )
        self.eta = self._number("eta", self.eta)
        try:
            self.l = str(as_spin(self.l))
        except ParameterError as e:
            raise ConfigurationError(str(e), field_name="l") from e

        self.N = self._integer("N", self.N)
        self.seed = self._integer("seed", self.seed)
        self.u0_candidates = self._integer("u0_candidates", self.u0_candidates)
        if self.u0_candidates < 1:
            raise ConfigurationError(
                "u0_candidates must be at least 1", field_name="u0_candidates"
            )
        self.series_truncation = self._integer(
            "series_truncation", self.series_truncation
        )

        if self.grid is None:
            self.grid = get_quadrature_config()["GRID"]
        try:
            self.grid = tuple(int(n) for n in self.grid)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(
                f"grid must be a pair of integers, got {self.grid!r}", field_name="grid"
            ) from e
        if len(self.grid) != 2 or min(self.grid) < 32:
            raise ConfigurationError(
                f"grid must be two sizes of at least 32, got {self.grid!r}",
                field_name="grid",
            )

        if not isinstance(self.tolerances, dict):
            raise ConfigurationError(
                "tolerances must be a mapping", field_name="tolerances"
            )
        self.tolerances = deep_update(get_tolerances(), self.tolerances)
        for name, value in self.tolerances.items():
            if not isinstance(value, (int, float)) or value <= 0:
                raise ConfigurationError(
                    f"tolerance {name!r} must be a positive number, got {value!r}",
                    field_name=f"tolerances.{name}",
                )

        # Fail early on model parameters
        self.params()

    @staticmethod
    def _number(name, value):
        if isinstance(value, bool):
            raise ConfigurationError(f"{name} must be a number", field_name=name)
        try:
            return float(value)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(
                f"{name} must be a number, got {value!r}", field_name=name
            ) from e

    @staticmethod
    def _integer(name, value):
        if isinstance(value, bool) or int(RunConfig._number(name, value)) != float(value):
            raise ConfigurationError(
                f"{name} must be an integer, got {value!r}", field_name=name
            )
        return int(value)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigurationError("Config must be a JSON object")
        unknown = sorted(set(data) - set(CONFIG_FIELDS))
        if unknown:
            raise ConfigurationError(
                f"Unknown config field(s): {', '.join(unknown)}", field_name=unknown[0]
            )
        missing = [name for name in ("tau_im", "eta", "l", "N") if name not in data]
        if missing:
            raise ConfigurationError(
                f"Missing config field(s): {', '.join(missing)}", field_name=missing[0]
            )
        return cls(**data)

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise ConfigurationError(f"Cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Config {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)

    def params(self):
        try:
            return ModelParams(
                tau=1j * self.tau_im,
                eta=self.eta,
                l=self.l,
                N=self.N,
                series_truncation=self.series_truncation,
            )
        except ParameterError as e:
            raise ConfigurationError(str(e), field_name=e.field_name) from e

    def to_dict(self):
        data = asdict(self)
        data["grid"] = list(self.grid)
        return data

    def fingerprint(self):
        """
        Stable digest of everything that shapes the model context.
        """
        data = self.to_dict()
        data.pop("report_path")
        encoded = json.dumps(data, sort_keys=True).encode("utf-8")
        return hashlib.sha256(encoded).hexdigest()[:16]

    def tolerance(self, name):
        try:
            return self.tolerances[name]
        except KeyError as e:
            raise ConfigurationError(
                f"No tolerance named {name!r}", field_name=f"tolerances.{name}"
            ) from e
