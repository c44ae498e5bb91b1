import csv
import json
import math

from dataclasses import dataclass, field

import numpy as np


ROOT_COLUMNS = (
    "sector_nu1",
    "sector_nu3",
    "eigen_index",
    "root_index",
    "re_u",
    "im_u",
    "q_residual",
)


def plain(value):
    """
    Convert numpy scalars, complex numbers and containers into JSON-safe values.
    Non-finite floats become ``None``.
    """
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [plain(float(value.real)), plain(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


@dataclass
class CheckRecord:
    suite: str
    check_id: str
    equation_anchor: str
    parameters: dict
    residual: float = None
    bound: float = None
    error: str = None
    fingerprint: str = ""
    order: tuple = (0, 0)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        if self.error is not None or self.residual is None or self.bound is None:
            return False
        return bool(math.isfinite(self.residual) and self.residual <= self.bound)

    @property
    def sort_key(self):
        return (tuple(self.order), self.fingerprint, self.check_id)

    def as_dict(self):
        return plain(
            {
                "suite": self.suite,
                "check_id": self.check_id,
                "equation_anchor": self.equation_anchor,
                "parameters": self.parameters,
                "residual": self.residual,
                "bound": self.bound,
                "pass": self.passed,
                "error": self.error,
                "fingerprint": self.fingerprint,
                "order": list(self.order),
                "details": self.details,
            }
        )

    @classmethod
    def from_dict(cls, data):
        return cls(
            suite=data["suite"],
            check_id=data["check_id"],
            equation_anchor=data["equation_anchor"],
            parameters=data.get("parameters", {}),
            residual=data.get("residual"),
            bound=data.get("bound"),
            error=data.get("error"),
            fingerprint=data.get("fingerprint", ""),
            order=tuple(data.get("order", (0, 0))),
            details=data.get("details", {}),
        )


def build_report(records, config=None, extra=None, timing=None):
    """
    Assemble a report dict from check records, sorted by their ordering keys.
    """
    records = sorted(records, key=lambda record: record.sort_key)
    report = {
        "checks": [record.as_dict() for record in records],
        "passed": all(record.passed for record in records),
    }
    if config is not None:
        report["config"] = plain(config.to_dict())
        report["fingerprint"] = config.fingerprint()
    if extra:
        report.update(plain(extra))
    if timing is not None:
        report["timing"] = plain(timing)
    return report


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(report))


def read_report(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def merge_reports(reports):
    """
    Union of the check records of several reports. A record already seen (same
    fingerprint, suite and check) keeps its first occurrence.
    """
    seen = {}
    for report in reports:
        for data in report.get("checks", []):
            record = CheckRecord.from_dict(data)
            seen.setdefault((record.fingerprint, record.suite, record.check_id), record)

    merged = build_report(seen.values())
    fingerprints = sorted({record.fingerprint for record in seen.values()})
    merged["sources"] = fingerprints
    return merged


def write_roots_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=ROOT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: plain(row[key]) for key in ROOT_COLUMNS})
