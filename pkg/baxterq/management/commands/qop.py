import dataclasses
import json
import os
import time

from concurrent.futures import ThreadPoolExecutor

from django.core.management.base import BaseCommand, CommandError

from baxterq.config import ConfigurationError, RunConfig, get_worker_count
from baxterq.numerics import NumericalError
from baxterq.report import (
    CheckRecord,
    build_report,
    merge_reports,
    read_report,
    write_report,
    write_roots_csv,
)
from baxterq.suites import get_suite
from baxterq.suites.base import get_context
from baxterq.tasks import run_check_task
from baxterq.theta import ParameterError


SUITE_COMMANDS = ("verify-algebra", "verify-lattice", "verify-qop", "spectra")

# Exit codes
RESIDUAL_FAILURE = 1
COMPUTATION_FAILURE = 2


class Command(BaseCommand):
    help = "Run Q-operator verification suites, extract spectra and merge reports."

    def write(self, *args, **kwargs):
        """Helper function that respects verbosity when printing."""
        if self.verbosity > 0:
            self.stdout.write(*args, **kwargs)

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest="subcommand", required=True)

        for name in SUITE_COMMANDS:
            subparser = subparsers.add_parser(name)
            subparser.add_argument(
                "--config", required=True, help="Path of the JSON run configuration"
            )
            subparser.add_argument(
                "--seed", type=int, default=None, help="Override the configured seed"
            )
            subparser.add_argument(
                "--out", default=None, help="Report path (default: the configured one)"
            )
            subparser.add_argument(
                "--with-timing",
                action="store_true",
                default=False,
                help="Record wall-clock timings (reports are no longer byte-identical)",
            )
            if name == "spectra":
                subparser.add_argument(
                    "--csv",
                    default=None,
                    help="Bethe root table path (default: report path with .csv)",
                )

        report = subparsers.add_parser("report")
        report.add_argument(
            "--merge", nargs="+", required=True, help="Reports to merge"
        )
        report.add_argument("--out", required=True, help="Merged report path")

    def handle(self, **options):
        self.verbosity = options["verbosity"]
        subcommand = options["subcommand"]

        try:
            if subcommand == "report":
                report = self.merge(options["merge"], options["out"])
            else:
                report = self.run_suite(subcommand, options)
        except (ConfigurationError, ParameterError) as e:
            message = str(e)
            if e.field_name and e.field_name not in message:
                message = f"{e.field_name}: {message}"
            raise CommandError(message, returncode=COMPUTATION_FAILURE) from e
        except NumericalError as e:
            raise CommandError(str(e), returncode=COMPUTATION_FAILURE) from e

        errors = [check for check in report["checks"] if check["error"] is not None]
        if errors:
            raise CommandError(
                f"{len(errors)} check(s) could not be computed: "
                + ", ".join(check["check_id"] for check in errors),
                returncode=COMPUTATION_FAILURE,
            )
        failures = [check for check in report["checks"] if not check["pass"]]
        if failures:
            raise CommandError(
                f"{len(failures)} check(s) above their bound: "
                + ", ".join(check["check_id"] for check in failures),
                returncode=RESIDUAL_FAILURE,
            )
        self.write(f"All {len(report['checks'])} check(s) within bounds")

    def load_config(self, options):
        config = RunConfig.load(options["config"])
        if options["seed"] is not None:
            config = dataclasses.replace(config, seed=options["seed"])
        return config

    def run_suite(self, subcommand, options):
        config = self.load_config(options)
        suite = get_suite(subcommand)
        context = get_context(config)
        check_ids = suite.applicable_check_ids(context)
        config_dict = config.to_dict()

        self.write(
            f"{subcommand}: {len(check_ids)} check(s) on {context.params.label()} seed={config.seed}"
        )

        def run(check_id):
            started = time.perf_counter()
            try:
                data = run_check_task.enqueue(subcommand, check_id, config_dict).return_value
                record = CheckRecord.from_dict(data)
            except Exception as e:
                record = suite.error_record(check_id, context, e)
            return record, time.perf_counter() - started

        started = time.perf_counter()
        with ThreadPoolExecutor(max_workers=get_worker_count()) as executor:
            results = list(executor.map(run, check_ids))

        records = [record for record, _ in results]
        for record in sorted(records, key=lambda record: record.sort_key):
            if record.error is not None:
                status = "ERROR"
            else:
                status = "ok" if record.passed else "FAIL"
            self.write(
                f"  {record.check_id:<28} {status:<5} "
                + (record.error or f"{record.residual:.3e} <= {record.bound:.1e}")
            )

        extra = {"suite": subcommand}
        try:
            extra.update(suite.extra(context))
        except (NumericalError, ParameterError) as e:
            self.write(f"{subcommand}: report sections skipped ({e})")

        timing = None
        if options["with_timing"]:
            timing = {
                "checks": {record.check_id: elapsed for record, elapsed in results},
                "total": time.perf_counter() - started,
            }

        report = build_report(records, config, extra=extra, timing=timing)
        out = options["out"] or config.report_path
        write_report(report, out)
        self.write(f"Report written to {out}")

        if subcommand == "spectra" and "bethe_roots" in report:
            csv_path = options.get("csv") or os.path.splitext(out)[0] + ".csv"
            write_roots_csv(report["bethe_roots"], csv_path)
            self.write(f"Bethe roots written to {csv_path}")

        return report

    def merge(self, paths, out):
        reports = []
        for path in paths:
            try:
                reports.append(read_report(path))
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigurationError(f"Cannot read report {path}: {e}") from e
        report = merge_reports(reports)
        write_report(report, out)
        self.write(f"Merged {len(paths)} report(s) into {out}")
        return report
