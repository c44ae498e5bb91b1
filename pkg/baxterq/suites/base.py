import logging
import threading

from functools import wraps

import numpy as np

from django.utils.functional import cached_property

from baxterq.config import ConfigurationError, get_quadrature_config
from baxterq.lattice import ChainSpace
from baxterq.numerics import NumericalError
from baxterq.qoperator import sample_column_specs
from baxterq.report import CheckRecord
from baxterq.representation import ThetaBasis, rep_matrices, u_matrices
from baxterq.sklyanin import gram_matrix, orthonormal_frame
from baxterq.spectra import compute_spectrum
from baxterq.theta import ParameterError


logger = logging.getLogger("baxterq.suites")


SUITE_ORDER = ("verify-algebra", "verify-lattice", "verify-qop", "spectra")


def shared(method):
    """
    Build a context member once even when several worker threads ask for it.
    Use underneath ``cached_property``.
    """
    name = method.__name__

    @wraps(method)
    def wrapper(self):
        with self._lock:
            if name not in self.__dict__:
                self.__dict__[name] = method(self)
            return self.__dict__[name]

    return wrapper


class ModelContext:
    """
    The objects every check of one run shares, built lazily on first use.
    """

    def __init__(self, config):
        self.config = config
        self.fingerprint = config.fingerprint()
        self.tolerances = config.tolerances
        self._lock = threading.RLock()

    def __repr__(self):
        return f"<ModelContext {self.fingerprint} {self.params!r}>"

    def rng(self, stream):
        """
        Random generator for one check, independent of the order checks run in.
        """
        return np.random.default_rng([self.config.seed, stream])

    @cached_property
    def params(self):
        return self.config.params()

    @cached_property
    @shared
    def basis(self):
        return ThetaBasis.build(self.params, seed=self.config.seed)

    @cached_property
    @shared
    def rep(self):
        return rep_matrices(self.params, self.basis)

    @cached_property
    @shared
    def U(self):
        return u_matrices(self.params, self.basis)

    @cached_property
    @shared
    def gram(self):
        quadrature = get_quadrature_config()
        return gram_matrix(
            self.basis,
            grid=self.config.grid,
            max_grid=quadrature["MAX_GRID"],
            rtol=quadrature["RTOL"],
        )

    @cached_property
    @shared
    def frame(self):
        return orthonormal_frame(self.gram)

    @cached_property
    @shared
    def chain(self):
        return ChainSpace(self.params)

    @cached_property
    @shared
    def chain_frame(self):
        return self.frame.power(self.params.N)

    @cached_property
    @shared
    def family(self):
        return sample_column_specs(
            self.params,
            self.config.seed,
            self.basis,
            self.chain,
            u0_candidates=self.config.u0_candidates,
        )

    @cached_property
    @shared
    def spectrum(self):
        return compute_spectrum(self.family, self.rep, self.U, self.params, self.chain)


_contexts = {}
_contexts_lock = threading.Lock()


def get_context(config):
    """
    The shared ModelContext of ``config``, one per fingerprint.
    """
    fingerprint = config.fingerprint()
    with _contexts_lock:
        if fingerprint not in _contexts:
            _contexts[fingerprint] = ModelContext(config)
        return _contexts[fingerprint]


def clear_contexts():
    with _contexts_lock:
        _contexts.clear()


def check(check_id, anchor, tolerance, applies=None, scale_by_condition=False):
    """
    Register a suite method as a check.

    The method returns a residual, or a ``(residual, details)`` pair. The bound
    is the named tolerance, multiplied by the Q_R(u0) condition estimate when
    ``scale_by_condition`` is set.
    """

    def decorator(method):
        method.check_options = {
            "check_id": check_id,
            "anchor": anchor,
            "tolerance": tolerance,
            "applies": applies,
            "scale_by_condition": scale_by_condition,
        }
        return method

    return decorator


class BaseSuite:
    def __init__(self, name, params=None):
        self.name = name
        self.options = params or {}
        self._checks = {}
        for attr in dir(type(self)):
            options = getattr(getattr(type(self), attr), "check_options", None)
            if options is not None:
                self._checks[options["check_id"]] = (attr, options)

        # Declaration order, which is also the report order
        self._order = [
            check_id
            for check_id, _ in sorted(
                self._checks.items(),
                key=lambda item: getattr(type(self), item[1][0]).__code__.co_firstlineno,
            )
        ]

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"

    @property
    def suite_index(self):
        try:
            return SUITE_ORDER.index(self.name)
        except ValueError:
            return len(SUITE_ORDER)

    @property
    def check_ids(self):
        return list(self._order)

    def extra(self, context):
        """
        Report sections beyond the check records (condition estimates, root tables).
        """
        return {}

    def applicable_check_ids(self, context):
        return [
            check_id
            for check_id in self._order
            if self._checks[check_id][1]["applies"] is None
            or self._checks[check_id][1]["applies"](context.params)
        ]

    def _record(self, check_id, context, **kwargs):
        # Unknown ids (error records only) sort after the declared checks
        if check_id in self._checks:
            anchor = self._checks[check_id][1]["anchor"]
            index = self._order.index(check_id)
        else:
            anchor, index = "", len(self._order)
        parameters = dict(context.params.label(), seed=context.config.seed)
        return CheckRecord(
            suite=self.name,
            check_id=check_id,
            equation_anchor=anchor,
            parameters=parameters,
            fingerprint=context.fingerprint,
            order=(self.suite_index, index),
            **kwargs,
        )

    def run_check(self, check_id, context):
        try:
            attr, options = self._checks[check_id]
        except KeyError as e:
            raise ConfigurationError(
                f"Suite {self.name!r} has no check {check_id!r}", field_name="check_id"
            ) from e

        result = getattr(self, attr)(context)
        residual, details = result if isinstance(result, tuple) else (result, {})

        bound = context.tolerances[options["tolerance"]]
        if options["scale_by_condition"]:
            condition = context.family.condition_estimate
            bound *= condition
            details = dict(details, condition=condition)

        record = self._record(
            check_id, context, residual=float(residual), bound=bound, details=details
        )
        log = logger.info if record.passed else logger.warning
        log(
            "%s %s: residual %.3e (bound %.1e)",
            self.name,
            check_id,
            record.residual,
            bound,
        )
        return record

    def error_record(self, check_id, context, exc):
        if isinstance(exc, NumericalError):
            kind = "numerical"
        elif isinstance(exc, (ConfigurationError, ParameterError)):
            kind = "configuration"
        else:
            kind = "internal"
        details = {"error_type": kind, "exception": type(exc).__name__}
        for attr in ("condition", "point", "cluster", "min_eigenvalue", "field_name"):
            if getattr(exc, attr, None) is not None:
                details[attr] = getattr(exc, attr)
        return self._record(check_id, context, error=str(exc), details=details)

    def run(self, context):
        records = []
        for check_id in self.applicable_check_ids(context):
            try:
                records.append(self.run_check(check_id, context))
            except Exception as e:
                logger.exception("Check %s %s raised", self.name, check_id)
                records.append(self.error_record(check_id, context, e))
        return records
