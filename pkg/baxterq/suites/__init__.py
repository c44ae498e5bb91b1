# Suite loading
# Modelled on the Django cache framework's backend loading

from importlib import import_module

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from django.utils.module_loading import import_string


DEFAULT_SUITES = {
    "verify-algebra": {"SUITE": "baxterq.suites.algebra"},
    "verify-lattice": {"SUITE": "baxterq.suites.lattice"},
    "verify-qop": {"SUITE": "baxterq.suites.qop"},
    "spectra": {"SUITE": "baxterq.suites.spectra"},
}


class InvalidSuiteError(ImproperlyConfigured):
    pass


def get_suite_config():
    suites = dict(getattr(settings, "BAXTERQ_SUITES", {}))

    # The subcommands always have a suite behind them
    for name, conf in DEFAULT_SUITES.items():
        suites.setdefault(name, conf)

    return suites


def import_suite(dotted_path):
    """
    Accepts either a module exposing a ``Suite`` attribute
    (baxterq.suites.algebra) or the dotted path of the class itself
    (baxterq.suites.algebra.AlgebraSuite).
    """
    try:
        suite_module = import_module(dotted_path)
        return suite_module.Suite
    except (ImportError, AttributeError) as e:
        try:
            return import_string(dotted_path)
        except ImportError:
            raise e from e


def get_suite(name, **kwargs):
    """
    Get the suite instance for ``name``, either a key of BAXTERQ_SUITES or a
    dotted path. Options of the BAXTERQ_SUITES entry (except ``SUITE``) and any
    keyword arguments are passed to the suite class.
    """
    suites = get_suite_config()

    try:
        conf = suites[name]
    except KeyError:
        try:
            import_suite(name)
        except (ImportError, AttributeError) as e:
            raise InvalidSuiteError(f"Could not find suite '{name}': {e}") from e
        params = kwargs
        path = name
    else:
        params = conf.copy()
        params.update(kwargs)
        path = params.pop("SUITE")

    try:
        suite_cls = import_suite(path)
    except (ImportError, AttributeError) as e:
        raise InvalidSuiteError(f"Could not find suite '{path}': {e}") from e

    return suite_cls(name, params)
