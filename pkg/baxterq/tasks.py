import logging

from django_tasks import task

from baxterq.config import RunConfig
from baxterq.suites import get_suite
from baxterq.suites.base import get_context


logger = logging.getLogger("baxterq.tasks")


@task()
def run_check_task(suite_name, check_id, config_dict):
    """
    Run one check and return its record as a plain dict. A check that raises
    comes back as an error record.
    """
    suite = get_suite(suite_name)
    context = get_context(RunConfig.from_dict(config_dict))
    try:
        record = suite.run_check(check_id, context)
    except Exception as e:
        logger.exception("Check %s %s raised", suite_name, check_id)
        record = suite.error_record(check_id, context, e)
    return record.as_dict()
