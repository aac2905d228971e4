# FILE: /backend/apps/simulations/tasks.py
"""
Celery tasks for running scenarios off the command line.

- run_scenario_task:   One scenario into its own output directory; returns the summary dict.
- run_scenario_batch:  Fans several scenarios out as a group, one subdirectory each.

In development and testing CELERY_TASK_ALWAYS_EAGER runs them in-process.
"""
import logging
from pathlib import Path

from celery import group, shared_task

from backend.core.exceptions import SolverError, solver_exception_payload

from .scenarios import run_scenario

logger = logging.getLogger(__name__)


@shared_task(name="simulations.tasks.run_scenario")
def run_scenario_task(name, out_dir, overrides=None):
    """
    Runs a scenario and returns a JSON-serializable summary.
    Solver errors are reported in the payload instead of failing the task,
    so one bad member does not sink a whole batch.
    """
    try:
        result = run_scenario(name, out_dir, **(overrides or {}))
    except SolverError as exc:
        logger.error(f"Scenario {name} aborted: {exc.detail}")
        payload = solver_exception_payload(exc)
        payload['scenario'] = name
        return payload

    summary = result.summary()
    summary['error'] = False
    summary['code'] = 0 if result.passed else 3
    return summary


def run_scenario_batch(names, out_dir, overrides=None):
    """Dispatches one task per scenario as a Celery group and waits for all summaries."""
    root = Path(out_dir)
    job = group(
        run_scenario_task.s(name, str(root / name), overrides or {})
        for name in names
    )
    outcome = job.apply_async()
    summaries = [child.get(disable_sync_subtasks=False) for child in outcome.results]
    failed = [summary['scenario'] for summary in summaries if summary.get('code')]
    if failed:
        logger.warning(f"Batch finished with failures: {', '.join(failed)}")
    else:
        logger.info(f"Batch of {len(summaries)} scenario(s) finished")
    return summaries
