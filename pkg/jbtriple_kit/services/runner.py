"""
Trial runner: a pool of worker threads fed from a Queue, with results
released through an OrderedBuffer so the record stream is identical for any
worker count.
"""
from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from queue import Empty, Queue
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

from jbtriple_kit.algebra.errors import IdentitySkipped, TripleError
from jbtriple_kit.algebra.factors import FactorDescriptor
from jbtriple_kit.services.common import (
    FAIL, PASS, SKIP, OrderedBuffer, Outcome, TrialContext, TrialRecord, trial_rng,
)

logger = logging.getLogger(__name__)

TrialResult = Union[Outcome, Sequence[Outcome]]


@dataclass(frozen=True)
class TrialTask:
    seq: int
    suite: str
    factor: FactorDescriptor
    seed: int
    trial: int
    tolerance_key: str
    run: Callable[[TrialContext], TrialResult] = field(repr=False)
    params: Dict[str, Any] = field(default_factory=dict)


def _status(outcome: Outcome, tolerance: float) -> str:
    residual = outcome.residual
    if residual is not None and not math.isfinite(residual):
        return FAIL
    if outcome.passed is not None:
        return PASS if outcome.passed else FAIL
    if residual is None:
        return FAIL
    return PASS if residual <= tolerance else FAIL


def execute(task: TrialTask, tolerances: Dict[str, float]) -> List[TrialRecord]:
    """Run one trial; never raises."""
    tolerance = tolerances[task.tolerance_key]
    base = dict(suite=task.suite, factor=str(task.factor), seed=task.seed, trial=task.trial,
                tolerance=tolerance)
    ctx = TrialContext(task.factor, trial_rng(task.seed, task.trial), tolerance, tolerances,
                       dict(task.params))
    try:
        result = task.run(ctx)
    except IdentitySkipped as e:
        logger.warning("%s trial %d on %s skipped: %s", task.suite, task.trial, task.factor, e.reason)
        return [TrialRecord(status=SKIP, detail=e.reason, **base)]
    except TripleError as e:
        logger.info("%s trial %d on %s failed: %s", task.suite, task.trial, task.factor, e)
        return [TrialRecord(status=FAIL, detail=f"{type(e).__name__}: {e}", **base)]
    except Exception as e:
        logger.exception("%s trial %d on %s raised", task.suite, task.trial, task.factor)
        return [TrialRecord(status=FAIL, detail=f"{type(e).__name__}: {e}", **base)]

    outcomes = [result] if isinstance(result, Outcome) else list(result)
    return [
        TrialRecord(status=_status(o, tolerance), residual=o.residual, detail=o.detail,
                    metrics=dict(o.metrics), **base)
        for o in outcomes
    ]


class TrialWorker(threading.Thread):
    """Takes tasks off the queue until it sees the None sentinel."""

    def __init__(self, q: "Queue[Optional[TrialTask]]", buffer: OrderedBuffer,
                 tolerances: Dict[str, float], name: str = "trial-worker"):
        super().__init__(name=name, daemon=True)
        self.q = q
        self.buffer = buffer
        self.tolerances = tolerances
        self._stop_event = threading.Event()

    def run(self):
        while not self._stop_event.is_set():
            try:
                task = self.q.get(timeout=0.1)
            except Empty:
                continue
            if task is None:
                break
            self.buffer.put(task.seq, execute(task, self.tolerances))

    def stop(self):
        self._stop_event.set()


RecordCallback = Callable[[TrialRecord], None]


def run_tasks(tasks: Sequence[TrialTask], tolerances: Dict[str, float], workers: int = 1,
              on_record: Optional[RecordCallback] = None) -> List[TrialRecord]:
    """All records in task order; `on_record` sees each one as soon as its turn comes."""
    records: List[TrialRecord] = []

    def emit(batch: List[TrialRecord]) -> None:
        for r in batch:
            records.append(r)
            if on_record is not None:
                on_record(r)

    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            emit(execute(task, tolerances))
        return records

    q: "Queue[Optional[TrialTask]]" = Queue()
    buffer = OrderedBuffer()
    pool = [TrialWorker(q, buffer, tolerances, name=f"trial-worker-{i}")
            for i in range(min(workers, len(tasks)))]
    for task in sorted(tasks, key=lambda t: t.seq):
        q.put(task)
    for _ in pool:
        q.put(None)
    for w in pool:
        w.start()
    logger.debug("running %d tasks on %d workers", len(tasks), len(pool))
    try:
        while buffer.released < len(tasks):
            emit(buffer.drain(timeout=0.1))
    finally:
        for w in pool:
            w.stop()
        for w in pool:
            w.join(timeout=1.0)
    return records
