import math

import numpy as np
import pytest

from jbtriple_kit.algebra.errors import DomainError, IdentitySkipped
from jbtriple_kit.algebra.factors import parse_factor
from jbtriple_kit.config import KitConfig
from jbtriple_kit.services.common import FAIL, PASS, SKIP, OrderedBuffer, Outcome, TrialRecord, trial_rng
from jbtriple_kit.services.runner import TrialTask, execute, run_tasks
from jbtriple_kit.services.suite_config import SuiteConfig
from jbtriple_kit.services.suites import SUITES, build_suite_tasks

TOLERANCES = {"check": 1e-6}
DISC = parse_factor("commutative:1")


def _task(fn, seq=0, trial=0):
    return TrialTask(seq, "check", DISC, 7, trial, "check", fn)


def _raise(exc):
    def fn(ctx):
        raise exc
    return fn


@pytest.mark.parametrize("outcome, status", [
    (Outcome(1e-9), PASS),
    (Outcome(1e-3), FAIL),
    (Outcome(None), FAIL),
    (Outcome(1e-3, passed=True), PASS),
    (Outcome(0.0, passed=False), FAIL),
    (Outcome(math.nan, passed=True), FAIL),
    (Outcome(math.inf), FAIL),
])
def test_status_rules(outcome, status):
    (record,) = execute(_task(lambda ctx: outcome), TOLERANCES)
    assert record.status == status
    assert record.tolerance == 1e-6


def test_errors_become_records():
    (skipped,) = execute(_task(_raise(IdentitySkipped("no unitary"))), TOLERANCES)
    assert skipped.status == SKIP and skipped.detail == "no unitary"

    (failed,) = execute(_task(_raise(DomainError("outside"))), TOLERANCES)
    assert failed.status == FAIL and failed.detail == "DomainError: outside"
    assert failed.residual is None

    (crashed,) = execute(_task(_raise(ZeroDivisionError("boom"))), TOLERANCES)
    assert crashed.status == FAIL and crashed.detail.startswith("ZeroDivisionError")


def test_several_outcomes_per_trial():
    records = execute(_task(lambda ctx: [Outcome(0.0, detail="N=16"), Outcome(1.0, detail="N=64")]), TOLERANCES)
    assert [(r.detail, r.status) for r in records] == [("N=16", PASS), ("N=64", FAIL)]


def test_trial_rng_depends_on_seed_and_trial():
    a = trial_rng(3, 1).standard_normal(4)
    assert np.array_equal(a, trial_rng(3, 1).standard_normal(4))
    assert not np.array_equal(a, trial_rng(3, 2).standard_normal(4))
    assert not np.array_equal(a, trial_rng(4, 1).standard_normal(4))


def test_ordered_buffer_releases_in_sequence():
    buffer = OrderedBuffer()
    r = [TrialRecord("s", "f", 0, i, PASS) for i in range(3)]
    buffer.put(1, [r[1]])
    assert buffer.drain() == []
    buffer.put(0, [r[0]])
    assert buffer.drain() == [r[0], r[1]]
    buffer.put(2, [r[2]])
    assert buffer.drain(timeout=0.1) == [r[2]]
    assert buffer.released == 3


def test_record_json_is_canonical():
    record = TrialRecord("s", "matrix:2x2", 0, 1, PASS, 1e-12, 1e-10,
                         metrics={"b": np.float64(math.nan), "a": np.int64(3), "z": 1 + 2j})
    assert record.to_json() == ('{"detail":"","factor":"matrix:2x2","metrics":{"a":3,"b":null,"z":[1.0,2.0]},'
                                '"residual":1e-12,"seed":0,"status":"pass","suite":"s","tolerance":1e-10,"trial":1}')
    assert TrialRecord.from_dict(record.to_dict()).to_json() == record.to_json()


def test_worker_count_does_not_change_the_stream():
    kit = KitConfig()
    factors = (parse_factor("matrix:2x3"), parse_factor("commutative:2"))
    cfg = SuiteConfig("all", factors, seeds=(11,), trials=2)
    tasks = [t for t in build_suite_tasks(cfg, kit) if t.suite in ("jordan-identity", "spectral", "composition")]
    tasks = [TrialTask(i, t.suite, t.factor, t.seed, t.trial, t.tolerance_key, t.run, t.params)
             for i, t in enumerate(tasks)]
    serial = [r.to_json() for r in run_tasks(tasks, kit.tolerances, workers=1)]
    streamed = []
    threaded = run_tasks(tasks, kit.tolerances, workers=4, on_record=lambda r: streamed.append(r.to_json()))
    assert [r.to_json() for r in threaded] == serial
    assert streamed == serial


def test_task_order_is_suite_factor_trial():
    cfg = SuiteConfig("all", (parse_factor("commutative:1"), parse_factor("matrix:2x2")), seeds=(0,), trials=2)
    tasks = build_suite_tasks(cfg, KitConfig())
    assert len(tasks) == len(SUITES) * 4
    assert [t.seq for t in tasks] == list(range(len(tasks)))
    assert [(str(t.factor), t.trial) for t in tasks[:4]] == [
        ("commutative:1", 0), ("commutative:1", 1), ("matrix:2x2", 0), ("matrix:2x2", 1)]
    assert tasks[0].suite == next(iter(SUITES))


def test_seed_lists_repeat_every_trial_per_seed():
    f = parse_factor("commutative:2")
    single = build_suite_tasks(SuiteConfig("spectral", (f,), seeds=(3,), trials=2), KitConfig())
    several = build_suite_tasks(SuiteConfig("spectral", (f,), seeds=(3, 8), trials=2), KitConfig())
    assert [(t.seed, t.trial) for t in several] == [(3, 0), (3, 1), (8, 0), (8, 1)]
    kit = KitConfig()
    head = [r.to_json() for r in run_tasks(several[:2], kit.tolerances, workers=1)]
    assert head == [r.to_json() for r in run_tasks(single, kit.tolerances, workers=1)]
