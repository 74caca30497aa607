import numpy as np
import pytest

from jbtriple_kit.algebra.factors import ball_norm, element, parse_factor, random_polydisc
from jbtriple_kit.config import KitConfig
from jbtriple_kit.services.common import FAIL, SKIP, trial_rng
from jbtriple_kit.services.experiments import EXPERIMENTS, GENERIC_MARGIN, build_experiment_tasks, stall_margin
from jbtriple_kit.services.runner import TrialTask, execute
from jbtriple_kit.services.suite_config import ExperimentConfig
from jbtriple_kit.services.suites import SUITE_NAMES, SUITES, expand_suite

KIT = KitConfig()


def _run(name, run, tolerance, factor, trials=2, params=None):
    records = []
    for trial in range(trials):
        task = TrialTask(trial, name, factor, 0, trial, tolerance, run, dict(params or {}, trial=trial))
        records.extend(execute(task, KIT.tolerances))
    return records


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_holds_on_every_factor(name, factor):
    suite = SUITES[name]
    for record in _run(name, suite.run_trial, suite.tolerance, factor, params={"nodes": 512}):
        assert record.status != FAIL, (record.detail, record.metrics)


def test_unitary_suites_skip_rectangular_matrices():
    f = parse_factor("matrix:2x3")
    for name in ("gamma1-invariance", "maximal-unitary"):
        statuses = {r.status for r in _run(name, SUITES[name].run_trial, SUITES[name].tolerance, f)}
        assert statuses == {SKIP}


def test_all_expands_to_every_suite():
    assert "all" in SUITE_NAMES
    assert [s.name for s in expand_suite("all")] == list(SUITES)
    assert expand_suite("spectral") == [SUITES["spectral"]]


EXPERIMENT_PARAMS = {
    "russo-dye": {"N": [16, 256]},
    "determining": {"set_kind": "gamma", "n_set": 300, "n_ball": 300, "test_functions": ["affine", "shilov"]},
    "boundary": {},
    "orbit-closure": {"t_grid": [0.9, 0.99, 0.999, 0.9999]},
    "shilov": {"epsilon": 0.1, "samples": 300},
    "minimality": {"epsilon": 0.1, "n_set": 200},
    "mean-value": {"N": [16, 128], "test_functions": ["affine", "cubic"]},
}


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
@pytest.mark.parametrize("spec", ["matrix:2x2", "commutative:2"])
def test_experiment_holds(name, spec):
    experiment = EXPERIMENTS[name]
    records = _run(name, experiment.run_trial, experiment.tolerance, parse_factor(spec),
                   params=EXPERIMENT_PARAMS[name])
    assert records
    for record in records:
        assert record.status != FAIL, (record.detail, record.metrics)


def test_orbit_determining_sets_are_reported_only():
    records = _run("determining", EXPERIMENTS["determining"].run_trial, "determining_gap",
                   parse_factor("commutative:2"), trials=1,
                   params={"set_kind": "orbit-g0", "n_set": 20, "n_ball": 50})
    assert [r.detail for r in records] == ["orbit-g0:affine", "orbit-g0:product"]
    assert all(r.status != FAIL for r in records)


def test_gamma1_determining_skips_without_unitaries():
    (record,) = _run("determining", EXPERIMENTS["determining"].run_trial, "determining_gap",
                     parse_factor("matrix:2x3"), trials=1, params={"set_kind": "gamma1"})
    assert record.status == SKIP


def test_russo_dye_records_one_line_per_node_count():
    records = _run("russo-dye", EXPERIMENTS["russo-dye"].run_trial, "russo_dye", parse_factor("matrix:2x2"),
                   trials=1, params={"N": [256, 16]})
    assert [r.detail for r in records] == ["N=16", "N=256"]
    assert records[0].metrics["error"] >= records[1].metrics["error"]
    assert "certificate" in records[1].metrics


def test_experiment_tasks_carry_the_trial_index():
    cfg = ExperimentConfig("boundary", (parse_factor("commutative:2"),), seeds=(5,), trials=3)
    tasks = build_experiment_tasks(cfg, KIT)
    assert [t.params["trial"] for t in tasks] == [0, 1, 2]
    assert all(t.tolerance_key == "boundary_agreement" for t in tasks)


@pytest.mark.parametrize("spec", ["commutative:2", "matrix:2x2", "matrix:2x3"])
def test_orbit_closure_walks_from_the_boundary(spec):
    records = _run("orbit-closure", EXPERIMENTS["orbit-closure"].run_trial, "orbit_closure", parse_factor(spec),
                   trials=3, params={"t_grid": [0.9, 0.99, 0.999, 0.9999]})
    assert len(records) == 12
    for record in records:
        assert record.status != FAIL, (record.detail, record.metrics)
        assert record.metrics["norm_v"] == pytest.approx(1.0, abs=1e-12)
        assert record.metrics["margin"] >= GENERIC_MARGIN
        assert record.residual <= record.metrics["distance"] * (1 + 1e-9)


def test_orbit_closure_interior_radius():
    records = _run("orbit-closure", EXPERIMENTS["orbit-closure"].run_trial, "orbit_closure",
                   parse_factor("commutative:2"), trials=2, params={"t_grid": [0.9, 0.9999], "v_radius": 0.5})
    assert all(r.metrics["norm_v"] <= 0.5 for r in records)
    assert all(r.status != FAIL for r in records)


def test_stall_margin_flags_antipodal_points():
    f = parse_factor("commutative:1")
    e = element(f, [1.0])
    assert stall_margin(f, element(f, [-1.0]), e) == pytest.approx(0.0, abs=1e-15)
    assert stall_margin(f, element(f, [1j]), e) == pytest.approx(2.0)


def test_jordan_identity_draws_from_the_polydisc():
    f = parse_factor("matrix:3x3")
    (record,) = _run("jordan-identity", SUITES["jordan-identity"].run_trial, "jordan", f, trials=1)
    rng = trial_rng(0, 0)
    points = [random_polydisc(f, rng) for _ in range(5)]
    assert all(np.abs(p.coords).max() <= 1.0 for p in points)
    expected = 1.0 + np.prod([ball_norm(f, p) for p in points])
    assert record.metrics["scale"] == pytest.approx(expected, rel=1e-12)
    assert record.residual == pytest.approx(record.metrics["absolute"] / expected, rel=1e-12)
    assert record.status != FAIL
