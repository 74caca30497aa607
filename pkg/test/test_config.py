import json

import pytest

from jbtriple_kit.config import DEFAULT_TOLERANCES, KitConfig, load_kit_config
from jbtriple_kit.services.suite_config import (
    ConfigError, build_experiment_config, build_suite_config, known_tolerances, load_run_file, merge,
    parse_seeds, parse_tolerance_overrides,
)
from jbtriple_kit.services.suites import SUITE_NAMES

KIT = KitConfig()


def test_shipped_settings_match_the_defaults(monkeypatch):
    monkeypatch.delenv("JBTRIPLE_CONFIG", raising=False)
    kit = load_kit_config()
    assert kit.tolerances == DEFAULT_TOLERANCES
    assert kit.source is not None and kit.source.endswith("kit_config.json")


def test_environment_overrides(tmp_path, monkeypatch):
    settings = tmp_path / "kit.json"
    settings.write_text(json.dumps({"TOLERANCES": {"jordan": 1e-6}, "WORKERS": 0}))
    monkeypatch.setenv("JBTRIPLE_CONFIG", str(settings))
    monkeypatch.setenv("JBTRIPLE_OUTPUT_DIR", str(tmp_path / "reports"))
    monkeypatch.delenv("JBTRIPLE_STORE_URI", raising=False)
    kit = load_kit_config()
    assert kit.tolerance("jordan") == 1e-6
    assert kit.tolerance("identity") == DEFAULT_TOLERANCES["identity"]
    assert kit.workers == 1
    assert kit.output_dir == str(tmp_path / "reports")
    assert kit.resolved_store_uri().endswith("jbtriple_runs.db")
    with pytest.raises(KeyError):
        kit.tolerance("nope")


def test_missing_settings_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_kit_config(str(tmp_path / "absent.json"))


def test_tolerance_overrides():
    known = known_tolerances(KIT)
    assert parse_tolerance_overrides(["--tol.jordan=1e-3", "--tol.russo_dye", "2e-4"], known) == {
        "jordan": 1e-3, "russo_dye": 2e-4}
    for bad in (["--tol.nope=1"], ["--tol.jordan=abc"], ["--tol.jordan=-1"], ["--tol.jordan"], ["--frobnicate"]):
        with pytest.raises(ConfigError):
            parse_tolerance_overrides(bad, known)


def test_suite_config_precedence():
    values = merge({"suite": "spectral", "seed": 4, "trials": 9, "tolerances": {"spectral": 1e-3}},
                   {"trials": 2, "seed": None})
    cfg = build_suite_config(KIT, values, SUITE_NAMES, {"spectral": 1e-5})
    assert (cfg.seeds, cfg.trials) == ((4,), 2)
    assert cfg.tolerances["spectral"] == 1e-5
    assert [str(f) for f in cfg.factors] == KIT.default_factors
    assert cfg.nodes == KIT.quadrature_nodes


@pytest.mark.parametrize("values", [
    {},
    {"suite": "nope", "seed": 0},
    {"suite": "spectral"},
    {"suite": "spectral", "seed": -1},
    {"suite": "spectral", "seed": "1,1"},
    {"suite": "spectral", "seed": "a"},
    {"suite": "spectral", "seed": 0, "format": "xml"},
    {"suite": "spectral", "seed": 0, "trials": 0},
    {"suite": "spectral", "seed": 0, "factor": ["matrix:0x2"]},
    {"suite": "spectral", "seed": 0, "tolerances": {"nope": 1}},
])
def test_suite_config_rejects(values):
    with pytest.raises(ConfigError):
        build_suite_config(KIT, values, SUITE_NAMES)


def test_experiment_config():
    cfg = build_experiment_config(KIT, "orbit-closure", {"t_grid": "0.9,0.99", "factor": ["commutative:1"], "seed": 2},
                                  ["orbit-closure"])
    assert cfg.t_grid == (0.9, 0.99)
    assert cfg.N[-1] == KIT.quadrature_nodes
    for values in ({"t_grid": "0.5,1.0"}, {"N": "2,16"}, {"epsilon": 0}, {"test_functions": ["sine"]},
                   {"set_kind": "sphere"}, {"v_radius": 0}, {"v_radius": 1.5}):
        with pytest.raises(ConfigError):
            build_experiment_config(KIT, "orbit-closure", dict(values, seed=0), ["orbit-closure"])
    with pytest.raises(ConfigError):
        build_experiment_config(KIT, "orbit-closure", {}, ["orbit-closure"])


def test_run_file(tmp_path):
    assert load_run_file(None) == {}
    path = tmp_path / "run.json"
    path.write_text('{"suite": "spectral"}')
    assert load_run_file(str(path)) == {"suite": "spectral"}
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_run_file(str(path))
    path.write_text("{")
    with pytest.raises(ConfigError):
        load_run_file(str(path))
    with pytest.raises(ConfigError):
        load_run_file(str(tmp_path / "absent.json"))


def test_seed_forms():
    assert parse_seeds({"seed": 7}) == (7,)
    assert parse_seeds({"seed": "3, 1,4"}) == (3, 1, 4)
    assert parse_seeds({"seeds": [2, 5]}) == (2, 5)
    # a flag seed replaces the run file's list
    assert parse_seeds(merge({"seeds": [2, 5]}, {"seed": "9"})) == (9,)
    cfg = build_experiment_config(KIT, "russo-dye", {"seeds": [1, 2], "factor": ["commutative:1"]}, ["russo-dye"])
    assert cfg.seeds == (1, 2)
    assert cfg.echo()["seeds"] == [1, 2]
