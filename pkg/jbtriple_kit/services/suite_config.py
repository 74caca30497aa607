"""
Validated run settings for `verify` and `experiment`.

Precedence, lowest first: kit config, the per-run JSON file (--config),
explicit command-line flags, then --tol.<name>=<value> overrides.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from jbtriple_kit.algebra.boundary import GAMMA, SET_KINDS
from jbtriple_kit.algebra.errors import FactorSpecError
from jbtriple_kit.algebra.factors import FactorDescriptor, make_factor
from jbtriple_kit.algebra.testfunctions import registered_names
from jbtriple_kit.config import KitConfig

FORMATS = ("jsonl", "csv", "text")


class ConfigError(ValueError):
    """Usage or settings problem; the CLI maps it to exit code 2."""


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    factors: Tuple[FactorDescriptor, ...]
    seeds: Tuple[int, ...]
    trials: Optional[int] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    out: Optional[str] = None
    fmt: str = "jsonl"
    store: bool = True
    workers: int = 1
    nodes: int = 512

    def trial_count(self, kit: KitConfig, name: str) -> int:
        return self.trials if self.trials is not None else kit.trial_count(name)

    def echo(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "factors": [str(f) for f in self.factors],
            "seeds": list(self.seeds),
            "trials": self.trials,
            "tolerances": dict(sorted(self.tolerances.items())),
            "nodes": self.nodes,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    factors: Tuple[FactorDescriptor, ...]
    seeds: Tuple[int, ...]
    trials: Optional[int] = None
    N: Tuple[int, ...] = (16, 64, 256, 512)
    epsilon: float = 0.1
    t_grid: Tuple[float, ...] = (0.9, 0.99, 0.999, 0.9999)
    v_radius: Optional[float] = None
    test_functions: Tuple[str, ...] = ()
    set_kind: str = "gamma"
    n_set: int = 2000
    n_ball: int = 2000
    samples: int = 10000
    tolerances: Dict[str, float] = field(default_factory=dict)
    out: Optional[str] = None
    fmt: str = "jsonl"
    store: bool = True
    workers: int = 1

    def trial_count(self, kit: KitConfig) -> int:
        return self.trials if self.trials is not None else kit.trial_count(f"experiment.{self.experiment}")

    def echo(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "factors": [str(f) for f in self.factors],
            "seeds": list(self.seeds),
            "trials": self.trials,
            "N": list(self.N),
            "epsilon": self.epsilon,
            "t_grid": list(self.t_grid),
            "v_radius": self.v_radius,
            "test_functions": list(self.test_functions),
            "set_kind": self.set_kind,
            "n_set": self.n_set,
            "n_ball": self.n_ball,
            "samples": self.samples,
            "tolerances": dict(sorted(self.tolerances.items())),
        }


# ---------- Parsing helpers ----------
def load_run_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} does not exist")
    try:
        with open(path, encoding="utf-8") as config_file:
            data = json.load(config_file)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def parse_tolerance_overrides(args: Iterable[str], known: Iterable[str]) -> Dict[str, float]:
    """`--tol.<name>=<value>` (or `--tol.<name> <value>`) pairs from click's leftover args."""
    known = set(known)
    out: Dict[str, float] = {}
    items = list(args)
    i = 0
    while i < len(items):
        arg = items[i]
        if not arg.startswith("--tol."):
            raise ConfigError(f"unexpected argument {arg!r}")
        body = arg[len("--tol."):]
        if "=" in body:
            name, raw = body.split("=", 1)
        else:
            if i + 1 >= len(items):
                raise ConfigError(f"{arg} needs a value")
            name, raw = body, items[i + 1]
            i += 1
        if name not in known:
            raise ConfigError(f"unknown tolerance {name!r}; known: {', '.join(sorted(known))}")
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"tolerance {name} needs a number, got {raw!r}") from None
        if not value > 0:
            raise ConfigError(f"tolerance {name} must be positive, got {value}")
        out[name] = value
        i += 1
    return out


def parse_factors(specs: Sequence[Any]) -> Tuple[FactorDescriptor, ...]:
    try:
        return tuple(make_factor(s) for s in specs)
    except FactorSpecError as e:
        raise ConfigError(f"malformed factor spec: {e}") from e


def _int_list(value: Any, name: str) -> Tuple[int, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        out = tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of integers, got {value!r}") from None
    if not out:
        raise ConfigError(f"{name} must not be empty")
    return out


def _float_list(value: Any, name: str) -> Tuple[float, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of numbers, got {value!r}") from None


def parse_seeds(values: Mapping[str, Any]) -> Tuple[int, ...]:
    """`seed` (flag or file) wins over a file `seeds` list; one of them is required."""
    raw = values.get("seed")
    if raw is None:
        raw = values.get("seeds")
    if raw is None or raw == "" or raw == []:
        raise ConfigError("no seed given; pass --seed (one value or a comma list) or set 'seed'/'seeds'")
    if isinstance(raw, bool):
        raise ConfigError(f"seed must be an integer, got {raw!r}")
    if isinstance(raw, int):
        raw = [raw]
    seeds = _int_list(raw, "seed")
    if any(s < 0 for s in seeds):
        raise ConfigError(f"seeds must be non-negative, got {list(seeds)}")
    if len(set(seeds)) != len(seeds):
        raise ConfigError(f"duplicate seeds in {list(seeds)}")
    return seeds


def merge(file_values: Mapping[str, Any], flag_values: Mapping[str, Any]) -> Dict[str, Any]:
    """Flags given on the command line win over the file."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return merged


def _common(kit: KitConfig, values: Mapping[str, Any], tol_overrides: Mapping[str, float]) -> Dict[str, Any]:
    factor_specs = values.get("factor") or values.get("factors") or kit.default_factors
    if isinstance(factor_specs, (str, dict)):
        factor_specs = [factor_specs]
    fmt = str(values.get("format", "jsonl"))
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}; use one of {', '.join(FORMATS)}")
    trials = values.get("trials")
    if trials is not None and int(trials) < 1:
        raise ConfigError(f"trials must be positive, got {trials}")
    tolerances = dict(kit.tolerances)
    for name, value in (values.get("tolerances") or {}).items():
        if name not in tolerances:
            raise ConfigError(f"unknown tolerance {name!r} in config file")
        tolerances[name] = float(value)
    tolerances.update(tol_overrides)
    return {
        "factors": parse_factors(factor_specs),
        "seeds": parse_seeds(values),
        "trials": int(trials) if trials is not None else None,
        "tolerances": tolerances,
        "out": values.get("out"),
        "fmt": fmt,
        "store": bool(values.get("store", kit.store_enabled)),
        "workers": max(1, int(values.get("workers", kit.workers))),
    }


def build_suite_config(kit: KitConfig, values: Mapping[str, Any], known_suites: Sequence[str],
                       tol_overrides: Optional[Mapping[str, float]] = None) -> SuiteConfig:
    suite = values.get("suite")
    if not suite:
        raise ConfigError("no suite given; pass --suite or set 'suite' in the config file")
    if suite not in known_suites:
        raise ConfigError(f"unknown suite {suite!r}; known: {', '.join(known_suites)}")
    common = _common(kit, values, tol_overrides or {})
    nodes = _int_list(values["N"], "N")[-1] if values.get("N") else kit.quadrature_nodes
    return SuiteConfig(suite=suite, nodes=nodes, **common)


def build_experiment_config(kit: KitConfig, experiment: str, values: Mapping[str, Any],
                            known_experiments: Sequence[str],
                            tol_overrides: Optional[Mapping[str, float]] = None) -> ExperimentConfig:
    if experiment not in known_experiments:
        raise ConfigError(f"unknown experiment {experiment!r}; known: {', '.join(known_experiments)}")
    common = _common(kit, values, tol_overrides or {})
    N = _int_list(values.get("N") or (16, 64, 256, kit.quadrature_nodes), "N")
    if min(N) < 4:
        raise ConfigError(f"quadrature needs at least 4 nodes, got {min(N)}")
    epsilon = float(values.get("epsilon", 0.1))
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    t_grid = _float_list(values.get("t_grid") or (0.9, 0.99, 0.999, 0.9999), "t_grid")
    if any(not 0 < t < 1 for t in t_grid):
        raise ConfigError(f"t_grid values must lie in (0, 1), got {t_grid}")
    v_radius = values.get("v_radius")
    if v_radius is not None:
        v_radius = float(v_radius)
        if not 0 < v_radius <= 1:
            raise ConfigError(f"v_radius must lie in (0, 1], got {v_radius}")
    test_functions = values.get("test_functions") or ()
    if isinstance(test_functions, str):
        test_functions = [v for v in test_functions.split(",") if v.strip()]
    unknown = [name for name in test_functions if name not in registered_names()]
    if unknown:
        raise ConfigError(f"unknown test function(s) {', '.join(unknown)}; known: {', '.join(registered_names())}")
    set_kind = str(values.get("set_kind", GAMMA))
    if set_kind not in SET_KINDS:
        raise ConfigError(f"unknown set kind {set_kind!r}; known: {', '.join(SET_KINDS)}")
    return ExperimentConfig(
        experiment=experiment,
        N=N,
        epsilon=epsilon,
        t_grid=t_grid,
        v_radius=v_radius,
        test_functions=tuple(test_functions),
        set_kind=set_kind,
        n_set=int(values.get("n_set", kit.samples.get("n_set", 2000))),
        n_ball=int(values.get("n_ball", kit.samples.get("n_ball", 2000))),
        samples=int(values.get("samples", kit.samples.get("shilov", 10000))),
        **common,
    )


def known_tolerances(kit: KitConfig) -> List[str]:
    return sorted(kit.tolerances)
