"""
Kit settings: the tolerance table, default trial counts, factors and store
location, read from config/kit_config.json and overridable from the
environment.
"""
from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

logger = logging.getLogger(__name__)

CONFIG_ENV = "JBTRIPLE_CONFIG"
OUTPUT_DIR_ENV = "JBTRIPLE_OUTPUT_DIR"
STORE_URI_ENV = "JBTRIPLE_STORE_URI"

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "kit_config.json"

DEFAULT_TOLERANCES: Dict[str, float] = {
    "jordan": 1e-10,
    "identity": 1e-9,
    "bergmann_sqrt": 1e-10,
    "bergmann_identity": 1e-9,
    "gamma_invariance": 1e-8,
    "gamma1_invariance": 1e-8,
    "composition": 1e-9,
    "isometry": 1e-10,
    "derivative": 1e-5,
    "spectral": 1e-10,
    "peirce": 1e-10,
    "boundary_agreement": 1e-8,
    "russo_dye": 1e-8,
    "mean_value": 1e-8,
    "algebraic": 1e-12,
    "unitary": 1e-8,
    "determining_gap": 5e-2,
    "orbit_closure": 1e-3,
}

DEFAULT_TRIALS: Dict[str, int] = {
    "jordan-identity": 1000,
    "triple-axioms": 200,
    "jp-catalogue": 200,
    "bergmann-sqrt": 100,
    "bergmann-identity": 100,
    "gamma-invariance": 100,
    "gamma1-invariance": 100,
    "composition": 100,
    "derivative": 100,
    "spectral": 100,
    "peirce": 100,
    "boundary": 100,
    "mean-value": 20,
    "algebraic": 1000,
    "maximal-unitary": 100,
    "russo-dye": 20,
    "experiment.russo-dye": 5,
    "experiment.determining": 3,
    "experiment.boundary": 100,
    "experiment.orbit-closure": 50,
    "experiment.shilov": 1,
    "experiment.minimality": 3,
    "experiment.mean-value": 10,
}

DEFAULT_FACTORS: List[str] = [
    "matrix:2x2",
    "matrix:2x3",
    "matrix:3x3",
    "commutative:2",
    "commutative:4",
    "sum:[matrix:2x2,commutative:1]",
]

DEFAULT_SAMPLES: Dict[str, int] = {"n_set": 2000, "n_ball": 2000, "shilov": 10000}


@dataclass
class KitConfig:
    """Settings shared by every command."""
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    trials: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_TRIALS))
    default_factors: List[str] = field(default_factory=lambda: list(DEFAULT_FACTORS))
    output_dir: str = "reports_out"
    store_uri: str = ""
    store_enabled: bool = True
    workers: int = 4
    quadrature_nodes: int = 512
    samples: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SAMPLES))
    source: Optional[str] = None

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], source: Optional[str] = None) -> "KitConfig":
        """Build from the JSON layout; missing keys keep the in-code defaults."""
        tolerances = dict(DEFAULT_TOLERANCES)
        tolerances.update({k: float(v) for k, v in (data.get("TOLERANCES") or {}).items()})
        trials = dict(DEFAULT_TRIALS)
        trials.update({k: int(v) for k, v in (data.get("TRIALS") or {}).items()})
        samples = dict(DEFAULT_SAMPLES)
        samples.update({k: int(v) for k, v in (data.get("SAMPLES") or {}).items()})
        return cls(
            tolerances=tolerances,
            trials=trials,
            default_factors=list(data.get("DEFAULT_FACTORS") or DEFAULT_FACTORS),
            output_dir=str(data.get("OUTPUT_DIR", "reports_out")),
            store_uri=str(data.get("STORE_URI", "") or ""),
            store_enabled=bool(data.get("STORE_ENABLED", True)),
            workers=max(1, int(data.get("WORKERS", 4))),
            quadrature_nodes=int(data.get("QUADRATURE_NODES", 512)),
            samples=samples,
            source=source,
        )

    def tolerance(self, name: str) -> float:
        try:
            return self.tolerances[name]
        except KeyError:
            raise KeyError(f"no tolerance named {name!r}; known: {', '.join(sorted(self.tolerances))}") from None

    def trial_count(self, name: str, fallback: int = 100) -> int:
        return int(self.trials.get(name, fallback))

    def resolved_store_uri(self) -> str:
        if self.store_uri:
            return self.store_uri
        return f"sqlite:///{Path(self.output_dir).resolve() / 'jbtriple_runs.db'}"

    def with_overrides(self, **changes) -> "KitConfig":
        return replace(self, **changes)


def load_kit_config(path: Optional[str] = None) -> KitConfig:
    """Read the settings file (explicit path, $JBTRIPLE_CONFIG, or the shipped file) and apply env overrides."""
    chosen = path or os.environ.get(CONFIG_ENV) or str(DEFAULT_CONFIG_PATH)
    if os.path.exists(chosen):
        with open(chosen, encoding="utf-8") as config_file:
            config = KitConfig.from_mapping(json.load(config_file), source=chosen)
    else:
        if path or os.environ.get(CONFIG_ENV):
            raise FileNotFoundError(f"settings file {chosen} does not exist")
        logger.debug("no settings file at %s, using defaults", chosen)
        config = KitConfig()

    if os.environ.get(OUTPUT_DIR_ENV):
        config.output_dir = os.environ[OUTPUT_DIR_ENV]
    if os.environ.get(STORE_URI_ENV):
        config.store_uri = os.environ[STORE_URI_ENV]
    return config


_kit_config: Optional[KitConfig] = None
_config_lock = threading.Lock()


def get_kit_config() -> KitConfig:
    """Process-wide settings (singleton)."""
    global _kit_config
    if _kit_config is None:
        with _config_lock:
            if _kit_config is None:
                _kit_config = load_kit_config()
    return _kit_config


def reload_kit_config() -> KitConfig:
    global _kit_config
    with _config_lock:
        _kit_config = load_kit_config()
    return _kit_config
