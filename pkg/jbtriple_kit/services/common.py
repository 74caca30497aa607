"""
Shared pieces of the trial machinery.

    TrialRecord    one line of a report: suite, factor, trial index, status,
                   residual against tolerance, plus free-form metrics.
    trial_rng      the per-trial generator, a pure function of (seed, trial).
    OrderedBuffer  thread-safe buffer that releases records strictly in
                   trial order whatever order the workers finish in.
    Outcome        what a trial function hands back to the runner.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from jbtriple_kit.algebra.factors import FactorDescriptor

PASS = "pass"
FAIL = "fail"
SKIP = "skip"


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, complex as [re, im], non-finite floats as None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_clean(float(value.real)), _clean(float(value.imag))]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


@dataclass
class TrialRecord:
    suite: str
    factor: str
    seed: int
    trial: int
    status: str
    residual: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""
    metrics: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> Dict[str, Any]:
        return _clean({
            "suite": self.suite,
            "factor": self.factor,
            "seed": self.seed,
            "trial": self.trial,
            "status": self.status,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "detail": self.detail,
            "metrics": self.metrics,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, row: Dict[str, Any]) -> "TrialRecord":
        return cls(
            suite=row["suite"],
            factor=row["factor"],
            seed=int(row["seed"]),
            trial=int(row["trial"]),
            status=row["status"],
            residual=row.get("residual"),
            tolerance=row.get("tolerance"),
            detail=row.get("detail", ""),
            metrics=dict(row.get("metrics") or {}),
        )


class OrderedBuffer:
    """Collects results keyed by sequence number and hands them out in order."""

    def __init__(self):
        self._cond = threading.Condition(threading.RLock())
        self._pending: Dict[int, List[TrialRecord]] = {}
        self._next = 0

    def put(self, seq: int, records: List[TrialRecord]) -> None:
        with self._cond:
            self._pending[seq] = records
            self._cond.notify_all()

    def drain(self, timeout: Optional[float] = None) -> List[TrialRecord]:
        """Everything contiguous from the next expected sequence number; waits up to `timeout` for it."""
        out: List[TrialRecord] = []
        with self._cond:
            if self._next not in self._pending and timeout:
                self._cond.wait(timeout)
            while self._next in self._pending:
                out.extend(self._pending.pop(self._next))
                self._next += 1
        return out

    @property
    def released(self) -> int:
        with self._cond:
            return self._next


@dataclass
class Outcome:
    """What a trial function returns; `passed=None` means residual ≤ tolerance decides."""
    residual: Optional[float]
    metrics: Dict[str, Any] = field(default_factory=dict)
    passed: Optional[bool] = None
    detail: str = ""


@dataclass
class TrialContext:
    factor: FactorDescriptor
    rng: np.random.Generator
    tolerance: float
    tolerances: Dict[str, float]
    params: Dict[str, Any] = field(default_factory=dict)

    def tol(self, name: str) -> float:
        return self.tolerances[name]
