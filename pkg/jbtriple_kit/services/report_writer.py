"""
Report output: JSON-lines / CSV / text record writers, the summary table, and
the StoreWriter thread that copies records into the run store.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import sys
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from queue import Empty, Queue
from typing import Any, Dict, IO, Iterable, List, Optional, Sequence, Tuple

from sqlalchemy.exc import SQLAlchemyError

from jbtriple_kit.config import KitConfig
from jbtriple_kit.database import db as dbsync
from jbtriple_kit.services.common import FAIL, PASS, SKIP, TrialRecord
from jbtriple_kit.services.runner import TrialTask, run_tasks

logger = logging.getLogger(__name__)

STDOUT = "-"
EXTENSIONS = {"jsonl": "jsonl", "csv": "csv", "text": "txt"}
CSV_COLUMNS = ("suite", "factor", "seed", "trial", "status", "residual", "tolerance", "detail", "metrics")


def _fmt_float(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6e}"


# ---------- Record writers ----------
class RecordWriter:
    def __init__(self, stream: IO[str]):
        self.stream = stream

    def write(self, record: TrialRecord) -> None:
        raise NotImplementedError

    def close(self) -> None:
        self.stream.flush()


class JsonlWriter(RecordWriter):
    def write(self, record: TrialRecord) -> None:
        self.stream.write(record.to_json() + "\n")


class CsvWriter(RecordWriter):
    def __init__(self, stream: IO[str]):
        super().__init__(stream)
        self._csv = csv.writer(stream, lineterminator="\n")
        self._csv.writerow(CSV_COLUMNS)

    def write(self, record: TrialRecord) -> None:
        row = record.to_dict()
        self._csv.writerow([
            row["suite"], row["factor"], row["seed"], row["trial"], row["status"],
            _fmt_float(row["residual"]), _fmt_float(row["tolerance"]), row["detail"],
            json.dumps(row["metrics"], sort_keys=True, separators=(",", ":")),
        ])


class TextWriter(RecordWriter):
    """One aligned line per record."""

    def write(self, record: TrialRecord) -> None:
        self.stream.write(
            f"{record.suite:<18} {record.factor:<32} {record.trial:>6} {record.status:<4} "
            f"{_fmt_float(record.residual):>13} {_fmt_float(record.tolerance):>13} {record.detail}".rstrip()
            + "\n"
        )


WRITERS = {"jsonl": JsonlWriter, "csv": CsvWriter, "text": TextWriter}


def make_writer(fmt: str, stream: IO[str]) -> RecordWriter:
    try:
        return WRITERS[fmt](stream)
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}; use one of {', '.join(WRITERS)}") from None


def render_records(records: Iterable[TrialRecord], fmt: str) -> str:
    buf = io.StringIO()
    writer = make_writer(fmt, buf)
    for r in records:
        writer.write(r)
    return buf.getvalue()


def seed_label(seeds: Sequence[int]) -> str:
    return "-".join(str(s) for s in seeds)


def default_output_path(kit: KitConfig, command: str, name: str, seeds: Sequence[int], fmt: str) -> str:
    return os.path.join(kit.output_dir, f"{command}-{name}-seed{seed_label(seeds)}.{EXTENSIONS[fmt]}")


# ---------- Summary ----------
@dataclass
class SummaryRow:
    suite: str
    factor: str
    label: str = ""
    trials: int = 0
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    max_residual: Optional[float] = None
    tolerance: Optional[float] = None


def summarize(records: Iterable[TrialRecord], by_detail: bool = False) -> List[SummaryRow]:
    """Tallies per (suite, factor), or per (suite, factor, detail) for experiments."""
    rows: "OrderedDict[Tuple[str, str, str], SummaryRow]" = OrderedDict()
    for r in records:
        label = ""
        if by_detail:
            label = r.detail if r.residual is not None else "error"
        key = (r.suite, r.factor, label)
        row = rows.get(key)
        if row is None:
            row = rows[key] = SummaryRow(r.suite, r.factor, label, tolerance=r.tolerance)
        row.trials += 1
        if r.status == PASS:
            row.passed += 1
        elif r.status == SKIP:
            row.skipped += 1
        else:
            row.failed += 1
        if r.residual is not None:
            row.max_residual = r.residual if row.max_residual is None else max(row.max_residual, r.residual)
    return list(rows.values())


def format_summary(rows: Sequence[SummaryRow]) -> str:
    headers = ["suite", "factor", "label", "trials", "pass", "fail", "skip", "max residual", "tolerance"]
    table = [[row.suite, row.factor, row.label, str(row.trials), str(row.passed), str(row.failed),
              str(row.skipped), _fmt_float(row.max_residual), _fmt_float(row.tolerance)] for row in rows]
    if not any(row.label for row in rows):
        headers.pop(2)
        for line in table:
            line.pop(2)
    widths = [max(len(h), *(len(line[i]) for line in table)) if table else len(h)
              for i, h in enumerate(headers)]
    out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
           "  ".join("-" * w for w in widths)]
    for line in table:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())
    return "\n".join(out)


def failure_lines(records: Iterable[TrialRecord]) -> List[str]:
    """(suite, seed, residual) of every failed record, with factor and trial to find it again."""
    out = []
    for r in records:
        if r.status == FAIL:
            residual = "n/a" if r.residual is None else f"{r.residual:.6e}"
            line = f"FAIL suite={r.suite} seed={r.seed} residual={residual} factor={r.factor} trial={r.trial}"
            if r.detail:
                line += f" detail={r.detail}"
            out.append(line)
    return out


# ---------- Store writer ----------
class StoreWriter(threading.Thread):
    """Batches records into trial_records; stop() drains what is left."""

    def __init__(self, run_id: int, q: "Optional[Queue[Tuple[int, TrialRecord]]]" = None,
                 flush_every: float = 0.5, batch_size: int = 200, name: str = "store-writer"):
        super().__init__(name=name, daemon=True)
        self.run_id = run_id
        self.q = q if q is not None else Queue(maxsize=50000)
        self.buf: List[Tuple[int, TrialRecord]] = []
        self.flush_every = flush_every
        self.batch_size = batch_size
        self.written = 0
        self.errors = 0
        self._stop_event = threading.Event()

    def submit(self, seq: int, record: TrialRecord) -> None:
        self.q.put((seq, record))

    def _flush(self) -> None:
        if not self.buf:
            return
        rows = [
            {"run_id": self.run_id, "seq": seq, "suite": r.suite, "factor": r.factor, "trial": r.trial,
             "status": r.status, "residual": r.residual, "tolerance": r.tolerance, "payload": r.to_json()}
            for seq, r in self.buf
        ]
        try:
            self.written += dbsync.insert_records_bulk(rows)
        except SQLAlchemyError as e:
            self.errors += 1
            logger.error("store write of %d records failed: %s", len(rows), e)
        finally:
            self.buf.clear()

    def run(self):
        last = time.time()
        while not self._stop_event.is_set():
            try:
                self.buf.append(self.q.get(timeout=0.1))
            except Empty:
                pass
            now = time.time()
            if self.buf and (len(self.buf) >= self.batch_size or (now - last) >= self.flush_every):
                self._flush()
                last = now
        # final drain
        while True:
            try:
                self.buf.append(self.q.get_nowait())
            except Empty:
                break
        self._flush()

    def stop(self):
        self._stop_event.set()
        self.join(timeout=10.0)


# ---------- One full run ----------
@dataclass
class RunReport:
    records: List[TrialRecord] = field(default_factory=list)
    output_path: Optional[str] = None
    run_id: Optional[int] = None

    def count(self, status: str) -> int:
        return sum(1 for r in self.records if r.status == status)

    @property
    def exit_code(self) -> int:
        return 1 if self.count(FAIL) else 0


def _open_store(kit: KitConfig, command: str, name: str, factors: Sequence[Any], seeds: Sequence[int],
                trials: Optional[int], echo: Dict[str, Any]) -> Optional[int]:
    try:
        dbsync.init_engine(kit.resolved_store_uri())
        dbsync.create_schema()
        return dbsync.insert_run({
            "command": command, "name": name, "factors": ",".join(str(f) for f in factors),
            "seeds": ",".join(str(s) for s in seeds), "trials": trials, "status": "running",
            "config_json": json.dumps(echo, sort_keys=True),
        })
    except SQLAlchemyError as e:
        logger.warning("run store unavailable, continuing without it: %s", e)
        return None


def execute_run(kit: KitConfig, command: str, name: str, tasks: Sequence[TrialTask],
                tolerances: Dict[str, float], *, factors: Sequence[Any], seeds: Sequence[int],
                trials: Optional[int], echo: Dict[str, Any], out: Optional[str], fmt: str,
                store: bool, workers: int) -> RunReport:
    """Run tasks, stream records to the output and the store, close the run row."""
    path = out or default_output_path(kit, command, name, seeds, fmt)
    report = RunReport(output_path=None if path == STDOUT else path)

    run_id = _open_store(kit, command, name, factors, seeds, trials, echo) if store else None
    report.run_id = run_id
    store_writer: Optional[StoreWriter] = None
    if run_id is not None:
        store_writer = StoreWriter(run_id)
        store_writer.start()

    if path == STDOUT:
        stream, owned = sys.stdout, False
    else:
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        stream, owned = open(path, "w", encoding="utf-8", newline=""), True
    writer = make_writer(fmt, stream)
    seq = 0

    def on_record(record: TrialRecord) -> None:
        nonlocal seq
        writer.write(record)
        if store_writer is not None:
            store_writer.submit(seq, record)
        seq += 1

    status = "failed"
    try:
        report.records = run_tasks(tasks, tolerances, workers, on_record)
        status = "finished"
    finally:
        writer.close()
        if owned:
            stream.close()
        if store_writer is not None:
            store_writer.stop()
        if run_id is not None:
            try:
                dbsync.finish_run(run_id, status, report.count(PASS), report.count(FAIL),
                                  report.count(SKIP), report.output_path)
            except SQLAlchemyError as e:
                logger.warning("could not close run %s: %s", run_id, e)
    logger.info("%s %s: %d records, %d failed", command, name, len(report.records), report.count(FAIL))
    return report


def records_from_store(run_id: int) -> List[TrialRecord]:
    return [TrialRecord.from_dict(json.loads(row["payload"])) for row in dbsync.get_run_records(run_id)]
