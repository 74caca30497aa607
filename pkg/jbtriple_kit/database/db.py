"""
Run store: one row per `verify`/`experiment` invocation and one row per trial
record, so past reports can be listed and re-exported.
"""
from __future__ import annotations

import os
import threading
from datetime import datetime
from typing import Dict, List, Optional

from sqlalchemy import (
    Column, DateTime, Float, ForeignKey, Integer, MetaData, String, Table, Text, create_engine,
    func, insert, select, update,
)
from sqlalchemy.engine import Engine

# ---------- Singleton Engine ----------
_engine: Optional[Engine] = None
_engine_uri: Optional[str] = None
_engine_lock = threading.Lock()
_md = MetaData()


def _ensure_sqlite_dir(uri: str) -> None:
    prefix = "sqlite:///"
    if uri.startswith(prefix) and uri != "sqlite:///:memory:":
        folder = os.path.dirname(uri[len(prefix):])
        if folder:
            os.makedirs(folder, exist_ok=True)


def init_engine(uri: Optional[str] = None) -> Engine:
    """Create the engine once; a different uri replaces it."""
    global _engine, _engine_uri
    with _engine_lock:
        if _engine is not None and (uri is None or uri == _engine_uri):
            return _engine
        if uri is None:
            from jbtriple_kit.config import get_kit_config
            uri = get_kit_config().resolved_store_uri()
        if _engine is not None:
            _engine.dispose()
        kwargs = {"future": True}
        if uri.startswith("sqlite"):
            _ensure_sqlite_dir(uri)
            # the store writer thread shares the engine
            kwargs["connect_args"] = {"check_same_thread": False}
        else:
            kwargs.update(pool_pre_ping=True, pool_size=4, max_overflow=4)
        _engine = create_engine(uri, **kwargs)
        _engine_uri = uri
        return _engine


def dispose_engine() -> None:
    global _engine, _engine_uri
    with _engine_lock:
        if _engine is not None:
            _engine.dispose()
        _engine, _engine_uri = None, None


# ---------- Schema ----------
runs = Table(
    "runs", _md,
    Column("id", Integer, primary_key=True, autoincrement=True),
    Column("command", String(20), nullable=False),      # verify | experiment
    Column("name", String(60), nullable=False),         # suite or experiment name
    Column("factors", Text, nullable=False),
    Column("seeds", String(255)),                       # comma list
    Column("trials", Integer),
    Column("config_json", Text),
    Column("status", String(20), default="running"),
    Column("passed", Integer, default=0),
    Column("failed", Integer, default=0),
    Column("skipped", Integer, default=0),
    Column("output_path", String(255)),
    Column("started_at", DateTime, server_default=func.now()),
    Column("finished_at", DateTime),
)

trial_records = Table(
    "trial_records", _md,
    Column("id", Integer, primary_key=True, autoincrement=True),
    Column("run_id", Integer, ForeignKey("runs.id", ondelete="CASCADE"), nullable=False, index=True),
    Column("seq", Integer, nullable=False),
    Column("suite", String(60), nullable=False),
    Column("factor", String(120), nullable=False),
    Column("trial", Integer, nullable=False),
    Column("status", String(10), nullable=False),
    Column("residual", Float),
    Column("tolerance", Float),
    Column("payload", Text, nullable=False),            # the JSON line as written
)


def create_schema() -> None:
    """Create tables if missing (idempotent)."""
    _md.create_all(init_engine())


# ---------- Helpers ----------
def insert_run(data: dict) -> int:
    with init_engine().begin() as con:
        res = con.execute(insert(runs).values(**data))
        return res.inserted_primary_key[0]


def finish_run(run_id: int, status: str, passed: int, failed: int, skipped: int,
               output_path: Optional[str] = None) -> int:
    with init_engine().begin() as con:
        res = con.execute(
            update(runs).where(runs.c.id == run_id).values(
                status=status, passed=passed, failed=failed, skipped=skipped,
                output_path=output_path, finished_at=datetime.now(),
            )
        )
        return res.rowcount


def insert_records_bulk(rows: List[dict]) -> int:
    """rows = [{run_id, seq, suite, factor, trial, status, residual, tolerance, payload}, ...]"""
    if not rows:
        return 0
    with init_engine().begin() as con:
        con.execute(trial_records.insert(), rows)
    return len(rows)


def list_runs(limit: int = 50) -> List[Dict]:
    with init_engine().connect() as con:
        rows = con.execute(select(runs).order_by(runs.c.id.desc()).limit(limit)).mappings().all()
        return [dict(r) for r in rows]


def get_run(run_id: int) -> Optional[Dict]:
    with init_engine().connect() as con:
        r = con.execute(select(runs).where(runs.c.id == run_id)).mappings().first()
        return dict(r) if r else None


def get_run_records(run_id: int) -> List[Dict]:
    with init_engine().connect() as con:
        rows = con.execute(
            select(trial_records).where(trial_records.c.run_id == run_id).order_by(trial_records.c.seq.asc())
        ).mappings().all()
        return [dict(r) for r in rows]
