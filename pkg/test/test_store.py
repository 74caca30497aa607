import threading

from jbtriple_kit.database import db
from jbtriple_kit.services.common import PASS, SKIP, TrialRecord
from jbtriple_kit.services.report_writer import StoreWriter, records_from_store, render_records


def _records(n):
    return [TrialRecord("spectral", "matrix:2x2", 0, i, PASS if i % 3 else SKIP, 1e-13 * i, 1e-10,
                        metrics={"frame_length": 2, "order": True}) for i in range(n)]


def test_store_writer_batches_and_drains(tmp_path):
    db.init_engine(f"sqlite:///{tmp_path / 'store.db'}")
    try:
        db.create_schema()
        run_id = db.insert_run({"command": "verify", "name": "spectral", "factors": "matrix:2x2",
                                "seeds": "0", "trials": 7, "status": "running"})
        writer = StoreWriter(run_id, batch_size=3, flush_every=60.0)
        writer.start()
        records = _records(7)
        for seq, r in enumerate(records):
            writer.submit(seq, r)
        writer.stop()
        assert writer.written == 7 and writer.errors == 0
        assert not writer.is_alive()

        stored = records_from_store(run_id)
        assert [r.to_json() for r in stored] == [r.to_json() for r in records]
        assert render_records(stored, "jsonl") == render_records(records, "jsonl")

        db.finish_run(run_id, "finished", 4, 0, 3, "out.jsonl")
        row = db.get_run(run_id)
        assert (row["status"], row["passed"], row["skipped"]) == ("finished", 4, 3)
        assert db.list_runs(5)[0]["id"] == run_id
        assert db.get_run(run_id + 100) is None
    finally:
        db.dispose_engine()


def test_engine_is_a_singleton(tmp_path):
    uri = f"sqlite:///{tmp_path / 'nested' / 'store.db'}"
    try:
        engines = []
        threads = [threading.Thread(target=lambda: engines.append(db.init_engine(uri))) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len({id(e) for e in engines}) == 1
        assert (tmp_path / "nested").is_dir()
    finally:
        db.dispose_engine()
