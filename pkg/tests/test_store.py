import json
import signal
import subprocess
import sys
import threading
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import make_events, random_valid_performance
from tinyjam.model import ChainError, InvalidPerformanceError, performance_from_events
from tinyjam.store import (
    DuplicateIdError,
    JamStore,
    NotFoundError,
    ParentNotFoundError,
)

HELPER = Path(__file__).parent / "helpers" / "store_writer.py"


@pytest.fixture()
def store(tmp_path):
    return JamStore(tmp_path / "store")


def simple_perf(**kwargs):
    return performance_from_events(
        make_events([(0.0, 0.5, 0.5, 1.0, 0), (0.1, 0.6, 0.6, 1.0, 1)]), **kwargs
    )


class TestPutGet:
    def test_round_trip(self, store):
        rng = np.random.default_rng(1)
        perf = random_valid_performance(rng, instrument="keys")
        perf_id = store.put(perf)
        assert len(perf_id) == 32
        back = store.get(perf_id)
        assert back.events == perf.events
        assert back.instrument == "keys"
        assert back.id == perf_id

    def test_invalid_rejected(self, store):
        bad = performance_from_events(make_events([(0.0, 2.0, 0.5, 1.0, 0)]))
        with pytest.raises(InvalidPerformanceError):
            store.put(bad)
        assert len(store) == 0

    def test_unknown_parent_rejected(self, store):
        with pytest.raises(ParentNotFoundError):
            store.put(simple_perf(parent_id="nope"))

    def test_duplicate_id_rejected(self, store):
        store.put(simple_perf(), perf_id="fixed")
        with pytest.raises(DuplicateIdError):
            store.put(simple_perf(), perf_id="fixed")

    def test_get_unknown(self, store):
        with pytest.raises(NotFoundError):
            store.get("missing")

    def test_store_dir_is_corpus_shaped(self, store, tmp_path):
        perf_id = store.put(simple_perf(performer="ada"))
        perf_dir = tmp_path / "store" / "perfs" / perf_id
        meta = json.loads((perf_dir / "meta.json").read_text())
        assert meta["performer"] == "ada"
        assert (perf_dir / "events.csv").read_text().startswith("time,x,y,z,moving\n")


class TestListAndChains:
    def test_empty_list(self, store):
        records, total = store.list_page()
        assert records == [] and total == 0

    def test_newest_first_and_pagination(self, store):
        ids = [
            store.put(simple_perf(), created_at=f"2021-01-01T00:00:{i:02d}Z")
            for i in range(25)
        ]
        page1, total = store.list_page(1, 10)
        page2, _ = store.list_page(2, 10)
        page3, _ = store.list_page(3, 10)
        assert total == 25
        got = [r.id for r in page1 + page2 + page3]
        assert got == list(reversed(ids))
        assert len(set(got)) == 25

    def test_tie_broken_by_id(self, store):
        store.put(simple_perf(), perf_id="bbb", created_at="2021-01-01T00:00:00Z")
        store.put(simple_perf(), perf_id="aaa", created_at="2021-01-01T00:00:00Z")
        records, _ = store.list_page()
        assert [r.id for r in records] == ["bbb", "aaa"]

    def test_chain_of_three_replies(self, store):
        root = store.put(simple_perf())
        r1 = store.put(simple_perf(parent_id=root))
        r2 = store.put(simple_perf(parent_id=r1))
        r3 = store.put(simple_perf(parent_id=r2))
        chain = store.chain(r3)
        assert [p.id for p in chain.layers] == [root, r1, r2, r3]
        assert store.chain(root).depth == 1

    def test_children(self, store):
        root = store.put(simple_perf())
        kids = [store.put(simple_perf(parent_id=root)) for _ in range(3)]
        assert store.children(root) == kids
        assert store.children(kids[0]) == []
        with pytest.raises(NotFoundError):
            store.children("missing")


class TestDurability:
    def test_restart_sees_all_records(self, tmp_path):
        store = JamStore(tmp_path / "s")
        ids = [store.put(simple_perf()) for _ in range(10)]
        reopened = JamStore(tmp_path / "s")
        assert len(reopened) == 10
        for perf_id in ids:
            assert reopened.get(perf_id).events

    def test_torn_index_tail_ignored(self, tmp_path):
        store = JamStore(tmp_path / "s")
        good = store.put(simple_perf())
        with open(tmp_path / "s" / "index.log", "a") as fh:
            fh.write('{"id": "torn-entry", "created_')  # crash mid-append
        reopened = JamStore(tmp_path / "s")
        assert len(reopened) == 1
        assert good in reopened

    def test_record_dir_without_index_line_is_invisible(self, tmp_path):
        store = JamStore(tmp_path / "s")
        store.put(simple_perf(), perf_id="seen")
        orphan = tmp_path / "s" / "perfs" / "orphan"
        orphan.mkdir()
        (orphan / "meta.json").write_text("{}")
        reopened = JamStore(tmp_path / "s")
        assert "seen" in reopened
        assert "orphan" not in reopened

    def test_index_line_without_dir_is_skipped(self, tmp_path):
        store = JamStore(tmp_path / "s")
        store.put(simple_perf(), perf_id="real")
        ghost = {
            "id": "ghost",
            "performer": "",
            "instrument": "chirp",
            "date": "2021-01-01T00:00:00Z",
            "parent_id": None,
            "created_at": "2021-01-01T00:00:00Z",
        }
        with open(tmp_path / "s" / "index.log", "a") as fh:
            fh.write(json.dumps(ghost) + "\n")
        reopened = JamStore(tmp_path / "s")
        assert "ghost" not in reopened and "real" in reopened

    def test_kill_and_restart_loses_no_acknowledged_put(self, tmp_path):
        store_dir = tmp_path / "crash-store"
        proc = subprocess.Popen(
            [sys.executable, str(HELPER), str(store_dir), "500"],
            stdout=subprocess.PIPE,
            text=True,
        )
        acknowledged = []
        deadline = time.monotonic() + 20
        while len(acknowledged) < 25 and time.monotonic() < deadline:
            line = proc.stdout.readline().strip()
            if line:
                acknowledged.append(line)
        proc.send_signal(signal.SIGKILL)
        proc.wait()
        # drain anything that was printed before the kill landed
        acknowledged.extend(l.strip() for l in proc.stdout.read().splitlines() if l.strip())
        assert len(acknowledged) >= 25
        reopened = JamStore(store_dir)
        for perf_id in acknowledged:
            assert perf_id in reopened, f"acknowledged {perf_id} lost after crash"
            assert reopened.get(perf_id) is not None


class TestConcurrency:
    def test_parallel_puts_all_visible(self, store):
        errors = []

        def worker(seed):
            rng = np.random.default_rng(seed)
            try:
                for _ in range(5):
                    store.put(random_valid_performance(rng, max_events=20))
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(s,)) for s in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len(store) == 40
        records, total = store.list_page(1, 100)
        assert total == 40 and len({r.id for r in records}) == 40


class TestCache:
    def test_cache_round_trip(self, store):
        perf_id = store.put(simple_perf())
        assert store.read_cache(perf_id, "audio_test.wav") is None
        store.write_cache(perf_id, "audio_test.wav", b"RIFFxxxx")
        assert store.read_cache(perf_id, "audio_test.wav") == b"RIFFxxxx"

    def test_cache_for_unknown_record_rejected(self, store):
        with pytest.raises(NotFoundError):
            store.write_cache("missing", "x", b"")


class TestChainErrors:
    def test_broken_parent_link(self, tmp_path):
        store = JamStore(tmp_path / "s")
        root = store.put(simple_perf())
        child = store.put(simple_perf(parent_id=root))
        # simulate on-disk damage: rewrite index without the root
        record = store.get_record(child)
        (tmp_path / "s" / "index.log").write_text(json.dumps(record.to_dict()) + "\n")
        reopened = JamStore(tmp_path / "s")
        with pytest.raises(ChainError):
            reopened.chain(child)
