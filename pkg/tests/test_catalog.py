from __future__ import annotations

import hashlib
import json
import threading

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oranlab.catalog import (
    BadId,
    CatalogError,
    Catalog,
    DigestMismatch,
    NotFound,
    SchemaError,
    WriteConflict,
    sha256_hex,
)
from oranlab.ransim import KPM_CSV_HEADER

ROWS = [
    "250,embb,1200,3.5,28,18,20",
    "250,mmtc,0,0.1,4,15,2",
]


def _csv(tmp_path, rows, header=KPM_CSV_HEADER, name="kpm.csv"):
    p = tmp_path / name
    p.write_text("\n".join([header, *rows]) + "\n")
    return p


class TestPutGet:
    def test_roundtrip(self, tmp_path):
        cat = Catalog(tmp_path)
        e = cat.put("model", "m1", b"\x00\x01abc")
        assert cat.get("model", "m1") == b"\x00\x01abc"
        assert e.digest == hashlib.sha256(b"\x00\x01abc").hexdigest()
        assert (tmp_path / "models" / "m1").exists()

    def test_idempotent(self, tmp_path):
        cat = Catalog(tmp_path)
        a = cat.put("intent", "i", b"x")
        b = cat.put("intent", "i", b"x")
        assert a == b and len(cat.list()) == 1

    def test_write_once(self, tmp_path):
        cat = Catalog(tmp_path)
        cat.put("intent", "i", b"x")
        with pytest.raises(WriteConflict):
            cat.put("intent", "i", b"y")
        assert cat.get("intent", "i") == b"x"

    def test_same_id_different_kind(self, tmp_path):
        cat = Catalog(tmp_path)
        cat.put("intent", "a", b"1")
        cat.put("model", "a", b"2")
        assert cat.get("intent", "a") == b"1" and cat.get("model", "a") == b"2"

    def test_flip_byte(self, tmp_path):
        cat = Catalog(tmp_path)
        cat.put("model", "m", b"hello world")
        path = cat.path("model", "m")
        raw = bytearray(path.read_bytes())
        raw[3] ^= 0x01
        path.write_bytes(bytes(raw))
        with pytest.raises(DigestMismatch):
            cat.get("model", "m")

    def test_not_found(self, tmp_path):
        with pytest.raises(NotFound):
            Catalog(tmp_path).get("model", "missing")

    def test_missing_file(self, tmp_path):
        cat = Catalog(tmp_path)
        cat.put("model", "m", b"1")
        cat.path("model", "m").unlink()
        with pytest.raises(NotFound):
            cat.get("model", "m")

    @pytest.mark.parametrize("bad", ["", "../x", ".hidden", "a/b", "x" * 129, "sp ace"])
    def test_bad_ids(self, tmp_path, bad):
        with pytest.raises(BadId):
            Catalog(tmp_path).put("model", bad, b"1")

    def test_bad_kind(self, tmp_path):
        with pytest.raises(CatalogError):
            Catalog(tmp_path).put("widget", "a", b"1")


class TestList:
    def test_empty(self, tmp_path):
        assert Catalog(tmp_path / "nothing").list() == []

    def test_sorted(self, tmp_path):
        cat = Catalog(tmp_path)
        for i in ("m3", "m1", "m2"):
            cat.put("model", i, i.encode())
        assert [e.id for e in cat.list("model")] == ["m1", "m2", "m3"]

    def test_kind_filter(self, tmp_path):
        cat = Catalog(tmp_path)
        cat.put("model", "m", b"1")
        cat.put("intent", "i", b"2")
        assert [e.id for e in cat.list("intent")] == ["i"]

    def test_metadata_filter(self, tmp_path):
        cat = Catalog(tmp_path)
        cat.put("model", "a", b"1", {"algorithm": "ppo"})
        cat.put("model", "b", b"2", {"algorithm": "dqn"})
        assert [e.id for e in cat.list(where={"algorithm": "dqn"})] == ["b"]
        assert [e.id for e in cat.list(where=lambda e: e.id == "a")] == ["a"]


class TestDatasets:
    def test_two_rows(self, tmp_path):
        cat = Catalog(tmp_path / "c")
        rec = cat.ingest_dataset(_csv(tmp_path, ROWS), "d")
        assert rec.row_count == 2
        assert rec.bounds["dl_buffer_bytes"] == (0.0, 1200.0)
        assert rec.bounds["dl_brate_mbps"] == (0.1, 3.5)
        assert rec.bounds["dl_tx_pkts"] == (4.0, 28.0)
        assert rec.bounds["requested_prbs"] == (2.0, 20.0)

    def test_wrong_header(self, tmp_path):
        bad = KPM_CSV_HEADER.replace("dl_brate_mbps", "dl_rate")
        with pytest.raises(SchemaError) as ei:
            Catalog(tmp_path / "c").ingest_dataset(_csv(tmp_path, ROWS, bad), "d")
        assert ei.value.column == "dl_rate"

    def test_non_numeric(self, tmp_path):
        rows = [ROWS[0], "250,mmtc,0,abc,4,15,2"]
        with pytest.raises(SchemaError) as ei:
            Catalog(tmp_path / "c").ingest_dataset(_csv(tmp_path, rows), "d")
        assert ei.value.row == 2 and ei.value.column == "dl_brate_mbps"

    def test_empty(self, tmp_path):
        with pytest.raises(SchemaError):
            Catalog(tmp_path / "c").ingest_dataset(_csv(tmp_path, []), "d")

    def test_reread_identical(self, tmp_path):
        cat = Catalog(tmp_path / "c")
        rec = cat.ingest_dataset(_csv(tmp_path, ROWS), "d", {"source_digest": "ab" * 32})
        again = Catalog(tmp_path / "c").dataset_record("d")
        assert again == rec
        assert rec.source_digest == "ab" * 32
        assert sha256_hex(rec.csv_path.read_bytes()) == rec.digest
        assert cat.ingest_dataset(_csv(tmp_path, ROWS), "d", {"source_digest": "ab" * 32}) == rec


def _ops(root, ops):
    cat = Catalog(root)
    for kind, i, data in ops:
        cat.put(kind, i, data, {"n": len(data)})
    return (root / "index.json").read_bytes()


class TestDeterminism:
    def test_index_canonical(self, tmp_path):
        ops = [("model", "b", b"2"), ("intent", "a", b"1"), ("xapp", "c", b"3")]
        a = _ops(tmp_path / "a", ops)
        b = _ops(tmp_path / "b", ops)
        assert a == b
        obj = json.loads(a)
        assert json.dumps(obj, sort_keys=True, indent=2) + "\n" == a.decode()

    def test_concurrent_writers(self, tmp_path):
        cat_root = tmp_path / "c"
        errors = []

        def work(k):
            try:
                c = Catalog(cat_root)
                for j in range(10):
                    c.put("model", f"w{k}-{j}", f"{k}:{j}".encode())
            except Exception as exc:  # pragma: no cover - surfaced below
                errors.append(exc)

        threads = [threading.Thread(target=work, args=(k,)) for k in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        entries = Catalog(cat_root).list()
        assert len(entries) == 40
        assert sorted(e.created for e in entries) == list(range(1, 41))


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(data=st.binary(min_size=1, max_size=256), pos=st.integers(0, 255))
def test_any_corruption_detected(tmp_path_factory, data, pos):
    root = tmp_path_factory.mktemp("cat")
    cat = Catalog(root)
    cat.put("model", "m", data)
    assert cat.entry("model", "m").digest == sha256_hex(data)
    raw = bytearray(data)
    raw[pos % len(raw)] ^= 0xFF
    cat.path("model", "m").write_bytes(bytes(raw))
    with pytest.raises(DigestMismatch):
        cat.get("model", "m")
