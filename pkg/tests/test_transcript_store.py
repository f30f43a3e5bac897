from concurrent.futures import ThreadPoolExecutor

from db.transcript_store import TranscriptStore
from oracle.models import SCRIPTED_EPOCH, Transcript, TranscriptSource


def transcript(n: int) -> Transcript:
    return Transcript(
        request_digest=f"{n:064x}",
        model_id="m1",
        prompt=f"prompt {n}",
        raw_completion=f"FINAL ANSWER: {n}",
        parsed_final=str(n),
        created_at=SCRIPTED_EPOCH,
        source=TranscriptSource.SCRIPTED,
    )


def test_append_is_idempotent_per_digest(tmp_path):
    store = TranscriptStore(tmp_path / "t.jsonl")
    assert store.append(transcript(1))
    assert not store.append(transcript(1))
    assert len(store) == 1
    assert len((tmp_path / "t.jsonl").read_text().splitlines()) == 1


def test_reopen_reads_back(tmp_path):
    path = tmp_path / "t.jsonl"
    store = TranscriptStore(path)
    for n in range(3):
        store.append(transcript(n))
    reopened = TranscriptStore(path)
    assert reopened.digests() == store.digests()
    assert reopened.get(transcript(2).request_digest) == transcript(2)


def test_corrupt_line_only_loses_that_line(tmp_path):
    path = tmp_path / "t.jsonl"
    lines = [transcript(1).model_dump_json(), '{"request_digest": "truncated', transcript(2).model_dump_json()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    store = TranscriptStore(path)
    assert len(store) == 2
    assert transcript(2).request_digest in store


def test_compact_orders_by_digest(tmp_path):
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    a, b = TranscriptStore(first), TranscriptStore(second)
    for n in (3, 1, 2):
        a.append(transcript(n))
    for n in (2, 3, 1):
        b.append(transcript(n))
    a.compact()
    b.compact()
    assert first.read_bytes() == second.read_bytes()


def test_concurrent_appends(tmp_path):
    store = TranscriptStore(tmp_path / "t.jsonl")
    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lambda n: store.append(transcript(n % 20)), range(200)))
    assert len(store) == 20
    assert len(TranscriptStore(tmp_path / "t.jsonl")) == 20
    assert len((tmp_path / "t.jsonl").read_text().splitlines()) == 20


def test_memory_only_store():
    store = TranscriptStore()
    store.append(transcript(5))
    store.compact()
    assert transcript(5).request_digest in store
