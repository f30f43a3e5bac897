import copy
import json

import pytest

from benchmark.dataset import (
    SAMPLE_DATASET_PATH,
    dataset_from_document,
    dump_dataset,
    file_digest,
    load_annotations,
    load_dataset,
)
from benchmark.errors import DanglingReferenceError, MissingAnnotationError, SchemaError
from benchmark.models import CLASSIFY_CHANCE, Domain, Outcome, TaskKind


@pytest.fixture
def document():
    return json.loads(SAMPLE_DATASET_PATH.read_text(encoding="utf-8"))


def test_sample_dataset_loads():
    dataset = load_dataset(SAMPLE_DATASET_PATH)

    assert len(dataset.concepts) == 3
    assert len(dataset.items) == 30
    assert {c.domain for c in dataset.concepts} == {Domain.LITERARY, Domain.GAME_THEORY, Domain.PSYCH_BIAS}
    for concept in dataset.concepts:
        assert len(dataset.items_for(concept.concept_id, TaskKind.DEFINE)) == 1
        assert len(dataset.items_for(concept.concept_id, TaskKind.CLASSIFY)) == 5


def test_classify_items_default_to_binary_chance():
    dataset = load_dataset(SAMPLE_DATASET_PATH)
    for item in dataset.items:
        expected = CLASSIFY_CHANCE if item.kind == TaskKind.CLASSIFY else 0.0
        assert item.chance_accuracy == expected


def test_dump_round_trip(document):
    dataset = dataset_from_document(document)
    reloaded = dataset_from_document(json.loads(dump_dataset(dataset)))
    assert reloaded == dataset
    assert dump_dataset(reloaded) == dump_dataset(dataset)


def test_file_digest_is_stable():
    assert file_digest(SAMPLE_DATASET_PATH) == file_digest(SAMPLE_DATASET_PATH)
    assert len(file_digest(SAMPLE_DATASET_PATH)) == 64


def test_dangling_concept_reference(document):
    document["items"][0]["concept_id"] = "limerick"
    with pytest.raises(DanglingReferenceError) as excinfo:
        dataset_from_document(document)
    assert excinfo.value.reference == "limerick"
    assert excinfo.value.item_id == "haiku-define"


def test_dangling_grader_reference(document):
    document["items"][1]["grader"] = "missing_grader"
    with pytest.raises(DanglingReferenceError, match="grader 'missing_grader'"):
        dataset_from_document(document)


def test_missing_field_names_its_path(document):
    del document["items"][0]["prompt"]
    with pytest.raises(SchemaError) as excinfo:
        dataset_from_document(document)
    assert excinfo.value.path == "items.0.prompt"


def test_duplicate_item_ids_rejected(document):
    document["items"].append(copy.deepcopy(document["items"][0]))
    with pytest.raises(SchemaError, match="duplicate item_id: haiku-define"):
        dataset_from_document(document)


def test_classify_chance_must_be_binary(document):
    document["items"][1]["chance_accuracy"] = 0.25
    with pytest.raises(SchemaError):
        dataset_from_document(document)


def test_chance_must_agree_within_a_task_kind(document):
    generate = [item for item in document["items"] if item["kind"] == "Generate"]
    generate[0]["chance_accuracy"] = 0.1
    generate[1]["chance_accuracy"] = 0.2
    with pytest.raises(SchemaError, match="Generate items disagree on chance_accuracy"):
        dataset_from_document(document)


def test_unreadable_dataset_file(tmp_path):
    with pytest.raises(SchemaError, match="not found"):
        load_dataset(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(SchemaError, match="invalid JSON"):
        load_dataset(broken)


def test_annotations(tmp_path):
    path = tmp_path / "labels.json"
    path.write_text(
        json.dumps({"sunk-generate-1/m1": {"verdict": "Correct"}, "sunk-edit-1/m1": {"verdict": "incorrect"}}),
        encoding="utf-8",
    )
    book = load_annotations(path)

    assert book.verdict("sunk-generate-1", "m1") == Outcome.CORRECT
    assert book.verdict("sunk-edit-1", "m1") == Outcome.INCORRECT
    with pytest.raises(MissingAnnotationError):
        book.verdict("sunk-generate-1", "m2")


def test_annotation_verdicts_are_validated(tmp_path):
    path = tmp_path / "labels.json"
    path.write_text(json.dumps({"sunk-edit-1/m1": {"verdict": "maybe"}}), encoding="utf-8")
    with pytest.raises(SchemaError, match="sunk-edit-1/m1.verdict"):
        load_annotations(path)
