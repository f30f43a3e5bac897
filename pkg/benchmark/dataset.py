import hashlib
import json
from pathlib import Path
from typing import Any

import structlog
from pydantic import ValidationError

from benchmark.errors import DanglingReferenceError, MissingAnnotationError, SchemaError
from benchmark.models import Dataset, Outcome

logger = structlog.get_logger(__name__)

SAMPLE_DATASET_PATH = Path(__file__).parent / "data" / "sample_dataset.json"


def _schema_error(exc: ValidationError) -> SchemaError:
    first = exc.errors()[0]
    path = ".".join(str(part) for part in first.get("loc", ()))
    return SchemaError(first["msg"], path)


def check_references(dataset: Dataset) -> None:
    concept_ids = {c.concept_id for c in dataset.concepts}
    for item in dataset.items:
        if item.concept_id not in concept_ids:
            raise DanglingReferenceError(item.item_id, item.concept_id, "concept")
        if item.grader not in dataset.graders:
            raise DanglingReferenceError(item.item_id, item.grader, "grader")

    # one chance level per task kind keeps pooled rates well defined
    chances: dict[str, float] = {}
    for item in dataset.items:
        if chances.setdefault(item.kind.value, item.chance_accuracy) != item.chance_accuracy:
            raise SchemaError(
                f"{item.kind.value} items disagree on chance_accuracy",
                f"items.{item.item_id}.chance_accuracy",
            )


def dataset_from_document(document: Any) -> Dataset:
    try:
        dataset = Dataset.model_validate(document)
    except ValidationError as exc:
        raise _schema_error(exc) from exc
    check_references(dataset)
    return dataset


def load_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise SchemaError(f"dataset file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    dataset = dataset_from_document(document)
    logger.info("✅ Dataset loaded", path=str(path), concepts=len(dataset.concepts), items=len(dataset.items))
    return dataset


def dump_dataset(dataset: Dataset) -> str:
    return json.dumps(dataset.model_dump(mode="json"), indent=2, sort_keys=True)


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class AnnotationBook:
    """Human labels keyed by "item_id/model_id"."""

    def __init__(self, labels: dict[str, Outcome]):
        self.labels = labels

    def verdict(self, item_id: str, model_id: str) -> Outcome:
        key = f"{item_id}/{model_id}"
        if key not in self.labels:
            raise MissingAnnotationError(f"no annotation for {key}")
        return self.labels[key]


def load_annotations(path: str | Path) -> AnnotationBook:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read annotation file {path}: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaError("annotation file must map 'item_id/model_id' to {verdict}")
    labels: dict[str, Outcome] = {}
    for key, entry in document.items():
        verdict = str(entry.get("verdict", "")).lower() if isinstance(entry, dict) else ""
        if verdict not in ("correct", "incorrect"):
            raise SchemaError("verdict must be 'correct' or 'incorrect'", f"{key}.verdict")
        labels[key] = Outcome.CORRECT if verdict == "correct" else Outcome.INCORRECT
    return AnnotationBook(labels)
