import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from concept_space.errors import ConceptSpecError
from concept_space.interpretation import F_STAR_ID, ConceptSpec


def _error_path(exc: ValidationError) -> str:
    loc = exc.errors()[0].get("loc", ())
    return ".".join(str(part) for part in loc)


def _interpretations(raw: Any, field: str) -> list[dict]:
    if not isinstance(raw, list):
        raise ConceptSpecError("expected a list of interpretations", field)
    result = []
    for index, entry in enumerate(raw):
        if not isinstance(entry, dict) or "values" not in entry:
            raise ConceptSpecError("expected an object with id and values", f"{field}.{index}")
        result.append({"interp_id": str(entry.get("id", f"{field}_{index}")), "values": entry["values"]})
    return result


def concept_spec_from_document(document: Any, default_id: str = "concept") -> ConceptSpec:
    """Build a ConceptSpec from the on-disk document shape ({instances, f_star, human_space, llm_space})."""
    if not isinstance(document, dict):
        raise ConceptSpecError("concept spec must be a JSON object")
    for field in ("instances", "f_star", "human_space"):
        if field not in document:
            raise ConceptSpecError("missing required field", field)

    instances = document["instances"]
    if not isinstance(instances, list):
        raise ConceptSpecError("expected a list", "instances")

    payload = {
        "concept_id": str(document.get("concept_id", default_id)),
        "space": {"instances": instances},
        "f_star": {"interp_id": F_STAR_ID, "values": document["f_star"]},
        "human_space": _interpretations(document["human_space"], "human_space"),
    }
    if document.get("llm_space") is not None:
        payload["llm_space"] = _interpretations(document["llm_space"], "llm_space")

    try:
        return ConceptSpec.model_validate(payload)
    except ValidationError as exc:
        path = _error_path(exc)
        # report in document terms rather than model terms
        path = path.replace("space.instances", "instances")
        path = path.replace("f_star.values", "f_star")
        raise ConceptSpecError(exc.errors()[0]["msg"], path) from exc


def load_concept_spec(path: str | Path) -> ConceptSpec:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConceptSpecError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConceptSpecError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return concept_spec_from_document(document, default_id=path.stem)


def concept_spec_to_document(concept: ConceptSpec) -> dict:
    document = {
        "concept_id": concept.concept_id,
        "instances": [{"id": inst.id, "text": inst.text} for inst in concept.space.instances],
        "f_star": list(concept.f_star.values),
        "human_space": [{"id": f.interp_id, "values": list(f.values)} for f in concept.human_space],
    }
    if concept.llm_space is not None:
        document["llm_space"] = [{"id": f.interp_id, "values": list(f.values)} for f in concept.llm_space]
    return document


def canonical_bytes(concept: ConceptSpec) -> bytes:
    return json.dumps(concept_spec_to_document(concept), sort_keys=True, separators=(",", ":")).encode("utf-8")
