"""
Grading of one model response against one task item.

Every grader first extracts the answer after the item's protocol tag; a response
without the tag is Excluded (never Incorrect) so it stays out of every denominator.
"""

import re
from pathlib import Path
from typing import Optional

import structlog

from benchmark.checkers import get_checker
from benchmark.dataset import AnnotationBook, load_annotations
from benchmark.errors import GraderMismatchError
from benchmark.models import Concept, GraderKind, GraderSpec, Outcome, OutcomeRecord, TaskItem, TaskKind
from oracle.errors import MalformedResponseError
from oracle.models import DEFAULT_FINAL_TAG, CompletionRequest, FinalTag
from oracle.oracle import ModelOracle
from oracle.prompts import REFERENCE_JUDGE_PROMPT
from oracle.protocol import JudgeVerdict, judge_verdict, parse_final

logger = structlog.get_logger(__name__)

ALL_TASKS = frozenset(TaskKind)
COMPATIBLE_KINDS = {
    GraderKind.EXACT_LABEL: frozenset({TaskKind.CLASSIFY}),
    GraderKind.PATTERN_MATCH: ALL_TASKS,
    GraderKind.PROGRAMMATIC: frozenset({TaskKind.CLASSIFY, TaskKind.GENERATE, TaskKind.EDIT}),
    GraderKind.JUDGE_MODEL: ALL_TASKS,
    GraderKind.ANNOTATION_FILE: ALL_TASKS,
}

YES_WORDS = {"yes", "true", "y"}
NO_WORDS = {"no", "false", "n"}

MISSING_TAG = "missing_tag"
JUDGE_MALFORMED = "judge_malformed"


class Grader:
    """A grader spec bound to what it needs at run time (judge oracle, annotation labels)."""

    def __init__(
        self,
        spec: GraderSpec,
        oracle: Optional[ModelOracle] = None,
        annotations: Optional[AnnotationBook] = None,
        judge_model_id: Optional[str] = None,
        judge_temperature: float = 0.0,
        max_tokens: int = 1024,
        final_tag: str = DEFAULT_FINAL_TAG,
    ):
        self.spec = spec
        self.oracle = oracle
        self.annotations = annotations
        self.judge_model_id = judge_model_id
        self.judge_temperature = judge_temperature
        self.max_tokens = max_tokens
        self.final_tag = FinalTag(tag_text=final_tag)

    @property
    def kind(self) -> GraderKind:
        return self.spec.kind


def build_grader(spec: GraderSpec, base_dir: Optional[Path] = None, **runtime) -> Grader:
    annotations = None
    if spec.kind == GraderKind.ANNOTATION_FILE:
        path = Path(spec.config["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        annotations = load_annotations(path)
    return Grader(spec, annotations=annotations, **runtime)


def normalize_answer(text: str) -> str:
    text = " ".join(text.split()).casefold()
    return text.strip(" .!,;:'\"`*")


def _exact_label(answer: str, item: TaskItem, grader: Grader) -> bool:
    gold = item.gold.get("label")
    normalized = normalize_answer(answer)
    aliases = {normalize_answer(k): normalize_answer(str(v)) for k, v in grader.spec.config.get("aliases", {}).items()}
    normalized = aliases.get(normalized, normalized)
    if isinstance(gold, bool):
        first = normalized.split(" ")[0].strip(".!,;:")
        if first in YES_WORDS:
            return gold is True
        if first in NO_WORDS:
            return gold is False
        return False
    return normalized == normalize_answer(str(gold))


def _pattern_match(answer: str, item: TaskItem, grader: Grader) -> bool:
    pattern = item.gold.get("pattern", grader.spec.config.get("pattern"))
    if not pattern:
        raise GraderMismatchError(f"item {item.item_id!r} has no pattern to match")
    flags = re.IGNORECASE if "i" in grader.spec.config.get("flags", "i") else 0
    return re.search(pattern, answer, flags) is not None


def _programmatic(answer: str, item: TaskItem, grader: Grader) -> bool:
    checker = get_checker(grader.spec.config["checker"])
    params = {**grader.spec.config, **item.gold}
    is_instance = checker(answer, params)
    return is_instance == bool(item.gold.get("expect_instance", True))


def grade(
    item: TaskItem,
    response: str,
    grader: Grader,
    model_id: str,
    *,
    transcript_digest: Optional[str] = None,
    concept: Optional[Concept] = None,
) -> OutcomeRecord:
    if item.kind not in COMPATIBLE_KINDS[grader.kind]:
        raise GraderMismatchError(f"{grader.kind.value} grader cannot grade {item.kind.value} item {item.item_id!r}")

    def record(verdict: Outcome, reason: Optional[str] = None, judge_digest: Optional[str] = None) -> OutcomeRecord:
        return OutcomeRecord(
            model_id=model_id,
            item_id=item.item_id,
            concept_id=item.concept_id,
            kind=item.kind,
            verdict=verdict,
            transcript_digest=transcript_digest,
            exclusion_reason=reason,
            judge_digest=judge_digest,
        )

    try:
        answer = parse_final(response, FinalTag(tag_text=item.answer_tag))
    except MalformedResponseError:
        logger.info("⚠️ Excluding response without answer tag", model_id=model_id, item_id=item.item_id)
        return record(Outcome.EXCLUDED, MISSING_TAG)

    if grader.kind == GraderKind.JUDGE_MODEL:
        return _judge(item, answer, grader, model_id, concept, record)
    if grader.kind == GraderKind.ANNOTATION_FILE:
        return record(grader.annotations.verdict(item.item_id, model_id))

    if grader.kind == GraderKind.EXACT_LABEL:
        correct = _exact_label(answer, item, grader)
    elif grader.kind == GraderKind.PATTERN_MATCH:
        correct = _pattern_match(answer, item, grader)
    else:
        correct = _programmatic(answer, item, grader)
    return record(Outcome.CORRECT if correct else Outcome.INCORRECT)


def _judge(item: TaskItem, answer: str, grader: Grader, model_id: str, concept: Optional[Concept], record):
    if grader.oracle is None:
        raise GraderMismatchError("JudgeModel grader has no oracle bound")
    reference = concept.reference_definition if concept is not None else item.gold.get("reference", "")
    concept_name = concept.name if concept is not None else item.concept_id
    judge_model = grader.spec.config.get("model_id") or grader.judge_model_id or model_id
    prompt = REFERENCE_JUDGE_PROMPT.format(
        FINAL_TAG=grader.final_tag.tag_text,
        concept=concept_name,
        reference=reference,
        question=item.prompt,
        model_answer=answer,
    )
    transcript = grader.oracle.complete(
        CompletionRequest(
            model_id=judge_model,
            prompt=prompt,
            temperature=grader.judge_temperature,
            max_tokens=grader.max_tokens,
            tag_protocol=grader.final_tag,
        )
    )
    if transcript.parsed_final is None:
        return record(Outcome.EXCLUDED, JUDGE_MALFORMED, transcript.request_digest)
    try:
        verdict = judge_verdict(transcript.parsed_final)
    except MalformedResponseError:
        logger.info("⚠️ Judge verdict malformed", item_id=item.item_id, judge_model=judge_model)
        return record(Outcome.EXCLUDED, JUDGE_MALFORMED, transcript.request_digest)
    outcome = Outcome.CORRECT if verdict == JudgeVerdict.CORRECT else Outcome.INCORRECT
    return record(outcome, judge_digest=transcript.request_digest)
