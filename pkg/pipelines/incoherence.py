"""
Incoherence: a model generates instances and non-instances of a concept, then,
in a separate query with no shared context, classifies each of its own
generations. Disagreement with the intended label is scored against chance.
"""

import re
from pathlib import Path
from typing import Optional

import structlog

from benchmark.graders import NO_WORDS, YES_WORDS, normalize_answer
from benchmark.models import Concept, Dataset, Outcome, OutcomeRecord, TaskKind
from oracle.models import CompletionRequest, FinalTag, Transcript
from oracle.oracle import ModelOracle
from oracle.prompts import (
    BATCH_INSTANCE_GENERATION_PROMPT,
    INSTANCE_GENERATION_PROMPT,
    POLARITY_FALSE,
    POLARITY_TRUE,
    SELF_CLASSIFICATION_PROMPT,
)
from pipelines.benchmark_run import counts_of, dataset_domains, transcript_digests
from pipelines.config import RunConfig, build_oracle
from pipelines.report_model import CellStatus, Provenance, RateCell, ReportKind, RunReport, rollup
from pipelines.runner import fan_out, resolve_dataset
from scoring.errors import EmptyTallyError
from scoring.metrics import BINARY_CHANCE, incoherence_score

logger = structlog.get_logger(__name__)

INCOHERENCE_TASK = "Incoherence"
MALFORMED_GENERATION = "malformed_generation"
MALFORMED_CLASSIFICATION = "malformed_classification"

_LIST_MARKER = re.compile(r"^\s*(?:\d+[.):]|[-*•])\s*")


def split_examples(parsed: str, count: int) -> list[str]:
    """One example per line, list markers stripped, at most `count`."""
    lines = [_LIST_MARKER.sub("", line).strip() for line in parsed.splitlines()]
    return [line for line in lines if line][:count]


def label_of(parsed: Optional[str]) -> Optional[int]:
    if parsed is None:
        return None
    first = normalize_answer(parsed).split(" ")[0].strip(".!,;:")
    if first in YES_WORDS:
        return 1
    if first in NO_WORDS:
        return 0
    return None


class IncoherenceRuntime:
    def __init__(self, config: RunConfig, dataset: Dataset, oracle: ModelOracle):
        self.config = config
        self.dataset = dataset
        self.oracle = oracle
        self.tag = FinalTag(tag_text=config.final_tag)

    def _complete(self, model_id: str, prompt: str) -> Transcript:
        return self.oracle.complete(
            CompletionRequest(
                model_id=model_id,
                prompt=prompt,
                temperature=self.config.temperature,
                max_tokens=self.config.max_tokens,
                tag_protocol=self.tag,
            )
        )

    def generations(self, model_id: str, concept: Concept, intended: int) -> list[tuple[Optional[str], str]]:
        """(example or None when malformed, generation transcript digest) per requested example."""
        polarity = POLARITY_TRUE if intended else POLARITY_FALSE
        count = self.config.incoherence_true if intended else self.config.incoherence_false
        if self.config.batch_incoherence:
            transcript = self._complete(
                model_id,
                BATCH_INSTANCE_GENERATION_PROMPT.format(
                    count=count, polarity=polarity, concept=concept.name, FINAL_TAG=self.tag.tag_text
                ),
            )
            examples = split_examples(transcript.parsed_final or "", count)
            padded: list[Optional[str]] = list(examples) + [None] * (count - len(examples))
            return [(example, transcript.request_digest) for example in padded]

        generated = []
        for index in range(1, count + 1):
            transcript = self._complete(
                model_id,
                INSTANCE_GENERATION_PROMPT.format(
                    polarity=polarity, concept=concept.name, index=index, FINAL_TAG=self.tag.tag_text
                ),
            )
            generated.append((transcript.parsed_final, transcript.request_digest))
        return generated

    def pair_outcomes(self, model_id: str, concept_id: str) -> list[tuple[OutcomeRecord, int, Optional[int]]]:
        concept = self.dataset.concept(concept_id)
        results = []
        for intended in (1, 0):
            side = "instance" if intended else "non_instance"
            for position, (example, generation_digest) in enumerate(self.generations(model_id, concept, intended), 1):
                item_id = f"{concept_id}/{side}/{position}"
                if example is None:
                    logger.info("⚠️ Excluding malformed generation", model_id=model_id, item_id=item_id)
                    record = _record(model_id, concept_id, item_id, Outcome.EXCLUDED, generation_digest, MALFORMED_GENERATION)
                    results.append((record, intended, None))
                    continue
                transcript = self._complete(
                    model_id,
                    SELF_CLASSIFICATION_PROMPT.format(concept=concept.name, example=example, FINAL_TAG=self.tag.tag_text),
                )
                label = label_of(transcript.parsed_final)
                if label is None:
                    logger.info("⚠️ Excluding malformed classification", model_id=model_id, item_id=item_id)
                    record = _record(
                        model_id, concept_id, item_id, Outcome.EXCLUDED, transcript.request_digest, MALFORMED_CLASSIFICATION
                    )
                else:
                    verdict = Outcome.CORRECT if label == intended else Outcome.INCORRECT
                    record = _record(model_id, concept_id, item_id, verdict, transcript.request_digest)
                results.append((record, intended, label))
        return results


def _record(
    model_id: str, concept_id: str, item_id: str, verdict: Outcome, digest: str, reason: Optional[str] = None
) -> OutcomeRecord:
    return OutcomeRecord(
        model_id=model_id,
        item_id=item_id,
        concept_id=concept_id,
        kind=TaskKind.CLASSIFY,
        verdict=verdict,
        transcript_digest=digest,
        exclusion_reason=reason,
    )


def run_incoherence(
    config: RunConfig,
    oracle: Optional[ModelOracle] = None,
    dataset: Optional[Dataset] = None,
    out_dir: Optional[Path] = None,
) -> RunReport:
    dataset, dataset_digest, _ = resolve_dataset(config.dataset_path, dataset)
    oracle = oracle or build_oracle(config, out_dir)
    runtime = IncoherenceRuntime(config, dataset, oracle)

    pairs = [(model_id, concept.concept_id) for model_id in config.model_ids for concept in dataset.concepts]
    logger.info("🚀 Starting incoherence run", models=len(config.model_ids), concepts=len(dataset.concepts))
    answered = fan_out(pairs, lambda pair: runtime.pair_outcomes(*pair), config.parallelism)

    cells = []
    outcomes: list[OutcomeRecord] = []
    for (model_id, concept_id), results in zip(pairs, answered):
        records = [r for r, _, _ in results]
        outcomes.extend(records)
        counts = counts_of(records)
        fields = dict(
            model_id=model_id,
            task=INCOHERENCE_TASK,
            concept_id=concept_id,
            domain=dataset.concept(concept_id).domain.value,
            attempts=counts.attempts,
            successes=counts.successes,
            failures=counts.failures,
            exclusions=counts.exclusions,
        )
        try:
            rate = incoherence_score((intended, label) for _, intended, label in results)
        except EmptyTallyError:
            cells.append(RateCell(status=CellStatus.NO_DATA, **fields))
            continue
        cells.append(RateCell(status=CellStatus.OK, rate=rate, **fields))

    domains = dataset_domains(dataset)
    model_rows, domain_rows, overall_rows = rollup(
        cells, config.model_ids, [INCOHERENCE_TASK], domains, {INCOHERENCE_TASK: BINARY_CHANCE}, [INCOHERENCE_TASK]
    )
    logger.info("✅ Incoherence run complete", outcomes=len(outcomes))
    return RunReport(
        kind=ReportKind.INCOHERENCE,
        model_ids=list(config.model_ids),
        domains=domains,
        tasks=[INCOHERENCE_TASK],
        cells=cells,
        model_rows=model_rows,
        domain_rows=domain_rows,
        overall_rows=overall_rows,
        outcomes=outcomes,
        provenance=Provenance(
            config_digest=config.config_digest(),
            dataset_digest=dataset_digest,
            transcript_digests=transcript_digests(outcomes),
        ),
    )
