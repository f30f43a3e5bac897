"""
Keystone expansion: how the share of understood concepts changes as the
keystone grows from the definition alone to the definition plus k classify items.
"""

import hashlib
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import structlog

from benchmark.models import Dataset, Outcome, OutcomeRecord, TaskItem, TaskKind
from oracle.oracle import ModelOracle
from pipelines.benchmark_run import BenchmarkRuntime, require_define_items, transcript_digests
from pipelines.config import RunConfig, build_oracle
from pipelines.errors import InsufficientItemsError, RunConfigError
from pipelines.report_model import ALL, CurvePoint, Provenance, ReportKind, RunReport
from pipelines.runner import fan_out, resolve_dataset
from scoring.errors import EmptyTallyError
from scoring.metrics import understanding_value

logger = structlog.get_logger(__name__)


def _concept_seed(concept_id: str) -> int:
    return int(hashlib.sha256(concept_id.encode("utf-8")).hexdigest()[:8], 16)


def ordered_classify_items(dataset: Dataset, concept_id: str, seed: int) -> list[TaskItem]:
    """The concept's classify items in a shuffled order fixed by (seed, concept_id)."""
    items = dataset.items_for(concept_id, TaskKind.CLASSIFY)
    rng = np.random.default_rng([seed, _concept_seed(concept_id)])
    return [items[i] for i in rng.permutation(len(items))]


def _point(model_id: str, k: int, triples: Sequence[tuple[bool, int, int]], threshold: float) -> CurvePoint:
    contributing = [t for t in triples if t[0]]
    understood = sum(1 for _, correct, asked in contributing if correct / asked >= threshold)
    try:
        value = understanding_value(triples, threshold)
    except EmptyTallyError:
        value = None
    return CurvePoint(model_id=model_id, k=k, contributing=len(contributing), understood=understood, value=value)


def keystone_triple(
    defined: Sequence[OutcomeRecord], ordered: Sequence[OutcomeRecord], k: int, m: int
) -> tuple[bool, int, int]:
    """(passed, follow-ups correct, follow-ups asked) for a keystone of the definition plus k items."""
    keystone = list(defined) + list(ordered[:k])
    passed = bool(defined) and all(o.verdict == Outcome.CORRECT for o in keystone)
    followups = ordered[k:k + m]
    correct = sum(1 for o in followups if o.verdict == Outcome.CORRECT)
    return passed, correct, len(followups)


def run_keystone_expansion(
    config: RunConfig,
    k_values: Optional[Sequence[int]] = None,
    oracle: Optional[ModelOracle] = None,
    dataset: Optional[Dataset] = None,
    out_dir: Optional[Path] = None,
) -> RunReport:
    k_values = sorted(set(k_values if k_values is not None else config.k_values))
    if not k_values or k_values[0] < 0:
        raise RunConfigError("k values must be non-negative and non-empty")
    dataset, dataset_digest, base_dir = resolve_dataset(config.dataset_path, dataset)
    require_define_items(dataset)

    needed = k_values[-1] + config.followup_m
    orders: dict[str, list[TaskItem]] = {}
    for concept in dataset.concepts:
        ordered = ordered_classify_items(dataset, concept.concept_id, config.seed)
        if len(ordered) < needed:
            raise InsufficientItemsError(concept.concept_id, needed=needed, available=len(ordered))
        orders[concept.concept_id] = ordered[:needed]

    oracle = oracle or build_oracle(config, out_dir)
    runtime = BenchmarkRuntime(config, dataset, oracle, base_dir)
    pairs = [(model_id, concept.concept_id) for model_id in config.model_ids for concept in dataset.concepts]
    logger.info("🚀 Starting keystone expansion", models=len(config.model_ids), k_values=k_values)

    def answer_pair(pair: tuple[str, str]) -> tuple[list[OutcomeRecord], list[OutcomeRecord]]:
        model_id, concept_id = pair
        defined = runtime.define_outcomes(model_id, concept_id)
        ordered = [runtime.answer_and_grade(model_id, item) for item in orders[concept_id]]
        return defined, ordered

    answered = fan_out(pairs, answer_pair, config.parallelism)

    m = config.followup_m
    threshold = config.understanding_threshold
    curves: list[CurvePoint] = []
    pooled: dict[int, list[tuple[bool, int, int]]] = {k: [] for k in k_values}
    outcomes: list[OutcomeRecord] = []
    for model_id in config.model_ids:
        per_k: dict[int, list[tuple[bool, int, int]]] = {k: [] for k in k_values}
        for (pair_model, _), (defined, ordered) in zip(pairs, answered):
            if pair_model != model_id:
                continue
            outcomes.extend(defined)
            outcomes.extend(ordered)
            for k in k_values:
                triple = keystone_triple(defined, ordered, k, m)
                per_k[k].append(triple)
                pooled[k].append(triple)
        curves.extend(_point(model_id, k, per_k[k], threshold) for k in k_values)
    curves.extend(_point(ALL, k, pooled[k], threshold) for k in k_values)

    logger.info("✅ Keystone expansion complete", points=len(curves))
    return RunReport(
        kind=ReportKind.EXPANSION,
        model_ids=list(config.model_ids),
        tasks=[TaskKind.CLASSIFY.value],
        curves=curves,
        outcomes=outcomes,
        provenance=Provenance(
            config_digest=config.config_digest(),
            dataset_digest=dataset_digest,
            transcript_digests=transcript_digests(outcomes),
        ),
    )
