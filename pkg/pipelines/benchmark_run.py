"""
Definition-gated benchmark.

Each (model, concept) pair first answers the concept's Define items. Only a pair
whose definitions are all graded Correct goes on to the Classify, Generate and
Edit items; the rest are reported as gated and contribute to no denominator.
"""

from pathlib import Path
from typing import Iterable, Optional

import structlog

from benchmark.graders import build_grader, grade
from benchmark.models import CLASSIFY_CHANCE, USE_TASKS, Dataset, Outcome, OutcomeRecord, TaskItem, TaskKind
from oracle.models import CompletionRequest, FinalTag
from oracle.oracle import ModelOracle
from pipelines.config import RunConfig, build_oracle
from pipelines.errors import InsufficientItemsError
from pipelines.graph import GATED, run_gate
from pipelines.report_model import Counts, Provenance, ReportKind, RunReport, rate_cell, rollup
from pipelines.runner import fan_out, resolve_dataset

logger = structlog.get_logger(__name__)

BENCHMARK_TASKS = (TaskKind.DEFINE, *USE_TASKS)


def counts_of(outcomes: Iterable[OutcomeRecord]) -> Counts:
    successes = failures = exclusions = 0
    for outcome in outcomes:
        if outcome.verdict == Outcome.CORRECT:
            successes += 1
        elif outcome.verdict == Outcome.INCORRECT:
            failures += 1
        else:
            exclusions += 1
    return Counts(successes=successes, failures=failures, exclusions=exclusions)


def chance_by_task(dataset: Dataset) -> dict[str, float]:
    chances = {kind.value: (CLASSIFY_CHANCE if kind == TaskKind.CLASSIFY else 0.0) for kind in TaskKind}
    for item in dataset.items:
        chances[item.kind.value] = item.chance_accuracy
    return chances


def dataset_domains(dataset: Dataset) -> list[str]:
    domains: list[str] = []
    for concept in dataset.concepts:
        if concept.domain.value not in domains:
            domains.append(concept.domain.value)
    return domains


def transcript_digests(outcomes: Iterable[OutcomeRecord]) -> list[str]:
    digests = set()
    for outcome in outcomes:
        digests.update(d for d in (outcome.transcript_digest, outcome.judge_digest) if d)
    return sorted(digests)


class BenchmarkRuntime:
    """Answers and grades dataset items for one run; shared by every graph invocation."""

    def __init__(self, config: RunConfig, dataset: Dataset, oracle: ModelOracle, base_dir: Optional[Path] = None):
        self.config = config
        self.dataset = dataset
        self.oracle = oracle
        self.graders = {
            name: build_grader(
                spec,
                base_dir,
                oracle=oracle,
                judge_model_id=config.judge_model_id,
                judge_temperature=config.judge_temperature,
                max_tokens=config.max_tokens,
                final_tag=config.final_tag,
            )
            for name, spec in dataset.graders.items()
        }

    def answer_and_grade(self, model_id: str, item: TaskItem) -> OutcomeRecord:
        transcript = self.oracle.complete(
            CompletionRequest(
                model_id=model_id,
                prompt=item.rendered_prompt(),
                temperature=self.config.temperature,
                max_tokens=self.config.max_tokens,
                tag_protocol=FinalTag(tag_text=item.answer_tag),
            )
        )
        return grade(
            item,
            transcript.raw_completion,
            self.graders[item.grader],
            model_id,
            transcript_digest=transcript.request_digest,
            concept=self.dataset.concept(item.concept_id),
        )

    def define_outcomes(self, model_id: str, concept_id: str) -> list[OutcomeRecord]:
        return [self.answer_and_grade(model_id, item) for item in self.dataset.items_for(concept_id, TaskKind.DEFINE)]

    def use_outcomes(self, model_id: str, concept_id: str) -> list[OutcomeRecord]:
        return [
            self.answer_and_grade(model_id, item)
            for kind in USE_TASKS
            for item in self.dataset.items_for(concept_id, kind)
        ]


def require_define_items(dataset: Dataset) -> None:
    for concept in dataset.concepts:
        if not dataset.items_for(concept.concept_id, TaskKind.DEFINE):
            raise InsufficientItemsError(concept.concept_id, needed=1, available=0, kind=TaskKind.DEFINE.value)


def run_benchmark(
    config: RunConfig,
    oracle: Optional[ModelOracle] = None,
    dataset: Optional[Dataset] = None,
    out_dir: Optional[Path] = None,
) -> RunReport:
    dataset, dataset_digest, base_dir = resolve_dataset(config.dataset_path, dataset)
    require_define_items(dataset)
    oracle = oracle or build_oracle(config, out_dir)
    runtime = BenchmarkRuntime(config, dataset, oracle, base_dir)

    pairs = [(model_id, concept.concept_id) for model_id in config.model_ids for concept in dataset.concepts]
    logger.info("🚀 Starting benchmark run", models=len(config.model_ids), concepts=len(dataset.concepts))
    states = fan_out(pairs, lambda pair: run_gate(runtime, *pair), config.parallelism)

    chances = chance_by_task(dataset)
    cells = []
    outcomes: list[OutcomeRecord] = []
    for (model_id, concept_id), state in zip(pairs, states):
        domain = dataset.concept(concept_id).domain.value
        defined = state.get("define_outcomes", [])
        used = state.get("use_outcomes", [])
        gated = state.get("gate") == GATED
        outcomes.extend(defined)
        outcomes.extend(used)
        cells.append(
            rate_cell(model_id, TaskKind.DEFINE.value, counts_of(defined), chances[TaskKind.DEFINE.value], concept_id, domain)
        )
        for kind in USE_TASKS:
            cells.append(
                rate_cell(
                    model_id,
                    kind.value,
                    counts_of(o for o in used if o.kind == kind),
                    chances[kind.value],
                    concept_id,
                    domain,
                    gated=gated,
                )
            )

    tasks = [kind.value for kind in BENCHMARK_TASKS]
    domains = dataset_domains(dataset)
    model_rows, domain_rows, overall_rows = rollup(
        cells, config.model_ids, tasks, domains, chances, [kind.value for kind in USE_TASKS]
    )
    gated_pairs = sum(1 for state in states if state.get("gate") == GATED)
    logger.info("✅ Benchmark run complete", pairs=len(pairs), gated=gated_pairs, outcomes=len(outcomes))
    return RunReport(
        kind=ReportKind.BENCHMARK,
        model_ids=list(config.model_ids),
        domains=domains,
        tasks=tasks,
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
