"""
RunReport: the serialized result of one pipeline run.

Cells are the finest grain, one per (model, concept, task). Model, domain and
overall rows are computed from summed counts, never by averaging rates, so every
number in a rendered table traces back to its OutcomeRecords.
"""

import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from benchmark.models import OutcomeRecord
from pipelines.errors import MissingReportError
from scoring.errors import EmptyTallyError
from scoring.metrics import ScoredRate, TallySheet, potemkin_rate

REPORT_FILE = "report.json"
ALL = "*"


class ReportKind(str, Enum):
    BENCHMARK = "benchmark"
    EXPANSION = "expansion"
    INCOHERENCE = "incoherence"
    AUTOEVAL = "autoeval"


class CellStatus(str, Enum):
    OK = "ok"
    GATED = "gated"
    NO_DATA = "no_data"


class Counts(BaseModel):
    model_config = ConfigDict(frozen=True)

    successes: int = 0
    failures: int = 0
    exclusions: int = 0

    @property
    def attempts(self) -> int:
        return self.successes + self.failures + self.exclusions

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(
            successes=self.successes + other.successes,
            failures=self.failures + other.failures,
            exclusions=self.exclusions + other.exclusions,
        )

    def tally(self) -> TallySheet:
        return TallySheet(
            successes=self.successes,
            trials=self.successes + self.failures,
            exclusions=self.exclusions,
        )


class RateCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    model_id: str
    task: str
    concept_id: str = ALL
    domain: str = ALL
    status: CellStatus
    attempts: int = 0
    successes: int = 0
    failures: int = 0
    exclusions: int = 0
    rate: Optional[ScoredRate] = None

    def counts(self) -> Counts:
        return Counts(successes=self.successes, failures=self.failures, exclusions=self.exclusions)


def rate_cell(
    model_id: str,
    task: str,
    counts: Counts,
    chance_accuracy: float,
    concept_id: str = ALL,
    domain: str = ALL,
    gated: bool = False,
) -> RateCell:
    fields = dict(
        model_id=model_id,
        task=task,
        concept_id=concept_id,
        domain=domain,
        attempts=counts.attempts,
        successes=counts.successes,
        failures=counts.failures,
        exclusions=counts.exclusions,
    )
    if gated:
        return RateCell(status=CellStatus.GATED, **fields)
    try:
        rate = potemkin_rate(counts.tally(), chance_accuracy)
    except EmptyTallyError:
        return RateCell(status=CellStatus.NO_DATA, **fields)
    return RateCell(status=CellStatus.OK, rate=rate, **fields)


class CurvePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    model_id: str
    k: int
    contributing: int
    understood: int
    value: Optional[float] = None


class JudgementRecord(BaseModel):
    """One judge call of the automatic procedure: what it should have said and what it said."""

    model_config = ConfigDict(frozen=True)

    model_id: str
    question_id: str
    concept: str
    subquestion_index: int
    expected: str
    judged: Optional[str] = None
    transcript_digest: Optional[str] = None
    exclusion_reason: Optional[str] = None


class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    config_digest: str
    dataset_digest: Optional[str] = None
    transcript_digests: list[str] = Field(default_factory=list)


class RunReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ReportKind
    model_ids: list[str]
    domains: list[str] = Field(default_factory=list)
    tasks: list[str] = Field(default_factory=list)
    cells: list[RateCell] = Field(default_factory=list)
    model_rows: list[RateCell] = Field(default_factory=list)
    domain_rows: list[RateCell] = Field(default_factory=list)
    overall_rows: list[RateCell] = Field(default_factory=list)
    curves: list[CurvePoint] = Field(default_factory=list)
    outcomes: list[OutcomeRecord] = Field(default_factory=list)
    judgements: list[JudgementRecord] = Field(default_factory=list)
    provenance: Provenance

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def row(self, model_id: str, task: str, domain: str = ALL) -> Optional[RateCell]:
        if model_id == ALL:
            rows = self.overall_rows
        else:
            rows = self.model_rows if domain == ALL else self.domain_rows
        for cell in rows:
            if cell.model_id == model_id and cell.task == task and cell.domain == domain:
                return cell
        return None


def rollup(
    cells: Sequence[RateCell],
    model_ids: Sequence[str],
    tasks: Sequence[str],
    domains: Sequence[str],
    chance_by_task: dict[str, float],
    domain_tasks: Sequence[str],
) -> tuple[list[RateCell], list[RateCell], list[RateCell]]:
    """Pool fine cells into per-model, per-domain and overall rows. Gated cells pool nothing.

    Domain rows are built for `domain_tasks` only.
    """
    open_cells = [cell for cell in cells if cell.status != CellStatus.GATED]

    def pooled(selected: Iterable[RateCell]) -> Counts:
        total = Counts()
        for cell in selected:
            total = total + cell.counts()
        return total

    model_rows = [
        rate_cell(
            model_id,
            task,
            pooled(c for c in open_cells if c.model_id == model_id and c.task == task),
            chance_by_task[task],
        )
        for model_id in model_ids
        for task in tasks
    ]
    domain_rows = [
        rate_cell(
            model_id,
            task,
            pooled(c for c in open_cells if c.model_id == model_id and c.task == task and c.domain == domain),
            chance_by_task[task],
            domain=domain,
        )
        for model_id in model_ids
        for domain in domains
        for task in domain_tasks
    ]
    overall_rows = [
        rate_cell(ALL, task, pooled(c for c in open_cells if c.task == task), chance_by_task[task])
        for task in tasks
    ] + [
        rate_cell(
            ALL,
            task,
            pooled(c for c in open_cells if c.task == task and c.domain == domain),
            chance_by_task[task],
            domain=domain,
        )
        for domain in domains
        for task in domain_tasks
    ]
    return model_rows, domain_rows, overall_rows


def write_report(report: RunReport, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / REPORT_FILE
    path.write_text(report.to_json(), encoding="utf-8")
    return path


def load_report(run_dir: str | Path) -> RunReport:
    path = Path(run_dir) / REPORT_FILE
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise MissingReportError(f"no {REPORT_FILE} in {run_dir}") from exc
    try:
        return RunReport.model_validate_json(text)
    except ValidationError as exc:
        raise MissingReportError(f"{path} is not a valid run report: {exc.errors()[0]['msg']}") from exc
