"""
Automatic lower bound on potemkin rate.

For every seed question a model answers correctly, the same model writes related
questions, answers each one, writes a subtly corrupted copy of its answer, and
judges both. Its own answers should be judged correct and the corrupted ones
incorrect; any other judgement is a sign of inconsistency.
"""

import hashlib
import json
import re
from pathlib import Path
from typing import Optional, Sequence

import structlog
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from benchmark.errors import SchemaError
from benchmark.models import Domain
from oracle.errors import MalformedResponseError
from oracle.models import CompletionRequest, FinalTag, Transcript
from oracle.oracle import ModelOracle
from oracle.prompts import CORRECT_ANSWER_PROMPT, INCORRECT_ANSWER_PROMPT, JUDGE_PROMPT, QUESTION_GENERATION_PROMPT
from oracle.protocol import JudgeVerdict, judge_verdict
from pipelines.config import RunConfig, build_oracle
from pipelines.graph import run_seed
from pipelines.report_model import (
    CellStatus,
    Counts,
    JudgementRecord,
    Provenance,
    RateCell,
    ReportKind,
    RunReport,
    rollup,
)
from pipelines.runner import fan_out
from scoring.errors import EmptyTallyError
from scoring.metrics import BINARY_CHANCE, autoeval_rate

logger = structlog.get_logger(__name__)

AUTOEVAL_TASK = "AutoEval"
SAMPLE_SEED_QUESTIONS_PATH = Path(__file__).resolve().parent.parent / "benchmark" / "data" / "sample_seed_questions.json"

MALFORMED_ANSWER = "malformed_answer"
MALFORMED_CORRUPTION = "malformed_corruption"
JUDGE_MALFORMED = "judge_malformed"

_NUMBERED = re.compile(r"^\s*(\d+)[.)]\s+(.*\S)")
_CHOICE = re.compile(r"^\(?([A-Za-z])(?:[.):,]|$)")
_OPTION = re.compile(r"\(([A-Za-z])\)")
_LONE_LETTER = re.compile(r"(?<![\w'])\(?([A-Za-z])\)?(?![\w'])")


class SeedQuestion(BaseModel):
    model_config = ConfigDict(frozen=True)

    question_id: str
    concept: str = Field(min_length=1)
    domain: Domain = Domain.OTHER
    question: str = Field(min_length=1)
    answer: str = Field(pattern=r"^[A-Za-z]$")


_SEED_LIST = TypeAdapter(list[SeedQuestion])


def load_seed_questions(path: str | Path) -> list[SeedQuestion]:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise SchemaError(f"seed questions file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    try:
        seeds = _SEED_LIST.validate_python(document)
    except ValidationError as exc:
        error = exc.errors()[0]
        raise SchemaError(error["msg"], ".".join(str(part) for part in error["loc"])) from exc
    ids = [seed.question_id for seed in seeds]
    if len(set(ids)) != len(ids):
        raise SchemaError("duplicate question_id in seed questions")
    return seeds


def split_questions(raw: str, count: int) -> list[str]:
    """Numbered lines when there are any, otherwise every non-empty line; at most `count`."""
    numbered = [match.group(2).strip() for match in map(_NUMBERED.match, raw.splitlines()) if match]
    questions = numbered or [line.strip() for line in raw.splitlines() if line.strip()]
    return questions[:count]


def declared_options(question: str) -> frozenset[str]:
    """Letters the question offers as "(A)", "(B)", ..."""
    return frozenset(letter.upper() for letter in _OPTION.findall(question))


def choice_letter(parsed: Optional[str], options: frozenset[str] = frozenset()) -> Optional[str]:
    """Chosen option letter. With declared options, only those letters count and the last one mentioned wins."""
    if not parsed:
        return None
    text = parsed.strip()
    match = _CHOICE.match(text)
    if match and (not options or match.group(1).upper() in options):
        return match.group(1).upper()
    if not options:
        return None
    mentioned = [letter.upper() for letter in _LONE_LETTER.findall(text) if letter.upper() in options]
    return mentioned[-1] if mentioned else None


class AutoevalRuntime:
    def __init__(self, config: RunConfig, oracle: ModelOracle):
        self.config = config
        self.oracle = oracle
        self.tag = FinalTag(tag_text=config.final_tag)

    def _complete(self, model_id: str, prompt: str, tagged: bool = True, judge: bool = False) -> Transcript:
        return self.oracle.complete(
            CompletionRequest(
                model_id=model_id,
                prompt=prompt,
                temperature=self.config.judge_temperature if judge else self.config.temperature,
                max_tokens=self.config.max_tokens,
                tag_protocol=self.tag if tagged else None,
            )
        )

    def answer_seed(self, model_id: str, seed: SeedQuestion) -> tuple[bool, str]:
        transcript = self._complete(
            model_id, CORRECT_ANSWER_PROMPT.format(FINAL_TAG=self.tag.tag_text, question=seed.question)
        )
        chosen = choice_letter(transcript.parsed_final, declared_options(seed.question))
        return chosen == seed.answer.upper(), transcript.request_digest

    def _judge(
        self, model_id: str, seed: SeedQuestion, index: int, question: str, answer: str, expected: JudgeVerdict
    ) -> JudgementRecord:
        judge_model = self.config.judge_model_id or model_id
        transcript = self._complete(
            judge_model,
            JUDGE_PROMPT.format(FINAL_TAG=self.tag.tag_text, question=question, model_answer=answer),
            judge=True,
        )
        judged: Optional[str] = None
        reason: Optional[str] = None
        try:
            judged = judge_verdict(transcript.parsed_final or "").value
        except MalformedResponseError:
            reason = JUDGE_MALFORMED
            logger.info("⚠️ Judge verdict malformed", model_id=model_id, question_id=seed.question_id, index=index)
        return JudgementRecord(
            model_id=model_id,
            question_id=seed.question_id,
            concept=seed.concept,
            subquestion_index=index,
            expected=expected.value,
            judged=judged,
            transcript_digest=transcript.request_digest,
            exclusion_reason=reason,
        )

    def _excluded(
        self, model_id: str, seed: SeedQuestion, index: int, expected: JudgeVerdict, digest: str, reason: str
    ) -> JudgementRecord:
        logger.info("⚠️ Excluding subquestion side", model_id=model_id, question_id=seed.question_id, reason=reason)
        return JudgementRecord(
            model_id=model_id,
            question_id=seed.question_id,
            concept=seed.concept,
            subquestion_index=index,
            expected=expected.value,
            transcript_digest=digest,
            exclusion_reason=reason,
        )

    def expand_and_judge(self, model_id: str, seed: SeedQuestion) -> list[JudgementRecord]:
        n = self.config.num_subquestions
        generation = self._complete(
            model_id,
            QUESTION_GENERATION_PROMPT.format(concept=seed.concept, question=seed.question, num_subquestions=n),
            tagged=False,
        )
        questions = split_questions(generation.raw_completion, n)
        logger.info(
            "📝 Generated subquestions",
            model_id=model_id,
            question_id=seed.question_id,
            count=len(questions),
            subquestions=questions,
        )

        judgements: list[JudgementRecord] = []
        for index, question in enumerate(questions):
            answer = self._complete(model_id, CORRECT_ANSWER_PROMPT.format(FINAL_TAG=self.tag.tag_text, question=question))
            if answer.parsed_final is None:
                for expected in (JudgeVerdict.CORRECT, JudgeVerdict.INCORRECT):
                    judgements.append(
                        self._excluded(model_id, seed, index, expected, answer.request_digest, MALFORMED_ANSWER)
                    )
                continue
            judgements.append(self._judge(model_id, seed, index, question, answer.parsed_final, JudgeVerdict.CORRECT))

            corrupted = self._complete(
                model_id,
                INCORRECT_ANSWER_PROMPT.format(
                    FINAL_TAG=self.tag.tag_text, question=question, initial_answer=answer.parsed_final
                ),
            )
            if corrupted.parsed_final is None:
                judgements.append(
                    self._excluded(
                        model_id, seed, index, JudgeVerdict.INCORRECT, corrupted.request_digest, MALFORMED_CORRUPTION
                    )
                )
                continue
            judgements.append(
                self._judge(model_id, seed, index, question, corrupted.parsed_final, JudgeVerdict.INCORRECT)
            )
        return judgements


def _counts(judgements: Sequence[JudgementRecord]) -> Counts:
    successes = sum(1 for j in judgements if j.judged is not None and j.judged == j.expected)
    failures = sum(1 for j in judgements if j.judged is not None and j.judged != j.expected)
    return Counts(successes=successes, failures=failures, exclusions=sum(1 for j in judgements if j.judged is None))


def _seeds_digest(seeds: Sequence[SeedQuestion]) -> str:
    text = json.dumps([seed.model_dump(mode="json") for seed in seeds], sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def run_autoeval(
    config: RunConfig,
    seed_questions: Optional[Sequence[SeedQuestion]] = None,
    oracle: Optional[ModelOracle] = None,
    out_dir: Optional[Path] = None,
) -> RunReport:
    if seed_questions is None:
        seed_questions = load_seed_questions(config.seed_questions_path or SAMPLE_SEED_QUESTIONS_PATH)
    seeds = list(seed_questions)
    oracle = oracle or build_oracle(config, out_dir)
    runtime = AutoevalRuntime(config, oracle)

    jobs = [(model_id, seed) for model_id in config.model_ids for seed in seeds]
    logger.info("🚀 Starting automatic evaluation", models=len(config.model_ids), seeds=len(seeds))
    states = fan_out(jobs, lambda job: run_seed(runtime, *job), config.parallelism)

    judgements: list[JudgementRecord] = []
    digests: set[str] = set()
    for state in states:
        judgements.extend(state.get("judgements", []))
        digests.add(state["seed_digest"])
    digests.update(j.transcript_digest for j in judgements if j.transcript_digest)

    concepts: dict[str, str] = {}
    for seed in seeds:
        concepts.setdefault(seed.concept, seed.domain.value)
    domains = list(dict.fromkeys(concepts.values()))

    cells = []
    for model_id in config.model_ids:
        for concept, domain in concepts.items():
            selected = [j for j in judgements if j.model_id == model_id and j.concept == concept]
            counts = _counts(selected)
            fields = dict(
                model_id=model_id,
                task=AUTOEVAL_TASK,
                concept_id=concept,
                domain=domain,
                attempts=counts.attempts,
                successes=counts.successes,
                failures=counts.failures,
                exclusions=counts.exclusions,
            )
            try:
                rate = autoeval_rate((j.expected, j.judged) for j in selected)
            except EmptyTallyError:
                cells.append(RateCell(status=CellStatus.NO_DATA, **fields))
                continue
            cells.append(RateCell(status=CellStatus.OK, rate=rate, **fields))

    model_rows, domain_rows, overall_rows = rollup(
        cells, config.model_ids, [AUTOEVAL_TASK], domains, {AUTOEVAL_TASK: BINARY_CHANCE}, [AUTOEVAL_TASK]
    )
    expanded = sum(1 for state in states if state.get("seed_correct"))
    logger.info("✅ Automatic evaluation complete", seeds_expanded=expanded, judgements=len(judgements))
    return RunReport(
        kind=ReportKind.AUTOEVAL,
        model_ids=list(config.model_ids),
        domains=domains,
        tasks=[AUTOEVAL_TASK],
        cells=cells,
        model_rows=model_rows,
        domain_rows=domain_rows,
        overall_rows=overall_rows,
        judgements=judgements,
        provenance=Provenance(
            config_digest=config.config_digest(),
            dataset_digest=_seeds_digest(seeds),
            transcript_digests=sorted(digests),
        ),
    )
