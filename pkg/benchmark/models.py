from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Domain(str, Enum):
    LITERARY = "literary"
    GAME_THEORY = "game_theory"
    PSYCH_BIAS = "psych_bias"
    OTHER = "other"


class TaskKind(str, Enum):
    DEFINE = "Define"
    CLASSIFY = "Classify"
    GENERATE = "Generate"
    EDIT = "Edit"


USE_TASKS = (TaskKind.CLASSIFY, TaskKind.GENERATE, TaskKind.EDIT)
CLASSIFY_CHANCE = 0.5


class GraderKind(str, Enum):
    EXACT_LABEL = "ExactLabel"
    PATTERN_MATCH = "PatternMatch"
    PROGRAMMATIC = "Programmatic"
    JUDGE_MODEL = "JudgeModel"
    ANNOTATION_FILE = "AnnotationFile"


class Outcome(str, Enum):
    CORRECT = "Correct"
    INCORRECT = "Incorrect"
    EXCLUDED = "Excluded"


class Concept(BaseModel):
    model_config = ConfigDict(frozen=True)

    concept_id: str
    domain: Domain
    name: str
    reference_definition: str = Field(min_length=1)


class TaskItem(BaseModel):
    model_config = ConfigDict(frozen=True)

    item_id: str
    concept_id: str
    kind: TaskKind
    prompt: str = Field(min_length=1)
    grader: str
    gold: dict[str, Any] = Field(default_factory=dict)
    chance_accuracy: float = Field(default=0.0, ge=0.0, lt=1.0)
    answer_tag: str = Field(default="ANSWER:", min_length=1)

    @model_validator(mode="before")
    @classmethod
    def default_chance(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("chance_accuracy") is None:
            data = dict(data)
            data["chance_accuracy"] = CLASSIFY_CHANCE if data.get("kind") == TaskKind.CLASSIFY.value else 0.0
        return data

    @model_validator(mode="after")
    def classify_is_binary(self) -> "TaskItem":
        if self.kind == TaskKind.CLASSIFY and self.chance_accuracy != CLASSIFY_CHANCE:
            raise ValueError("Classify items are yes/no questions with chance accuracy 0.5")
        return self

    def rendered_prompt(self) -> str:
        return f"{self.prompt}\n\nEnd your response with '{self.answer_tag}' followed by your answer."


class GraderSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: GraderKind
    config: dict[str, Any] = Field(default_factory=dict)


class Dataset(BaseModel):
    model_config = ConfigDict(frozen=True)

    concepts: tuple[Concept, ...]
    items: tuple[TaskItem, ...]
    graders: dict[str, GraderSpec] = Field(default_factory=dict)

    @model_validator(mode="after")
    def unique_ids(self) -> "Dataset":
        for label, ids in (
            ("concept_id", [c.concept_id for c in self.concepts]),
            ("item_id", [i.item_id for i in self.items]),
        ):
            duplicates = sorted({x for x in ids if ids.count(x) > 1})
            if duplicates:
                raise ValueError(f"duplicate {label}: {', '.join(duplicates)}")
        return self

    def concept(self, concept_id: str) -> Concept:
        for concept in self.concepts:
            if concept.concept_id == concept_id:
                return concept
        raise KeyError(concept_id)

    def items_for(self, concept_id: str, kind: Optional[TaskKind] = None) -> list[TaskItem]:
        return [
            item
            for item in self.items
            if item.concept_id == concept_id and (kind is None or item.kind == kind)
        ]


class OutcomeRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    model_id: str
    item_id: str
    concept_id: str
    kind: TaskKind
    verdict: Outcome
    transcript_digest: Optional[str] = None
    exclusion_reason: Optional[str] = None
    judge_digest: Optional[str] = None
