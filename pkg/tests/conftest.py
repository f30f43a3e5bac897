import hashlib
import os
import sys
from typing import Callable, Optional

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from benchmark.dataset import dataset_from_document
from benchmark.models import Dataset, TaskItem, TaskKind
from concept_space.interpretation import F_STAR_ID, ConceptSpec, Instance, InstanceSpace, Interpretation
from oracle.backends import ScriptedBackend
from oracle.models import CompletionRequest
from oracle.oracle import ModelOracle
from pipelines.config import RunConfig

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")
GOLDEN = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")

DOMAINS = ("literary", "game_theory", "psych_bias", "other")


def coin(*parts) -> float:
    """Deterministic uniform draw in [0, 1) from the given parts; safe under concurrent calls."""
    text = "|".join(str(part) for part in parts)
    return int(hashlib.sha256(text.encode("utf-8")).hexdigest()[:13], 16) / 16**13


def random_concept(rng: np.random.Generator, n_instances: int, n_interps: int, concept_id: str = "random") -> ConceptSpec:
    f_star = rng.integers(0, 2, size=n_instances).tolist()
    members = [Interpretation(interp_id=F_STAR_ID, values=f_star)]
    for i, row in enumerate(rng.integers(0, 2, size=(n_interps, n_instances)).tolist()):
        members.append(Interpretation(interp_id=f"g{i}", values=row))
    return ConceptSpec(
        concept_id=concept_id,
        space=InstanceSpace(instances=[Instance(id=f"x{i}") for i in range(1, n_instances + 1)]),
        f_star=Interpretation(interp_id=F_STAR_ID, values=f_star),
        human_space=members,
    )


def make_dataset(
    n_concepts: int = 2,
    n_classify: int = 4,
    n_generate: int = 1,
    n_edit: int = 1,
    domains: tuple[str, ...] = DOMAINS,
) -> Dataset:
    """Concepts c1..cn with one Define item, n_classify yes/no items and pattern-graded Generate/Edit items."""
    concepts = []
    items = []
    for c in range(1, n_concepts + 1):
        concept_id = f"c{c}"
        concepts.append(
            {
                "concept_id": concept_id,
                "domain": domains[(c - 1) % len(domains)],
                "name": f"concept {c}",
                "reference_definition": f"the reference definition of concept {c}",
            }
        )
        items.append(
            {"item_id": f"{concept_id}-define", "concept_id": concept_id, "kind": "Define",
             "prompt": f"Define concept {c}.", "grader": "pattern"}
        )
        for i in range(1, n_classify + 1):
            items.append(
                {"item_id": f"{concept_id}-classify-{i}", "concept_id": concept_id, "kind": "Classify",
                 "prompt": f"Is example {i} a true instance of concept {c}?", "grader": "label",
                 "gold": {"label": i % 2 == 1}}
            )
        for kind, count in (("Generate", n_generate), ("Edit", n_edit)):
            for i in range(1, count + 1):
                items.append(
                    {"item_id": f"{concept_id}-{kind.lower()}-{i}", "concept_id": concept_id, "kind": kind,
                     "prompt": f"{kind} task {i} for concept {c}.", "grader": "pattern"}
                )
    return dataset_from_document(
        {
            "concepts": concepts,
            "items": items,
            "graders": {
                "label": {"kind": "ExactLabel"},
                "pattern": {"kind": "PatternMatch", "config": {"pattern": "^correct answer$"}},
            },
        }
    )


def answer_text(item: TaskItem, correct: Optional[bool]) -> str:
    """A response graded Correct (True), Incorrect (False) or Excluded (None) for a make_dataset item."""
    if correct is None:
        return "I would rather not commit to an answer."
    if item.kind == TaskKind.CLASSIFY:
        says = item.gold["label"] if correct else not item.gold["label"]
        return f"Let me think.\n{item.answer_tag} {'yes' if says else 'no'}"
    return f"Reasoning first.\n{item.answer_tag} {'correct answer' if correct else 'wrong answer'}"


Policy = Callable[[str, TaskItem], Optional[bool]]


def item_oracle(dataset: Dataset, policy: Policy) -> ModelOracle:
    by_prompt = {item.rendered_prompt(): item for item in dataset.items}

    def respond(request: CompletionRequest) -> str:
        item = by_prompt[request.prompt]
        return answer_text(item, policy(request.model_id, item))

    return ModelOracle(ScriptedBackend(responder=respond))


def run_config(**fields) -> RunConfig:
    return RunConfig(**{"model_ids": ["m1"], "parallelism": 2, **fields})


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
