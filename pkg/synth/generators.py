"""
Synthetic interpretation spaces.

Human spaces are structured: f* is all ones and each misinterpretation flips f*
on one contiguous block of instances, blocks pairwise disjoint. LLM spaces are
unstructured: every member flips each bit of f* independently.
"""

from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from concept_space.interpretation import F_STAR_ID, ConceptSpec, Instance, InstanceSpace, Interpretation
from synth.errors import ParameterOverflowError


class HumanSpaceParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_instances: int = Field(ge=1)
    n_rules: int = Field(default=0, ge=0)
    flip_block_size: int = Field(default=1, ge=1)
    seed: int = 0


class LlmSpaceMode(str, Enum):
    INDEPENDENT = "independent"
    HUMAN = "human"


class LlmSpaceParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_instances: int = Field(ge=1)
    n_interps: int = Field(ge=1)
    flip_probability: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = 0
    mode: LlmSpaceMode = LlmSpaceMode.INDEPENDENT


def instance_ids(n_instances: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, n_instances + 1))


def block_starts(params: HumanSpaceParams, rng: np.random.Generator) -> list[int]:
    """Start positions of n_rules disjoint blocks, uniform over all placements."""
    slack = params.n_instances - params.n_rules * params.flip_block_size
    chosen = np.sort(rng.choice(slack + params.n_rules, size=params.n_rules, replace=False))
    return [int(c) + i * (params.flip_block_size - 1) for i, c in enumerate(chosen)]


def gen_human_space(params: HumanSpaceParams) -> ConceptSpec:
    if params.n_rules * params.flip_block_size > params.n_instances:
        raise ParameterOverflowError(
            f"{params.n_rules} rules of block size {params.flip_block_size} "
            f"do not fit in {params.n_instances} instances"
        )
    rng = np.random.default_rng(params.seed)
    ids = instance_ids(params.n_instances)
    f_star = Interpretation(interp_id=F_STAR_ID, values=[1] * params.n_instances)

    members = [f_star]
    for rule, start in enumerate(block_starts(params, rng), 1):
        values = [1] * params.n_instances
        for position in range(start, start + params.flip_block_size):
            values[position] = 0
        members.append(Interpretation(interp_id=f"h{rule}", values=values))

    return ConceptSpec(
        concept_id=f"human-n{params.n_instances}-r{params.n_rules}-b{params.flip_block_size}-s{params.seed}",
        space=InstanceSpace(instances=[Instance(id=i) for i in ids]),
        f_star=f_star,
        human_space=members,
    )


def gen_llm_space(params: LlmSpaceParams, human: Optional[ConceptSpec] = None) -> list[Interpretation]:
    rng = np.random.default_rng(params.seed)
    if params.mode == LlmSpaceMode.HUMAN:
        if human is None:
            raise ValueError("human mode draws from a human space; pass one")
        if len(human.space) != params.n_instances:
            raise ValueError(f"human space has {len(human.space)} instances, params ask for {params.n_instances}")
        picks = rng.integers(len(human.human_space), size=params.n_interps)
        return [
            Interpretation(interp_id=f"l{i}", values=human.human_space[int(p)].values)
            for i, p in enumerate(picks, 1)
        ]

    flips = rng.random((params.n_interps, params.n_instances)) < params.flip_probability
    return [
        Interpretation(interp_id=f"l{i}", values=[0 if flipped else 1 for flipped in row])
        for i, row in enumerate(flips.tolist(), 1)
    ]
