"""
Framework validity experiment: a keystone computed against F_h certifies
understanding only for interpretations that F_h contains. Interpretations
outside F_h can agree with f* on the whole keystone and still be wrong.
"""

from typing import Optional, Sequence

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict

from concept_space.errors import DimensionMismatchError
from concept_space.interpretation import ConceptSpec, Interpretation, is_keystone
from keystone.solver import Certificate, KeystoneSet, minimum_keystone
from synth.errors import EmptyGridError, NotAKeystoneError
from synth.generators import HumanSpaceParams, LlmSpaceParams, gen_human_space, gen_llm_space

logger = structlog.get_logger(__name__)

ADVERSARY_ID = "adversary"


class PotemkinCount(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_potemkin: int
    witnesses: tuple[tuple[str, str], ...]


class SweepPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    flip_probability: float
    mode: str
    n_interps: int
    keystone_size: int
    n_potemkin: int
    potemkin_fraction: float


def count_potemkin_interps(
    concept: ConceptSpec, keystone: KeystoneSet, candidate_space: Sequence[Interpretation]
) -> PotemkinCount:
    """Candidates equal to f* on every keystone instance yet different from f*, each with its first differing instance."""
    if keystone.certificate != Certificate.DECLARED and not is_keystone(keystone.instance_ids, concept):
        raise NotAKeystoneError(f"{list(keystone.instance_ids)} is not a keystone of {concept.concept_id}")
    if not candidate_space:
        return PotemkinCount(n_potemkin=0, witnesses=())

    size = len(concept.space)
    for interp in candidate_space:
        if len(interp.values) != size:
            raise DimensionMismatchError(
                f"interpretation {interp.interp_id!r} has {len(interp.values)} values, space has {size}"
            )
    ids = concept.space.ids
    on_keystone = [concept.index_of(x) for x in keystone.instance_ids]

    differs = np.array([interp.values for interp in candidate_space]) != np.array(concept.f_star.values)
    passes = ~differs[:, on_keystone].any(axis=1)
    potemkin = passes & differs.any(axis=1)
    first_difference = differs.argmax(axis=1)

    witnesses = tuple(
        (candidate_space[row].interp_id, ids[int(first_difference[row])]) for row in np.flatnonzero(potemkin)
    )
    return PotemkinCount(n_potemkin=len(witnesses), witnesses=witnesses)


def plant_adversary(concept: ConceptSpec, keystone: KeystoneSet) -> Optional[Interpretation]:
    """f* flipped on the first instance outside the keystone; None when the keystone covers every instance."""
    chosen = set(keystone.instance_ids)
    for position, instance_id in enumerate(concept.space.ids):
        if instance_id not in chosen:
            values = list(concept.f_star.values)
            values[position] = 1 - values[position]
            return Interpretation(interp_id=ADVERSARY_ID, values=values)
    return None


def validity_sweep(human_params: HumanSpaceParams, llm_params_grid: Sequence[LlmSpaceParams]) -> list[SweepPoint]:
    if not llm_params_grid:
        raise EmptyGridError("validity sweep needs at least one grid point")
    human = gen_human_space(human_params)
    keystone = minimum_keystone(human)
    logger.info("🔑 Human keystone", concept_id=human.concept_id, size=keystone.objective)

    points = []
    for params in llm_params_grid:
        if params.n_instances != human_params.n_instances:
            raise DimensionMismatchError(
                f"grid point has {params.n_instances} instances, human space has {human_params.n_instances}"
            )
        llm_space = gen_llm_space(params, human)
        counted = count_potemkin_interps(human, keystone, llm_space)
        points.append(
            SweepPoint(
                flip_probability=params.flip_probability,
                mode=params.mode.value,
                n_interps=params.n_interps,
                keystone_size=keystone.objective,
                n_potemkin=counted.n_potemkin,
                potemkin_fraction=counted.n_potemkin / len(llm_space),
            )
        )
        logger.debug("📊 Sweep point", flip_probability=params.flip_probability, n_potemkin=counted.n_potemkin)
    return points


def sweep_to_frame(points: Sequence[SweepPoint]) -> pd.DataFrame:
    """Two-column table (divergence parameter, potemkin fraction) for plotting."""
    return pd.DataFrame(
        {
            "flip_probability": [p.flip_probability for p in points],
            "potemkin_fraction": [p.potemkin_fraction for p in points],
        }
    )
