"""
Finite instance spaces, interpretations and the brute-force predicates
(disagreement, distinguishing, keystone) that every other package treats as ground truth.
"""

from typing import Iterable, Optional

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from concept_space.errors import DimensionMismatchError, UnknownInstanceError

logger = structlog.get_logger(__name__)

F_STAR_ID = "f_star"


class Instance(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    text: str = ""


class InstanceSpace(BaseModel):
    """Ordered, non-empty list of instances with unique ids."""

    model_config = ConfigDict(frozen=True)

    instances: tuple[Instance, ...]

    @field_validator("instances")
    @classmethod
    def check_instances(cls, instances: tuple[Instance, ...]) -> tuple[Instance, ...]:
        if not instances:
            raise ValueError("instance space must contain at least one instance")
        seen = set()
        for instance in instances:
            if instance.id in seen:
                raise ValueError(f"duplicate instance id {instance.id!r}")
            seen.add(instance.id)
        return instances

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(instance.id for instance in self.instances)

    def __len__(self) -> int:
        return len(self.instances)

    def index_of(self, instance_id: str) -> int:
        for index, instance in enumerate(self.instances):
            if instance.id == instance_id:
                return index
        raise UnknownInstanceError(instance_id)


class Interpretation(BaseModel):
    """A total 0/1 valuation, one bit per instance in InstanceSpace order."""

    model_config = ConfigDict(frozen=True)

    interp_id: str
    values: tuple[int, ...]

    @field_validator("values", mode="before")
    @classmethod
    def check_bits(cls, values):
        if not isinstance(values, (list, tuple)):
            raise ValueError("values must be a list of bits")
        bits = list(values)
        for position, bit in enumerate(bits):
            # bool is an int subclass; JSON true/false are not bits
            if isinstance(bit, bool) or not isinstance(bit, int) or bit not in (0, 1):
                raise ValueError(f"position {position} holds {bit!r}, expected 0 or 1")
        return tuple(bits)


class DisagreementSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    interp_id: str
    instance_ids: frozenset[str]


class ConceptSpec(BaseModel):
    """Instance space, the correct interpretation f* and the human space F_h (optionally F_l)."""

    model_config = ConfigDict(frozen=True)

    concept_id: str = "concept"
    space: InstanceSpace
    f_star: Interpretation
    human_space: tuple[Interpretation, ...]
    llm_space: Optional[tuple[Interpretation, ...]] = None

    @field_validator("human_space")
    @classmethod
    def dedupe_human_space(cls, human_space: tuple[Interpretation, ...]) -> tuple[Interpretation, ...]:
        kept: list[Interpretation] = []
        seen: dict[tuple[int, ...], str] = {}
        for interp in human_space:
            if interp.values in seen:
                logger.info(
                    "🔄 Dropping duplicate interpretation",
                    interp_id=interp.interp_id,
                    duplicate_of=seen[interp.values],
                )
                continue
            seen[interp.values] = interp.interp_id
            kept.append(interp)
        return tuple(kept)

    @model_validator(mode="after")
    def check_dimensions(self) -> "ConceptSpec":
        size = len(self.space)
        members = [self.f_star, *self.human_space, *(self.llm_space or ())]
        for interp in members:
            if len(interp.values) != size:
                raise ValueError(
                    f"interpretation {interp.interp_id!r} has {len(interp.values)} values, "
                    f"space has {size} instances"
                )
        if not any(interp.values == self.f_star.values for interp in self.human_space):
            raise ValueError("human_space must contain f_star")
        return self

    def index_of(self, instance_id: str) -> int:
        return self.space.index_of(instance_id)

    @property
    def misinterpretations(self) -> tuple[Interpretation, ...]:
        return tuple(f for f in self.human_space if f.values != self.f_star.values)


def evaluate(interp: Interpretation, instance_id: str, space: InstanceSpace) -> int:
    """Bit f(x) for the instance named instance_id."""
    if len(interp.values) != len(space):
        raise DimensionMismatchError(
            f"interpretation {interp.interp_id!r} has {len(interp.values)} values, space has {len(space)}"
        )
    return interp.values[space.index_of(instance_id)]


def disagreement_set(f: Interpretation, concept: ConceptSpec) -> DisagreementSet:
    if len(f.values) != len(concept.f_star.values):
        raise DimensionMismatchError(
            f"interpretation {f.interp_id!r} has {len(f.values)} values, "
            f"f_star has {len(concept.f_star.values)}"
        )
    ids = concept.space.ids
    differing = frozenset(
        ids[i] for i, (bit, star) in enumerate(zip(f.values, concept.f_star.values)) if bit != star
    )
    return DisagreementSet(interp_id=f.interp_id, instance_ids=differing)


def _checked_ids(instance_ids: Iterable[str], concept: ConceptSpec) -> frozenset[str]:
    selected = frozenset(instance_ids)
    known = set(concept.space.ids)
    for instance_id in sorted(selected):
        if instance_id not in known:
            raise UnknownInstanceError(instance_id)
    return selected


def is_distinguishing(instance_ids: Iterable[str], concept: ConceptSpec) -> bool:
    """True iff every f in F_h other than f* disagrees with f* somewhere in the set."""
    selected = _checked_ids(instance_ids, concept)
    for f in concept.misinterpretations:
        if not (disagreement_set(f, concept).instance_ids & selected):
            return False
    return True


def is_keystone(instance_ids: Iterable[str], concept: ConceptSpec) -> bool:
    """Distinguishing and minimal: dropping any single element breaks the property."""
    selected = _checked_ids(instance_ids, concept)
    if not is_distinguishing(selected, concept):
        return False
    return all(not is_distinguishing(selected - {x}, concept) for x in selected)
