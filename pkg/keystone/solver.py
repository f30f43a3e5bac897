"""
Keystone computation as a hitting-set problem: a set of instances is distinguishing
exactly when it hits the disagreement set of every misinterpretation in F_h.

Sets are handled internally as int bitmasks over instance positions, so bit i is
the i-th instance of the concept's space.
"""

from enum import Enum
from typing import Iterable, Optional

import structlog
from pydantic import BaseModel, ConfigDict, computed_field

from concept_space.errors import UnknownInstanceError
from concept_space.interpretation import ConceptSpec, disagreement_set
from keystone.errors import SearchBudgetExceededError, UnsolvableConceptError

logger = structlog.get_logger(__name__)

DEFAULT_NODE_BUDGET = 10_000_000


class Certificate(str, Enum):
    EXACT_MINIMUM = "ExactMinimum"
    GREEDY_MINIMAL = "GreedyMinimal"
    ENUMERATED_MINIMAL = "EnumeratedMinimal"
    DECLARED = "Declared"


class KeystoneSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    instance_ids: tuple[str, ...]
    certificate: Certificate

    @computed_field
    @property
    def objective(self) -> int:
        return len(self.instance_ids)


class KeystoneEnumeration(BaseModel):
    model_config = ConfigDict(frozen=True)

    keystones: tuple[KeystoneSet, ...]
    truncated: bool


class HittingInstance(BaseModel):
    model_config = ConfigDict(frozen=True)

    sets_to_hit: tuple[frozenset[str], ...]
    universe: tuple[str, ...]


def build_hitting_instance(concept: ConceptSpec) -> HittingInstance:
    """One disagreement set per misinterpretation, identical sets collapsed, first occurrence kept."""
    sets: list[frozenset[str]] = []
    for f in concept.human_space:
        if f.values == concept.f_star.values:
            continue
        differing = disagreement_set(f, concept).instance_ids
        if not differing:
            raise UnsolvableConceptError(f"interpretation {f.interp_id!r} never disagrees with f_star")
        if differing not in sets:
            sets.append(differing)
    return HittingInstance(sets_to_hit=tuple(sets), universe=concept.space.ids)


def _to_masks(hitting: HittingInstance) -> list[int]:
    position = {instance_id: i for i, instance_id in enumerate(hitting.universe)}
    return [sum(1 << position[x] for x in hit_set) for hit_set in hitting.sets_to_hit]


def _to_ids(mask: int, universe: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(instance_id for i, instance_id in enumerate(universe) if mask >> i & 1)


def _bits(mask: int) -> Iterable[int]:
    index = 0
    while mask:
        if mask & 1:
            yield index
        mask >>= 1
        index += 1


def _hits_all(chosen: int, masks: list[int]) -> bool:
    return all(chosen & m for m in masks)


def _prune(order: list[int], masks: list[int]) -> int:
    """Drop elements (reverse insertion order) whose removal keeps every set hit."""
    chosen = 0
    for idx in order:
        chosen |= 1 << idx
    for idx in reversed(order):
        trial = chosen & ~(1 << idx)
        if _hits_all(trial, masks):
            chosen = trial
    return chosen


def _greedy_order(masks: list[int], size: int) -> list[int]:
    uncovered = list(masks)
    order: list[int] = []
    while uncovered:
        best_idx, best_count = -1, 0
        for idx in range(size):
            bit = 1 << idx
            count = sum(1 for m in uncovered if m & bit)
            if count > best_count:
                best_idx, best_count = idx, count
        order.append(best_idx)
        bit = 1 << best_idx
        uncovered = [m for m in uncovered if not m & bit]
    return order


def _disjoint_lower_bound(uncovered: list[int]) -> int:
    union = 0
    count = 0
    for m in sorted(uncovered, key=int.bit_count):
        if not m & union:
            count += 1
            union |= m
    return count


def greedy_keystone(concept: ConceptSpec) -> KeystoneSet:
    hitting = build_hitting_instance(concept)
    masks = _to_masks(hitting)
    chosen = _prune(_greedy_order(masks, len(hitting.universe)), masks)
    return KeystoneSet(instance_ids=_to_ids(chosen, hitting.universe), certificate=Certificate.GREEDY_MINIMAL)


class _BudgetHit(Exception):
    pass


class _BranchAndBound:
    def __init__(self, masks: list[int], size: int, node_budget: int):
        self.masks = masks
        self.size = size
        self.node_budget = node_budget
        self.nodes = 0
        self.best_mask = _prune(_greedy_order(masks, size), masks)
        self.best_count = self.best_mask.bit_count()

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise _BudgetHit()

    def optimum(self) -> None:
        self._branch(0, 0, list(self.masks))

    def _branch(self, chosen: int, count: int, uncovered: list[int]) -> None:
        self._tick()
        if not uncovered:
            if count < self.best_count:
                self.best_mask, self.best_count = chosen, count
            return
        if count + _disjoint_lower_bound(uncovered) >= self.best_count:
            return

        # every cover hits the smallest open set; branch on which of its elements is the first one used
        target = min(uncovered, key=int.bit_count)
        excluded = 0
        for idx in _bits(target):
            bit = 1 << idx
            rest = [m & ~excluded for m in uncovered if not m & bit]
            if all(rest):
                self._branch(chosen | bit, count + 1, rest)
            excluded |= bit

    def lex_first(self, bound: int) -> Optional[int]:
        return self._lex(0, 0, 0, list(self.masks), bound)

    def _lex(self, idx: int, chosen: int, count: int, uncovered: list[int], bound: int) -> Optional[int]:
        self._tick()
        if not uncovered:
            return chosen
        reachable = [m >> idx << idx for m in uncovered]
        if not all(reachable) or count + _disjoint_lower_bound(reachable) > bound:
            return None
        union = 0
        for m in reachable:
            union |= m
        # positions below the lowest open bit cannot hit anything
        idx = (union & -union).bit_length() - 1
        bit = 1 << idx
        found = self._lex(idx + 1, chosen | bit, count + 1, [m for m in uncovered if not m & bit], bound)
        if found is not None:
            return found
        return self._lex(idx + 1, chosen, count, uncovered, bound)


def minimum_keystone(concept: ConceptSpec, node_budget: int = DEFAULT_NODE_BUDGET) -> KeystoneSet:
    """Globally minimum distinguishing set; among equal-size optima the lexicographically first."""
    hitting = build_hitting_instance(concept)
    masks = _to_masks(hitting)
    search = _BranchAndBound(masks, len(hitting.universe), node_budget)
    try:
        search.optimum()
        best = search.lex_first(search.best_count)
    except _BudgetHit:
        incumbent = KeystoneSet(
            instance_ids=_to_ids(_prune(list(_bits(search.best_mask)), masks), hitting.universe),
            certificate=Certificate.GREEDY_MINIMAL,
        )
        logger.warning(
            "⚠️ Keystone search budget exhausted",
            concept_id=concept.concept_id,
            nodes=search.nodes,
            objective=incumbent.objective,
        )
        raise SearchBudgetExceededError(incumbent, search.nodes)

    if best is None:
        best = search.best_mask
    logger.debug("✅ Minimum keystone found", concept_id=concept.concept_id, nodes=search.nodes)
    return KeystoneSet(instance_ids=_to_ids(best, hitting.universe), certificate=Certificate.EXACT_MINIMUM)


def _all_private(chosen: int, masks: list[int]) -> bool:
    """Every chosen element is the only chosen element in at least one set."""
    for idx in _bits(chosen):
        bit = 1 << idx
        if not any(m & chosen == bit for m in masks):
            return False
    return True


def enumerate_minimal_keystones(concept: ConceptSpec, limit: int) -> KeystoneEnumeration:
    """All minimal keystones in lexicographic order, cut at `limit`."""
    if limit < 1:
        raise ValueError("limit must be at least 1")
    hitting = build_hitting_instance(concept)
    masks = _to_masks(hitting)
    found: list[int] = []

    def walk(idx: int, chosen: int, uncovered: list[int]) -> None:
        if len(found) > limit:
            return
        if not uncovered:
            if _all_private(chosen, masks):
                found.append(chosen)
            return
        reachable = [m >> idx << idx for m in uncovered]
        if not all(reachable) or not _all_private(chosen, masks):
            return
        union = 0
        for m in reachable:
            union |= m
        idx = (union & -union).bit_length() - 1
        bit = 1 << idx
        walk(idx + 1, chosen | bit, [m for m in uncovered if not m & bit])
        walk(idx + 1, chosen, uncovered)

    walk(0, 0, list(masks))
    truncated = len(found) > limit
    keystones = tuple(
        KeystoneSet(instance_ids=_to_ids(mask, hitting.universe), certificate=Certificate.ENUMERATED_MINIMAL)
        for mask in found[:limit]
    )
    return KeystoneEnumeration(keystones=keystones, truncated=truncated)


def declare_keystone(instance_ids: Iterable[str], concept: ConceptSpec) -> KeystoneSet:
    """A user-asserted keystone (e.g. a single definition question); minimality is not checked."""
    selected = set(instance_ids)
    for instance_id in sorted(selected):
        if instance_id not in concept.space.ids:
            raise UnknownInstanceError(instance_id)
    ordered = tuple(x for x in concept.space.ids if x in selected)
    return KeystoneSet(instance_ids=ordered, certificate=Certificate.DECLARED)


def keystone_report(concept: ConceptSpec, keystone: KeystoneSet, truncated: bool = False) -> dict:
    return {
        "concept_id": concept.concept_id,
        "keystone": list(keystone.instance_ids),
        "certificate": keystone.certificate.value,
        "objective": keystone.objective,
        "truncated": truncated,
    }
