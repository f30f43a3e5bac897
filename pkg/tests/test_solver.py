import math
import time
from itertools import combinations

import numpy as np
import pytest

from concept_space.errors import UnknownInstanceError
from concept_space.interpretation import is_distinguishing, is_keystone
from concept_space.loader import concept_spec_from_document
from conftest import random_concept
from keystone.errors import SearchBudgetExceededError
from keystone.solver import (
    Certificate,
    build_hitting_instance,
    declare_keystone,
    enumerate_minimal_keystones,
    greedy_keystone,
    keystone_report,
    minimum_keystone,
)


def masks_of(concept):
    hitting = build_hitting_instance(concept)
    position = {x: i for i, x in enumerate(hitting.universe)}
    return [sum(1 << position[x] for x in s) for s in hitting.sets_to_hit], len(hitting.universe)


def brute_force_minimum(concept):
    masks, n = masks_of(concept)
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            chosen = sum(1 << i for i in combo)
            if all(chosen & m for m in masks):
                return size
    raise AssertionError("no distinguishing set")


def brute_force_minimal(concept):
    masks, n = masks_of(concept)
    hits = lambda chosen: all(chosen & m for m in masks)
    found = []
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            chosen = sum(1 << i for i in combo)
            if hits(chosen) and all(not hits(chosen & ~(1 << i)) for i in combo):
                found.append(tuple(f"x{i + 1}" for i in combo))
    return sorted(found)


def disjoint_blocks():
    return concept_spec_from_document(
        {
            "instances": [{"id": f"x{i}"} for i in range(1, 7)],
            "f_star": [1] * 6,
            "human_space": [
                {"id": "f_star", "values": [1] * 6},
                {"id": "h1", "values": [0, 0, 0, 1, 1, 1]},
                {"id": "h2", "values": [1, 1, 1, 0, 0, 0]},
            ],
        }
    )


def test_trivial_concept_has_empty_keystone():
    concept = concept_spec_from_document(
        {"instances": [{"id": "x1"}], "f_star": [1], "human_space": [{"id": "f_star", "values": [1]}]}
    )
    assert minimum_keystone(concept).instance_ids == ()
    assert greedy_keystone(concept).instance_ids == ()
    assert [k.instance_ids for k in enumerate_minimal_keystones(concept, 5).keystones] == [()]


def test_disjoint_blocks_need_one_instance_each():
    concept = disjoint_blocks()
    exact = minimum_keystone(concept)
    assert exact.objective == 2
    assert exact.certificate == Certificate.EXACT_MINIMUM
    # lexicographically first among the nine optima
    assert exact.instance_ids == ("x1", "x4")


def test_enumeration_of_disjoint_blocks_is_complete():
    enumeration = enumerate_minimal_keystones(disjoint_blocks(), 100)
    assert not enumeration.truncated
    assert len(enumeration.keystones) == 9
    assert enumeration.keystones[0].instance_ids == ("x1", "x4")
    assert all(k.certificate == Certificate.ENUMERATED_MINIMAL for k in enumeration.keystones)


def test_enumeration_truncates_at_limit():
    enumeration = enumerate_minimal_keystones(disjoint_blocks(), 4)
    assert enumeration.truncated
    assert len(enumeration.keystones) == 4


def test_enumeration_limit_must_be_positive():
    with pytest.raises(ValueError):
        enumerate_minimal_keystones(disjoint_blocks(), 0)


def test_exact_matches_brute_force_on_random_suite():
    rng = np.random.default_rng(7)
    started = time.perf_counter()
    for trial in range(1000):
        n = int(rng.integers(1, 13))
        m = int(rng.integers(0, 33))
        concept = random_concept(rng, n, m, concept_id=f"r{trial}")
        exact = minimum_keystone(concept)
        greedy = greedy_keystone(concept)
        optimum = brute_force_minimum(concept)

        assert exact.objective == optimum, concept.concept_id
        assert is_keystone(exact.instance_ids, concept)
        assert is_keystone(greedy.instance_ids, concept)
        misinterpretations = max(len(build_hitting_instance(concept).sets_to_hit), 1)
        assert greedy.objective <= (1 + math.log(misinterpretations)) * max(optimum, 1) or optimum == 0
    assert time.perf_counter() - started < 60


def test_enumeration_matches_brute_force_on_small_concepts():
    rng = np.random.default_rng(11)
    for trial in range(200):
        concept = random_concept(rng, int(rng.integers(1, 9)), int(rng.integers(0, 10)), concept_id=f"e{trial}")
        enumeration = enumerate_minimal_keystones(concept, 10_000)
        listed = sorted(k.instance_ids for k in enumeration.keystones)
        assert listed == brute_force_minimal(concept)
        assert all(is_keystone(ids, concept) for ids in listed)
        if listed:
            assert min(len(ids) for ids in listed) == minimum_keystone(concept).objective


def test_budget_exhaustion_carries_a_valid_incumbent():
    rng = np.random.default_rng(3)
    concept = random_concept(rng, 12, 32)
    with pytest.raises(SearchBudgetExceededError) as info:
        minimum_keystone(concept, node_budget=1)
    incumbent = info.value.incumbent
    assert incumbent.certificate == Certificate.GREEDY_MINIMAL
    assert is_distinguishing(incumbent.instance_ids, concept)


def test_declared_keystone_is_not_checked_for_minimality():
    concept = disjoint_blocks()
    declared = declare_keystone(["x4", "x1", "x2"], concept)
    assert declared.certificate == Certificate.DECLARED
    assert declared.instance_ids == ("x1", "x2", "x4")
    with pytest.raises(UnknownInstanceError):
        declare_keystone(["x7"], concept)


def test_keystone_report_document():
    concept = disjoint_blocks()
    document = keystone_report(concept, minimum_keystone(concept))
    assert document == {
        "concept_id": "concept",
        "keystone": ["x1", "x4"],
        "certificate": "ExactMinimum",
        "objective": 2,
        "truncated": False,
    }
