"""
Scoring formulas. Every rate is (1 - accuracy) rescaled so chance-level accuracy
scores 1; standard errors are binomial on the unscaled proportion, times the scale.
"""

import math
from typing import Iterable, Optional, Sequence

from pydantic import BaseModel, ConfigDict, model_validator

from scoring.errors import EmptyTallyError

BINARY_CHANCE = 0.5


class ScoredRate(BaseModel):
    model_config = ConfigDict(frozen=True)

    raw_accuracy: float
    chance_accuracy: float
    scaled_rate: float
    se: float
    n: int
    exclusions: int = 0


class TallySheet(BaseModel):
    model_config = ConfigDict(frozen=True)

    successes: int = 0
    trials: int = 0
    exclusions: int = 0

    @model_validator(mode="after")
    def check_counts(self) -> "TallySheet":
        if self.trials < 0 or self.successes < 0 or self.exclusions < 0:
            raise ValueError("counts must be non-negative")
        if self.successes > self.trials:
            raise ValueError("successes cannot exceed trials")
        return self

    def __add__(self, other: "TallySheet") -> "TallySheet":
        return TallySheet(
            successes=self.successes + other.successes,
            trials=self.trials + other.trials,
            exclusions=self.exclusions + other.exclusions,
        )


def binomial_se(p: float, n: int) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"proportion out of range: {p}")
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    return math.sqrt(p * (1.0 - p) / n)


def potemkin_rate(tally: TallySheet, chance_accuracy: float) -> ScoredRate:
    if not 0.0 <= chance_accuracy < 1.0:
        raise ValueError(f"chance accuracy must lie in [0, 1), got {chance_accuracy}")
    if tally.trials == 0:
        raise EmptyTallyError("no valid trials")
    accuracy = tally.successes / tally.trials
    scale = 1.0 / (1.0 - chance_accuracy)
    return ScoredRate(
        raw_accuracy=accuracy,
        chance_accuracy=chance_accuracy,
        scaled_rate=(1.0 - accuracy) / (1.0 - chance_accuracy),
        se=scale * binomial_se(accuracy, tally.trials),
        n=tally.trials,
        exclusions=tally.exclusions,
    )


def incoherence_score(pairs: Iterable[tuple[int, Optional[int]]]) -> ScoredRate:
    """Mismatch between intended labels and the model's own reclassification, times 2.

    A reclassified label of None marks an invalid reclassification and is excluded.
    """
    matches = trials = invalid = 0
    for intended, reclassified in pairs:
        if reclassified is None:
            invalid += 1
            continue
        trials += 1
        matches += int(intended == reclassified)
    return potemkin_rate(TallySheet(successes=matches, trials=trials, exclusions=invalid), BINARY_CHANCE)


def autoeval_rate(verdicts: Iterable[tuple[str, Optional[str]]]) -> ScoredRate:
    """Judge agreement with expected verdicts; rate = 2 x (1 - accuracy). None marks a malformed judgement."""
    agreements = trials = invalid = 0
    for expected, judged in verdicts:
        if judged is None:
            invalid += 1
            continue
        trials += 1
        agreements += int(judged == expected)
    return potemkin_rate(TallySheet(successes=agreements, trials=trials, exclusions=invalid), BINARY_CHANCE)


def understanding_value(per_concept: Sequence[tuple[bool, int, int]], threshold: float = 1.0) -> float:
    """Share of keystone-passing concepts whose follow-up accuracy reaches `threshold`.

    Each entry is (passed_keystone, followups_correct, followups_asked).
    """
    contributing = 0
    understood = 0
    for passed, correct, asked in per_concept:
        if asked < 1:
            raise ValueError("each concept needs at least one follow-up question")
        if not passed:
            continue
        contributing += 1
        if correct / asked >= threshold:
            understood += 1
    if contributing == 0:
        raise EmptyTallyError("no concept passed its keystone")
    return understood / contributing


def beats_chance(rate: ScoredRate, z: float = 0.0) -> bool:
    """Caller-side filter for pooling only models that outperform chance: scaled rate plus z standard errors below 1."""
    return rate.scaled_rate + z * rate.se < 1.0
