"""
Programmatic checkers, looked up by name from a dataset's grader table.
A checker answers "is this text an instance of the concept?"
"""

import re
from typing import Any, Callable

from benchmark.errors import UnknownCheckerError

Checker = Callable[[str, dict[str, Any]], bool]

_CHECKERS: dict[str, Checker] = {}

_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")


def register_checker(name: str) -> Callable[[Checker], Checker]:
    def decorator(fn: Checker) -> Checker:
        _CHECKERS[name] = fn
        return fn

    return decorator


def get_checker(name: str) -> Checker:
    if name not in _CHECKERS:
        raise UnknownCheckerError(f"no checker registered as {name!r}")
    return _CHECKERS[name]


def registered_checkers() -> list[str]:
    return sorted(_CHECKERS)


def count_syllables(word: str) -> int:
    """Vowel-group heuristic: one syllable per vowel run, minus a silent final e."""
    word = re.sub(r"[^a-z]", "", word.lower())
    if not word:
        return 0
    count = len(re.findall(r"[aeiouy]+", word))
    if word.endswith("e") and not word.endswith(("le", "ee", "ye")) and count > 1:
        count -= 1
    return max(count, 1)


def _lines(text: str) -> list[str]:
    parts = re.split(r"\n|\s/\s", text)
    return [part.strip() for part in parts if part.strip()]


@register_checker("haiku_5_7_5")
def is_haiku(text: str, params: dict[str, Any]) -> bool:
    pattern = params.get("syllables", [5, 7, 5])
    lines = _lines(text)
    if len(lines) != len(pattern):
        return False
    counts = [sum(count_syllables(word) for word in line.split()) for line in lines]
    return counts == list(pattern)


@register_checker("strict_dominance")
def has_strict_dominance(text: str, params: dict[str, Any]) -> bool:
    """Row player's 2x2 payoffs "a b; c d": does the chosen row strictly beat the other in both columns?"""
    numbers = [float(x) for x in _NUMBER_RE.findall(text)]
    if len(numbers) != 4:
        return False
    rows = (numbers[0:2], numbers[2:4])
    dominant = int(params.get("dominant_row", 0))
    other = 1 - dominant
    return all(a > b for a, b in zip(rows[dominant], rows[other]))


@register_checker("contains_words")
def contains_words(text: str, params: dict[str, Any]) -> bool:
    words = params.get("words", [])
    lowered = text.lower()
    return all(re.search(rf"\b{re.escape(word.lower())}\b", lowered) for word in words)
