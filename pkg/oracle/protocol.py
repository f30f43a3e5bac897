import re
from enum import Enum

from oracle.errors import MalformedResponseError
from oracle.models import FinalTag


class JudgeVerdict(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"


_VERDICT_RE = re.compile(r"""^['"*`]*(correct|incorrect)['"*`.!,;:]*$""", re.IGNORECASE)


def parse_final(raw: str, tag: FinalTag) -> str:
    """Everything after the last occurrence of the tag, trimmed."""
    position = raw.rfind(tag.tag_text)
    if position < 0:
        raise MalformedResponseError(raw, f"missing {tag.tag_text!r}")
    answer = raw[position + len(tag.tag_text):].strip()
    if not answer:
        raise MalformedResponseError(raw, f"nothing after {tag.tag_text!r}")
    return answer


def judge_verdict(parsed: str) -> JudgeVerdict:
    match = _VERDICT_RE.match(parsed.strip())
    if not match:
        raise MalformedResponseError(parsed, "judge verdict is neither 'correct' nor 'incorrect'")
    return JudgeVerdict(match.group(1).lower())
