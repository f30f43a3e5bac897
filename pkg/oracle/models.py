import hashlib
import json
from datetime import datetime, timezone
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

DEFAULT_FINAL_TAG = "FINAL ANSWER:"
SCRIPTED_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class FinalTag(BaseModel):
    model_config = ConfigDict(frozen=True)

    tag_text: str = DEFAULT_FINAL_TAG

    @field_validator("tag_text")
    @classmethod
    def non_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("tag text must be non-empty")
        return value


class CompletionRequest(BaseModel):
    model_config = ConfigDict(frozen=True)

    model_id: str
    prompt: str = Field(min_length=1)
    temperature: float = Field(default=0.0, ge=0.0)
    max_tokens: int = Field(default=1024, ge=1)
    tag_protocol: Optional[FinalTag] = None

    def canonical(self) -> str:
        payload = {
            "max_tokens": self.max_tokens,
            "model_id": self.model_id,
            "prompt": self.prompt,
            "temperature": float(self.temperature),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


class TranscriptSource(str, Enum):
    LIVE = "Live"
    CACHE = "Cache"
    SCRIPTED = "Scripted"


class Transcript(BaseModel):
    model_config = ConfigDict(frozen=True)

    request_digest: str
    model_id: str
    prompt: str
    raw_completion: str
    parsed_final: Optional[str] = None
    created_at: datetime
    source: TranscriptSource
