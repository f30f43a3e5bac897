import threading
from datetime import datetime, timezone
from typing import Optional

import structlog

from db.transcript_store import TranscriptStore
from oracle.backends import Backend
from oracle.errors import BudgetExceededError, MalformedResponseError
from oracle.models import SCRIPTED_EPOCH, CompletionRequest, FinalTag, Transcript, TranscriptSource
from oracle.protocol import parse_final

logger = structlog.get_logger(__name__)


def _parsed(raw: str, tag: Optional[FinalTag]) -> Optional[str]:
    if tag is None:
        return None
    try:
        return parse_final(raw, tag)
    except MalformedResponseError:
        return None


class ModelOracle:
    """Cache-first access to a backend: every exchange is recorded in the transcript store."""

    def __init__(
        self,
        backend: Backend,
        store: Optional[TranscriptStore] = None,
        max_live_calls: Optional[int] = None,
    ):
        self.backend = backend
        self.store = store if store is not None else TranscriptStore()
        self.max_live_calls = max_live_calls
        self.live_calls = 0
        self._lock = threading.Lock()
        self._in_flight: dict[str, threading.Lock] = {}

    def _cached(self, cached: Transcript, request: CompletionRequest) -> Transcript:
        logger.debug("🔄 Cache hit", model_id=request.model_id, digest=cached.request_digest[:12])
        return cached.model_copy(
            update={
                "source": TranscriptSource.CACHE,
                "parsed_final": _parsed(cached.raw_completion, request.tag_protocol),
            }
        )

    def complete(self, request: CompletionRequest) -> Transcript:
        digest = request.digest()
        cached = self.store.get(digest)
        if cached is not None:
            return self._cached(cached, request)

        with self._lock:
            in_flight = self._in_flight.setdefault(digest, threading.Lock())
        # identical concurrent requests wait here; only the first reaches the backend
        with in_flight:
            cached = self.store.get(digest)
            if cached is not None:
                return self._cached(cached, request)

            with self._lock:
                if self.max_live_calls is not None and self.live_calls >= self.max_live_calls:
                    logger.error("❌ Live call budget exhausted", max_live_calls=self.max_live_calls)
                    raise BudgetExceededError(f"live call budget of {self.max_live_calls} exhausted")
                self.live_calls += 1

            logger.debug("📡 Calling backend", model_id=request.model_id, digest=digest[:12])
            raw = self.backend.generate(request)
            source = self.backend.source
            created_at = SCRIPTED_EPOCH if source == TranscriptSource.SCRIPTED else datetime.now(timezone.utc)
            transcript = Transcript(
                request_digest=digest,
                model_id=request.model_id,
                prompt=request.prompt,
                raw_completion=raw,
                parsed_final=_parsed(raw, request.tag_protocol),
                created_at=created_at,
                source=source,
            )
            self.store.append(transcript)
        with self._lock:
            self._in_flight.pop(digest, None)
        return transcript
