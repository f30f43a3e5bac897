"""
Model backends. A backend turns a CompletionRequest into raw completion text;
caching, budgets and tag parsing live in ModelOracle.
"""

import json
import os
from pathlib import Path
from typing import Callable, Optional, Protocol

import requests
import structlog
from tenacity import (
    RetryError,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from oracle.errors import (
    AuthFailureError,
    BackendUnavailableError,
    CacheMissError,
    TransientBackendError,
)
from oracle.models import CompletionRequest, TranscriptSource

logger = structlog.get_logger(__name__)

Responder = Callable[[CompletionRequest], str]


class Backend(Protocol):
    source: TranscriptSource

    def generate(self, request: CompletionRequest) -> str: ...


class ScriptedBackend:
    """Deterministic fake model: exact prompt lookups first, then an optional responder, then a default."""

    source = TranscriptSource.SCRIPTED

    def __init__(
        self,
        responses: Optional[dict[str, str]] = None,
        responder: Optional[Responder] = None,
        default: Optional[str] = None,
    ):
        self.responses = dict(responses or {})
        self.responder = responder
        self.default = default

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(responses=document.get("responses", {}), default=document.get("default"))

    def generate(self, request: CompletionRequest) -> str:
        if request.prompt in self.responses:
            return self.responses[request.prompt]
        if self.responder is not None:
            return self.responder(request)
        if self.default is not None:
            return self.default
        raise BackendUnavailableError(f"scripted backend has no response for prompt: {request.prompt[:60]!r}")


class CacheOnlyBackend:
    """Offline replay: reaching the backend at all means the transcript store missed."""

    source = TranscriptSource.CACHE

    def generate(self, request: CompletionRequest) -> str:
        raise CacheMissError(f"cache miss for {request.model_id} digest {request.digest()}")


class RemoteBackend:
    """HTTP JSON chat-completion client with exponential-backoff retries on transient failures."""

    source = TranscriptSource.LIVE

    def __init__(
        self,
        base_url: str,
        api_key_env: str,
        timeout_seconds: float = 60.0,
        max_attempts: int = 5,
        session: Optional[requests.Session] = None,
        backoff_min: float = 1.0,
        backoff_max: float = 30.0,
    ):
        api_key = os.getenv(api_key_env)
        if not api_key:
            raise AuthFailureError(f"Missing credential: environment variable {api_key_env} is not set")
        self.base_url = base_url.rstrip("/")
        self.timeout_seconds = timeout_seconds
        self.max_attempts = max_attempts
        self.backoff_min = backoff_min
        self.backoff_max = backoff_max
        self.session = session or requests.Session()
        self._headers = {"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"}

    def _post(self, request: CompletionRequest) -> str:
        payload = {
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        try:
            response = self.session.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=self._headers,
                timeout=self.timeout_seconds,
            )
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise TransientBackendError(f"transport error: {exc}") from exc

        if response.status_code in (401, 403):
            raise AuthFailureError(f"Authentication rejected ({response.status_code})")
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientBackendError(f"HTTP {response.status_code}")
        if response.status_code != 200:
            raise BackendUnavailableError(f"HTTP {response.status_code}: {response.text[:200]}")

        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailableError(f"unexpected response body: {response.text[:200]}") from exc
        if not isinstance(content, str):
            raise BackendUnavailableError("completion content is not text")
        return content

    def generate(self, request: CompletionRequest) -> str:
        retrying = Retrying(
            stop=stop_after_attempt(self.max_attempts),
            wait=wait_exponential(multiplier=1, min=self.backoff_min, max=self.backoff_max),
            retry=retry_if_exception_type(TransientBackendError),
            before_sleep=self._log_retry,
            reraise=False,
        )
        try:
            return retrying(self._post, request)
        except RetryError as exc:
            raise BackendUnavailableError(
                f"{request.model_id} unavailable after {self.max_attempts} attempts: {exc.last_attempt.exception()}"
            ) from exc

    def _log_retry(self, retry_state) -> None:
        logger.warning(
            "🔄 Retrying chat completion",
            attempt=retry_state.attempt_number,
            error=str(retry_state.outcome.exception()),
        )
