"""
Run configuration: a JSON document mirroring RunConfig, plus the factory that
turns its backend section into a ready ModelOracle.
"""

import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Optional

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from config.settings import DEFAULT_API_KEY_ENV, get_settings
from db.transcript_store import TranscriptStore
from oracle.backends import CacheOnlyBackend, RemoteBackend, ScriptedBackend
from oracle.models import DEFAULT_FINAL_TAG
from oracle.oracle import ModelOracle
from pipelines.errors import RunConfigError

logger = structlog.get_logger(__name__)

TRANSCRIPTS_FILE = "transcripts.jsonl"


class BackendMode(str, Enum):
    SCRIPTED = "scripted"
    CACHE_ONLY = "cache-only"
    REMOTE = "remote"


class BackendConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: BackendMode = BackendMode.SCRIPTED
    script_path: Optional[str] = None
    transcript_path: Optional[str] = None
    base_url: Optional[str] = None
    api_key_env: str = DEFAULT_API_KEY_ENV
    timeout_seconds: float = Field(default=60.0, gt=0)
    max_live_calls: Optional[int] = Field(default=None, ge=0)
    max_attempts: int = Field(default=5, ge=1)


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model_ids: list[str] = Field(min_length=1)
    dataset_path: Optional[str] = None
    backend: BackendConfig = BackendConfig()
    parallelism: int = Field(default=4, ge=1)
    num_subquestions: int = Field(default=5, ge=1)
    incoherence_true: int = Field(default=5, ge=1)
    incoherence_false: int = Field(default=5, ge=1)
    followup_m: int = Field(default=10, ge=1)
    seed: int = 0
    temperature: float = Field(default=0.0, ge=0.0)
    judge_temperature: float = Field(default=0.0, ge=0.0)
    max_tokens: int = Field(default=1024, ge=1)
    final_tag: str = Field(default=DEFAULT_FINAL_TAG, min_length=1)
    understanding_threshold: float = Field(default=1.0, gt=0.0, le=1.0)
    batch_incoherence: bool = False
    seed_questions_path: Optional[str] = None
    k_values: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4, 5])
    judge_model_id: Optional[str] = None

    def config_digest(self) -> str:
        """Digest of the experiment parameters; backend and parallelism do not change results."""
        payload = self.model_dump(mode="json", exclude={"backend", "parallelism", "dataset_path", "seed_questions_path"})
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_run_config(path: str | Path, **overrides) -> RunConfig:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise RunConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise RunConfigError(f"invalid JSON in {path} at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise RunConfigError("run config must be a JSON object")
    return run_config_from_document(document, base_dir=path.parent, **overrides)


def run_config_from_document(document: dict, base_dir: Optional[Path] = None, **overrides) -> RunConfig:
    document = dict(document)
    backend = dict(document.get("backend") or {})
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "backend_mode":
            backend["mode"] = value
        else:
            document[key] = value
    if backend:
        document["backend"] = backend

    # relative paths in a config file are relative to that file
    if base_dir is not None:
        for holder, key in (
            (document, "dataset_path"),
            (document, "seed_questions_path"),
            (backend, "script_path"),
            (backend, "transcript_path"),
        ):
            if holder.get(key) and not Path(holder[key]).is_absolute():
                holder[key] = str(base_dir / holder[key])

    try:
        return RunConfig.model_validate(document)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = ".".join(str(part) for part in error["loc"])
        raise RunConfigError(f"{field}: {error['msg']}") from exc


def build_oracle(config: RunConfig, out_dir: Optional[Path] = None) -> ModelOracle:
    backend_config = config.backend
    if backend_config.transcript_path:
        store = TranscriptStore(backend_config.transcript_path)
    elif out_dir is not None:
        store = TranscriptStore(Path(out_dir) / TRANSCRIPTS_FILE)
    else:
        store = TranscriptStore()

    settings = get_settings()
    if backend_config.mode == BackendMode.SCRIPTED:
        if backend_config.script_path:
            try:
                backend = ScriptedBackend.from_file(backend_config.script_path)
            except (OSError, ValueError) as exc:
                raise RunConfigError(f"cannot read scripted responses {backend_config.script_path}: {exc}") from exc
        else:
            backend = ScriptedBackend()
    elif backend_config.mode == BackendMode.CACHE_ONLY:
        backend = CacheOnlyBackend()
    else:
        backend = RemoteBackend(
            base_url=backend_config.base_url or settings.api_base_url,
            api_key_env=backend_config.api_key_env,
            timeout_seconds=backend_config.timeout_seconds,
            max_attempts=backend_config.max_attempts,
        )

    max_live_calls = backend_config.max_live_calls
    if max_live_calls is None:
        max_live_calls = settings.max_live_calls
    logger.info(
        "🚀 Oracle ready",
        backend=backend_config.mode.value,
        cached_transcripts=len(store),
        max_live_calls=max_live_calls,
    )
    return ModelOracle(backend, store=store, max_live_calls=max_live_calls)
