"""
Append-only transcript store: one JSON document per line, indexed in memory by request digest.

A corrupt line only loses that line; it is skipped (and logged) when the store is opened.
"""

import threading
from pathlib import Path
from typing import Optional

import structlog
from pydantic import ValidationError

from oracle.models import Transcript

logger = structlog.get_logger(__name__)


class TranscriptStore:
    def __init__(self, path: Optional[str | Path] = None):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        self._index: dict[str, Transcript] = {}
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        skipped = 0
        with self.path.open("r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                try:
                    transcript = Transcript.model_validate_json(line)
                except ValidationError:
                    skipped += 1
                    logger.warning("⚠️ Skipping corrupt transcript line", path=str(self.path), line=line_number)
                    continue
                # first record for a digest wins
                self._index.setdefault(transcript.request_digest, transcript)
        logger.info("🗄️ Transcript store loaded", path=str(self.path), records=len(self._index), skipped=skipped)

    def get(self, digest: str) -> Optional[Transcript]:
        return self._index.get(digest)

    def __contains__(self, digest: str) -> bool:
        return digest in self._index

    def __len__(self) -> int:
        return len(self._index)

    def digests(self) -> list[str]:
        return sorted(self._index)

    def append(self, transcript: Transcript) -> bool:
        """Persist a transcript unless its digest is already stored; returns True when written."""
        with self._lock:
            if transcript.request_digest in self._index:
                return False
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as handle:
                    handle.write(transcript.model_dump_json() + "\n")
                    handle.flush()
            self._index[transcript.request_digest] = transcript
            return True

    def compact(self) -> None:
        """Rewrite the file ordered by digest so concurrent runs leave byte-identical stores."""
        if self.path is None:
            return
        with self._lock:
            tmp_path = self.path.with_suffix(self.path.suffix + ".tmp")
            with tmp_path.open("w", encoding="utf-8") as handle:
                for digest in sorted(self._index):
                    handle.write(self._index[digest].model_dump_json() + "\n")
            tmp_path.replace(self.path)
