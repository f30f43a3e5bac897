import hashlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence, TypeVar

import structlog

from benchmark.dataset import SAMPLE_DATASET_PATH, dump_dataset, file_digest, load_dataset
from benchmark.models import Dataset

logger = structlog.get_logger(__name__)

Job = TypeVar("Job")
Result = TypeVar("Result")


def fan_out(jobs: Sequence[Job], work: Callable[[Job], Result], parallelism: int) -> list[Result]:
    """Run `work` over jobs with bounded parallelism; results come back in job order.

    The first exception raised by any job propagates after the pool shuts down.
    """
    logger.info("📦 Processing batch", jobs=len(jobs), parallelism=parallelism)
    if parallelism <= 1 or len(jobs) <= 1:
        return [work(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(work, jobs))


def resolve_dataset(path: Optional[str], dataset: Optional[Dataset] = None) -> tuple[Dataset, str, Path]:
    """Dataset, its digest, and the directory its relative references resolve against."""
    if dataset is not None:
        digest = hashlib.sha256(dump_dataset(dataset).encode("utf-8")).hexdigest()
        return dataset, digest, Path(path).parent if path else SAMPLE_DATASET_PATH.parent
    dataset_path = Path(path) if path else SAMPLE_DATASET_PATH
    return load_dataset(dataset_path), file_digest(dataset_path), dataset_path.parent
