"""
Thread fan-out for independent jobs (parameter sweeps, Monte Carlo runs).

Jobs are submitted from an asyncio loop through run_in_executor and gathered
in submission order, so results do not depend on scheduling.
"""

from __future__ import annotations

import asyncio
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from core import ValidationError

logger = logging.getLogger(__name__)

THREADS_ENV = "GEOLINE_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def thread_limit(threads: int | None = None) -> int:
    """Worker count: explicit value, else GEOLINE_THREADS, else cpu count."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV)
        if raw is None or raw.strip() == "":
            return os.cpu_count() or 1
        try:
            threads = int(raw)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if threads < 1:
        raise ValidationError(f"thread count must be >= 1, got {threads}")
    return threads


async def _gather(fn: Callable[[T], R], items: list[T], threads: int) -> list[R]:
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="geoline") as pool:
        return await asyncio.gather(*(loop.run_in_executor(pool, fn, item) for item in items))


def run_parallel(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    items = list(items)
    if not items:
        return []
    workers = min(thread_limit(threads), len(items))
    logger.debug("running %d jobs on %d threads", len(items), workers)
    if workers == 1:
        return [fn(item) for item in items]
    return asyncio.run(_gather(fn, items, workers))
