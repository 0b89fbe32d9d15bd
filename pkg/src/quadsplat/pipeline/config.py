from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

from ..geometry import ALPHA_MIN

T = TypeVar("T")


@dataclass(frozen=True)
class RenderConfig:
    tile_size: int = 16
    alpha_min: float = ALPHA_MIN
    alpha_max: float = 0.99
    t_stop: float = 1e-4
    near_clip: float = 0.2
    low_pass: float = 0.3
    sh_degree: Optional[int] = None  # None: use the scene's degree
    background: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    threads: Optional[int] = None  # None: available parallelism


def resolve_threads(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("QUADBOX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def chunk_bounds(n: int, parts: int) -> List[Tuple[int, int]]:
    parts = max(1, min(parts, n)) if n else 1
    edges = [n * i // parts for i in range(parts + 1)]
    return list(zip(edges[:-1], edges[1:]))


def parallel_map(fn: Callable[..., T], jobs: Sequence, threads: int) -> List[T]:
    """Map preserving input order; results never depend on ``threads``."""
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))
