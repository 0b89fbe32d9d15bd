"""Duplicate-with-keys and sort stages.

A pair key packs the tile id into the high 32 bits and the float32 depth
bit pattern into the low 32 bits; for positive depths the bit pattern is
monotone, so sorting the integer keys groups pairs by tile and orders them
front to back.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CapacityMismatch
from ..quadbox import BoundStrategy
from ..traversal import TileGrid, qpass_batch
from .config import chunk_bounds, parallel_map
from .project import ProjectedSplats


@dataclass(eq=False)
class SplatPairs:
    keys: np.ndarray  # uint64
    values: np.ndarray  # int64 splat row

    def __len__(self) -> int:
        return self.keys.shape[0]

    @property
    def tile_ids(self) -> np.ndarray:
        return (self.keys >> np.uint64(32)).astype(np.int64)


@dataclass(eq=False)
class SortedPairs(SplatPairs):
    ranges: np.ndarray = None  # (num_tiles, 2) start, end


def depth_bits(depth: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(depth, dtype=np.float32).view(np.uint32).astype(np.uint64)


def make_keys(tile_ids: np.ndarray, depth: np.ndarray) -> np.ndarray:
    return (tile_ids.astype(np.uint64) << np.uint64(32)) | depth_bits(depth)


def duplicate_with_keys(splats: ProjectedSplats, strategy: BoundStrategy, grid: TileGrid,
                        threads: int = 1) -> SplatPairs:
    """One keyed pair per (splat, covered tile), in splat order."""
    offsets = np.concatenate([[0], np.cumsum(splats.tile_count)])
    total = int(offsets[-1])

    def emit(bounds):
        lo, hi = bounds
        part = splats.take(np.arange(lo, hi))
        rows, tiles = qpass_batch(*part.boxes(strategy), grid)
        return rows + lo, tiles

    parts = parallel_map(emit, chunk_bounds(len(splats), threads), threads)
    rows = np.concatenate([p[0] for p in parts])
    tiles = np.concatenate([p[1] for p in parts])
    if rows.size != total:
        raise CapacityMismatch(f"emitted {rows.size} pairs, tile counts sum to {total}")
    per = np.bincount(rows, minlength=len(splats))
    if not np.array_equal(per, splats.tile_count):
        bad = int(np.argmax(per != splats.tile_count))
        raise CapacityMismatch(
            f"splat {bad} emitted {per[bad]} pairs but counted {splats.tile_count[bad]}"
        )
    return SplatPairs(make_keys(tiles, splats.depth[rows]), rows.astype(np.int64))


def sort_pairs(pairs: SplatPairs, num_tiles: int) -> SortedPairs:
    """Sort by the 64-bit key, equal keys ordered by ascending splat index."""
    order = np.lexsort((pairs.values, pairs.keys))
    keys = pairs.keys[order]
    values = pairs.values[order]
    tile_ids = (keys >> np.uint64(32)).astype(np.int64)
    ids = np.arange(num_tiles)
    ranges = np.stack(
        [np.searchsorted(tile_ids, ids, "left"), np.searchsorted(tile_ids, ids, "right")], -1
    )
    return SortedPairs(keys, values, ranges)
