"""Near-duplicate image removal via 64-bit difference hashes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from PIL import Image

from .model import SOURCE_PRIORITY, ArtworkRecord

DEFAULT_DEDUP_THRESHOLD = 10

# dHash layout: the source is box-filter averaged to 9 columns x 8 rows;
# bit (row*8 + col) of the hash is set iff small[row, col] > small[row, col+1].
_HASH_COLS = 9
_HASH_ROWS = 8


@dataclass(frozen=True)
class HashEntry:
    id: str
    phash: int


@dataclass(frozen=True)
class DuplicateCluster:
    member_ids: frozenset
    survivor_id: Optional[str] = None


class UndecodableImageError(ValueError):
    pass


def _box_filter_matrix(n_out: int, n_in: int) -> np.ndarray:
    """Rows average contiguous source spans [k*n_in/n_out, (k+1)*n_in/n_out) with fractional edge weights."""
    m = np.zeros((n_out, n_in), dtype=np.float64)
    for k in range(n_out):
        lo = k * n_in / n_out
        hi = (k + 1) * n_in / n_out
        for p in range(int(np.floor(lo)), min(int(np.ceil(hi)), n_in)):
            overlap = min(hi, p + 1) - max(lo, p)
            if overlap > 0:
                m[k, p] = overlap
        m[k] /= m[k].sum()
    return m


def perceptual_hash(image: np.ndarray) -> int:
    """Difference hash of a 2D grayscale raster; strict > so flat images hash to 0."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a non-empty 2D grayscale raster, got shape {img.shape}")
    h, w = img.shape
    small = _box_filter_matrix(_HASH_ROWS, h) @ img @ _box_filter_matrix(_HASH_COLS, w).T
    value = 0
    for i in range(_HASH_ROWS):
        for j in range(_HASH_COLS - 1):
            if small[i, j] > small[i, j + 1]:
                value |= 1 << (i * 8 + j)
    return value


def hash_image_file(path: str) -> int:
    """Decode an image file to grayscale and hash it."""
    try:
        with Image.open(path) as im:
            gray = np.asarray(im.convert("L"))
    except Exception as exc:
        raise UndecodableImageError(f"{path}: {exc}") from exc
    return perceptual_hash(gray)


def hamming_distance(a: int, b: int) -> int:
    return (a ^ b).bit_count()


def find_duplicates(entries: list[HashEntry], threshold: int) -> list[DuplicateCluster]:
    """Connected components of the <=threshold Hamming graph; singletons included."""
    if not 0 <= threshold <= 64:
        raise ValueError(f"threshold must be in [0, 64], got {threshold}")
    n = len(entries)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for i in range(n):
        for j in range(i + 1, n):
            if hamming_distance(entries[i].phash, entries[j].phash) <= threshold:
                union(i, j)

    groups: dict[int, set] = {}
    for i, e in enumerate(entries):
        groups.setdefault(find(i), set()).add(e.id)
    clusters = [DuplicateCluster(member_ids=frozenset(ids)) for ids in groups.values()]
    clusters.sort(key=lambda c: min(c.member_ids))
    return clusters


def select_survivors(
    clusters: list[DuplicateCluster], records: list[ArtworkRecord]
) -> list[DuplicateCluster]:
    """Pick the richest record per cluster; ties fall to source priority, then smallest id."""
    by_id = {r.id: r for r in records}
    out = []
    for cluster in clusters:
        for member in cluster.member_ids:
            if member not in by_id:
                raise KeyError(f"unknown member id: {member}")
        survivor = min(
            cluster.member_ids,
            key=lambda mid: (
                -by_id[mid].filled_field_count(),
                SOURCE_PRIORITY[by_id[mid].source],
                mid,
            ),
        )
        out.append(DuplicateCluster(member_ids=cluster.member_ids, survivor_id=survivor))
    return out
