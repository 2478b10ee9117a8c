"""Pure numpy texture-matrix kernels (fallback for the compiled extension).

All kernels operate on a 3D ``int32`` level array where 0 marks out-of-ROI
voxels and in-ROI voxels carry levels ``1..num_levels``. 2D grids are passed
as shape ``(1, H, W)``, which makes the 26-voxel neighborhoods used here
degenerate to the 8-voxel 2D ones.
"""

from __future__ import annotations

import itertools
from typing import Tuple

import numpy as np
from scipy import ndimage

NAME = "python"

_FULL_OFFSETS = tuple(
    off for off in itertools.product((-1, 0, 1), repeat=3) if off != (0, 0, 0)
)


def _shift_slices(shape, offset):
    """Slice pairs (src, dst) so that src[v] and dst[v] are offset-separated."""
    src, dst = [], []
    for n, o in zip(shape, offset):
        if o >= 0:
            src.append(slice(0, max(n - o, 0)))
            dst.append(slice(min(o, n), n))
        else:
            src.append(slice(min(-o, n), n))
            dst.append(slice(0, max(n + o, 0)))
    return tuple(src), tuple(dst)


def glcm_pairs(levels: np.ndarray, num_levels: int, offset: Tuple[int, int, int]) -> np.ndarray:
    """One-directional co-occurrence counts; both voxels must be in-ROI."""
    a_sl, b_sl = _shift_slices(levels.shape, offset)
    a = levels[a_sl].ravel()
    b = levels[b_sl].ravel()
    valid = (a > 0) & (b > 0)
    if not valid.any():
        return np.zeros((num_levels, num_levels), dtype=np.float64)
    flat = (a[valid].astype(np.int64) - 1) * num_levels + (b[valid] - 1)
    counts = np.bincount(flat, minlength=num_levels * num_levels)
    return counts.astype(np.float64).reshape(num_levels, num_levels)


def _rle_accumulate(line: np.ndarray, counts: np.ndarray) -> None:
    """Add every maximal nonzero run of ``line`` into the (level, length) counts."""
    n = line.size
    if n == 0:
        return
    change = np.flatnonzero(line[1:] != line[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [n]))
    vals = line[starts]
    keep = vals > 0
    if keep.any():
        np.add.at(counts, (vals[keep] - 1, ends[keep] - starts[keep] - 1), 1.0)


def glrlm_counts(levels: np.ndarray, num_levels: int, offset: Tuple[int, int, int]) -> np.ndarray:
    """Maximal-run counts along one direction; runs break at ROI boundaries."""
    shape = levels.shape
    counts = np.zeros((num_levels, max(shape)), dtype=np.float64)
    # Line start voxels: the predecessor along -offset falls outside the grid.
    start = np.zeros(shape, dtype=bool)
    for ax, o in enumerate(offset):
        idx = [slice(None)] * 3
        if o > 0:
            idx[ax] = slice(0, min(o, shape[ax]))
        elif o < 0:
            idx[ax] = slice(max(shape[ax] + o, 0), shape[ax])
        else:
            continue
        start[tuple(idx)] = True
    coords = np.argwhere(start)
    steps = np.full(len(coords), max(shape), dtype=np.int64)
    for ax, o in enumerate(offset):
        if o > 0:
            steps = np.minimum(steps, shape[ax] - coords[:, ax])
        elif o < 0:
            steps = np.minimum(steps, coords[:, ax] + 1)
    # Gather all lines of equal length in one fancy-indexing block, then
    # run-length encode the zero-padded flattened block (0 breaks runs).
    for n in np.unique(steps):
        sel = coords[steps == n]
        t = np.arange(n)
        idx = tuple(sel[:, ax, None] + t[None, :] * offset[ax] for ax in range(3))
        block = levels[idx]
        padded = np.concatenate([block, np.zeros((len(sel), 1), dtype=block.dtype)], axis=1)
        _rle_accumulate(padded.ravel(), counts)
    return counts


def glszm_zones(levels: np.ndarray, num_levels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Connected zones of equal level under full (26) connectivity.

    Returns parallel arrays of zone levels and zone sizes.
    """
    structure = np.ones((3, 3, 3), dtype=bool)
    zone_levels, zone_sizes = [], []
    for lv in np.unique(levels[levels > 0]):
        labeled, n_zones = ndimage.label(levels == lv, structure=structure)
        if n_zones == 0:
            continue
        sizes = np.bincount(labeled.ravel(), minlength=n_zones + 1)[1:]
        zone_levels.append(np.full(n_zones, lv, dtype=np.int64))
        zone_sizes.append(sizes.astype(np.int64))
    if not zone_levels:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(zone_levels), np.concatenate(zone_sizes)


def ngtdm_stats(levels: np.ndarray, num_levels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per-level summed |level - neighborhood mean| and contributing counts.

    Voxels without any in-ROI neighbor are excluded.
    """
    kernel = np.ones((3, 3, 3), dtype=np.float64)
    kernel[1, 1, 1] = 0.0
    in_roi = levels > 0
    nbr_sum = ndimage.correlate(levels.astype(np.float64), kernel, mode="constant", cval=0.0)
    nbr_cnt = ndimage.correlate(in_roi.astype(np.float64), kernel, mode="constant", cval=0.0)
    valid = in_roi & (nbr_cnt > 0.5)
    s = np.zeros(num_levels, dtype=np.float64)
    n = np.zeros(num_levels, dtype=np.int64)
    if valid.any():
        lv = levels[valid]
        diff = np.abs(lv - nbr_sum[valid] / nbr_cnt[valid])
        s = np.bincount(lv - 1, weights=diff, minlength=num_levels)[:num_levels]
        n = np.bincount(lv - 1, minlength=num_levels)[:num_levels].astype(np.int64)
    return s, n


def gldm_counts(levels: np.ndarray, num_levels: int, alpha: int) -> np.ndarray:
    """Counts of (level, dependence) pairs; dependence = similar in-ROI neighbors."""
    in_roi = levels > 0
    dep = np.zeros(levels.shape, dtype=np.int64)
    for off in _FULL_OFFSETS:
        a_sl, b_sl = _shift_slices(levels.shape, off)
        a = levels[a_sl]
        b = levels[b_sl]
        ok = (a > 0) & (b > 0) & (np.abs(a - b) <= alpha)
        dep[a_sl] += ok
    max_dep = len(_FULL_OFFSETS)
    flat = (levels[in_roi].astype(np.int64) - 1) * (max_dep + 1) + dep[in_roi]
    counts = np.bincount(flat, minlength=num_levels * (max_dep + 1))
    return counts.astype(np.float64).reshape(num_levels, max_dep + 1)
