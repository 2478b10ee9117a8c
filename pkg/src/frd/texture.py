"""Gray-level discretization and the five texture matrices.

Conventions (fixed across the package and documented for reproducibility):

* Discretization uses a fixed number of equal-width bins over the ROI
  intensity range; the ROI maximum falls in the top bin and a constant ROI
  collapses to a single level.
* GLCM pairs, runs, zones, neighborhoods and dependencies never cross the
  ROI boundary; out-of-ROI voxels break runs and zones.
* Zone/neighbor connectivity is full: 8 neighbors in 2D, 26 in 3D.
* Direction sets contain one representative per +/- offset pair:
  4 offsets in 2D, 13 in 3D.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from frd import backends
from frd.grid import ImageGrid, RoiMask


def directions(dims: int) -> Tuple[Tuple[int, ...], ...]:
    """Unique half-space unit offsets: 4 for 2D grids, 13 for 3D."""
    if dims not in (2, 3):
        raise ValueError(f"dims must be 2 or 3, got {dims}")
    offs = []
    for off in itertools.product((-1, 0, 1), repeat=dims):
        nonzero = [o for o in off if o != 0]
        if nonzero and nonzero[0] > 0:
            offs.append(off)
    return tuple(offs)


@dataclass(frozen=True)
class DiscretizedGrid:
    """Integer gray levels per voxel; 0 marks out-of-ROI voxels."""

    levels: np.ndarray
    num_levels: int

    def __post_init__(self):
        levels = np.ascontiguousarray(self.levels, dtype=np.intc)
        if levels.ndim not in (2, 3):
            raise ValueError(f"level grid must be 2D or 3D, got {levels.ndim}D")
        in_roi = levels > 0
        if not in_roi.any():
            raise ValueError("discretized grid has no in-ROI voxel")
        if levels.min() < 0 or levels.max() > self.num_levels:
            raise ValueError("levels out of range [0, num_levels]")
        object.__setattr__(self, "levels", levels)

    @property
    def dims(self) -> int:
        return self.levels.ndim

    @property
    def n_voxels(self) -> int:
        """Number of in-ROI voxels."""
        return int((self.levels > 0).sum())

    def as3d(self) -> np.ndarray:
        if self.levels.ndim == 2:
            return self.levels.reshape((1,) + self.levels.shape)
        return self.levels


def discretize(image: ImageGrid, mask: Optional[RoiMask] = None, bin_count: int = 32) -> DiscretizedGrid:
    """Map in-ROI intensities to levels 1..bin_count with equal-width bins.

    Bins span [ROI min, ROI max]; the maximum maps to the top bin. A constant
    ROI maps every voxel to level 1 with num_levels=1.
    """
    if bin_count < 2:
        raise ValueError(f"bin_count must be >= 2, got {bin_count}")
    if mask is not None:
        mask.check_matches(image)
        roi = mask.membership
    else:
        roi = np.ones(image.shape, dtype=bool)
    vals = image.data[roi]
    lo = vals.min()
    hi = vals.max()
    levels = np.zeros(image.shape, dtype=np.intc)
    if hi == lo:
        levels[roi] = 1
        return DiscretizedGrid(levels, 1)
    scaled = np.floor((vals - lo) * (bin_count / (hi - lo))).astype(np.intc) + 1
    np.clip(scaled, 1, bin_count, out=scaled)
    levels[roi] = scaled
    return DiscretizedGrid(levels, bin_count)


# ---------------------------------------------------------------------------
# Matrix containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Glcm:
    """Symmetric normalized co-occurrence matrix for one direction."""

    probs: np.ndarray  # (L, L), sums to 1 when n_pairs > 0
    direction: Tuple[int, ...]
    distance: int
    n_pairs: float  # raw symmetric pair count

    @property
    def empty(self) -> bool:
        return self.n_pairs == 0


@dataclass(frozen=True)
class Glrlm:
    """Run-length counts (level x length) for one direction."""

    counts: np.ndarray
    direction: Tuple[int, ...]
    n_voxels: int


@dataclass(frozen=True)
class Glszm:
    """Zone counts (level x size) under full connectivity."""

    counts: np.ndarray
    n_voxels: int


@dataclass(frozen=True)
class Ngtdm:
    """Per-level neighborhood gray-tone difference sums and counts."""

    s: np.ndarray
    n: np.ndarray
    num_levels: int

    @property
    def empty(self) -> bool:
        return int(self.n.sum()) == 0


@dataclass(frozen=True)
class Gldm:
    """Dependence counts (level x dependence); column d holds dependence d."""

    counts: np.ndarray
    n_voxels: int


def _offset3(direction: Sequence[int], dims: int, distance: int = 1) -> Tuple[int, int, int]:
    if len(direction) != dims:
        raise ValueError(f"direction {direction} does not match grid dims {dims}")
    if all(o == 0 for o in direction):
        raise ValueError("zero direction vector")
    off = tuple(int(o) * distance for o in direction)
    if dims == 2:
        off = (0,) + off
    return off  # type: ignore[return-value]


def build_glcm(grid: DiscretizedGrid, direction: Sequence[int], distance: int = 1) -> Glcm:
    """Symmetric normalized co-occurrence matrix at offset direction*distance."""
    if distance < 1:
        raise ValueError(f"distance must be >= 1, got {distance}")
    off = _offset3(direction, grid.dims, distance)
    raw = backends.active().glcm_pairs(grid.as3d(), grid.num_levels, off)
    sym = raw + raw.T
    total = sym.sum()
    probs = sym / total if total > 0 else sym
    return Glcm(probs=probs, direction=tuple(direction), distance=distance, n_pairs=float(total))


def build_glrlm(grid: DiscretizedGrid, direction: Sequence[int]) -> Glrlm:
    """Maximal-run-length counts along one direction."""
    off = _offset3(direction, grid.dims)
    counts = backends.active().glrlm_counts(grid.as3d(), grid.num_levels, off)
    counts = _trim_columns(counts)
    return Glrlm(counts=counts, direction=tuple(direction), n_voxels=grid.n_voxels)


def build_glszm(grid: DiscretizedGrid) -> Glszm:
    """Zone-size counts over maximal connected equal-level components."""
    zone_levels, zone_sizes = backends.active().glszm_zones(grid.as3d(), grid.num_levels)
    max_size = int(zone_sizes.max()) if zone_sizes.size else 1
    counts = np.zeros((grid.num_levels, max_size), dtype=np.float64)
    np.add.at(counts, (zone_levels - 1, zone_sizes - 1), 1.0)
    return Glszm(counts=counts, n_voxels=grid.n_voxels)


def build_ngtdm(grid: DiscretizedGrid) -> Ngtdm:
    """Neighborhood gray-tone difference statistics (s_i, n_i)."""
    s, n = backends.active().ngtdm_stats(grid.as3d(), grid.num_levels)
    return Ngtdm(s=s, n=n, num_levels=grid.num_levels)


def build_gldm(grid: DiscretizedGrid, alpha: int = 0) -> Gldm:
    """Dependence counts: neighbors whose level differs by at most alpha."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    counts = backends.active().gldm_counts(grid.as3d(), grid.num_levels, alpha)
    counts = _trim_columns(counts)
    return Gldm(counts=counts, n_voxels=grid.n_voxels)


def _trim_columns(counts: np.ndarray) -> np.ndarray:
    """Drop trailing all-zero columns, keeping at least one."""
    nonzero = np.flatnonzero(counts.any(axis=0))
    last = int(nonzero[-1]) if nonzero.size else 0
    return np.ascontiguousarray(counts[:, : last + 1])
