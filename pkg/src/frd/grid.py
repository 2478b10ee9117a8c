"""Core spatial types: intensity grids, ROI masks and bounding boxes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class ImageGrid:
    """A 2D or 3D scalar intensity grid.

    ``data`` is always float64. ``bit_depth`` records the sample depth of the
    source file (8 or 16 for PNG) so perturbed copies can be written back in
    the original format; it is None for volumes and generated arrays.
    """

    data: np.ndarray
    bit_depth: Optional[int] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim not in (2, 3):
            raise ValueError(f"image must be 2D or 3D, got {data.ndim}D")
        if any(n < 1 for n in data.shape):
            raise ValueError(f"image extents must all be >= 1, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("image contains non-finite intensities")
        object.__setattr__(self, "data", data)

    @property
    def dims(self) -> int:
        return self.data.ndim

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def value_range(self) -> Tuple[float, float]:
        return float(self.data.min()), float(self.data.max())


@dataclass(frozen=True)
class RoiMask:
    """Binary region-of-interest mask congruent with an :class:`ImageGrid`."""

    membership: np.ndarray

    def __post_init__(self):
        mem = np.asarray(self.membership, dtype=bool)
        if mem.ndim not in (2, 3):
            raise ValueError(f"mask must be 2D or 3D, got {mem.ndim}D")
        if not mem.any():
            raise ValueError("mask is empty (no voxel set)")
        object.__setattr__(self, "membership", mem)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.membership.shape

    @property
    def count(self) -> int:
        return int(self.membership.sum())

    def check_matches(self, image: ImageGrid) -> None:
        if self.shape != image.shape:
            raise ValueError(
                f"mask shape {self.shape} does not match image shape {image.shape}"
            )


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box with inclusive ``lo`` and exclusive ``hi`` corners."""

    lo: Tuple[int, ...]
    hi: Tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if len(lo) != len(hi):
            raise ValueError("bbox lo/hi dimensionality mismatch")
        if any(l >= h for l, h in zip(lo, hi)):
            raise ValueError(f"bbox must satisfy lo < hi per axis, got lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dims(self) -> int:
        return len(self.lo)

    def extent(self) -> Tuple[int, ...]:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    def check_inside(self, shape: Tuple[int, ...]) -> None:
        if len(shape) != self.dims:
            raise ValueError(f"bbox is {self.dims}D but image is {len(shape)}D")
        if any(l < 0 for l in self.lo) or any(h > n for h, n in zip(self.hi, shape)):
            raise ValueError(f"bbox {self.lo}..{self.hi} outside image extent {shape}")


def roi_values(image: ImageGrid, mask: Optional[RoiMask]) -> np.ndarray:
    """Intensities inside the ROI (the whole grid when no mask is given)."""
    if mask is None:
        return image.data.ravel()
    mask.check_matches(image)
    return image.data[mask.membership]
