"""Deterministic synthetic phantoms: textured background plus an ellipsoidal
hyperintense lesion with a matching mask.

Phantoms stand in for clinical data in tests and acceptance runs. The
background is low-frequency smoothed noise (a flat background would zero out
most texture features), and every image derives its own RNG seed from the
dataset seed and its id, so outputs are byte-identical across reruns.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from frd import dataset_io
from frd.config import stable_hash64
from frd.dataset_io import DatasetManifest, ManifestEntry
from frd.grid import BoundingBox


@dataclass(frozen=True)
class PhantomSpec:
    count: int
    shape: Tuple[int, ...]
    lesion_radius: Tuple[float, float] = (5.0, 9.0)
    lesion_boost: float = 2.0
    background_level: float = 10000.0
    background_noise: float = 0.08
    background_smoothness: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if len(self.shape) not in (2, 3) or any(n < 8 for n in self.shape):
            raise ValueError(f"shape must be 2D/3D with extents >= 8, got {self.shape}")
        lo, hi = self.lesion_radius
        if not 0 < lo <= hi:
            raise ValueError(f"invalid lesion radius range {self.lesion_radius}")
        if hi >= min(self.shape) / 2:
            raise ValueError("lesion radius must stay below half the smallest extent")
        if self.lesion_boost <= 0:
            raise ValueError("lesion_boost must be > 0")

    @property
    def dims(self) -> int:
        return len(self.shape)


def _background(rng: np.random.Generator, spec: PhantomSpec) -> np.ndarray:
    noise = rng.normal(0.0, 1.0, size=spec.shape)
    smooth = ndimage.gaussian_filter(noise, sigma=spec.background_smoothness, mode="nearest")
    smooth /= smooth.std()
    bg = spec.background_level * (1.0 + spec.background_noise * smooth)
    return np.clip(bg, 1.0, None)


def _lesion_support(rng: np.random.Generator, spec: PhantomSpec) -> np.ndarray:
    _, r_hi = spec.lesion_radius
    center = [rng.uniform(r_hi + 1, n - r_hi - 1) for n in spec.shape]
    radii = [rng.uniform(*spec.lesion_radius) for _ in spec.shape]
    grids = np.ogrid[tuple(slice(0, n) for n in spec.shape)]
    dist2 = sum(((g - c) / r) ** 2 for g, c, r in zip(grids, center, radii))
    return dist2 <= 1.0


def _bbox_of(mask: np.ndarray) -> BoundingBox:
    coords = np.argwhere(mask)
    return BoundingBox(tuple(coords.min(axis=0)), tuple(coords.max(axis=0) + 1))


def _write_image(data: np.ndarray, path: Path, dims: int) -> None:
    if dims == 2:
        dataset_io.save_image_2d(np.clip(np.rint(data), 0, 65535), path, bit_depth=16)
    else:
        dataset_io.save_volume_3d(data, path)


def _write_mask(mask: np.ndarray, path: Path, dims: int) -> None:
    if dims == 2:
        dataset_io.save_image_2d(mask.astype(np.uint8) * 255, path, bit_depth=8)
    else:
        dataset_io.save_volume_3d(mask.astype(np.uint8), path, dtype=np.uint8)


def _suffix(dims: int) -> str:
    return ".png" if dims == 2 else ".nii.gz"


def generate_phantoms(
    spec: PhantomSpec, out_dir, include_masks_in_manifest: bool = True, fingerprint: str = ""
) -> DatasetManifest:
    """Generate `count` phantom images + masks and write a manifest.

    Mask files are always written; `include_masks_in_manifest=False` leaves
    them out of the manifest for unmasked (full-grid) feature extraction.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries: List[ManifestEntry] = []
    for i in range(spec.count):
        image_id = f"phantom{i:04d}"
        rng = np.random.default_rng((spec.seed ^ stable_hash64(image_id)) & 0xFFFFFFFFFFFFFFFF)
        bg = _background(rng, spec)
        support = _lesion_support(rng, spec)
        image = bg.copy()
        image[support] *= spec.lesion_boost
        img_path = out_dir / f"{image_id}{_suffix(spec.dims)}"
        mask_path = out_dir / f"{image_id}_mask{_suffix(spec.dims)}"
        _write_image(image, img_path, spec.dims)
        _write_mask(support, mask_path, spec.dims)
        entries.append(
            ManifestEntry(
                image_id,
                img_path,
                mask_path if include_masks_in_manifest else None,
                _bbox_of(support),
            )
        )
    manifest = DatasetManifest(tuple(entries), spec.dims)
    dataset_io.save_manifest(manifest, out_dir / "manifest.csv", fingerprint=fingerprint or None)
    return manifest


def generate_phase_series(
    spec: PhantomSpec, multipliers: Sequence[float], out_dir, fingerprint: str = ""
) -> Path:
    """Generate per-case DCE-like phase images where the lesion intensity
    follows the given per-phase multipliers; returns the case-table CSV path.

    Phase labels are 'pre' followed by 'P1', 'P2', ...
    """
    if not multipliers or any(m <= 0 for m in multipliers):
        raise ValueError("multipliers must be positive and non-empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = ["pre"] + [f"P{i}" for i in range(1, len(multipliers))]
    lines = []
    if fingerprint:
        lines.append(f"# config_fingerprint={fingerprint}")
    lines.append(",".join(["case_id", "phase", "image_path", "mask_path"]))
    for i in range(spec.count):
        case_id = f"case{i:04d}"
        rng = np.random.default_rng((spec.seed ^ stable_hash64(case_id)) & 0xFFFFFFFFFFFFFFFF)
        bg = _background(rng, spec)
        support = _lesion_support(rng, spec)
        mask_path = out_dir / f"{case_id}_mask{_suffix(spec.dims)}"
        _write_mask(support, mask_path, spec.dims)
        for label, mult in zip(labels, multipliers):
            image = bg.copy()
            image[support] *= mult
            img_path = out_dir / f"{case_id}_{label}{_suffix(spec.dims)}"
            _write_image(image, img_path, spec.dims)
            lines.append(f"{case_id},{label},{img_path.name},{mask_path.name}")
    table = out_dir / "cases.csv"
    table.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return table
