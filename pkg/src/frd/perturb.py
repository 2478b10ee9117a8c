"""Quality-degrading perturbations (Gaussian noise / blur) and the FRD
monotonicity validation sweep.

Scale semantics: a scale of s% maps to a noise sigma of s/100 times the
per-image dynamic range, and to a blur sigma of s/100 times the smallest
spatial extent divided by a configurable constant (default 4). Noisy outputs
are clamped back into the original intensity range so the discretization
pipeline sees valid data.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from frd import dataset_io
from frd.config import FeatureConfig, stable_hash64
from frd.dataset_io import DatasetManifest, ManifestEntry
from frd.features import extract_all
from frd.frechet import FeatureMatrix, frd
from frd.grid import ImageGrid, RoiMask

log = logging.getLogger(__name__)

PERTURBATION_KINDS = ("noise", "blur")


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str
    scale_pct: float
    seed: int = 0
    blur_divisor: float = 4.0

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"kind must be one of {PERTURBATION_KINDS}, got {self.kind!r}")
        if not 0 <= self.scale_pct <= 100:
            raise ValueError(f"scale_pct must be in [0, 100], got {self.scale_pct}")
        if self.blur_divisor <= 0:
            raise ValueError("blur_divisor must be > 0")


def gaussian_noise(image: ImageGrid, spec: PerturbationSpec) -> ImageGrid:
    """Add zero-mean Gaussian noise with sigma = scale/100 * dynamic range.

    Output is clamped to the original [min, max]; a degenerate (constant)
    image is returned unchanged with a warning.
    """
    if spec.kind != "noise":
        raise ValueError(f"expected a noise spec, got kind={spec.kind!r}")
    lo, hi = image.value_range
    if spec.scale_pct == 0:
        return ImageGrid(image.data.copy(), bit_depth=image.bit_depth)
    if hi == lo:
        log.warning("gaussian_noise: constant image (range 0), returned unchanged")
        return ImageGrid(image.data.copy(), bit_depth=image.bit_depth)
    sigma = spec.scale_pct / 100.0 * (hi - lo)
    rng = np.random.default_rng(spec.seed)
    noisy = image.data + rng.normal(0.0, sigma, size=image.shape)
    np.clip(noisy, lo, hi, out=noisy)
    return ImageGrid(noisy, bit_depth=image.bit_depth)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(np.ceil(3.0 * sigma))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(t ** 2) / (2.0 * sigma ** 2))
    return kernel / kernel.sum()


def gaussian_blur(image: ImageGrid, spec: PerturbationSpec) -> ImageGrid:
    """Separable Gaussian blur with sigma = scale/100 * min extent / divisor.

    The kernel is truncated at radius ceil(3 sigma); borders replicate edge
    values. Scale 0 is an exact identity.
    """
    if spec.kind != "blur":
        raise ValueError(f"expected a blur spec, got kind={spec.kind!r}")
    sigma = spec.scale_pct / 100.0 * min(image.shape) / spec.blur_divisor
    if sigma == 0:
        return ImageGrid(image.data.copy(), bit_depth=image.bit_depth)
    kernel = _gaussian_kernel(sigma)
    out = image.data
    for axis in range(image.dims):
        out = ndimage.correlate1d(out, kernel, axis=axis, mode="nearest")
    return ImageGrid(out, bit_depth=image.bit_depth)


def perturb_image(image: ImageGrid, spec: PerturbationSpec) -> ImageGrid:
    if spec.kind == "noise":
        return gaussian_noise(image, spec)
    return gaussian_blur(image, spec)


def derived_seed(seed: int, image_id: str) -> int:
    """Per-image seed: base seed XOR a stable hash of the image id."""
    return (seed ^ stable_hash64(image_id)) & 0xFFFFFFFFFFFFFFFF


def perturb_dataset(
    manifest: DatasetManifest, spec: PerturbationSpec, out_dir, fingerprint: str = ""
) -> DatasetManifest:
    """Perturb every image into out_dir (original formats), copy masks,
    and write + return the new manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries: List[ManifestEntry] = []
    for entry in manifest.entries:
        try:
            image = dataset_io.load_image(entry.image_path)
            per_image = replace(spec, seed=derived_seed(spec.seed, entry.image_id))
            result = perturb_image(image, per_image)
            out_path = out_dir / entry.image_path.name
            if manifest.dims == 2:
                dataset_io.save_image_2d(result.data, out_path, image.bit_depth or 16)
            else:
                dataset_io.save_volume_3d(result.data, out_path)
            mask_path: Optional[Path] = None
            if entry.mask_path is not None:
                mask_path = out_dir / entry.mask_path.name
                mask_path.write_bytes(entry.mask_path.read_bytes())
            entries.append(ManifestEntry(entry.image_id, out_path, mask_path, entry.bbox))
        except (OSError, ValueError) as exc:
            raise ValueError(f"perturbing image {entry.image_id!r} failed: {exc}") from exc
    result_manifest = DatasetManifest(tuple(entries), manifest.dims)
    dataset_io.save_manifest(result_manifest, out_dir / "manifest.csv", fingerprint=fingerprint or None)
    return result_manifest


@dataclass(frozen=True)
class SweepRow:
    kind: str
    scale_pct: float
    dims: int
    frd_value: float


@dataclass(frozen=True)
class SweepResult:
    rows: Tuple[SweepRow, ...]
    fingerprint: str

    def column(self, kind: str) -> List[float]:
        return [r.frd_value for r in self.rows if r.kind == kind]

    def to_csv(self, path) -> None:
        lines = [f"# config_fingerprint={self.fingerprint}", "kind,scale_pct,dims,frd"]
        for r in self.rows:
            lines.append(f"{r.kind},{r.scale_pct:g},{r.dims},{r.frd_value:.17g}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_dataset(manifest: DatasetManifest) -> List[Tuple[str, ImageGrid, Optional[RoiMask]]]:
    out = []
    for entry in manifest.entries:
        image = dataset_io.load_image(entry.image_path)
        mask = dataset_io.load_mask(entry.mask_path) if entry.mask_path else None
        out.append((entry.image_id, image, mask))
    return out


def validation_sweep(
    manifest: DatasetManifest,
    kinds: Sequence[str],
    scales: Sequence[float],
    config: FeatureConfig,
    mode: str = "joint",
    seed: int = 0,
    epsilon: float = 1e-6,
    blur_divisor: float = 4.0,
    fingerprint: str = "",
) -> SweepResult:
    """FRD between the clean dataset and each perturbed copy, per (kind, scale).

    Perturbed copies are built in memory with per-image derived seeds, so the
    sweep is deterministic and leaves no intermediate files.
    """
    if not scales:
        raise ValueError("scales must be non-empty")
    if list(scales) != sorted(set(scales)):
        raise ValueError("scales must be strictly increasing")
    for kind in kinds:
        if kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {kind!r}")
    dataset = _load_dataset(manifest)
    clean = FeatureMatrix.from_vectors(
        [extract_all(img, msk, config, image_id=i) for i, img, msk in dataset]
    )
    rows: List[SweepRow] = []
    for kind in kinds:
        for scale in scales:
            try:
                vectors = []
                for image_id, image, mask in dataset:
                    spec = PerturbationSpec(
                        kind=kind,
                        scale_pct=scale,
                        seed=derived_seed(seed, image_id),
                        blur_divisor=blur_divisor,
                    )
                    perturbed = perturb_image(image, spec)
                    vectors.append(extract_all(perturbed, mask, config, image_id=image_id))
                perturbed_matrix = FeatureMatrix.from_vectors(vectors)
                report = frd(clean, perturbed_matrix, mode=mode, epsilon=epsilon, fingerprint=fingerprint)
            except ValueError as exc:
                raise ValueError(f"sweep cell (kind={kind}, scale={scale}) failed: {exc}") from exc
            rows.append(SweepRow(kind=kind, scale_pct=float(scale), dims=manifest.dims, frd_value=report.frd_value))
    return SweepResult(rows=tuple(rows), fingerprint=fingerprint)
