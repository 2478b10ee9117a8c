"""Dataset loading: manifest CSV, grayscale PNG, NIfTI-1 volumes, tumor crop.

Supported formats are deliberately narrow: 8/16-bit grayscale PNG for 2D
slices and single-file NIfTI-1 (optionally gzipped) for 3D volumes. Both have
bit-exact public layouts, and the writers here are byte-deterministic
(gzip members are written with mtime=0).
"""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from PIL import Image

from frd.grid import BoundingBox, ImageGrid, RoiMask

# NIfTI-1 datatype code -> numpy dtype (scalar types only)
_NIFTI_DTYPES = {
    2: np.uint8,
    4: np.int16,
    8: np.int32,
    16: np.float32,
    64: np.float64,
    256: np.int8,
    512: np.uint16,
}
_NIFTI_CODES = {np.dtype(v): k for k, v in _NIFTI_DTYPES.items()}

MANIFEST_HEADER = ["image_id", "image_path", "mask_path", "bbox"]


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    image_path: Path
    mask_path: Optional[Path]
    bbox: Optional[BoundingBox]


@dataclass(frozen=True)
class DatasetManifest:
    entries: Tuple[ManifestEntry, ...]
    dims: int

    def __len__(self) -> int:
        return len(self.entries)

    def image_ids(self) -> List[str]:
        return [e.image_id for e in self.entries]


def _dims_of_path(path: Path) -> int:
    name = path.name.lower()
    if name.endswith(".png"):
        return 2
    if name.endswith(".nii") or name.endswith(".nii.gz"):
        return 3
    raise ValueError(f"unsupported image format: {path} (expected .png, .nii or .nii.gz)")


def load_manifest(path) -> DatasetManifest:
    """Parse a dataset manifest CSV.

    Relative paths are resolved against the manifest's directory. Lines
    starting with ``#`` (the fingerprint preamble of generated manifests) are
    skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    base = path.parent
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or rows[0] != MANIFEST_HEADER:
        raise ValueError(
            f"manifest header must be exactly {','.join(MANIFEST_HEADER)!r}: {path}"
        )
    entries: List[ManifestEntry] = []
    seen = set()
    dims: Optional[int] = None
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
        image_id, image_path, mask_path, bbox_text = (c.strip() for c in row)
        if not image_id:
            raise ValueError(f"{path}:{lineno}: empty image_id")
        if any(ch in image_id for ch in ',"\n\r'):
            raise ValueError(
                f"{path}:{lineno}: image_id {image_id!r} contains CSV metacharacters"
            )
        if image_id in seen:
            raise ValueError(f"{path}:{lineno}: duplicate image_id {image_id!r}")
        seen.add(image_id)
        img = base / image_path if not Path(image_path).is_absolute() else Path(image_path)
        row_dims = _dims_of_path(img)
        if dims is None:
            dims = row_dims
        elif row_dims != dims:
            raise ValueError(
                f"{path}:{lineno}: mixed dimensionality ({row_dims}D image in a {dims}D manifest)"
            )
        mask: Optional[Path] = None
        if mask_path:
            mask = base / mask_path if not Path(mask_path).is_absolute() else Path(mask_path)
        bbox: Optional[BoundingBox] = None
        if bbox_text:
            parts = [p for p in bbox_text.split(",") if p.strip() != ""]
            if len(parts) != 2 * row_dims:
                raise ValueError(
                    f"{path}:{lineno}: bbox needs {2 * row_dims} integers for "
                    f"{row_dims}D data, got {len(parts)}"
                )
            try:
                vals = [int(p) for p in parts]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed bbox {bbox_text!r}") from exc
            bbox = BoundingBox(tuple(vals[:row_dims]), tuple(vals[row_dims:]))
        entries.append(ManifestEntry(image_id, img, mask, bbox))
    if dims is None:
        raise ValueError(f"manifest has no entries: {path}")
    return DatasetManifest(tuple(entries), dims)


def save_manifest(manifest: DatasetManifest, path, fingerprint: Optional[str] = None) -> None:
    """Write a manifest CSV with paths relative to its own directory."""
    path = Path(path)
    base = path.parent
    lines: List[str] = []
    if fingerprint:
        lines.append(f"# config_fingerprint={fingerprint}")
    lines.append(",".join(MANIFEST_HEADER))
    for e in manifest.entries:
        img = _relativize(e.image_path, base)
        msk = _relativize(e.mask_path, base) if e.mask_path else ""
        bbox = ""
        if e.bbox is not None:
            bbox = '"' + ",".join(str(v) for v in (*e.bbox.lo, *e.bbox.hi)) + '"'
        lines.append(f"{e.image_id},{img},{msk},{bbox}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _relativize(p: Path, base: Path) -> str:
    try:
        return p.relative_to(base).as_posix()
    except ValueError:
        return str(p)


# ---------------------------------------------------------------------------
# PNG (2D)
# ---------------------------------------------------------------------------

def load_image_2d(path) -> ImageGrid:
    """Load an 8- or 16-bit grayscale PNG as a float64 grid (no rescaling)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"image not found: {path}")
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise ValueError(f"corrupt or unreadable PNG: {path}: {exc}") from exc
    if img.format != "PNG":
        raise ValueError(f"not a PNG file: {path} (format {img.format})")
    if img.mode == "L":
        bits = 8
    elif img.mode in ("I;16", "I"):
        bits = 16
    else:
        raise ValueError(f"unsupported color type {img.mode!r} in {path} (grayscale only)")
    data = np.asarray(img, dtype=np.float64)
    return ImageGrid(data, bit_depth=bits)


def save_image_2d(data: np.ndarray, path, bit_depth: int) -> None:
    """Write integer-valued 2D data as an 8- or 16-bit grayscale PNG."""
    data = np.asarray(data)
    if data.ndim != 2:
        raise ValueError(f"PNG output requires 2D data, got {data.ndim}D")
    if bit_depth == 8:
        dtype, lim = np.uint8, 255
    elif bit_depth == 16:
        dtype, lim = np.uint16, 65535
    else:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    rounded = np.rint(data)
    if rounded.min() < 0 or rounded.max() > lim:
        raise ValueError(
            f"values [{rounded.min()}, {rounded.max()}] out of range for {bit_depth}-bit PNG"
        )
    Image.fromarray(rounded.astype(dtype)).save(Path(path), format="PNG")


# ---------------------------------------------------------------------------
# NIfTI-1 (3D)
# ---------------------------------------------------------------------------

def load_volume_3d(path) -> ImageGrid:
    """Load a single-file NIfTI-1 volume (.nii or .nii.gz).

    Applies ``scl_slope``/``scl_inter`` when the slope is nonzero and keeps
    the stored axis order. A trailing time axis of length 1 is squeezed.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"volume not found: {path}")
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    if len(raw) < 352:
        raise ValueError(f"not a NIfTI-1 file: {path} (too short)")
    for order in ("<", ">"):
        (sizeof_hdr,) = struct.unpack(order + "i", raw[:4])
        if sizeof_hdr == 348:
            break
    else:
        raise ValueError(f"not a NIfTI-1 file: {path} (bad header size)")
    magic = raw[344:348]
    if magic != b"n+1\x00":
        raise ValueError(f"not a NIfTI-1 file: {path} (bad magic {magic!r})")
    dim = struct.unpack(order + "8h", raw[40:56])
    datatype, _bitpix = struct.unpack(order + "2h", raw[70:74])
    (vox_offset,) = struct.unpack(order + "f", raw[108:112])
    scl_slope, scl_inter = struct.unpack(order + "2f", raw[112:120])
    ndim = dim[0]
    if ndim == 4 and dim[4] == 1:
        ndim = 3  # degenerate single time-point
    if ndim != 3:
        raise ValueError(f"{path}: only 3D volumes supported, header says {dim[0]}D")
    shape = tuple(int(n) for n in dim[1:4])
    if any(n < 1 for n in shape):
        raise ValueError(f"{path}: invalid volume shape {shape}")
    if datatype not in _NIFTI_DTYPES:
        raise ValueError(f"{path}: unsupported NIfTI datatype code {datatype}")
    dtype = np.dtype(_NIFTI_DTYPES[datatype]).newbyteorder(order)
    count = int(np.prod(shape))
    start = int(vox_offset)
    end = start + count * dtype.itemsize
    if end > len(raw):
        raise ValueError(f"{path}: truncated voxel data")
    data = np.frombuffer(raw[start:end], dtype=dtype).reshape(shape, order="F")
    data = data.astype(np.float64)
    if scl_slope != 0.0 and (scl_slope != 1.0 or scl_inter != 0.0):
        data = data * float(scl_slope) + float(scl_inter)
    return ImageGrid(data)


def save_volume_3d(data: np.ndarray, path, dtype=np.float64) -> None:
    """Write 3D data as single-file NIfTI-1; gzipped when the path ends in .gz."""
    data = np.asarray(data)
    if data.ndim != 3:
        raise ValueError(f"NIfTI output requires 3D data, got {data.ndim}D")
    dtype = np.dtype(dtype)
    if dtype not in _NIFTI_CODES:
        raise ValueError(f"unsupported output dtype {dtype}")
    code = _NIFTI_CODES[dtype]
    header = bytearray(348)
    struct.pack_into("<i", header, 0, 348)
    struct.pack_into("<8h", header, 40, 3, *data.shape, 1, 1, 1, 1)
    struct.pack_into("<2h", header, 70, code, dtype.itemsize * 8)
    struct.pack_into("<8f", header, 76, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    struct.pack_into("<f", header, 108, 352.0)
    struct.pack_into("<2f", header, 112, 0.0, 0.0)  # no scaling on write
    header[344:348] = b"n+1\x00"
    payload = bytes(header) + b"\x00\x00\x00\x00" + data.astype("<" + dtype.str[1:]).tobytes(order="F")
    path = Path(path)
    if path.name.lower().endswith(".gz"):
        with open(path, "wb") as fh:
            # filename='' and mtime=0 keep the gzip member byte-deterministic
            with gzip.GzipFile(filename="", fileobj=fh, mode="wb", mtime=0) as gz:
                gz.write(payload)
    else:
        path.write_bytes(payload)


# ---------------------------------------------------------------------------
# Generic loading helpers
# ---------------------------------------------------------------------------

def load_image(path) -> ImageGrid:
    """Load a PNG slice or NIfTI volume, chosen by file extension."""
    path = Path(path)
    if _dims_of_path(path) == 2:
        return load_image_2d(path)
    return load_volume_3d(path)


def load_mask(path) -> RoiMask:
    """Load a binary mask from PNG or NIfTI; any nonzero voxel is in-ROI."""
    grid = load_image(path)
    return RoiMask(grid.data != 0)


# ---------------------------------------------------------------------------
# Tumor-centered cropping
# ---------------------------------------------------------------------------

def tumor_crop(image: ImageGrid, bbox: BoundingBox) -> ImageGrid:
    """Crop a 2D slice to half the image extent per axis, centered on the bbox.

    The window is shifted (clamped) to stay inside the image; when the bbox
    is larger than the target extent on an axis, the crop equals the bbox on
    that axis.
    """
    if image.dims != 2:
        raise ValueError(f"tumor_crop expects a 2D image, got {image.dims}D")
    if bbox.dims != 2:
        raise ValueError(f"tumor_crop expects a 2D bbox, got {bbox.dims}D")
    bbox.check_inside(image.shape)
    windows = []
    for n, lo, hi in zip(image.shape, bbox.lo, bbox.hi):
        target = -(-n // 2)  # ceil(n / 2)
        if hi - lo > target:
            windows.append((lo, hi))
            continue
        start = (lo + hi - target) // 2
        start = min(max(start, 0), n - target)
        windows.append((start, start + target))
    (r0, r1), (c0, c1) = windows
    return ImageGrid(image.data[r0:r1, c0:c1].copy(), bit_depth=image.bit_depth)
