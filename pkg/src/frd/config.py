"""Run configuration and the fingerprint embedded in every output artifact."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

NORMALIZATION_MODES = ("joint", "per-dataset", "reference-real")

#: Upper bound of the calibrated feature range, the common range observed for
#: FID latent feature values.
CALIBRATION_MAX = 7.456


@dataclass(frozen=True)
class FeatureConfig:
    """Parameters of the 94-feature extraction."""

    bin_count: int = 32
    gldm_alpha: int = 0
    glcm_distance: int = 1
    dims: int = 2

    def __post_init__(self):
        if self.bin_count < 2:
            raise ValueError(f"bin_count must be >= 2, got {self.bin_count}")
        if self.gldm_alpha < 0:
            raise ValueError(f"gldm_alpha must be >= 0, got {self.gldm_alpha}")
        if self.glcm_distance < 1:
            raise ValueError(f"glcm_distance must be >= 1, got {self.glcm_distance}")
        if self.dims not in (2, 3):
            raise ValueError(f"dims must be 2 or 3, got {self.dims}")


@dataclass(frozen=True)
class RunConfig:
    """Full pipeline configuration: extraction, distance and perturbation knobs.

    Output paths are deliberately not part of the fingerprint so that the same
    analysis written to two directories is recognisable as the same run.
    """

    features: FeatureConfig = field(default_factory=FeatureConfig)
    norm_mode: str = "joint"
    epsilon: float = 1e-6
    seed: int = 0
    blur_divisor: float = 4.0
    threads: int = 1

    def __post_init__(self):
        if self.norm_mode not in NORMALIZATION_MODES:
            raise ValueError(
                f"norm_mode must be one of {NORMALIZATION_MODES}, got {self.norm_mode!r}"
            )
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.blur_divisor <= 0:
            raise ValueError("blur_divisor must be > 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def canonical(self) -> str:
        # dims is derived from the data, not a free knob; leaving it out keeps
        # the fingerprint identical across the artifacts of one analysis
        payload = {
            "bin_count": self.features.bin_count,
            "gldm_alpha": self.features.gldm_alpha,
            "glcm_distance": self.features.glcm_distance,
            "norm_mode": self.norm_mode,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "blur_divisor": self.blur_divisor,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @property
    def fingerprint(self) -> str:
        return fingerprint_of(self.canonical())


def fingerprint_of(canonical: str) -> str:
    """16-hex-digit digest of a canonical configuration string."""
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def stable_hash64(text: str) -> int:
    """Stable 64-bit hash of a string, used to derive per-image RNG seeds."""
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
