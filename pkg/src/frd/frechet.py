"""Feature normalization, Gaussian fitting and the Fréchet radiomics distance.

The distance between datasets X and Y is the Fréchet distance of the
multivariate Gaussians fitted to their calibrated feature matrices:

    FD(X, Y) = ||mu_X - mu_Y||^2 + tr(S_X + S_Y - 2 (S_X S_Y)^(1/2))

Feature values are min-max normalized and calibrated to [0, 7.456] first.
The default 'joint' mode computes per-feature bounds over the union of both
datasets; per-dataset bounds would erase location differences between the
two distributions (and break FD(A, shifted A) > 0), so the union is the
default while both alternatives stay selectable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from frd.config import CALIBRATION_MAX, NORMALIZATION_MODES
from frd.features import FeatureVector
from frd.grid import ImageGrid


@dataclass(frozen=True)
class FeatureMatrix:
    """N images x F features, with names and per-row image identifiers."""

    values: np.ndarray
    feature_names: Tuple[str, ...]
    image_ids: Tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValueError(f"feature matrix must be (N>=1, F), got {values.shape}")
        if values.shape[1] != len(self.feature_names):
            raise ValueError("feature name count does not match matrix width")
        if values.shape[0] != len(self.image_ids):
            raise ValueError("image id count does not match matrix height")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "image_ids", tuple(self.image_ids))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_vectors(cls, vectors: Sequence[FeatureVector]) -> "FeatureMatrix":
        if not vectors:
            raise ValueError("no feature vectors")
        return cls(
            values=np.stack([v.values for v in vectors]),
            feature_names=vectors[0].names,
            image_ids=tuple(v.image_id for v in vectors),
        )

    def to_csv(self, path, fingerprint: Optional[str] = None) -> None:
        """Write `image_id,<names>` rows; floats carry 17 significant digits."""
        lines = []
        if fingerprint:
            lines.append(f"# config_fingerprint={fingerprint}")
        lines.append(",".join(("image_id",) + self.feature_names))
        for image_id, row in zip(self.image_ids, self.values):
            lines.append(image_id + "," + ",".join(f"{v:.17g}" for v in row))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_csv(cls, path, expected_names: Optional[Tuple[str, ...]] = None) -> "FeatureMatrix":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"features CSV not found: {path}")
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        if not rows or rows[0][0] != "image_id":
            raise ValueError(f"bad features CSV header in {path}")
        names = tuple(rows[0][1:])
        if expected_names is not None and names != tuple(expected_names):
            raise ValueError(f"features CSV header does not match the canonical catalog: {path}")
        ids, data = [], []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(names) + 1:
                raise ValueError(f"{path}:{lineno}: expected {len(names) + 1} columns")
            ids.append(row[0])
            data.append([float(v) for v in row[1:]])
        return cls(values=np.asarray(data), feature_names=names, image_ids=tuple(ids))


@dataclass(frozen=True)
class NormalizationBounds:
    """Per-feature min/max used for scaling, plus the calibration constant."""

    lo: np.ndarray
    hi: np.ndarray
    calibration_max: float = CALIBRATION_MAX

    @property
    def degenerate(self) -> np.ndarray:
        """Features whose observed range collapsed to a point (mapped to 0)."""
        return self.hi == self.lo

    def pairs(self) -> List[List[float]]:
        return [[float(a), float(b)] for a, b in zip(self.lo, self.hi)]


def _scale(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    ok = span > 0
    out = np.zeros_like(values)
    # ratio <= 1 holds exactly in floating point, so the calibrated values
    # can never exceed the calibration constant
    out[:, ok] = (values[:, ok] - lo[ok]) / span[ok] * CALIBRATION_MAX
    return out


def normalize_and_calibrate(
    real: FeatureMatrix, synth: FeatureMatrix, mode: str = "joint"
) -> Tuple[FeatureMatrix, FeatureMatrix, NormalizationBounds]:
    """Min-max normalize per feature and calibrate to [0, 7.456].

    joint: bounds over the union of both datasets (default).
    per-dataset: each dataset scaled by its own bounds (reported bounds are
    the real dataset's).
    reference-real: bounds from the real dataset applied to both; synthetic
    values outside the reference range are clipped into [0, 7.456].
    """
    if real.feature_names != synth.feature_names:
        raise ValueError("feature name mismatch between matrices")
    if mode not in NORMALIZATION_MODES:
        raise ValueError(f"unknown normalization mode {mode!r}")
    if mode == "joint":
        union = np.vstack([real.values, synth.values])
        lo, hi = union.min(axis=0), union.max(axis=0)
        real_s = _scale(real.values, lo, hi)
        synth_s = _scale(synth.values, lo, hi)
    elif mode == "per-dataset":
        lo, hi = real.values.min(axis=0), real.values.max(axis=0)
        lo_s, hi_s = synth.values.min(axis=0), synth.values.max(axis=0)
        real_s = _scale(real.values, lo, hi)
        synth_s = _scale(synth.values, lo_s, hi_s)
    else:  # reference-real
        lo, hi = real.values.min(axis=0), real.values.max(axis=0)
        real_s = _scale(real.values, lo, hi)
        synth_s = np.clip(_scale(synth.values, lo, hi), 0.0, CALIBRATION_MAX)
    bounds = NormalizationBounds(lo=lo, hi=hi)
    real_out = FeatureMatrix(real_s, real.feature_names, real.image_ids)
    synth_out = FeatureMatrix(synth_s, synth.feature_names, synth.image_ids)
    return real_out, synth_out, bounds


@dataclass(frozen=True)
class GaussianSummary:
    """Mean vector and covariance matrix fitted to a feature matrix."""

    mean: np.ndarray
    covariance: np.ndarray
    n: int


def fit_gaussian(features: FeatureMatrix) -> GaussianSummary:
    """Column means and sample covariance (1/(N-1); zero matrix when N=1).

    Rows are brought into a canonical (lexicographic) order first so the fit
    is bit-identical under row permutation despite float summation order.
    """
    values = features.values[np.lexsort(features.values.T[::-1])]
    mean = values.mean(axis=0)
    d = values.shape[1]
    if features.n == 1:
        cov = np.zeros((d, d))
    else:
        cov = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
        cov = (cov + cov.T) / 2.0
    return GaussianSummary(mean=mean, covariance=cov, n=features.n)


def sqrtm_psd(cov_a: np.ndarray, cov_b: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Symmetric square root of sqrt(A) @ B @ sqrt(A) via eigendecomposition.

    Its trace equals tr((A B)^(1/2)) for symmetric PSD A, B, which is the
    quantity the Fréchet distance needs, while staying real by construction.
    Eigenvalues in [-tol, 0) are clamped to zero; anything below -tol signals
    a broken covariance upstream and raises. Eigenvalues within relative
    rounding noise of zero (1e-12 of the largest) are floored to zero as
    well: rank-deficient covariances (N < d samples) otherwise leak
    sqrt(eps)-sized phantom contributions into the trace.
    """
    def _clamped_eigh(m: np.ndarray, what: str):
        w, v = np.linalg.eigh(m)
        if w.min() < -tol:
            raise ValueError(f"{what} has eigenvalue {w.min():.3e} below -{tol:g}")
        w = np.clip(w, 0.0, None)
        if w.max() > 0:
            w[w < w.max() * 1e-12] = 0.0
        return w, v

    wa, va = _clamped_eigh(cov_a, "covariance")
    sq_a = (va * np.sqrt(wa)) @ va.T
    inner = sq_a @ cov_b @ sq_a
    inner = (inner + inner.T) / 2.0
    wi, vi = _clamped_eigh(inner, "covariance product")
    return (vi * np.sqrt(wi)) @ vi.T


class FrechetResult(NamedTuple):
    value: float
    mean_term: float
    trace_term: float
    epsilon_applied: float


def frechet_distance(a: GaussianSummary, b: GaussianSummary, epsilon: float = 1e-6) -> FrechetResult:
    """Fréchet distance between two Gaussians with term breakdown.

    On a numerically non-finite square-root term, epsilon * I is added to
    both covariances and the computation retried once.
    """
    if a.mean.shape != b.mean.shape or a.covariance.shape != b.covariance.shape:
        raise ValueError("Gaussian dimension mismatch")
    delta = a.mean - b.mean
    mean_term = float(delta @ delta)

    def _trace_term(cov_a, cov_b) -> float:
        s = sqrtm_psd(cov_a, cov_b)
        return float(np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(s))

    epsilon_applied = 0.0
    try:
        trace_term = _trace_term(a.covariance, b.covariance)
        finite = np.isfinite(trace_term)
    except np.linalg.LinAlgError:
        finite = False
        trace_term = float("nan")
    if not finite:
        epsilon_applied = epsilon
        eye = np.eye(a.covariance.shape[0])
        trace_term = _trace_term(a.covariance + epsilon * eye, b.covariance + epsilon * eye)
        if not np.isfinite(trace_term):
            raise ValueError("Fréchet distance non-finite even after regularization")
    total = mean_term + trace_term
    if total < 0:
        if total < -1e-8:
            raise ValueError(f"Fréchet distance {total:.3e} below the negativity tolerance")
        total = 0.0
    return FrechetResult(total, mean_term, trace_term, epsilon_applied)


@dataclass(frozen=True)
class FrdReport:
    """Final FRD value plus provenance for reproducibility."""

    frd_value: float
    mean_term: float
    trace_term: float
    n_real: int
    n_synth: int
    normalization_mode: str
    epsilon_applied: float
    config_fingerprint: str
    bounds: NormalizationBounds

    def to_dict(self) -> dict:
        return {
            "frd": self.frd_value,
            "mean_term": self.mean_term,
            "trace_term": self.trace_term,
            "n_real": self.n_real,
            "n_synth": self.n_synth,
            "normalization_mode": self.normalization_mode,
            "epsilon_applied": self.epsilon_applied,
            "calibration_max": self.bounds.calibration_max,
            "config_fingerprint": self.config_fingerprint,
            "feature_bounds": self.bounds.pairs(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def frd(
    real: FeatureMatrix,
    synth: FeatureMatrix,
    mode: str = "joint",
    epsilon: float = 1e-6,
    fingerprint: str = "",
) -> FrdReport:
    """Normalize, fit Gaussians and compute the Fréchet radiomics distance."""
    real_s, synth_s, bounds = normalize_and_calibrate(real, synth, mode)
    g_real = fit_gaussian(real_s)
    g_synth = fit_gaussian(synth_s)
    result = frechet_distance(g_real, g_synth, epsilon)
    return FrdReport(
        frd_value=result.value,
        mean_term=result.mean_term,
        trace_term=result.trace_term,
        n_real=real.n,
        n_synth=synth.n,
        normalization_mode=mode,
        epsilon_applied=result.epsilon_applied,
        config_fingerprint=fingerprint,
        bounds=bounds,
    )


def mse_paired(a: Sequence[ImageGrid], b: Sequence[ImageGrid]) -> Tuple[float, float]:
    """Mean and population standard deviation of per-pair MSE values."""
    if len(a) != len(b):
        raise ValueError(f"paired MSE needs equal counts, got {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("paired MSE of empty lists")
    per_pair = []
    for idx, (x, y) in enumerate(zip(a, b)):
        if x.shape != y.shape:
            raise ValueError(f"pair {idx}: shape mismatch {x.shape} vs {y.shape}")
        per_pair.append(float(((x.data - y.data) ** 2).mean()))
    arr = np.asarray(per_pair)
    return float(arr.mean()), float(arr.std())
