"""The 94-feature radiomics vector: 19 first-order + 24 GLCM + 16 GLRLM +
16 GLSZM + 5 NGTDM + 14 GLDM features.

Formulas follow the standardized open-source radiomics conventions. Where a
published formula has degenerate cases, the fixed rules are:

* Skewness and Kurtosis of a constant distribution are 0 (Kurtosis is not
  excess-corrected otherwise).
* GLCM Correlation with zero marginal variance is 1; MCC of a single-level
  matrix is 1.
* NGTDM Coarseness is capped at 1e6 when sum(s_i * p_i) = 0; Busyness and
  Strength are 0 when their denominators vanish.
* GLCM InverseVariance and DifferenceVariance of single-level matrices are 0.
* GLDM dependence d enters size-weighted formulas as (d + 1).
* Entropies use log2 with zero-probability terms dropped.
* RobustMeanAbsoluteDeviation is 0 when no sample falls inside the 10-90
  percentile window (possible only for tiny ROIs).
* Moments use population (1/N) normalization; percentiles interpolate
  linearly between order statistics.
* Idn/Idmn normalize by the matrix gray-level count; TotalEnergy assumes
  unit voxel volume (spacing-aware weighting is out of scope).

GLCM and GLRLM features are computed per direction and averaged over
directions; directions without a single co-occurring pair are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from frd.config import FeatureConfig
from frd.grid import ImageGrid, RoiMask, roi_values
from frd.texture import (
    Glcm,
    Gldm,
    Glrlm,
    Glszm,
    Ngtdm,
    build_glcm,
    build_gldm,
    build_glrlm,
    build_glszm,
    build_ngtdm,
    directions,
    discretize,
)

FIRSTORDER_NAMES = (
    "10Percentile", "90Percentile", "Energy", "Entropy", "InterquartileRange",
    "Kurtosis", "Maximum", "Mean", "MeanAbsoluteDeviation", "Median", "Minimum",
    "Range", "RobustMeanAbsoluteDeviation", "RootMeanSquared", "Skewness",
    "StandardDeviation", "TotalEnergy", "Uniformity", "Variance",
)
GLCM_NAMES = (
    "Autocorrelation", "ClusterProminence", "ClusterShade", "ClusterTendency",
    "Contrast", "Correlation", "DifferenceAverage", "DifferenceEntropy",
    "DifferenceVariance", "Id", "Idm", "Idmn", "Idn", "Imc1", "Imc2",
    "InverseVariance", "JointAverage", "JointEnergy", "JointEntropy", "MCC",
    "MaximumProbability", "SumAverage", "SumEntropy", "SumSquares",
)
GLRLM_NAMES = (
    "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance", "HighGrayLevelRunEmphasis", "LongRunEmphasis",
    "LongRunHighGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis",
    "LowGrayLevelRunEmphasis", "RunEntropy", "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized", "RunPercentage", "RunVariance",
    "ShortRunEmphasis", "ShortRunHighGrayLevelEmphasis",
    "ShortRunLowGrayLevelEmphasis",
)
GLSZM_NAMES = (
    "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance", "HighGrayLevelZoneEmphasis", "LargeAreaEmphasis",
    "LargeAreaHighGrayLevelEmphasis", "LargeAreaLowGrayLevelEmphasis",
    "LowGrayLevelZoneEmphasis", "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized", "SmallAreaEmphasis",
    "SmallAreaHighGrayLevelEmphasis", "SmallAreaLowGrayLevelEmphasis",
    "ZoneEntropy", "ZonePercentage", "ZoneVariance",
)
NGTDM_NAMES = ("Busyness", "Coarseness", "Complexity", "Contrast", "Strength")
GLDM_NAMES = (
    "DependenceEntropy", "DependenceNonUniformity",
    "DependenceNonUniformityNormalized", "DependenceVariance",
    "GrayLevelNonUniformity", "GrayLevelVariance", "HighGrayLevelEmphasis",
    "LargeDependenceEmphasis", "LargeDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis", "LowGrayLevelEmphasis",
    "SmallDependenceEmphasis", "SmallDependenceHighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
)

#: Canonical class-prefixed order of all 94 features.
FEATURE_NAMES: Tuple[str, ...] = tuple(
    f"{cls}.{name}"
    for cls, names in (
        ("firstorder", FIRSTORDER_NAMES),
        ("glcm", GLCM_NAMES),
        ("glrlm", GLRLM_NAMES),
        ("glszm", GLSZM_NAMES),
        ("ngtdm", NGTDM_NAMES),
        ("gldm", GLDM_NAMES),
    )
    for name in names
)

assert len(FEATURE_NAMES) == 94


@dataclass(frozen=True)
class FeatureVector:
    """94 named feature values for one image."""

    values: np.ndarray
    names: Tuple[str, ...]
    image_id: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(FEATURE_NAMES),):
            raise ValueError(f"expected {len(FEATURE_NAMES)} values, got {values.shape}")
        if tuple(self.names) != FEATURE_NAMES:
            raise ValueError("feature names do not match the canonical catalog")
        if not np.all(np.isfinite(values)):
            bad = [FEATURE_NAMES[i] for i in np.where(~np.isfinite(values))[0]]
            raise ValueError(f"non-finite feature values: {bad}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", FEATURE_NAMES)


def _entropy(p: np.ndarray) -> float:
    """Shannon entropy in bits; zero-probability terms contribute nothing."""
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


# ---------------------------------------------------------------------------
# First-order statistics
# ---------------------------------------------------------------------------

def first_order_features(
    image: ImageGrid, mask: Optional[RoiMask] = None, bin_count: int = 32
) -> Dict[str, float]:
    """The 19 first-order intensity statistics over the ROI.

    Entropy and Uniformity are computed on the discretized histogram; all
    other statistics use raw intensities.
    """
    x = roi_values(image, mask)
    n = x.size
    mean = float(x.mean())
    p10, p25, p50, p75, p90 = (float(v) for v in np.percentile(x, (10, 25, 50, 75, 90)))
    m2 = float(((x - mean) ** 2).mean())
    robust = x[(x >= p10) & (x <= p90)]
    # tiny ROIs can leave the 10-90 percentile window empty
    robust_mad = float(np.abs(robust - robust.mean()).mean()) if robust.size else 0.0
    if m2 > 0:
        m3 = float(((x - mean) ** 3).mean())
        m4 = float(((x - mean) ** 4).mean())
        skewness = m3 / m2 ** 1.5
        kurtosis = m4 / m2 ** 2
    else:
        skewness = 0.0
        kurtosis = 0.0
    grid = discretize(image, mask, bin_count)
    hist = np.bincount(grid.levels[grid.levels > 0] - 1, minlength=grid.num_levels)
    p = hist / n
    energy = float((x ** 2).sum())
    return {
        "10Percentile": p10,
        "90Percentile": p90,
        "Energy": energy,
        "Entropy": _entropy(p),
        "InterquartileRange": p75 - p25,
        "Kurtosis": kurtosis,
        "Maximum": float(x.max()),
        "Mean": mean,
        "MeanAbsoluteDeviation": float(np.abs(x - mean).mean()),
        "Median": p50,
        "Minimum": float(x.min()),
        "Range": float(x.max() - x.min()),
        "RobustMeanAbsoluteDeviation": robust_mad,
        "RootMeanSquared": float(np.sqrt((x ** 2).mean())),
        "Skewness": skewness,
        "StandardDeviation": float(np.sqrt(m2)),
        "TotalEnergy": energy,  # unit voxel volume
        "Uniformity": float((p ** 2).sum()),
        "Variance": m2,
    }


# ---------------------------------------------------------------------------
# GLCM
# ---------------------------------------------------------------------------

def _glcm_single(full: np.ndarray) -> Dict[str, float]:
    """All 24 features of one normalized symmetric co-occurrence matrix.

    Empty gray levels are cropped but keep their original level values as
    the i/j weights. With p the cropped matrix: px/py are its marginals,
    ux/uy their means, p_diff/p_sum the distributions of |i-j| and i+j.
    Idn and Idmn normalize |i-j| by the total gray-level count (the top bin
    is always occupied under range-based binning, so this equals the max
    occupied level). MCC is the square root of the second-largest eigenvalue
    of Q(i,j) = sum_k p(i,k) p(j,k) / (px(i) py(k)).
    """
    num_levels = full.shape[0]
    occ = full.sum(axis=1) > 0
    iv = (np.flatnonzero(occ) + 1).astype(np.float64)
    p = full[np.ix_(occ, occ)]
    m = iv.size
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    i = iv[:, None]
    j = iv[None, :]
    ux = float((p * i).sum())
    uy = float((p * j).sum())
    sigx = float(np.sqrt((p * (i - ux) ** 2).sum()))
    sigy = float(np.sqrt((p * (j - uy) ** 2).sum()))
    diff = np.abs(i - j)
    kdiff = diff.astype(np.int64)
    p_diff = np.bincount(kdiff.ravel(), weights=p.ravel(), minlength=num_levels)
    ksum = (i + j).astype(np.int64)
    p_sum = np.bincount(ksum.ravel(), weights=p.ravel(), minlength=2 * num_levels + 1)
    diff_avg = float((p * diff).sum())
    hx = _entropy(px)
    hy = _entropy(py)
    hxy = _entropy(p.ravel())
    pxpy = px[:, None] * py[None, :]
    nz = p > 0
    hxy1 = float(-(p[nz] * np.log2(pxpy[nz])).sum())
    nz2 = pxpy > 0
    hxy2 = float(-(pxpy[nz2] * np.log2(pxpy[nz2])).sum())
    if max(hx, hy) > 0:
        imc1 = (hxy - hxy1) / max(hx, hy)
    else:
        imc1 = 0.0
    imc2 = float(np.sqrt(max(1.0 - np.exp(-2.0 * (hxy2 - hxy)), 0.0)))
    if m == 1:
        mcc = 1.0
    else:
        q = (p[:, None, :] * p[None, :, :] / (px[:, None, None] * py[None, None, :])).sum(axis=2)
        ev = np.sort(np.real(np.linalg.eigvals(q)))
        mcc = float(np.sqrt(max(ev[-2], 0.0)))
    if sigx * sigy > 0:
        correlation = float((p * (i - ux) * (j - uy)).sum()) / (sigx * sigy)
    else:
        correlation = 1.0
    kd = np.arange(p_diff.size, dtype=np.float64)
    inv_var = float((p_diff[1:] / kd[1:] ** 2).sum())
    return {
        "Autocorrelation": float((p * i * j).sum()),
        "ClusterProminence": float((p * (i + j - ux - uy) ** 4).sum()),
        "ClusterShade": float((p * (i + j - ux - uy) ** 3).sum()),
        "ClusterTendency": float((p * (i + j - ux - uy) ** 2).sum()),
        "Contrast": float((p * (i - j) ** 2).sum()),
        "Correlation": correlation,
        "DifferenceAverage": diff_avg,
        "DifferenceEntropy": _entropy(p_diff),
        "DifferenceVariance": float((p * (diff - diff_avg) ** 2).sum()),
        "Id": float((p / (1.0 + diff)).sum()),
        "Idm": float((p / (1.0 + diff ** 2)).sum()),
        "Idmn": float((p / (1.0 + diff ** 2 / num_levels ** 2)).sum()),
        "Idn": float((p / (1.0 + diff / num_levels)).sum()),
        "Imc1": imc1,
        "Imc2": imc2,
        "InverseVariance": inv_var,
        "JointAverage": ux,
        "JointEnergy": float((p ** 2).sum()),
        "JointEntropy": hxy,
        "MCC": mcc,
        "MaximumProbability": float(p.max()),
        "SumAverage": float((p * (i + j)).sum()),
        "SumEntropy": _entropy(p_sum),
        "SumSquares": float((p * (i - ux) ** 2).sum()),
    }


def glcm_features(matrices: Sequence[Glcm]) -> Dict[str, float]:
    """24 co-occurrence features, averaged over non-empty directions."""
    per_dir = [_glcm_single(m.probs) for m in matrices if not m.empty]
    if not per_dir:
        raise ValueError("no co-occurring voxel pairs in any direction")
    return {name: float(np.mean([d[name] for d in per_dir])) for name in GLCM_NAMES}


# ---------------------------------------------------------------------------
# GLRLM / GLSZM / GLDM share the weighted-count structure
# ---------------------------------------------------------------------------

def _weighted_counts(counts: np.ndarray, n_voxels: int, size_offset: int = 1) -> Dict[str, float]:
    """Common level-by-size feature kernel for GLRLM/GLSZM/GLDM.

    ``counts`` is a raw (level, size) count matrix; column c has size weight
    c + size_offset (GLDM stores dependence d in column d and weights it d+1,
    which is the same offset of 1).
    """
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty texture matrix")
    iv = np.arange(1, counts.shape[0] + 1, dtype=np.float64)[:, None]
    jv = np.arange(size_offset, counts.shape[1] + size_offset, dtype=np.float64)[None, :]
    p = counts / total
    pg = counts.sum(axis=1)
    ps = counts.sum(axis=0)
    mu_g = float((pg / total * iv[:, 0]).sum())
    mu_s = float((ps / total * jv[0, :]).sum())
    return {
        "SmallEmphasis": float((counts / jv ** 2).sum() / total),
        "LargeEmphasis": float((counts * jv ** 2).sum() / total),
        "GrayLevelNonUniformity": float((pg ** 2).sum() / total),
        "GrayLevelNonUniformityNormalized": float((pg ** 2).sum() / total ** 2),
        "SizeNonUniformity": float((ps ** 2).sum() / total),
        "SizeNonUniformityNormalized": float((ps ** 2).sum() / total ** 2),
        "Percentage": float(total / n_voxels),
        "GrayLevelVariance": float((pg / total * (iv[:, 0] - mu_g) ** 2).sum()),
        "SizeVariance": float((ps / total * (jv[0, :] - mu_s) ** 2).sum()),
        "Entropy": _entropy(p.ravel()),
        "LowGrayLevelEmphasis": float((counts / iv ** 2).sum() / total),
        "HighGrayLevelEmphasis": float((counts * iv ** 2).sum() / total),
        "SmallLow": float((counts / (iv ** 2 * jv ** 2)).sum() / total),
        "SmallHigh": float((counts * iv ** 2 / jv ** 2).sum() / total),
        "LargeLow": float((counts * jv ** 2 / iv ** 2).sum() / total),
        "LargeHigh": float((counts * iv ** 2 * jv ** 2).sum() / total),
    }


def glrlm_features(matrices: Sequence[Glrlm]) -> Dict[str, float]:
    """16 run-length features, averaged over directions."""
    if not matrices or all(m.counts.sum() == 0 for m in matrices):
        raise ValueError("empty run-length matrices")
    per_dir = []
    for m in matrices:
        w = _weighted_counts(m.counts, m.n_voxels)
        per_dir.append({
            "GrayLevelNonUniformity": w["GrayLevelNonUniformity"],
            "GrayLevelNonUniformityNormalized": w["GrayLevelNonUniformityNormalized"],
            "GrayLevelVariance": w["GrayLevelVariance"],
            "HighGrayLevelRunEmphasis": w["HighGrayLevelEmphasis"],
            "LongRunEmphasis": w["LargeEmphasis"],
            "LongRunHighGrayLevelEmphasis": w["LargeHigh"],
            "LongRunLowGrayLevelEmphasis": w["LargeLow"],
            "LowGrayLevelRunEmphasis": w["LowGrayLevelEmphasis"],
            "RunEntropy": w["Entropy"],
            "RunLengthNonUniformity": w["SizeNonUniformity"],
            "RunLengthNonUniformityNormalized": w["SizeNonUniformityNormalized"],
            "RunPercentage": w["Percentage"],
            "RunVariance": w["SizeVariance"],
            "ShortRunEmphasis": w["SmallEmphasis"],
            "ShortRunHighGrayLevelEmphasis": w["SmallHigh"],
            "ShortRunLowGrayLevelEmphasis": w["SmallLow"],
        })
    return {name: float(np.mean([d[name] for d in per_dir])) for name in GLRLM_NAMES}


def glszm_features(matrix: Glszm) -> Dict[str, float]:
    """16 size-zone features (single matrix, no direction averaging)."""
    w = _weighted_counts(matrix.counts, matrix.n_voxels)
    return {
        "GrayLevelNonUniformity": w["GrayLevelNonUniformity"],
        "GrayLevelNonUniformityNormalized": w["GrayLevelNonUniformityNormalized"],
        "GrayLevelVariance": w["GrayLevelVariance"],
        "HighGrayLevelZoneEmphasis": w["HighGrayLevelEmphasis"],
        "LargeAreaEmphasis": w["LargeEmphasis"],
        "LargeAreaHighGrayLevelEmphasis": w["LargeHigh"],
        "LargeAreaLowGrayLevelEmphasis": w["LargeLow"],
        "LowGrayLevelZoneEmphasis": w["LowGrayLevelEmphasis"],
        "SizeZoneNonUniformity": w["SizeNonUniformity"],
        "SizeZoneNonUniformityNormalized": w["SizeNonUniformityNormalized"],
        "SmallAreaEmphasis": w["SmallEmphasis"],
        "SmallAreaHighGrayLevelEmphasis": w["SmallHigh"],
        "SmallAreaLowGrayLevelEmphasis": w["SmallLow"],
        "ZoneEntropy": w["Entropy"],
        "ZonePercentage": w["Percentage"],
        "ZoneVariance": w["SizeVariance"],
    }


def gldm_features(matrix: Gldm) -> Dict[str, float]:
    """14 dependence features; dependence d carries size weight d + 1."""
    w = _weighted_counts(matrix.counts, matrix.n_voxels, size_offset=1)
    return {
        "DependenceEntropy": w["Entropy"],
        "DependenceNonUniformity": w["SizeNonUniformity"],
        "DependenceNonUniformityNormalized": w["SizeNonUniformityNormalized"],
        "DependenceVariance": w["SizeVariance"],
        "GrayLevelNonUniformity": w["GrayLevelNonUniformity"],
        "GrayLevelVariance": w["GrayLevelVariance"],
        "HighGrayLevelEmphasis": w["HighGrayLevelEmphasis"],
        "LargeDependenceEmphasis": w["LargeEmphasis"],
        "LargeDependenceHighGrayLevelEmphasis": w["LargeHigh"],
        "LargeDependenceLowGrayLevelEmphasis": w["LargeLow"],
        "LowGrayLevelEmphasis": w["LowGrayLevelEmphasis"],
        "SmallDependenceEmphasis": w["SmallEmphasis"],
        "SmallDependenceHighGrayLevelEmphasis": w["SmallHigh"],
        "SmallDependenceLowGrayLevelEmphasis": w["SmallLow"],
    }


# ---------------------------------------------------------------------------
# NGTDM
# ---------------------------------------------------------------------------

def ngtdm_features(matrix: Ngtdm) -> Dict[str, float]:
    """The 5 neighborhood gray-tone difference features.

    With p_i = n_i / N over levels that occur: Coarseness = 1 / sum(p_i s_i),
    Contrast = mean pairwise (i-j)^2 weighted by p_i p_j times the mean s,
    Busyness = sum(p_i s_i) / sum |i p_i - j p_j|, Complexity and Strength
    per their standard pairwise forms. All pair sums run over occurring
    levels only, using the actual level values as i and j.
    """
    nvp = float(matrix.n.sum())
    if nvp <= 0:
        raise ValueError("empty neighborhood gray-tone matrix")
    occ = matrix.n > 0
    iv = (np.flatnonzero(occ) + 1).astype(np.float64)
    pi = matrix.n[occ] / nvp
    si = matrix.s[occ]
    ngp = iv.size
    s_total = float(si.sum())
    coarse_den = float((pi * si).sum())
    coarseness = 1.0 / coarse_den if coarse_den != 0 else 1e6
    if ngp > 1:
        pairwise = (pi[:, None] * pi[None, :]) * (iv[:, None] - iv[None, :]) ** 2
        contrast = float(pairwise.sum()) / (ngp * (ngp - 1)) * (s_total / nvp)
    else:
        contrast = 0.0
    busy_den = float(np.abs(iv[:, None] * pi[:, None] - iv[None, :] * pi[None, :]).sum())
    busyness = coarse_den / busy_den if busy_den != 0 else 0.0
    num = np.abs(iv[:, None] - iv[None, :]) * (
        (pi[:, None] * si[:, None] + pi[None, :] * si[None, :])
        / (pi[:, None] + pi[None, :])
    )
    complexity = float(num.sum()) / nvp
    if s_total != 0:
        strength = float(((pi[:, None] + pi[None, :]) * (iv[:, None] - iv[None, :]) ** 2).sum()) / s_total
    else:
        strength = 0.0
    return {
        "Busyness": busyness,
        "Coarseness": coarseness,
        "Complexity": complexity,
        "Contrast": contrast,
        "Strength": strength,
    }


# ---------------------------------------------------------------------------
# Full extraction
# ---------------------------------------------------------------------------

def extract_all(
    image: ImageGrid,
    mask: Optional[RoiMask] = None,
    config: Optional[FeatureConfig] = None,
    image_id: str = "",
) -> FeatureVector:
    """Compute the full 94-feature vector for one image."""
    if config is None:
        config = FeatureConfig(dims=image.dims)
    if image.dims != config.dims:
        raise ValueError(f"image is {image.dims}D but config.dims={config.dims}")
    if mask is not None:
        mask.check_matches(image)
    fo = first_order_features(image, mask, config.bin_count)
    grid = discretize(image, mask, config.bin_count)
    dirs = directions(image.dims)
    glcm = glcm_features([build_glcm(grid, d, config.glcm_distance) for d in dirs])
    glrlm = glrlm_features([build_glrlm(grid, d) for d in dirs])
    glszm = glszm_features(build_glszm(grid))
    ngtdm = ngtdm_features(build_ngtdm(grid))
    gldm = gldm_features(build_gldm(grid, config.gldm_alpha))
    values = np.array(
        [fo[n] for n in FIRSTORDER_NAMES]
        + [glcm[n] for n in GLCM_NAMES]
        + [glrlm[n] for n in GLRLM_NAMES]
        + [glszm[n] for n in GLSZM_NAMES]
        + [ngtdm[n] for n in NGTDM_NAMES]
        + [gldm[n] for n in GLDM_NAMES],
        dtype=np.float64,
    )
    return FeatureVector(values=values, names=FEATURE_NAMES, image_id=image_id)
