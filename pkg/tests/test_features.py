"""Feature formulas against closed forms and the brute-force oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _oracle as oracle
from frd.config import FeatureConfig
from frd.features import (
    FEATURE_NAMES,
    FIRSTORDER_NAMES,
    extract_all,
    first_order_features,
    glcm_features,
    gldm_features,
    glrlm_features,
    glszm_features,
    ngtdm_features,
)
from frd.grid import ImageGrid, RoiMask
from frd.texture import (
    DiscretizedGrid,
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
)


def close(a, b, rel=1e-9, abs_tol=1e-12):
    assert math.isclose(a, b, rel_tol=rel, abs_tol=abs_tol), f"{a} != {b}"


# ---------------------------------------------------------------------------
# first-order
# ---------------------------------------------------------------------------

def test_first_order_constant_roi():
    img = ImageGrid(np.full((3, 3), 5.0))
    fo = first_order_features(img)
    assert fo["Mean"] == 5.0
    assert fo["Variance"] == 0.0
    assert fo["Entropy"] == 0.0
    assert fo["Uniformity"] == 1.0
    assert fo["Skewness"] == 0.0
    assert fo["Kurtosis"] == 0.0
    assert fo["Range"] == 0.0


def test_first_order_three_values():
    img = ImageGrid(np.array([[1.0, 2.0, 3.0]]))
    fo = first_order_features(img)
    assert fo["Mean"] == 2.0
    assert fo["Median"] == 2.0
    assert fo["Range"] == 2.0
    close(fo["Variance"], 2.0 / 3.0)
    close(fo["StandardDeviation"], math.sqrt(2.0 / 3.0))


def test_first_order_spike():
    img = ImageGrid(np.array([[0.0, 0.0], [0.0, 10.0]]))
    fo = first_order_features(img)
    assert fo["Mean"] == 2.5
    assert fo["Maximum"] == 10.0
    assert fo["Energy"] == 100.0
    assert fo["RootMeanSquared"] == 5.0


def test_first_order_empty_mask_rejected():
    with pytest.raises(ValueError):
        RoiMask(np.zeros((2, 2), dtype=bool))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=50), min_size=2, max_size=30),
    st.integers(min_value=2, max_value=8),
)
def test_first_order_matches_oracle(values, bins):
    img = ImageGrid(np.asarray(values, dtype=float).reshape(1, -1))
    fo = first_order_features(img, bin_count=bins)
    # independent histogram via the documented binning rule
    lo, hi = min(values), max(values)
    if hi == lo:
        hist = [1.0]
    else:
        hist = [0.0] * bins
        for v in values:
            level = min(int((v - lo) * bins / (hi - lo)), bins - 1)
            hist[level] += 1.0 / len(values)
    ref = oracle.first_order(values, hist)
    for name in FIRSTORDER_NAMES:
        close(fo[name], ref[name], rel=1e-9, abs_tol=1e-9)


# ---------------------------------------------------------------------------
# GLCM features
# ---------------------------------------------------------------------------

def _glcm_from_probs(probs):
    probs = np.asarray(probs, dtype=float)
    return Glcm(probs=probs, direction=(0, 1), distance=1, n_pairs=float(probs.sum() > 0))


def test_glcm_point_mass():
    f = glcm_features([_glcm_from_probs([[1.0]])])
    assert f["JointEnergy"] == 1.0
    assert f["JointEntropy"] == 0.0
    assert f["Contrast"] == 0.0
    assert f["MaximumProbability"] == 1.0
    assert f["Correlation"] == 1.0  # degenerate convention
    assert f["MCC"] == 1.0
    assert f["InverseVariance"] == 0.0
    assert f["DifferenceVariance"] == 0.0


def test_glcm_two_level_contrast():
    f = glcm_features([_glcm_from_probs([[0.0, 0.5], [0.5, 0.0]])])
    close(f["Contrast"], 1.0)
    close(f["DifferenceAverage"], 1.0)
    close(f["SumAverage"], 3.0)


def test_glcm_all_empty_rejected():
    with pytest.raises(ValueError, match="no co-occurring"):
        glcm_features([Glcm(np.zeros((2, 2)), (0, 1), 1, 0.0)])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=3), min_size=16, max_size=16))
def test_glcm_features_match_oracle(flat):
    levels = np.asarray(flat, dtype=np.intc).reshape(4, 4)
    if not (levels > 0).any():
        levels[0, 0] = 1
    grid = DiscretizedGrid(levels, 3)
    mats = [build_glcm(grid, d) for d in directions(2)]
    refs = [oracle.glcm_features(m.probs) for m in mats if not m.empty]
    if not refs:
        with pytest.raises(ValueError):
            glcm_features(mats)
        return
    ours = glcm_features(mats)
    for name, value in ours.items():
        ref = sum(r[name] for r in refs) / len(refs)
        close(value, ref, rel=1e-9, abs_tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=4), min_size=36, max_size=36))
def test_glcm_features_cross_validate_against_skimage(flat):
    # third-party anchor: scikit-image computes symmetric normalized GLCMs
    # and five features that overlap with this catalog (its level weights are
    # 0-based, so only shift-invariant features are comparable)
    from skimage.feature import graycomatrix, graycoprops

    img = np.asarray(flat, dtype=np.uint8).reshape(6, 6)
    levels = img.astype(np.intc) + 1
    grid = DiscretizedGrid(levels, 5)
    for direction, angle in (((0, 1), 0.0), ((1, 0), np.pi / 2)):
        ours = build_glcm(grid, direction)
        ref = graycomatrix(img, distances=[1], angles=[angle], levels=5,
                           symmetric=True, normed=True)[:, :, 0, 0]
        np.testing.assert_allclose(ours.probs, ref, atol=1e-12)
        f = _glcm_single_features(ours)
        mat4 = graycomatrix(img, distances=[1], angles=[angle], levels=5, symmetric=True)
        for mine, theirs in (
            ("Contrast", "contrast"),
            ("DifferenceAverage", "dissimilarity"),
            ("Idm", "homogeneity"),
            ("JointEnergy", "ASM"),
            ("Correlation", "correlation"),
        ):
            ref_value = float(graycoprops(mat4, theirs)[0, 0])
            close(f[mine], ref_value, rel=1e-9, abs_tol=1e-9)


def _glcm_single_features(glcm_matrix):
    from frd.features import _glcm_single

    return _glcm_single(glcm_matrix.probs)


# ---------------------------------------------------------------------------
# GLRLM features
# ---------------------------------------------------------------------------

def test_glrlm_all_runs_length_one():
    counts = np.array([[3.0], [2.0]])  # 5 runs, all length 1
    f = glrlm_features([Glrlm(counts, (0, 1), n_voxels=5)])
    assert f["ShortRunEmphasis"] == 1.0
    assert f["LongRunEmphasis"] == 1.0
    assert f["RunPercentage"] == 1.0


def test_glrlm_constant_grid_long_runs():
    grid = DiscretizedGrid(np.ones((3, 3), dtype=np.intc), 1)
    f = glrlm_features([build_glrlm(grid, (0, 1))])
    close(f["LongRunEmphasis"], 9.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=3), min_size=16, max_size=16))
def test_glrlm_features_match_oracle(flat):
    levels = np.asarray(flat, dtype=np.intc).reshape(4, 4)
    if not (levels > 0).any():
        levels[0, 0] = 1
    grid = DiscretizedGrid(levels, 3)
    mats = [build_glrlm(grid, d) for d in directions(2)]
    ours = glrlm_features(mats)
    refs = [oracle.glrlm_features_one_direction(m.counts, m.n_voxels) for m in mats]
    for name, value in ours.items():
        ref = sum(r[name] for r in refs) / len(refs)
        close(value, ref, rel=1e-9, abs_tol=1e-9)


# ---------------------------------------------------------------------------
# GLSZM features
# ---------------------------------------------------------------------------

def test_glszm_all_zones_size_one():
    counts = np.array([[2.0], [2.0]])
    f = glszm_features(Glszm(counts, n_voxels=4))
    assert f["SmallAreaEmphasis"] == 1.0
    assert f["ZonePercentage"] == 1.0


def test_glszm_single_zone_large_area():
    grid = DiscretizedGrid(np.ones((4, 4), dtype=np.intc), 1)
    f = glszm_features(build_glszm(grid))
    close(f["LargeAreaEmphasis"], 256.0)  # n^2 for one zone of n voxels


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=3), min_size=16, max_size=16))
def test_glszm_features_match_oracle(flat):
    levels = np.asarray(flat, dtype=np.intc).reshape(4, 4)
    if not (levels > 0).any():
        levels[0, 0] = 1
    grid = DiscretizedGrid(levels, 3)
    mat = build_glszm(grid)
    ref = oracle.glszm_features(mat.counts, mat.n_voxels)
    ours = glszm_features(mat)
    for name, value in ours.items():
        close(value, ref[name], rel=1e-9, abs_tol=1e-9)


# ---------------------------------------------------------------------------
# NGTDM features
# ---------------------------------------------------------------------------

def test_ngtdm_constant_grid():
    grid = DiscretizedGrid(np.ones((3, 3), dtype=np.intc), 1)
    f = ngtdm_features(build_ngtdm(grid))
    assert f["Coarseness"] == 1e6
    assert f["Contrast"] == 0.0
    assert f["Complexity"] == 0.0


def test_ngtdm_center_two_hand_values():
    levels = np.ones((3, 3), dtype=np.intc)
    levels[1, 1] = 2
    grid = DiscretizedGrid(levels, 2)
    mat = build_ngtdm(grid)
    ref = oracle.ngtdm_features(mat.s, mat.n)
    ours = ngtdm_features(mat)
    for name, value in ours.items():
        close(value, ref[name])


def test_ngtdm_contrast_zero_iff_single_level():
    one = DiscretizedGrid(np.ones((3, 3), dtype=np.intc), 1)
    assert ngtdm_features(build_ngtdm(one))["Contrast"] == 0.0
    two = np.ones((3, 3), dtype=np.intc)
    two[0, 0] = 2
    grid = DiscretizedGrid(two, 2)
    assert ngtdm_features(build_ngtdm(grid))["Contrast"] > 0.0


def test_ngtdm_empty_rejected():
    with pytest.raises(ValueError, match="empty"):
        ngtdm_features(Ngtdm(np.zeros(2), np.zeros(2, dtype=np.int64), 2))


# ---------------------------------------------------------------------------
# GLDM features
# ---------------------------------------------------------------------------

def test_gldm_isolated_voxels():
    counts = np.array([[3.0], [1.0]])  # all dependence 0
    f = gldm_features(Gldm(counts, n_voxels=4))
    assert f["SmallDependenceEmphasis"] == 1.0
    assert f["LargeDependenceEmphasis"] == 1.0


def test_gldm_constant_grid_hand_value():
    grid = DiscretizedGrid(np.ones((3, 3), dtype=np.intc), 1)
    f = gldm_features(build_gldm(grid, alpha=0))
    close(f["LargeDependenceEmphasis"], (81.0 + 4 * 36.0 + 4 * 16.0) / 9.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=3), min_size=16, max_size=16))
def test_gldm_features_match_oracle(flat):
    levels = np.asarray(flat, dtype=np.intc).reshape(4, 4)
    if not (levels > 0).any():
        levels[0, 0] = 1
    grid = DiscretizedGrid(levels, 3)
    mat = build_gldm(grid, alpha=0)
    ref = oracle.gldm_features(mat.counts, mat.n_voxels)
    ours = gldm_features(mat)
    for name, value in ours.items():
        close(value, ref[name], rel=1e-9, abs_tol=1e-9)


# ---------------------------------------------------------------------------
# extract_all
# ---------------------------------------------------------------------------

def test_extract_all_catalog():
    assert len(FEATURE_NAMES) == 94
    prefixes = [n.split(".")[0] for n in FEATURE_NAMES]
    counts = {p: prefixes.count(p) for p in dict.fromkeys(prefixes)}
    assert counts == {
        "firstorder": 19, "glcm": 24, "glrlm": 16, "glszm": 16, "ngtdm": 5, "gldm": 14,
    }
    # alphabetical within class
    for cls in counts:
        names = [n.split(".", 1)[1] for n in FEATURE_NAMES if n.startswith(cls + ".")]
        assert names == sorted(names)


def test_extract_all_finite_and_deterministic(backend):
    rng = np.random.default_rng(3)
    img = ImageGrid(rng.normal(50, 10, (16, 16)))
    a = extract_all(img, config=FeatureConfig(dims=2), image_id="x")
    b = extract_all(img, config=FeatureConfig(dims=2), image_id="x")
    assert np.all(np.isfinite(a.values))
    np.testing.assert_array_equal(a.values, b.values)


def test_extract_all_intensity_shift_invariance(backend):
    rng = np.random.default_rng(4)
    img = ImageGrid(rng.uniform(10, 90, (12, 12)))
    shifted = ImageGrid(img.data + 100.0)
    a = extract_all(img, config=FeatureConfig(dims=2))
    b = extract_all(shifted, config=FeatureConfig(dims=2))
    shifted_by_constant = {
        "firstorder.10Percentile", "firstorder.90Percentile", "firstorder.Maximum",
        "firstorder.Mean", "firstorder.Median", "firstorder.Minimum",
    }
    raw_intensity = {"firstorder.Energy", "firstorder.TotalEnergy", "firstorder.RootMeanSquared"}
    for name, va, vb in zip(FEATURE_NAMES, a.values, b.values):
        if name in shifted_by_constant:
            close(vb, va + 100.0, rel=1e-12, abs_tol=1e-9)
        elif name not in raw_intensity:
            close(vb, va, rel=1e-12, abs_tol=1e-9)


def test_extract_all_mask_restriction(backend):
    rng = np.random.default_rng(5)
    inside = rng.uniform(0, 100, (10, 10))
    mask = np.zeros((10, 10), dtype=bool)
    mask[2:8, 3:9] = True
    outside_a = inside.copy()
    outside_b = inside.copy()
    outside_b[~mask] = rng.uniform(500, 900, (~mask).sum())
    roi = RoiMask(mask)
    a = extract_all(ImageGrid(outside_a), roi, FeatureConfig(dims=2))
    b = extract_all(ImageGrid(outside_b), roi, FeatureConfig(dims=2))
    np.testing.assert_array_equal(a.values, b.values)


def test_extract_all_dims_mismatch():
    img = ImageGrid(np.zeros((4, 4, 4)))
    with pytest.raises(ValueError, match="dims"):
        extract_all(img, config=FeatureConfig(dims=2))
