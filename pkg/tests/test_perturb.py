"""Noise/blur perturbations: identity, determinism, statistics, datasets."""

import numpy as np
import pytest

from frd.config import FeatureConfig
from frd.grid import ImageGrid
from frd.perturb import (
    PerturbationSpec,
    derived_seed,
    gaussian_blur,
    gaussian_noise,
    perturb_dataset,
    validation_sweep,
)
from frd.phantom import PhantomSpec, generate_phantoms


def ramp_image(n=128, top=1000.0):
    data = np.linspace(0.0, top, n * n).reshape(n, n)
    return ImageGrid(data)


# ---------------------------------------------------------------------------
# gaussian_noise
# ---------------------------------------------------------------------------

def test_noise_scale_zero_identity():
    img = ramp_image(16)
    out = gaussian_noise(img, PerturbationSpec("noise", 0.0, seed=1))
    np.testing.assert_array_equal(out.data, img.data)


def test_noise_same_seed_identical():
    img = ramp_image(16)
    spec = PerturbationSpec("noise", 10.0, seed=42)
    a = gaussian_noise(img, spec)
    b = gaussian_noise(img, spec)
    np.testing.assert_array_equal(a.data, b.data)


def test_noise_sigma_matches_sample_statistics():
    img = ramp_image(128, top=1000.0)  # 16384 voxels
    out = gaussian_noise(img, PerturbationSpec("noise", 1.0, seed=7))
    # sigma = 1% of range = 10; clamping is negligible at this scale
    delta = out.data - img.data
    assert abs(delta.std() - 10.0) / 10.0 < 0.05
    assert abs(delta.mean()) < 1.0


def test_noise_scale_50_has_large_clamped_spread():
    img = ramp_image(128, top=1000.0)
    out = gaussian_noise(img, PerturbationSpec("noise", 50.0, seed=7))
    delta = out.data - img.data
    sigma = 500.0
    assert 0.5 * sigma < delta.std() <= sigma


def test_noise_never_widens_range():
    img = ramp_image(64, top=255.0)
    out = gaussian_noise(img, PerturbationSpec("noise", 50.0, seed=3))
    lo, hi = img.value_range
    assert out.data.min() >= lo
    assert out.data.max() <= hi


def test_noise_degenerate_image_unchanged(caplog):
    img = ImageGrid(np.full((8, 8), 9.0))
    with caplog.at_level("WARNING"):
        out = gaussian_noise(img, PerturbationSpec("noise", 20.0, seed=0))
    np.testing.assert_array_equal(out.data, img.data)
    assert any("constant image" in r.message for r in caplog.records)


def test_noise_spec_validation():
    with pytest.raises(ValueError, match="kind"):
        PerturbationSpec("swirl", 10.0)
    with pytest.raises(ValueError, match="scale_pct"):
        PerturbationSpec("noise", 150.0)


# ---------------------------------------------------------------------------
# gaussian_blur
# ---------------------------------------------------------------------------

def test_blur_scale_zero_identity():
    img = ramp_image(16)
    out = gaussian_blur(img, PerturbationSpec("blur", 0.0))
    np.testing.assert_array_equal(out.data, img.data)


def test_blur_constant_unchanged():
    img = ImageGrid(np.full((12, 12), 5.0))
    out = gaussian_blur(img, PerturbationSpec("blur", 30.0))
    np.testing.assert_allclose(out.data, img.data, atol=1e-12)


def test_blur_impulse_matches_sampled_kernel():
    # extent 40 / divisor 4 * 10% -> sigma exactly 1
    n = 40
    data = np.zeros((n, n))
    data[n // 2, n // 2] = 1.0
    out = gaussian_blur(ImageGrid(data), PerturbationSpec("blur", 10.0))
    radius = 3
    t = np.arange(-radius, radius + 1, dtype=float)
    k = np.exp(-(t ** 2) / 2.0)
    k /= k.sum()
    expected = np.outer(k, k)
    window = out.data[n // 2 - radius : n // 2 + radius + 1, n // 2 - radius : n // 2 + radius + 1]
    np.testing.assert_allclose(window, expected, atol=1e-6)
    assert abs(out.data.sum() - 1.0) < 1e-9  # mass preserved away from borders


def test_blur_border_replication_keeps_mean():
    img = ImageGrid(np.full((10, 10), 3.0) + np.eye(10))
    out = gaussian_blur(img, PerturbationSpec("blur", 50.0))
    # replication cannot introduce values outside the input range
    assert out.data.min() >= img.data.min() - 1e-9
    assert out.data.max() <= img.data.max() + 1e-9


def test_blur_3d():
    rng = np.random.default_rng(0)
    img = ImageGrid(rng.normal(size=(12, 12, 12)))
    out = gaussian_blur(img, PerturbationSpec("blur", 20.0))
    assert out.shape == img.shape
    assert out.data.std() < img.data.std()  # smoothing reduces variance


# ---------------------------------------------------------------------------
# perturb_dataset
# ---------------------------------------------------------------------------

@pytest.fixture()
def phantom_manifest(tmp_path):
    spec = PhantomSpec(count=3, shape=(32, 32), seed=5)
    return generate_phantoms(spec, tmp_path / "clean")


def test_perturb_dataset_structure(phantom_manifest, tmp_path):
    spec = PerturbationSpec("blur", 5.0)
    out = perturb_dataset(phantom_manifest, spec, tmp_path / "blurred")
    assert len(out) == 3
    assert out.image_ids() == phantom_manifest.image_ids()
    for e in out.entries:
        assert e.image_path.is_file()
    assert (tmp_path / "blurred" / "manifest.csv").is_file()


def test_perturb_dataset_rerun_byte_identical(phantom_manifest, tmp_path):
    spec = PerturbationSpec("noise", 10.0, seed=99)
    perturb_dataset(phantom_manifest, spec, tmp_path / "n1")
    perturb_dataset(phantom_manifest, spec, tmp_path / "n2")
    for e in phantom_manifest.entries:
        a = (tmp_path / "n1" / e.image_path.name).read_bytes()
        b = (tmp_path / "n2" / e.image_path.name).read_bytes()
        assert a == b


def test_perturb_dataset_masks_copied_unchanged(phantom_manifest, tmp_path):
    spec = PerturbationSpec("noise", 10.0, seed=1)
    out = perturb_dataset(phantom_manifest, spec, tmp_path / "noisy")
    for src, dst in zip(phantom_manifest.entries, out.entries):
        assert dst.mask_path.read_bytes() == src.mask_path.read_bytes()


def test_perturb_dataset_3d_nifti(tmp_path):
    spec3 = PhantomSpec(count=2, shape=(20, 20, 20), lesion_radius=(4.0, 6.0), seed=12)
    manifest = generate_phantoms(spec3, tmp_path / "vol")
    out = perturb_dataset(manifest, PerturbationSpec("noise", 15.0, seed=3), tmp_path / "noisy")
    assert all(e.image_path.name.endswith(".nii.gz") for e in out.entries)
    from frd import dataset_io

    for src, dst in zip(manifest.entries, out.entries):
        clean = dataset_io.load_image(src.image_path)
        noisy = dataset_io.load_image(dst.image_path)
        assert noisy.shape == clean.shape
        lo, hi = clean.value_range
        assert noisy.data.min() >= lo and noisy.data.max() <= hi
        assert not np.array_equal(noisy.data, clean.data)


def test_derived_seed_stable():
    assert derived_seed(1, "a") == derived_seed(1, "a")
    assert derived_seed(1, "a") != derived_seed(1, "b")
    assert derived_seed(1, "a") != derived_seed(2, "a")


# ---------------------------------------------------------------------------
# validation_sweep
# ---------------------------------------------------------------------------

def test_sweep_structure_and_zero_scale(tmp_path):
    manifest = generate_phantoms(PhantomSpec(count=6, shape=(32, 32), seed=2), tmp_path / "d")
    config = FeatureConfig(bin_count=16, dims=2)
    result = validation_sweep(manifest, ["noise", "blur"], [0.0, 10.0], config, seed=3)
    assert len(result.rows) == 4
    by_cell = {(r.kind, r.scale_pct): r.frd_value for r in result.rows}
    assert by_cell[("noise", 0.0)] <= 1e-6
    assert by_cell[("blur", 0.0)] <= 1e-6
    assert all(r.dims == 2 for r in result.rows)


def test_sweep_rejects_bad_scales(tmp_path):
    manifest = generate_phantoms(PhantomSpec(count=2, shape=(32, 32), seed=2), tmp_path / "d")
    config = FeatureConfig(dims=2)
    with pytest.raises(ValueError, match="strictly increasing"):
        validation_sweep(manifest, ["noise"], [10.0, 5.0], config)
    with pytest.raises(ValueError, match="non-empty"):
        validation_sweep(manifest, ["noise"], [], config)
    with pytest.raises(ValueError, match="unknown perturbation"):
        validation_sweep(manifest, ["swirl"], [5.0], config)


def test_sweep_deterministic(tmp_path):
    manifest = generate_phantoms(PhantomSpec(count=4, shape=(32, 32), seed=8), tmp_path / "d")
    config = FeatureConfig(bin_count=16, dims=2)
    r1 = validation_sweep(manifest, ["noise"], [5.0, 20.0], config, seed=11)
    r2 = validation_sweep(manifest, ["noise"], [5.0, 20.0], config, seed=11)
    assert [r.frd_value for r in r1.rows] == [r.frd_value for r in r2.rows]
