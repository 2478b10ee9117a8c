"""CLI behavior: exit codes, outputs, fingerprints, reproducibility."""

import json

import numpy as np
import pytest

from frd.cli import main
from frd.dataset_io import save_image_2d
from frd.features import FEATURE_NAMES
from frd.phantom import PhantomSpec, generate_phantoms, generate_phase_series


@pytest.fixture()
def phantoms(tmp_path):
    generate_phantoms(PhantomSpec(count=3, shape=(32, 32), seed=1), tmp_path / "data")
    return tmp_path / "data" / "manifest.csv"


def run(*argv):
    return main([str(a) for a in argv])


# ---------------------------------------------------------------------------
# extract
# ---------------------------------------------------------------------------

def test_extract_structure(phantoms, tmp_path):
    out = tmp_path / "features.csv"
    assert run("extract", phantoms, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config_fingerprint=")
    header = lines[1].split(",")
    assert len(header) == 95
    assert header[0] == "image_id"
    assert tuple(header[1:]) == FEATURE_NAMES
    assert len(lines) == 2 + 3


def test_extract_unreadable_image(phantoms, tmp_path, capsys):
    manifest = tmp_path / "broken.csv"
    manifest.write_text(
        "image_id,image_path,mask_path,bbox\ncaseX,missing.png,,\n", encoding="utf-8"
    )
    out = tmp_path / "f.csv"
    assert run("extract", manifest, "--out", out) == 2
    assert "caseX" in capsys.readouterr().err


def test_extract_rerun_byte_identical(phantoms, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("extract", phantoms, "--out", a) == 0
    assert run("extract", phantoms, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_extract_threads_match_serial(phantoms, tmp_path):
    a, b = tmp_path / "serial.csv", tmp_path / "par.csv"
    assert run("extract", phantoms, "--out", a) == 0
    assert run("extract", phantoms, "--out", b, "--threads", "2") == 0
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def test_compare_self_zero(phantoms, tmp_path, capsys):
    features = tmp_path / "f.csv"
    run("extract", phantoms, "--out", features)
    report = tmp_path / "report.json"
    assert run("compare", features, features, "--out", report) == 0
    final_line = capsys.readouterr().out.strip().splitlines()[-1]
    assert float(final_line) <= 1e-6
    payload = json.loads(report.read_text())
    assert payload["frd"] <= 1e-6
    assert payload["n_real"] == payload["n_synth"] == 3
    assert len(payload["feature_bounds"]) == 94


def test_compare_header_mismatch(tmp_path, capsys):
    good = tmp_path / "good.csv"
    good.write_text("image_id," + ",".join(FEATURE_NAMES) + "\n" + "a," + ",".join(["0"] * 94) + "\n")
    bad = tmp_path / "bad.csv"
    bad.write_text("image_id,foo,bar\na,1,2\n")
    assert run("compare", good, bad, "--out", tmp_path / "r.json") == 2
    assert "canonical" in capsys.readouterr().err


def test_compare_symmetric_under_swap(phantoms, tmp_path, capsys):
    f1, f2 = tmp_path / "f1.csv", tmp_path / "f2.csv"
    run("extract", phantoms, "--out", f1)
    # different dataset: perturb then extract
    run("perturb", phantoms, "--kind", "noise", "--scale", "20", "--out-dir", tmp_path / "p", "--seed", "5")
    run("extract", tmp_path / "p" / "manifest.csv", "--out", f2)
    assert run("compare", f1, f2, "--out", tmp_path / "ab.json") == 0
    ab = float(capsys.readouterr().out.strip().splitlines()[-1])
    assert run("compare", f2, f1, "--out", tmp_path / "ba.json") == 0
    ba = float(capsys.readouterr().out.strip().splitlines()[-1])
    assert abs(ab - ba) <= 1e-9 * max(1.0, ab)


# ---------------------------------------------------------------------------
# perturb
# ---------------------------------------------------------------------------

def test_perturb_structure(phantoms, tmp_path):
    out_dir = tmp_path / "noisy"
    assert run("perturb", phantoms, "--kind", "noise", "--scale", "10", "--out-dir", out_dir) == 0
    from frd.dataset_io import load_manifest

    out = load_manifest(out_dir / "manifest.csv")
    assert len(out) == 3


def test_perturb_invalid_kind_usage_error(phantoms, tmp_path, capsys):
    assert run("perturb", phantoms, "--kind", "swirl", "--scale", "10", "--out-dir", tmp_path / "x") == 1


def test_perturb_scale_out_of_range(phantoms, tmp_path, capsys):
    assert run("perturb", phantoms, "--kind", "noise", "--scale", "150", "--out-dir", tmp_path / "x") == 2
    assert "scale_pct" in capsys.readouterr().err


def test_perturb_rerun_byte_identical(phantoms, tmp_path):
    for d in ("r1", "r2"):
        assert run("perturb", phantoms, "--kind", "noise", "--scale", "25",
                   "--out-dir", tmp_path / d, "--seed", "7") == 0
    f1 = sorted((tmp_path / "r1").iterdir())
    f2 = sorted((tmp_path / "r2").iterdir())
    assert [p.name for p in f1] == [p.name for p in f2]
    for a, b in zip(f1, f2):
        assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_monotone_phantoms(tmp_path):
    generate_phantoms(
        PhantomSpec(count=10, shape=(48, 48), seed=3), tmp_path / "d",
        include_masks_in_manifest=False,
    )
    out_dir = tmp_path / "sweep"
    code = run("validate", tmp_path / "d" / "manifest.csv", "--out-dir", out_dir,
               "--scales", "2,10,50", "--kinds", "noise", "--bins", "16")
    assert code == 0
    lines = (out_dir / "sweep.csv").read_text().splitlines()
    assert lines[1] == "kind,scale_pct,dims,frd"
    assert len(lines) == 2 + 3
    assert (out_dir / "sweep.svg").is_file()


def test_validate_no_plot(tmp_path):
    generate_phantoms(PhantomSpec(count=4, shape=(32, 32), seed=4), tmp_path / "d",
                      include_masks_in_manifest=False)
    out_dir = tmp_path / "sweep"
    code = run("validate", tmp_path / "d" / "manifest.csv", "--out-dir", out_dir,
               "--scales", "5,20", "--kinds", "noise", "--no-plot", "--bins", "8")
    assert code == 0
    assert not (out_dir / "sweep.svg").exists()


def test_validate_default_grid_is_ten_rows(tmp_path):
    generate_phantoms(PhantomSpec(count=6, shape=(32, 32), seed=5), tmp_path / "d",
                      include_masks_in_manifest=False)
    out_dir = tmp_path / "sweep"
    code = run("validate", tmp_path / "d" / "manifest.csv", "--out-dir", out_dir, "--bins", "16")
    assert code == 0
    lines = (out_dir / "sweep.csv").read_text().splitlines()
    assert len(lines) == 2 + 10  # 5 scales x 2 kinds


def test_validate_non_monotone_exit_3(tmp_path, capsys):
    # constant images: every perturbation is a no-op, FRD stays 0, so the
    # strictly-increasing assertion must fail with the violating pair named
    for i in range(3):
        save_image_2d(np.full((16, 16), 100.0), tmp_path / f"c{i}.png", bit_depth=8)
    manifest = tmp_path / "manifest.csv"
    manifest.write_text(
        "image_id,image_path,mask_path,bbox\n"
        + "".join(f"c{i},c{i}.png,,\n" for i in range(3)),
        encoding="utf-8",
    )
    code = run("validate", manifest, "--out-dir", tmp_path / "s", "--scales", "5,20",
               "--kinds", "noise", "--no-plot")
    assert code == 3
    assert "monotonicity violated" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# kinetics
# ---------------------------------------------------------------------------

def test_kinetics_single_case(tmp_path):
    table = generate_phase_series(PhantomSpec(count=1, shape=(32, 32), seed=6),
                                  [1.0, 2.0], tmp_path / "k")
    out_dir = tmp_path / "out"
    assert run("kinetics", table, "--out-dir", out_dir) == 0
    series_lines = (out_dir / "kinetics.csv").read_text().splitlines()
    assert series_lines[1] == "case_id,phase,value,normalized"
    assert len(series_lines) == 2 + 2  # one case, two phases
    agg_lines = (out_dir / "kinetics_aggregate.csv").read_text().splitlines()
    assert agg_lines[1] == "phase,mean,std,n"
    assert (out_dir / "kinetics.svg").is_file()


def test_kinetics_normalized_flag(tmp_path):
    table = generate_phase_series(PhantomSpec(count=2, shape=(32, 32), seed=7),
                                  [1.0, 2.0], tmp_path / "k")
    out_dir = tmp_path / "out"
    assert run("kinetics", table, "--out-dir", out_dir, "--normalized", "--no-plot") == 0
    for line in (out_dir / "kinetics.csv").read_text().splitlines()[2:]:
        assert line.endswith(",true")


# ---------------------------------------------------------------------------
# phantom
# ---------------------------------------------------------------------------

def test_phantom_command(tmp_path):
    out_dir = tmp_path / "ph"
    assert run("phantom", "--out-dir", out_dir, "--count", "2", "--shape", "24x24") == 0
    from frd.dataset_io import load_manifest

    m = load_manifest(out_dir / "manifest.csv")
    assert len(m) == 2


def test_phantom_phase_series_command(tmp_path):
    out_dir = tmp_path / "ph"
    assert run("phantom", "--out-dir", out_dir, "--count", "2", "--shape", "24x24",
               "--phases", "1,2.5") == 0
    assert (out_dir / "cases.csv").is_file()


def test_phantom_bad_shape(tmp_path, capsys):
    assert run("phantom", "--out-dir", tmp_path, "--shape", "axb") == 2


# ---------------------------------------------------------------------------
# config file and precedence
# ---------------------------------------------------------------------------

def test_extract_and_compare_3d(tmp_path, capsys):
    generate_phantoms(
        PhantomSpec(count=3, shape=(20, 20, 20), lesion_radius=(4.0, 6.0), seed=2),
        tmp_path / "vol",
    )
    manifest = tmp_path / "vol" / "manifest.csv"
    features = tmp_path / "f3d.csv"
    assert run("extract", manifest, "--out", features, "--bins", "16") == 0
    assert len(features.read_text().splitlines()) == 2 + 3
    assert run("compare", features, features, "--out", tmp_path / "r.json") == 0
    assert float(capsys.readouterr().out.strip().splitlines()[-1]) <= 1e-6


def test_config_file_and_flag_precedence(phantoms, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bin_count": 8, "seed": 3}))
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    run("extract", phantoms, "--out", a)                      # defaults (32 bins)
    run("extract", phantoms, "--out", b, "--config", cfg)     # file (8 bins)
    run("extract", phantoms, "--out", c, "--config", cfg, "--bins", "8")
    assert a.read_bytes() != b.read_bytes()
    assert b.read_bytes() == c.read_bytes()


def test_config_file_unknown_key(phantoms, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("extract", phantoms, "--out", tmp_path / "x.csv", "--config", cfg) == 2
    assert "unknown keys" in capsys.readouterr().err


def test_missing_subcommand_usage_error():
    assert run() == 1
