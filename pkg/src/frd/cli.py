"""Command-line frontend: extract, compare, perturb, validate, kinetics, phantom.

Exit codes: 0 success, 1 usage error, 2 data error, 3 assertion failure
(validate only). Config precedence is CLI flags > config file > defaults,
and the effective config fingerprint is embedded in every output artifact.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from frd import dataset_io, kinetics, phantom, perturb, svgplot
from frd.config import NORMALIZATION_MODES, FeatureConfig, RunConfig
from frd.dataset_io import DatasetManifest
from frd.features import FEATURE_NAMES, extract_all
from frd.frechet import FeatureMatrix, frd

log = logging.getLogger(__name__)

_CONFIG_KEYS = (
    "bin_count", "gldm_alpha", "glcm_distance", "norm_mode", "epsilon",
    "seed", "blur_divisor", "threads",
)


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit 2; this CLI reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--seed", type=int, help="base RNG seed (default 0)")
    common.add_argument("--bins", type=int, dest="bin_count", help="discretization bin count (default 32)")
    common.add_argument("--alpha", type=int, dest="gldm_alpha", help="GLDM similarity alpha (default 0)")
    common.add_argument("--distance", type=int, dest="glcm_distance", help="GLCM pair distance (default 1)")
    common.add_argument("--norm-mode", choices=NORMALIZATION_MODES, help="feature normalization mode")
    common.add_argument("--epsilon", type=float, help="covariance regularization epsilon (default 1e-6)")
    common.add_argument("--blur-divisor", type=float, help="blur sigma divisor (default 4)")
    common.add_argument("--threads", type=int, help="parallel workers for per-image extraction")
    common.add_argument("--no-plot", action="store_true", default=None, help="skip SVG chart output")
    return common


def build_parser() -> _Parser:
    parser = _Parser(prog="frd", description=__doc__.splitlines()[0])
    common = _common_flags()
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="extract the 94-feature CSV for a dataset")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output features CSV")
    p.add_argument("--crop", action="store_true", help="apply tumor-centered cropping (2D, needs bboxes)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("compare", parents=[common], help="FRD between two feature CSVs")
    p.add_argument("real_csv", type=Path)
    p.add_argument("synth_csv", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output report JSON")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("perturb", parents=[common], help="write a noise/blur-perturbed dataset copy")
    p.add_argument("manifest", type=Path)
    p.add_argument("--kind", choices=perturb.PERTURBATION_KINDS, required=True)
    p.add_argument("--scale", type=float, required=True, help="perturbation scale in percent")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("validate", parents=[common], help="FRD-vs-scale monotonicity sweep")
    p.add_argument("manifest", type=Path)
    p.add_argument("--scales", default="1,5,10,20,50", help="comma-separated percent scales")
    p.add_argument("--kinds", default="noise,blur", help="comma-separated perturbation kinds")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("kinetics", parents=[common], help="tumor contrast-kinetics curves")
    p.add_argument("case_table", type=Path)
    p.add_argument("--normalized", action="store_true", help="divide by tumor-free mean intensity")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_kinetics)

    p = sub.add_parser("phantom", parents=[common], help="generate a deterministic phantom dataset")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--shape", default="64x64", help="extents, e.g. 64x64 or 32x32x32")
    p.add_argument("--boost", type=float, default=2.0, help="lesion intensity boost factor")
    p.add_argument("--phases", default=None, help="per-phase multipliers, e.g. 1,3,2.5,2")
    p.add_argument("--no-manifest-masks", action="store_true",
                   help="write masks but leave them out of the manifest")
    p.set_defaults(func=cmd_phantom)
    return parser


def _load_config_file(path: Path) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}") from exc
    unknown = set(data) - set(_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"config file {path} has unknown keys: {sorted(unknown)}")
    return data


def build_run_config(args, dims: int) -> RunConfig:
    """Merge defaults <- config file <- explicit CLI flags."""
    merged = {
        "bin_count": 32, "gldm_alpha": 0, "glcm_distance": 1, "norm_mode": "joint",
        "epsilon": 1e-6, "seed": 0, "blur_divisor": 4.0, "threads": 1,
    }
    if getattr(args, "config", None):
        merged.update(_load_config_file(args.config))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    features = FeatureConfig(
        bin_count=merged["bin_count"],
        gldm_alpha=merged["gldm_alpha"],
        glcm_distance=merged["glcm_distance"],
        dims=dims,
    )
    return RunConfig(
        features=features,
        norm_mode=merged["norm_mode"],
        epsilon=merged["epsilon"],
        seed=merged["seed"],
        blur_divisor=merged["blur_divisor"],
        threads=merged["threads"],
    )


# ---------------------------------------------------------------------------
# extract
# ---------------------------------------------------------------------------

def _extract_entry(work) -> np.ndarray:
    image_path, mask_path, bbox, crop, config = work
    image = dataset_io.load_image(image_path)
    mask = dataset_io.load_mask(mask_path) if mask_path else None
    if crop:
        if bbox is None:
            raise ValueError("--crop requires a bbox in the manifest")
        image = dataset_io.tumor_crop(image, bbox)
        if mask is not None:
            raise ValueError("--crop with masks is unsupported (crop the masks upstream)")
    return extract_all(image, mask, config).values


def _extract_matrix(manifest: DatasetManifest, config: RunConfig, crop: bool = False) -> FeatureMatrix:
    work = [
        (e.image_path, e.mask_path, e.bbox, crop, config.features)
        for e in manifest.entries
    ]
    if config.threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.threads) as pool:
            futures = [pool.submit(_extract_entry, item) for item in work]
            results = []
            for entry, future in zip(manifest.entries, futures):
                try:
                    results.append(future.result())
                except (ValueError, OSError) as exc:
                    raise ValueError(f"image {entry.image_id!r}: {exc}") from exc
    else:
        results = []
        for entry, item in zip(manifest.entries, work):
            try:
                results.append(_extract_entry(item))
            except (ValueError, OSError) as exc:
                raise ValueError(f"image {entry.image_id!r}: {exc}") from exc
    return FeatureMatrix(
        values=np.stack(results),
        feature_names=FEATURE_NAMES,
        image_ids=tuple(manifest.image_ids()),
    )


def cmd_extract(args) -> int:
    manifest = dataset_io.load_manifest(args.manifest)
    config = build_run_config(args, manifest.dims)
    matrix = _extract_matrix(manifest, config, crop=args.crop)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    matrix.to_csv(args.out, fingerprint=config.fingerprint)
    log.info("wrote %s (%d images x %d features)", args.out, matrix.n, len(FEATURE_NAMES))
    return 0


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def cmd_compare(args) -> int:
    real = FeatureMatrix.from_csv(args.real_csv, expected_names=FEATURE_NAMES)
    synth = FeatureMatrix.from_csv(args.synth_csv, expected_names=FEATURE_NAMES)
    config = build_run_config(args, dims=2)
    report = frd(real, synth, mode=config.norm_mode, epsilon=config.epsilon,
                 fingerprint=config.fingerprint)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(report.to_json(), encoding="utf-8")
    print(report.frd_value)
    return 0


# ---------------------------------------------------------------------------
# perturb
# ---------------------------------------------------------------------------

def cmd_perturb(args) -> int:
    manifest = dataset_io.load_manifest(args.manifest)
    config = build_run_config(args, manifest.dims)
    spec = perturb.PerturbationSpec(
        kind=args.kind, scale_pct=args.scale, seed=config.seed,
        blur_divisor=config.blur_divisor,
    )
    out = perturb.perturb_dataset(manifest, spec, args.out_dir, fingerprint=config.fingerprint)
    print(args.out_dir / "manifest.csv")
    log.info("perturbed %d images (%s %.3g%%)", len(out), args.kind, args.scale)
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _parse_floats(text: str, what: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"malformed {what} list {text!r}") from exc


def cmd_validate(args) -> int:
    manifest = dataset_io.load_manifest(args.manifest)
    config = build_run_config(args, manifest.dims)
    scales = _parse_floats(args.scales, "scales")
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    result = perturb.validation_sweep(
        manifest, kinds, scales, config.features, mode=config.norm_mode,
        seed=config.seed, epsilon=config.epsilon, blur_divisor=config.blur_divisor,
        fingerprint=config.fingerprint,
    )
    args.out_dir.mkdir(parents=True, exist_ok=True)
    result.to_csv(args.out_dir / "sweep.csv")
    if not args.no_plot:
        series = [
            (kind, scales, result.column(kind))
            for kind in kinds
        ]
        svgplot.sweep_chart(series, args.out_dir / "sweep.svg", fingerprint=config.fingerprint)
    for kind in kinds:
        column = result.column(kind)
        for (s0, v0), (s1, v1) in zip(zip(scales, column), zip(scales[1:], column[1:])):
            if not v1 > v0:
                print(
                    f"monotonicity violated for {kind}: FRD({s1:g}%)={v1:.6g} "
                    f"<= FRD({s0:g}%)={v0:.6g}",
                    file=sys.stderr,
                )
                return 3
    print(args.out_dir / "sweep.csv")
    return 0


# ---------------------------------------------------------------------------
# kinetics
# ---------------------------------------------------------------------------

def cmd_kinetics(args) -> int:
    config = build_run_config(args, dims=2)
    cases = kinetics.load_case_table(args.case_table)
    series, aggregate = kinetics.kinetics_curves(cases, normalized=args.normalized)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    kinetics.series_to_csv(series, args.out_dir / "kinetics.csv", fingerprint=config.fingerprint)
    kinetics.aggregate_to_csv(aggregate, args.out_dir / "kinetics_aggregate.csv",
                              fingerprint=config.fingerprint)
    if not args.no_plot:
        svgplot.kinetics_chart(
            aggregate.phase_labels, aggregate.means, aggregate.stds,
            args.out_dir / "kinetics.svg", fingerprint=config.fingerprint,
        )
    print(args.out_dir / "kinetics_aggregate.csv")
    return 0


# ---------------------------------------------------------------------------
# phantom
# ---------------------------------------------------------------------------

def cmd_phantom(args) -> int:
    try:
        shape = tuple(int(v) for v in args.shape.lower().split("x"))
    except ValueError as exc:
        raise ValueError(f"malformed shape {args.shape!r}") from exc
    config = build_run_config(args, dims=len(shape) if len(shape) in (2, 3) else 2)
    spec = phantom.PhantomSpec(
        count=args.count, shape=shape, lesion_boost=args.boost, seed=config.seed,
    )
    if args.phases:
        table = phantom.generate_phase_series(
            spec, _parse_floats(args.phases, "phases"), args.out_dir,
            fingerprint=config.fingerprint,
        )
        print(table)
    else:
        phantom.generate_phantoms(
            spec, args.out_dir,
            include_masks_in_manifest=not args.no_manifest_masks,
            fingerprint=config.fingerprint,
        )
        print(args.out_dir / "manifest.csv")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
