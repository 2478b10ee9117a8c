"""Tumor-region contrast-kinetics curves across DCE phases.

Per case and phase, the curve value is the mean intensity inside the tumor
mask, optionally divided by the mean intensity of the tumor-free remainder.
Aggregates use the sample (1/(N-1)) standard deviation; phases missing for a
case are excluded from that phase's aggregate.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from frd import dataset_io
from frd.grid import ImageGrid, RoiMask

log = logging.getLogger(__name__)


def region_mean(image: ImageGrid, mask: RoiMask) -> float:
    """Arithmetic mean of in-mask intensities."""
    mask.check_matches(image)
    return float(image.data[mask.membership].mean())


def normalized_region_mean(image: ImageGrid, mask: RoiMask) -> float:
    """In-mask mean divided by the mean of the mask complement."""
    mask.check_matches(image)
    complement = ~mask.membership
    if not complement.any():
        raise ValueError("mask covers the whole image; no tumor-free region")
    denom = float(image.data[complement].mean())
    if denom == 0:
        raise ValueError("tumor-free mean intensity is zero")
    return float(image.data[mask.membership].mean()) / denom


@dataclass(frozen=True)
class PhaseSeries:
    case_id: str
    phase_labels: Tuple[str, ...]
    values: Tuple[float, ...]
    normalized: bool


@dataclass(frozen=True)
class KineticsAggregate:
    phase_labels: Tuple[str, ...]
    means: Tuple[float, ...]
    stds: Tuple[float, ...]
    counts: Tuple[int, ...]


Case = Tuple[str, Sequence[Tuple[str, ImageGrid]], RoiMask]


def kinetics_curves(cases: Sequence[Case], normalized: bool = False) -> Tuple[List[PhaseSeries], KineticsAggregate]:
    """Per-case phase curves plus cross-case per-phase mean/std/count.

    The phase-label order is taken from the first case; other cases may skip
    phases but must not introduce labels outside that order.
    """
    if not cases:
        raise ValueError("no cases")
    order = [label for label, _ in cases[0][1]]
    series: List[PhaseSeries] = []
    per_phase: Dict[str, List[float]] = {label: [] for label in order}
    for case_id, phases, mask in cases:
        labels = [label for label, _ in phases]
        unknown = [l for l in labels if l not in order]
        if unknown:
            raise ValueError(f"case {case_id!r} has phase labels {unknown} not in {order}")
        if labels != [l for l in order if l in labels]:
            raise ValueError(f"case {case_id!r} phases {labels} out of order {order}")
        values = []
        for label, image in phases:
            value = normalized_region_mean(image, mask) if normalized else region_mean(image, mask)
            values.append(value)
            per_phase[label].append(value)
        series.append(PhaseSeries(case_id, tuple(labels), tuple(values), normalized))
    means, stds, counts = [], [], []
    for label in order:
        vals = np.asarray(per_phase[label])
        means.append(float(vals.mean()) if vals.size else float("nan"))
        stds.append(float(vals.std(ddof=1)) if vals.size > 1 else 0.0)
        counts.append(int(vals.size))
    aggregate = KineticsAggregate(tuple(order), tuple(means), tuple(stds), tuple(counts))
    return series, aggregate


# ---------------------------------------------------------------------------
# Case-table I/O (CSV: case_id,phase,image_path,mask_path)
# ---------------------------------------------------------------------------

CASE_TABLE_HEADER = ["case_id", "phase", "image_path", "mask_path"]


def load_case_table(path) -> List[Case]:
    """Read a case table CSV and load its images/masks.

    Rows whose image file is missing are skipped with a warning (a case may
    lack later phases); a case with no loadable phase is an error.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"case table not found: {path}")
    base = path.parent
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or rows[0] != CASE_TABLE_HEADER:
        raise ValueError(f"case table header must be {','.join(CASE_TABLE_HEADER)!r}: {path}")
    grouped: Dict[str, List[Tuple[str, Path]]] = {}
    masks: Dict[str, Path] = {}
    case_order: List[str] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 columns")
        case_id, phase, image_path, mask_path = (c.strip() for c in row)
        img = base / image_path if not Path(image_path).is_absolute() else Path(image_path)
        msk = base / mask_path if not Path(mask_path).is_absolute() else Path(mask_path)
        if case_id not in grouped:
            grouped[case_id] = []
            case_order.append(case_id)
            masks[case_id] = msk
        grouped[case_id].append((phase, img))
    cases: List[Case] = []
    for case_id in case_order:
        phases: List[Tuple[str, ImageGrid]] = []
        for phase, img_path in grouped[case_id]:
            if not img_path.is_file():
                log.warning("case %s: missing phase %s file %s; skipped", case_id, phase, img_path)
                continue
            phases.append((phase, dataset_io.load_image(img_path)))
        if not phases:
            raise ValueError(f"case {case_id!r} has no loadable phase image")
        mask = dataset_io.load_mask(masks[case_id])
        cases.append((case_id, phases, mask))
    return cases


def series_to_csv(series: Sequence[PhaseSeries], path, fingerprint: str = "") -> None:
    lines = []
    if fingerprint:
        lines.append(f"# config_fingerprint={fingerprint}")
    lines.append("case_id,phase,value,normalized")
    for s in series:
        for label, value in zip(s.phase_labels, s.values):
            lines.append(f"{s.case_id},{label},{value:.17g},{str(s.normalized).lower()}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def aggregate_to_csv(aggregate: KineticsAggregate, path, fingerprint: str = "") -> None:
    lines = []
    if fingerprint:
        lines.append(f"# config_fingerprint={fingerprint}")
    lines.append("phase,mean,std,n")
    for label, mean, std, n in zip(
        aggregate.phase_labels, aggregate.means, aggregate.stds, aggregate.counts
    ):
        lines.append(f"{label},{mean:.17g},{std:.17g},{n}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
