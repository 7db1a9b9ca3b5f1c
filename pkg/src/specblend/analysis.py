"""Band-energy comparison of a long video against a short reference, plus flicker."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import AnalysisError, NumericalError, ParameterError, ValidationError
from .spectral import (
    DOMAINS,
    BandReport,
    band_energy_fraction,
    band_mask,
    check_video,
    mask_dims_for,
    relative_band_ratio,
)
from .tensorio import read_tensor


@dataclass
class AnalysisRequest:
    video: str
    baseline: str
    split: float = 0.25
    domains: tuple[str, ...] = field(default=DOMAINS)

    def __post_init__(self):
        if not 0 < self.split < 1:
            raise ParameterError(f"split must lie in (0, 1), got {self.split}")
        unknown = set(self.domains) - set(DOMAINS)
        if unknown or not self.domains:
            raise ParameterError(f"domains must be a non-empty subset of {DOMAINS}, got {list(self.domains)}")


def compare_bands(video, baseline, split=0.25, domains=DOMAINS) -> list[BandReport]:
    """One :class:`BandReport` per domain, in the fixed order spatial, temporal, spatiotemporal.

    Fractions describe ``video``; ratios are relative to ``baseline``. Inputs
    are analyzed at their own lengths.
    """
    video = check_video(video, "video")
    baseline = check_video(baseline, "baseline")
    if baseline.shape[1] > video.shape[1]:
        raise ValidationError(
            f"baseline has {baseline.shape[1]} frames, more than the video's {video.shape[1]}"
        )
    reports = []
    for domain in (d for d in DOMAINS if d in domains):
        try:
            low, high = band_mask(domain, mask_dims_for(video, domain), split)
            ratios = relative_band_ratio(video, baseline, domain, split)
            reports.append(BandReport(
                domain=domain,
                split=split,
                low_fraction=band_energy_fraction(video, low),
                high_fraction=band_energy_fraction(video, high),
                ratio_low=ratios["low"],
                ratio_high=ratios["high"],
            ))
        except NumericalError as exc:
            raise AnalysisError(domain, str(exc)) from exc
    return reports


def frequency_report(req: AnalysisRequest) -> list[BandReport]:
    return compare_bands(read_tensor(req.video), read_tensor(req.baseline), req.split, req.domains)


def temporal_flicker(video) -> float:
    """Raw mean absolute difference between consecutive frames (every frame, no static-frame selection)."""
    video = check_video(video, "video")
    if video.shape[1] < 2:
        raise ParameterError("flicker needs at least 2 frames")
    return float(np.mean(np.abs(np.diff(video.astype(np.float64), axis=1))))


CSV_FIELDS = ("domain", "band", "split", "fraction", "ratio")


def reports_to_csv(reports, extra: dict | None = None) -> str:
    """One row per (domain, band). ``extra`` columns are repeated on every row."""
    extra = extra or {}
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS + tuple(extra), lineterminator="\n")
    writer.writeheader()
    for r in reports:
        for band in ("low", "high"):
            writer.writerow({
                "domain": r.domain,
                "band": band,
                "split": r.split,
                "fraction": getattr(r, f"{band}_fraction"),
                "ratio": getattr(r, f"ratio_{band}"),
                **extra,
            })
    return buf.getvalue()
