"""Overlap, lesion-wise, volume and surface-distance metrics.

Empty-mask conventions: ``dsc`` of two empty masks is 1; ``ppv`` and ``lfpr``
are missing (``None``) for an empty segmentation; ``ltpr`` is missing for an
empty reference; surface distances are missing if either mask is empty.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Sequence

import numpy as np
from scipy import ndimage, stats

from mslesion.exceptions import EmptyMaskError, InsufficientDataError, MetricError
from mslesion.models.enums import Connectivity
from mslesion.models.reports import (
    METRIC_COLUMNS,
    CaseMetrics,
    LesionComponent,
    LesionRegression,
    MetricsReport,
)
from mslesion.models.volume import Spacing, Volume3D

_SC_WEIGHTS = {"dsc": 1 / 8, "ppv": 1 / 8, "lfpr": 1 / 4, "ltpr": 1 / 4, "cor": 1 / 4}


def _pair(seg: Volume3D, ref: Volume3D) -> tuple[np.ndarray, np.ndarray]:
    if seg.dims != ref.dims:
        raise MetricError(f"segmentation dims {seg.dims} differ from reference dims {ref.dims}")
    return seg.mask(), ref.mask()


def _label(mask: np.ndarray, connectivity: Connectivity | int) -> tuple[np.ndarray, int]:
    structure = ndimage.generate_binary_structure(3, Connectivity(connectivity).rank)
    labels, count = ndimage.label(mask, structure=structure)
    return labels, int(count)


def connected_components(
    mask: Volume3D, connectivity: Connectivity | int = Connectivity.CORNER,
) -> list[LesionComponent]:
    labels, count = _label(mask.mask(), connectivity)
    voxel_mm3 = mask.voxel_volume_mm3
    components = []
    for label in range(1, count + 1):
        voxels = np.argwhere(labels == label)
        components.append(LesionComponent(
            label=label, voxels=voxels, volume_mm3=voxels.shape[0] * voxel_mm3,
        ))
    return components


def dsc(seg: Volume3D, ref: Volume3D) -> float:
    s, r = _pair(seg, ref)
    tp = np.count_nonzero(s & r)
    denom = np.count_nonzero(s) + np.count_nonzero(r)
    return 1.0 if denom == 0 else 2.0 * tp / denom


def ppv(seg: Volume3D, ref: Volume3D) -> float | None:
    s, r = _pair(seg, ref)
    n_seg = np.count_nonzero(s)
    return None if n_seg == 0 else np.count_nonzero(s & r) / n_seg


def _overlapping_fraction(
    source: np.ndarray, other: np.ndarray, connectivity: Connectivity | int,
) -> float | None:
    """Fraction of ``source`` components that touch ``other`` in at least one voxel."""
    labels, count = _label(source, connectivity)
    if count == 0:
        return None
    hit = np.unique(labels[other & (labels > 0)])
    return hit.size / count


def ltpr(
    seg: Volume3D, ref: Volume3D, connectivity: Connectivity | int = Connectivity.CORNER,
) -> float | None:
    """Fraction of reference lesions overlapped by the segmentation."""
    s, r = _pair(seg, ref)
    return _overlapping_fraction(r, s, connectivity)


def lfpr(
    seg: Volume3D, ref: Volume3D, connectivity: Connectivity | int = Connectivity.CORNER,
) -> float | None:
    """Fraction of segmented lesions that miss the reference entirely."""
    s, r = _pair(seg, ref)
    hit = _overlapping_fraction(s, r, connectivity)
    return None if hit is None else 1.0 - hit


def volume_difference(seg: Volume3D, ref: Volume3D) -> float:
    s, r = _pair(seg, ref)
    n_ref = np.count_nonzero(r)
    if n_ref == 0:
        raise EmptyMaskError("volume difference needs a non-empty reference")
    return abs(np.count_nonzero(s) - n_ref) / n_ref


def surface_mask(mask: np.ndarray) -> np.ndarray:
    """Foreground voxels with a background face neighbour; outside the grid is background."""
    mask = mask.astype(bool)
    eroded = ndimage.binary_erosion(
        mask, structure=ndimage.generate_binary_structure(3, 1), border_value=0,
    )
    return mask & ~eroded


def surface_voxels(mask: Volume3D) -> set[tuple[int, int, int]]:
    return {(int(x), int(y), int(z)) for x, y, z in np.argwhere(surface_mask(mask.mask()))}


def _directed_distances(
    src: np.ndarray, dst: np.ndarray, spacing: Spacing,
) -> np.ndarray:
    """Distance in mm from every ``src`` surface voxel to the nearest ``dst`` surface voxel."""
    field = ndimage.distance_transform_edt(~dst, sampling=spacing)
    return np.asarray(field[src], dtype=np.float64)


def _surface_distances(
    seg: Volume3D, ref: Volume3D, spacing: Spacing | None,
) -> tuple[np.ndarray, np.ndarray] | None:
    s, r = _pair(seg, ref)
    if not s.any() or not r.any():
        return None
    spacing = spacing or ref.spacing
    ss, rs = surface_mask(s), surface_mask(r)
    return _directed_distances(ss, rs, spacing), _directed_distances(rs, ss, spacing)


def assd(seg: Volume3D, ref: Volume3D, spacing: Spacing | None = None) -> float | None:
    """Average symmetric surface distance in mm, pooled over both surfaces."""
    dists = _surface_distances(seg, ref, spacing)
    if dists is None:
        return None
    a, b = dists
    return float((a.sum() + b.sum()) / (a.size + b.size))


def hausdorff(seg: Volume3D, ref: Volume3D, spacing: Spacing | None = None) -> float | None:
    dists = _surface_distances(seg, ref, spacing)
    if dists is None:
        return None
    a, b = dists
    return float(max(a.max(), b.max()))


def _pearson(x: Sequence[float], y: Sequence[float]) -> float:
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    return float(stats.pearsonr(x, y).statistic)


def overall_score(cases: Sequence[CaseMetrics]) -> float:
    """Weighted overall score on a 0-100 scale, averaged over raters × subjects.

    The volume correlation term is computed per rater across subjects. Missing
    PPV/LTPR/LFPR values count as 0; a constant volume series correlates as 0.
    """
    by_rater: dict[str, list[CaseMetrics]] = defaultdict(list)
    for case in cases:
        by_rater[case.rater].append(case)
    if not by_rater or min(len(v) for v in by_rater.values()) < 2:
        raise InsufficientDataError("the overall score needs at least 2 cases per rater")

    scores = []
    for rater_cases in by_rater.values():
        cor = _pearson(
            [c.seg_volume_mm3 for c in rater_cases], [c.ref_volume_mm3 for c in rater_cases],
        )
        for c in rater_cases:
            scores.append(
                _SC_WEIGHTS["dsc"] * c.dsc
                + _SC_WEIGHTS["ppv"] * (c.ppv or 0.0)
                + _SC_WEIGHTS["lfpr"] * (1.0 - (c.lfpr or 0.0))
                + _SC_WEIGHTS["ltpr"] * (c.ltpr or 0.0)
                + _SC_WEIGHTS["cor"] * cor
            )
    return 100.0 * float(np.mean(scores))


def _matched_pairs(
    seg: Volume3D, ref: Volume3D, connectivity: Connectivity | int,
) -> list[tuple[float, float]]:
    s, r = _pair(seg, ref)
    ref_labels, n_ref = _label(r, connectivity)
    seg_labels, _ = _label(s, connectivity)
    voxel_mm3 = ref.voxel_volume_mm3
    pairs = []
    for label in range(1, n_ref + 1):
        region = ref_labels == label
        hits = seg_labels[region]
        hits = hits[hits > 0]
        if hits.size == 0:
            continue
        best = int(np.bincount(hits).argmax())
        pairs.append((
            float(np.count_nonzero(region) * voxel_mm3),
            float(np.count_nonzero(seg_labels == best) * voxel_mm3),
        ))
    return pairs


def lesion_volume_regression(
    seg: Volume3D | Sequence[Volume3D],
    ref: Volume3D | Sequence[Volume3D],
    connectivity: Connectivity | int = Connectivity.CORNER,
) -> LesionRegression:
    """Regress segmented on reference lesion volumes over one case or a dataset.

    Each reference lesion is paired with the segmented lesion it overlaps most;
    unmatched lesions are left out.
    """
    segs = [seg] if isinstance(seg, Volume3D) else list(seg)
    refs = [ref] if isinstance(ref, Volume3D) else list(ref)
    if len(segs) != len(refs):
        raise MetricError(f"{len(segs)} segmentations for {len(refs)} references")
    pairs = [
        p for s, r in zip(segs, refs, strict=True) for p in _matched_pairs(s, r, connectivity)
    ]
    if len(pairs) < 2:
        raise InsufficientDataError(
            f"lesion regression needs >= 2 matched lesions, got {len(pairs)}"
        )
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    if np.ptp(x) == 0:
        raise InsufficientDataError("all matched reference lesions have the same volume")
    fit = stats.linregress(x, y)
    return LesionRegression(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        pearson_r=_pearson(x, y),
        pairs=pairs,
    )


def evaluate_case(
    case_id: str,
    seg: Volume3D,
    ref: Volume3D,
    connectivity: Connectivity | int = Connectivity.CORNER,
    *,
    rater: str = "truth",
) -> CaseMetrics:
    """Every per-case metric of ``seg`` against ``ref``; undefined values are ``None``."""
    s, r = _pair(seg, ref)
    return CaseMetrics(
        case_id=case_id,
        rater=rater,
        dsc=dsc(seg, ref),
        ppv=ppv(seg, ref),
        ltpr=ltpr(seg, ref, connectivity),
        lfpr=lfpr(seg, ref, connectivity),
        vd=volume_difference(seg, ref) if r.any() else None,
        sd_mm=assd(seg, ref),
        hd_mm=hausdorff(seg, ref),
        seg_volume_mm3=float(np.count_nonzero(s) * seg.voxel_volume_mm3),
        ref_volume_mm3=float(np.count_nonzero(r) * ref.voxel_volume_mm3),
    )


def score_notes(cases: Sequence[CaseMetrics], sc: float | None) -> list[str]:
    """Caveats a reader needs to interpret ``sc``."""
    if sc is None:
        return []
    empty = sorted({f"{c.case_id}/{c.rater}" for c in cases if c.lfpr is None})
    if not empty:
        return []
    return [
        f"LFPR undefined for empty segmentation(s) {', '.join(empty)}; "
        "counted as 0 in the overall score",
    ]


def aggregate(cases: Sequence[CaseMetrics]) -> MetricsReport:
    """Per-metric means ignoring missing values, plus the overall score for >= 2 cases."""
    means: dict[str, float | None] = {}
    for column in METRIC_COLUMNS:
        values = [getattr(c, column) for c in cases if getattr(c, column) is not None]
        means[column] = float(np.mean(values)) if values else None
    try:
        sc = overall_score(cases)
    except InsufficientDataError:
        sc = None
    return MetricsReport(cases=list(cases), means=means, sc=sc, notes=score_notes(cases, sc))
