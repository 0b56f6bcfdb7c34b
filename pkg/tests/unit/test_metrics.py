"""Tests for segmentation metrics."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from mslesion.core.metrics import (
    aggregate,
    assd,
    connected_components,
    dsc,
    evaluate_case,
    hausdorff,
    lesion_volume_regression,
    lfpr,
    ltpr,
    overall_score,
    ppv,
    surface_voxels,
    volume_difference,
)
from mslesion.exceptions import EmptyMaskError, InsufficientDataError, MetricError
from mslesion.models.enums import Connectivity
from mslesion.models.reports import CaseMetrics
from mslesion.models.volume import Volume3D

DIMS = (10, 10, 10)


def _vol(*boxes: tuple[slice, slice, slice], spacing=(1.0, 1.0, 1.0)) -> Volume3D:
    data = np.zeros(DIMS, dtype=np.uint8)
    for box in boxes:
        data[box] = 1
    return Volume3D(voxels=data, spacing=spacing)


def _box(x: int, y: int, z: int, size: int = 1) -> tuple[slice, slice, slice]:
    return (slice(x, x + size), slice(y, y + size), slice(z, z + size))


def _brute_surface(mask: np.ndarray) -> list[tuple[int, int, int]]:
    out = []
    for idx in zip(*np.nonzero(mask), strict=True):
        for axis, step in itertools.product(range(3), (-1, 1)):
            n = list(idx)
            n[axis] += step
            if not 0 <= n[axis] < mask.shape[axis] or not mask[tuple(n)]:
                out.append(tuple(int(i) for i in idx))
                break
    return out


def _scaled(p, spacing) -> list[float]:
    return [a * s for a, s in zip(p, spacing, strict=True)]


def _brute_distances(src, dst, spacing) -> list[float]:
    return [
        min(math.dist(_scaled(p, spacing), _scaled(q, spacing)) for q in dst)
        for p in src
    ]


class TestOverlap:
    def test_dsc(self):
        seg = _vol(_box(1, 1, 1), _box(2, 1, 1))
        ref = _vol(_box(2, 1, 1), _box(3, 1, 1))
        assert dsc(seg, ref) == pytest.approx(0.5)

    def test_dsc_of_two_empty_masks(self):
        assert dsc(_vol(), _vol()) == 1.0

    def test_dsc_one_empty_mask(self):
        assert dsc(_vol(), _vol(_box(1, 1, 1))) == 0.0

    def test_ppv(self):
        seg = _vol(_box(1, 1, 1, 2))
        ref = _vol(_box(1, 1, 1))
        assert ppv(seg, ref) == pytest.approx(1 / 8)
        assert ppv(_vol(), ref) is None

    def test_dims_mismatch(self):
        other = Volume3D(voxels=np.zeros((4, 4, 4), dtype=np.uint8))
        with pytest.raises(MetricError, match="dims"):
            dsc(_vol(), other)


class TestLesionWise:
    def test_detection_rates(self):
        ref = _vol(_box(1, 1, 1, 2), _box(6, 6, 6, 2))
        seg = _vol(_box(2, 2, 2), _box(1, 7, 7))
        assert ltpr(seg, ref) == pytest.approx(0.5)
        assert lfpr(seg, ref) == pytest.approx(0.5)

    def test_empty_conventions(self):
        ref = _vol(_box(1, 1, 1))
        assert lfpr(_vol(), ref) is None
        assert ltpr(ref, _vol()) is None
        assert ltpr(_vol(), ref) == 0.0

    def test_connectivity_changes_lesion_count(self):
        diagonal = _vol(_box(1, 1, 1), _box(2, 2, 2))
        assert len(connected_components(diagonal)) == 1
        assert len(connected_components(diagonal, Connectivity.EDGE)) == 2
        assert len(connected_components(diagonal, 6)) == 2

    def test_components_report_volume(self):
        comps = connected_components(_vol(_box(1, 1, 1, 2), spacing=(1.0, 1.0, 2.0)))
        assert comps[0].size == 8
        assert comps[0].volume_mm3 == pytest.approx(16.0)


def _flood_components(mask: np.ndarray) -> list[set[tuple[int, ...]]]:
    offsets = [d for d in itertools.product((-1, 0, 1), repeat=3) if d != (0, 0, 0)]
    seen: set[tuple[int, ...]] = set()
    components = []
    for start in zip(*np.nonzero(mask), strict=True):
        start = tuple(int(i) for i in start)
        if start in seen:
            continue
        seen.add(start)
        stack, comp = [start], set()
        while stack:
            v = stack.pop()
            comp.add(v)
            for d in offsets:
                n = tuple(a + b for a, b in zip(v, d, strict=True))
                inside = all(0 <= c < s for c, s in zip(n, mask.shape, strict=True))
                if inside and n not in seen and mask[n]:
                    seen.add(n)
                    stack.append(n)
        components.append(comp)
    return components


def _hit_fraction(source: np.ndarray, other: np.ndarray) -> float | None:
    comps = _flood_components(source)
    if not comps:
        return None
    return sum(any(other[v] for v in comp) for comp in comps) / len(comps)


@pytest.mark.parametrize("seed", range(200))
def test_counts_match_hand_oracles(seed: int):
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in rng.integers(5, 17, size=3))
    s_arr = (rng.random(dims) > 0.85).astype(np.uint8)
    r_arr = (rng.random(dims) > 0.8).astype(np.uint8)
    seg, ref = Volume3D(voxels=s_arr), Volume3D(voxels=r_arr)
    tp, n_s, n_r = int((s_arr & r_arr).sum()), int(s_arr.sum()), int(r_arr.sum())
    assert dsc(seg, ref) == pytest.approx(2 * tp / (n_s + n_r))
    assert ppv(seg, ref) == pytest.approx(tp / n_s)
    assert volume_difference(seg, ref) == pytest.approx(abs(n_s - n_r) / n_r)
    assert ltpr(seg, ref) == pytest.approx(_hit_fraction(r_arr.astype(bool), s_arr.astype(bool)))
    assert lfpr(seg, ref) == pytest.approx(
        1.0 - _hit_fraction(s_arr.astype(bool), r_arr.astype(bool)),
    )


class TestVolumeDifference:
    def test_relative_difference(self):
        assert volume_difference(_vol(_box(1, 1, 1)), _vol(_box(1, 1, 1, 2))) == 7 / 8

    def test_empty_reference(self):
        with pytest.raises(EmptyMaskError):
            volume_difference(_vol(_box(1, 1, 1)), _vol())


class TestSurfaceDistance:
    @pytest.mark.parametrize("spacing", [(1.0, 1.0, 1.0), (0.5, 1.0, 2.0)])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_brute_force(self, seed: int, spacing):
        rng = np.random.default_rng(seed)
        seg = Volume3D(voxels=(rng.random((7, 6, 5)) > 0.7).astype(np.uint8), spacing=spacing)
        ref = Volume3D(voxels=(rng.random((7, 6, 5)) > 0.6).astype(np.uint8), spacing=spacing)
        ss, rs = _brute_surface(seg.voxels), _brute_surface(ref.voxels)
        assert surface_voxels(seg) == set(ss)
        a = _brute_distances(ss, rs, spacing)
        b = _brute_distances(rs, ss, spacing)
        assert assd(seg, ref) == pytest.approx((sum(a) + sum(b)) / (len(a) + len(b)))
        assert hausdorff(seg, ref) == pytest.approx(max(a + b))

    def test_identical_masks(self):
        mask = _vol(_box(2, 2, 2, 3))
        assert assd(mask, mask) == 0.0
        assert hausdorff(mask, mask) == 0.0

    def test_missing_for_empty_masks(self):
        assert assd(_vol(), _vol(_box(1, 1, 1))) is None
        assert hausdorff(_vol(_box(1, 1, 1)), _vol()) is None

    def test_explicit_spacing_overrides_the_grid(self):
        seg, ref = _vol(_box(1, 1, 1)), _vol(_box(1, 1, 4))
        assert assd(seg, ref) == 3.0
        assert assd(seg, ref, spacing=(1.0, 1.0, 2.0)) == 6.0


def _case(case_id: str, seg: Volume3D, ref: Volume3D, rater: str = "truth") -> CaseMetrics:
    return evaluate_case(case_id, seg, ref, rater=rater)


class TestOverallScore:
    def test_perfect_segmentations_score_100(self):
        refs = [_vol(_box(1, 1, 1, 2)), _vol(_box(1, 1, 1, 3))]
        cases = [_case(f"c{i}", r, r) for i, r in enumerate(refs)]
        assert overall_score(cases) == pytest.approx(100.0)

    def test_disjoint_but_proportional_volumes_score_25(self):
        cases = [
            _case("a", _vol(_box(6, 6, 6, 2)), _vol(_box(1, 1, 1, 2))),
            _case("b", _vol(_box(5, 5, 5, 3)), _vol(_box(1, 1, 1, 3))),
        ]
        assert overall_score(cases) == pytest.approx(25.0)

    def test_needs_two_cases_per_rater(self):
        ref = _vol(_box(1, 1, 1))
        cases = [_case("a", ref, ref, "r1"), _case("b", ref, ref, "r1"), _case("a", ref, ref)]
        with pytest.raises(InsufficientDataError):
            overall_score(cases)

    def test_constant_volumes_correlate_as_zero(self):
        ref = _vol(_box(1, 1, 1, 2))
        cases = [_case("a", ref, ref), _case("b", ref, ref)]
        assert overall_score(cases) == pytest.approx(75.0)


class TestRegression:
    def test_perfect_lesion_volumes(self):
        ref = _vol(_box(1, 1, 1), _box(5, 5, 5, 2))
        fit = lesion_volume_regression(ref, ref)
        assert fit.slope == pytest.approx(1.0)
        assert fit.intercept == pytest.approx(0.0, abs=1e-9)
        assert sorted(fit.pairs) == [(1.0, 1.0), (8.0, 8.0)]

    def test_pools_cases_and_skips_unmatched_lesions(self):
        refs = [_vol(_box(1, 1, 1)), _vol(_box(5, 5, 5, 2), _box(1, 1, 1))]
        segs = [_vol(_box(1, 1, 1, 2)), _vol(_box(5, 5, 5, 2))]
        fit = lesion_volume_regression(segs, refs)
        assert sorted(fit.pairs) == [(1.0, 8.0), (8.0, 8.0)]
        assert fit.slope == pytest.approx(0.0, abs=1e-9)

    def test_too_few_pairs(self):
        ref = _vol(_box(1, 1, 1))
        with pytest.raises(InsufficientDataError):
            lesion_volume_regression(ref, ref)

    def test_length_mismatch(self):
        with pytest.raises(MetricError):
            lesion_volume_regression([_vol()], [_vol(), _vol()])


class TestEvaluateCase:
    def test_all_columns(self):
        ref = _vol(_box(1, 1, 1, 2))
        m = evaluate_case("c", ref, ref, rater="rater1")
        assert m.rater == "rater1"
        assert (m.dsc, m.ppv, m.ltpr, m.lfpr, m.vd, m.sd_mm, m.hd_mm) == (
            1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0,
        )
        assert m.seg_volume_mm3 == m.ref_volume_mm3 == 8.0

    def test_empty_reference(self):
        m = evaluate_case("c", _vol(_box(1, 1, 1)), _vol())
        assert m.dsc == 0.0
        assert m.vd is None
        assert m.ltpr is None
        assert m.sd_mm is None
        assert m.lfpr == 1.0


class TestAggregate:
    def test_means_skip_missing_values(self):
        ref = _vol(_box(1, 1, 1, 2))
        cases = [_case("a", ref, ref), _case("b", _vol(), ref)]
        report = aggregate(cases)
        assert report.means["dsc"] == pytest.approx(0.5)
        assert report.means["ppv"] == pytest.approx(1.0)
        assert report.sc is not None

    def test_single_case_has_no_score(self):
        ref = _vol(_box(1, 1, 1))
        report = aggregate([_case("a", ref, ref)])
        assert report.sc is None
        assert report.means["vd"] == 0.0

    def test_all_missing_column(self):
        report = aggregate([_case("a", _vol(), _vol(_box(1, 1, 1)))])
        assert report.means["ppv"] is None

    def test_notes_empty_segmentation_counted_in_score(self):
        ref = _vol(_box(1, 1, 1, 2))
        report = aggregate([_case("a", ref, ref), _case("b", _vol(), ref)])
        assert report.means["lfpr"] == 0.0
        assert len(report.notes) == 1
        assert "b/truth" in report.notes[0]
        assert "counted as 0" in report.notes[0]

    def test_no_notes_when_every_lfpr_is_defined(self):
        refs = [_vol(_box(1, 1, 1, 2)), _vol(_box(1, 1, 1, 3))]
        report = aggregate([_case(f"c{i}", r, r) for i, r in enumerate(refs)])
        assert report.notes == []
