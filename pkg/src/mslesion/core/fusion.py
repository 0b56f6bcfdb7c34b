"""Label fusion: majority vote, averaging, STAPLE, MPR reconstruction, ensembles.

All fusion outputs are binary uint8 volumes on the grid of their inputs.
Majority voting is strict: a voxel is foreground only if more than half of
the inputs vote for it, so even-sized ties resolve to background.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence

import numpy as np

from mslesion.constants import DEFAULT_THRESHOLD, STAPLE_INIT, STAPLE_MAX_ITER, STAPLE_TOL
from mslesion.exceptions import FusionError, StapleDegenerateError
from mslesion.logging import get_logger
from mslesion.models.enums import FusionMethod, SlicePlane
from mslesion.models.reports import StapleResult
from mslesion.models.volume import Volume3D

logger = get_logger(__name__)

_CLIP = 1e-12


def _check_inputs(volumes: Sequence[Volume3D], what: str, minimum: int = 1) -> None:
    if len(volumes) < minimum:
        raise FusionError(f"{what} needs at least {minimum} input(s), got {len(volumes)}")
    ref = volumes[0]
    for vol in volumes[1:]:
        if vol.dims != ref.dims:
            raise FusionError(f"{what} inputs disagree in dims: {ref.dims} vs {vol.dims}")


def _check_binary(volumes: Sequence[Volume3D], what: str) -> None:
    for vol in volumes:
        if not vol.is_binary:
            raise FusionError(f"{what} expects binary uint8 masks")


def _binary(data: np.ndarray, like: Volume3D) -> Volume3D:
    return Volume3D(voxels=data.astype(np.uint8), spacing=like.spacing)


def binarize_volume(prob: Volume3D, tau: float = DEFAULT_THRESHOLD) -> Volume3D:
    """Voxel = 1 iff probability > tau."""
    return _binary(prob.voxels > tau, prob)


def majority_vote(masks: Sequence[Volume3D]) -> Volume3D:
    _check_inputs(masks, "majority_vote")
    _check_binary(masks, "majority_vote")
    votes = np.sum([m.voxels.astype(np.int32) for m in masks], axis=0)
    return _binary(2 * votes > len(masks), masks[0])


def average_fusion(probs: Sequence[Volume3D], tau: float = DEFAULT_THRESHOLD) -> Volume3D:
    """Voxel = 1 iff the mean of the (soft or binary) inputs exceeds tau."""
    _check_inputs(probs, "average_fusion")
    mean = np.mean([p.voxels.astype(np.float64) for p in probs], axis=0)
    return _binary(mean > tau, probs[0])


def consensus_intersection(masks: Sequence[Volume3D]) -> Volume3D:
    """Voxelwise intersection of several raters' masks."""
    _check_inputs(masks, "consensus_intersection")
    _check_binary(masks, "consensus_intersection")
    return _binary(np.logical_and.reduce([m.mask() for m in masks]), masks[0])


def staple(
    masks: Sequence[Volume3D],
    max_iter: int = STAPLE_MAX_ITER,
    tol: float = STAPLE_TOL,
) -> StapleResult:
    """Estimate a consensus and per-rater sensitivity/specificity by EM.

    Sensitivities and specificities start at 0.99. The foreground prior is
    fixed to the mean foreground fraction of the inputs. Iteration stops once
    no parameter moves by ``tol`` or more, or after ``max_iter`` rounds.
    """
    _check_inputs(masks, "staple", minimum=2)
    _check_binary(masks, "staple")
    d = np.stack([m.voxels.reshape(-1).astype(np.float64) for m in masks], axis=1)
    f = float(d.mean())
    if f <= 0.0 or f >= 1.0:
        raise StapleDegenerateError(
            "STAPLE inputs are all background or all foreground; the prior is degenerate"
        )

    n_raters = d.shape[1]
    p = np.full(n_raters, STAPLE_INIT)
    q = np.full(n_raters, STAPLE_INIT)
    log_f, log_not_f = np.log(f), np.log1p(-f)
    w = np.zeros(d.shape[0])
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        pc = np.clip(p, _CLIP, 1.0 - _CLIP)
        qc = np.clip(q, _CLIP, 1.0 - _CLIP)
        log_a = log_f + d @ np.log(pc) + (1.0 - d) @ np.log1p(-pc)
        log_b = log_not_f + d @ np.log1p(-qc) + (1.0 - d) @ np.log(qc)
        w = 1.0 / (1.0 + np.exp(np.clip(log_b - log_a, -700.0, 700.0)))

        sw, snw = w.sum(), (1.0 - w).sum()
        new_p = (w @ d) / sw if sw > 0 else p
        new_q = ((1.0 - w) @ (1.0 - d)) / snw if snw > 0 else q
        delta = max(np.abs(new_p - p).max(), np.abs(new_q - q).max())
        p, q = new_p, new_q
        if delta < tol:
            converged = True
            break

    if not converged:
        logger.warning("STAPLE did not converge within %d iterations", max_iter)
    consensus = w.reshape(masks[0].dims) > 0.5
    degenerate = not consensus.any() or bool(consensus.all())
    return StapleResult(
        consensus=_binary(consensus, masks[0]),
        sensitivity=[float(x) for x in np.clip(p, 0.0, 1.0)],
        specificity=[float(x) for x in np.clip(q, 0.0, 1.0)],
        iterations=iterations,
        converged=converged,
        degenerate=degenerate,
    )


def _staple_or_vote(masks: Sequence[Volume3D]) -> Volume3D:
    """STAPLE consensus; unanimous all-empty/all-full inputs pass through as is."""
    try:
        return staple(masks).consensus
    except StapleDegenerateError:
        logger.debug("STAPLE inputs unanimous; using the common mask")
        return majority_vote(masks)


def fuse_binary(masks: Sequence[Volume3D], method: FusionMethod) -> Volume3D:
    """Fuse binary masks with ``method`` (averaging thresholds the vote fraction)."""
    if method is FusionMethod.MAJORITY_VOTE:
        return majority_vote(masks)
    if method is FusionMethod.AVERAGING:
        return average_fusion(masks)
    if len(masks) == 1:
        return masks[0]
    return _staple_or_vote(masks)


def mpr_reconstruct(
    plane_probs: Mapping[SlicePlane, Volume3D] | Sequence[tuple[SlicePlane, Volume3D]],
    method: FusionMethod = FusionMethod.MAJORITY_VOTE,
    tau: float = DEFAULT_THRESHOLD,
) -> Volume3D:
    """Fuse the axial, coronal and sagittal probability volumes into one mask."""
    by_plane = dict(plane_probs.items() if isinstance(plane_probs, Mapping) else plane_probs)
    missing = [plane.value for plane in SlicePlane if plane not in by_plane]
    if missing:
        raise FusionError(f"MPR reconstruction is missing planes {missing}")
    probs = [by_plane[plane] for plane in SlicePlane]
    _check_inputs(probs, "mpr_reconstruct")
    if method is FusionMethod.AVERAGING:
        return average_fusion(probs, tau)
    return fuse_binary([binarize_volume(p, tau) for p in probs], method)


def ensemble_fuse(member_masks: Sequence[Volume3D]) -> Volume3D:
    """Majority vote across cross-validation members."""
    return majority_vote(member_masks)


def fuse_members(
    method: FusionMethod,
    member_masks: Sequence[Volume3D],
    member_probs: Sequence[Volume3D] | None = None,
    tau: float = DEFAULT_THRESHOLD,
) -> Volume3D:
    """Combine ensemble members with the same method used across planes.

    Averaging uses each member's mean plane probability when ``member_probs``
    is given; the other methods use the members' binary masks.
    """
    if method is FusionMethod.AVERAGING and member_probs is not None:
        return average_fusion(member_probs, tau)
    _check_inputs(member_masks, "fuse_members")
    return fuse_binary(member_masks, method)
