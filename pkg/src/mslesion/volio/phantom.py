"""Deterministic synthetic multi-modal phantoms with ellipsoidal lesions.

Random numbers come from numpy's PCG64 bit generator seeded with
``PhantomSpec.seed``. Draw order: lesion count, then per lesion (radii, centre) per
attempt, then one noise field per modality in ``flair, t1, t2`` order.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import ndimage

from mslesion.constants import (
    BACKGROUND_INTENSITY,
    BRAIN_INTENSITY,
    BRAIN_SEMI_AXIS_FRACTION,
    LESION_INTENSITY,
    MAX_PLACEMENT_RETRIES,
    PHANTOM_MODALITIES,
)
from mslesion.exceptions import LesionPlacementError
from mslesion.logging import get_logger
from mslesion.models.volume import MultiModalCase, PhantomSpec, Volume3D

logger = get_logger(__name__)


class Ellipsoid(BaseModel):
    """Axis-aligned ellipsoid in millimetre coordinates (voxel centres at index·spacing)."""

    model_config = ConfigDict(frozen=True)

    center_mm: tuple[float, float, float]
    radii_mm: tuple[float, float, float]

    def membership(self, dims: tuple[int, int, int], spacing: tuple[float, ...]) -> np.ndarray:
        """Boolean grid of voxels whose centres lie inside the ellipsoid."""
        x, y, z = _axes_mm(dims, spacing)
        (cx, cy, cz), (rx, ry, rz) = self.center_mm, self.radii_mm
        dist = ((x - cx) / rx) ** 2 + ((y - cy) / ry) ** 2 + ((z - cz) / rz) ** 2
        return dist <= 1.0


def _axes_mm(
    dims: tuple[int, int, int], spacing: tuple[float, ...],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    gx, gy, gz = np.ogrid[: dims[0], : dims[1], : dims[2]]
    return gx * spacing[0], gy * spacing[1], gz * spacing[2]


def brain_ellipsoid(spec: PhantomSpec) -> Ellipsoid:
    """Central brain region of a phantom."""
    pairs = list(zip(spec.dims, spec.spacing, strict=True))
    center = tuple((n - 1) / 2 * s for n, s in pairs)
    radii = tuple(BRAIN_SEMI_AXIS_FRACTION * n * s for n, s in pairs)
    return Ellipsoid(center_mm=center, radii_mm=radii)  # type: ignore[arg-type]


def _place_lesion(
    rng: np.random.Generator, spec: PhantomSpec, brain: Ellipsoid, brain_mask: np.ndarray,
) -> tuple[Ellipsoid, np.ndarray]:
    rlo, rhi = spec.lesion_radius_range_mm
    center = np.asarray(brain.center_mm)
    semi = np.asarray(brain.radii_mm)
    for _ in range(MAX_PLACEMENT_RETRIES):
        radii = rng.uniform(rlo, rhi, size=3)
        offset = rng.uniform(-1.0, 1.0, size=3) * np.maximum(semi - radii, 0.0)
        lesion = Ellipsoid(
            center_mm=tuple(float(c) for c in center + offset),  # type: ignore[arg-type]
            radii_mm=tuple(float(r) for r in radii),  # type: ignore[arg-type]
        )
        mask = lesion.membership(spec.dims, spec.spacing)
        if mask.any() and not np.any(mask & ~brain_mask):
            return lesion, mask
    raise LesionPlacementError(
        f"could not place a lesion of radius {rlo}-{rhi} mm inside a {spec.dims} brain "
        f"after {MAX_PLACEMENT_RETRIES} attempts"
    )


def generate_phantom_with_lesions(spec: PhantomSpec) -> tuple[MultiModalCase, list[Ellipsoid]]:
    """Generate a phantom and return the lesion ellipsoids it was built from."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    brain = brain_ellipsoid(spec)
    brain_mask = brain.membership(spec.dims, spec.spacing)

    lo, hi = spec.lesion_count_range
    count = int(rng.integers(lo, hi + 1))
    lesions: list[Ellipsoid] = []
    truth = np.zeros(spec.dims, dtype=bool)
    for _ in range(count):
        lesion, mask = _place_lesion(rng, spec, brain, brain_mask)
        lesions.append(lesion)
        truth |= mask

    modalities: dict[str, Volume3D] = {}
    for name in PHANTOM_MODALITIES:
        vol = np.full(spec.dims, BACKGROUND_INTENSITY, dtype=np.float64)
        vol[brain_mask] = BRAIN_INTENSITY
        vol[truth] = LESION_INTENSITY[name]
        vol += rng.normal(0.0, spec.noise_sigma, size=spec.dims) if spec.noise_sigma else 0.0
        modalities[name] = Volume3D(
            voxels=np.clip(vol, 0.0, 1.0).astype(np.float32), spacing=spec.spacing,
        )

    logger.debug("phantom seed=%d: %d lesions, %d lesion voxels", spec.seed, count, truth.sum())
    case = MultiModalCase(
        case_id=f"phantom-{spec.seed}",
        modalities=modalities,
        truth=Volume3D(voxels=truth.astype(np.uint8), spacing=spec.spacing),
    )
    return case, lesions


def generate_phantom(spec: PhantomSpec) -> MultiModalCase:
    """Generate a deterministic three-modality phantom case from its spec."""
    case, _ = generate_phantom_with_lesions(spec)
    return case


def rater_masks(truth: Volume3D, count: int, seed: int) -> list[Volume3D]:
    """Simulated annotator masks: the truth grown or shrunk by one voxel at random.

    A shrink that would erase the mask keeps the truth instead.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    structure = ndimage.generate_binary_structure(3, 1)
    base = truth.mask()
    raters = []
    for _ in range(count):
        if rng.integers(2):
            mask = ndimage.binary_dilation(base, structure=structure)
        else:
            mask = ndimage.binary_erosion(base, structure=structure, border_value=0)
            if not mask.any():
                mask = base
        raters.append(Volume3D(voxels=mask.astype(np.uint8), spacing=truth.spacing))
    return raters
