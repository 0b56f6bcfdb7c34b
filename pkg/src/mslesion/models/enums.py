"""Enumerations for mslesion."""

from enum import IntEnum, StrEnum


class ElementKind(StrEnum):
    """Voxel element type of a volume, named as in the MVOL header."""

    FLOAT32 = "f32"
    UINT8 = "u8"

    @property
    def dtype(self) -> str:
        return "<f4" if self is ElementKind.FLOAT32 else "u1"

    @property
    def itemsize(self) -> int:
        return 4 if self is ElementKind.FLOAT32 else 1


class SlicePlane(StrEnum):
    """Slicing plane; each member slices along one fixed volume axis."""

    AXIAL = "axial"
    CORONAL = "coronal"
    SAGITTAL = "sagittal"

    @property
    def axis(self) -> int:
        """Volume axis the plane slices along: axial=z(2), coronal=y(1), sagittal=x(0)."""
        return _PLANE_AXES[self]


_PLANE_AXES = {SlicePlane.AXIAL: 2, SlicePlane.CORONAL: 1, SlicePlane.SAGITTAL: 0}


class FusionMethod(StrEnum):
    """Label fusion backend."""

    MAJORITY_VOTE = "majority"
    AVERAGING = "averaging"
    STAPLE = "staple"


class Connectivity(IntEnum):
    """3D neighbourhood used for lesion labelling."""

    FACE = 6
    EDGE = 18
    CORNER = 26

    @property
    def rank(self) -> int:
        """Rank argument of scipy.ndimage.generate_binary_structure."""
        return {6: 1, 18: 2, 26: 3}[int(self)]


class VariantKind(StrEnum):
    """Ablation variant: single stacked branch or one branch per modality."""

    SB = "SB"
    MB = "MB"


class Protocol(StrEnum):
    """Cross-validation protocol."""

    NESTED_LOSO = "nested-loso"
    LOSO_ENSEMBLE = "loso-ensemble"
    NESTED_KFOLD = "nested-kfold"
