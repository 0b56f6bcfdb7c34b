"""Exception hierarchy for mslesion."""


class MslesionError(Exception):
    """Base exception for all mslesion errors."""


class ConfigError(MslesionError):
    """Configuration-related error."""


class ConfigNotFoundError(ConfigError):
    """Raised when the TOML config file is missing."""


class VolumeError(MslesionError):
    """Volume data error."""


class VolumeFormatError(VolumeError):
    """MVOL file cannot be decoded."""


class MalformedHeaderError(VolumeFormatError):
    """Raised when the MVOL header line is not parseable."""


class DimsMismatchError(VolumeFormatError):
    """Raised when the payload length disagrees with the declared dims."""


class UnsupportedElementKindError(VolumeFormatError):
    """Raised when the header names an element kind other than f32/u8."""


class InvariantViolationError(VolumeError):
    """Raised when a volume breaks a data invariant (e.g. non-binary mask)."""


class PhantomError(MslesionError):
    """Phantom generation error."""


class LesionPlacementError(PhantomError):
    """Raised when a lesion cannot be placed inside the brain region."""


class SliceError(MslesionError):
    """Slice extraction or reassembly error."""


class AutodiffError(MslesionError):
    """Tensor engine error."""


class ShapeMismatchError(AutodiffError):
    """Raised when operand shapes are incompatible."""


class TapeError(AutodiffError):
    """Raised on misuse of a differentiation tape."""


class CheckpointError(MslesionError):
    """Raised when a checkpoint cannot be read or does not match the model."""


class ModelError(MslesionError):
    """Network construction or evaluation error."""


class InvalidModelConfigError(ModelError):
    """Raised when a model configuration is inconsistent."""


class MissingModalityError(ModelError):
    """Raised when an input lacks a modality the model needs."""


class TrainingError(MslesionError):
    """Training loop error."""


class EmptyTrainingPoolError(TrainingError):
    """Raised when no lesion-bearing slices remain after filtering."""


class FusionError(MslesionError):
    """Label fusion error."""


class StapleDegenerateError(FusionError):
    """Raised when STAPLE inputs are all-empty or all-full."""


class MetricError(MslesionError):
    """Evaluation metric error."""


class EmptyMaskError(MetricError):
    """Raised when a metric requires a non-empty mask."""


class InsufficientDataError(MetricError):
    """Raised when a statistic needs more cases or lesion pairs."""


class HarnessError(MslesionError):
    """Experiment orchestration error."""


class PlanError(HarnessError):
    """Raised when an experiment plan is invalid."""


class ManifestError(HarnessError):
    """Raised when the dataset manifest is missing or inconsistent."""


class MemberFailedError(HarnessError):
    """Raised when an ensemble member fails to train."""
