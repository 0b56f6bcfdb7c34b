"""mslesion: multi-branch slice-based MS lesion segmentation."""

__version__ = "0.1.0"
