"""Volume I/O and synthetic phantoms."""

from mslesion.volio.mvol import read_volume, write_volume
from mslesion.volio.phantom import generate_phantom

__all__ = ["generate_phantom", "read_volume", "write_volume"]
