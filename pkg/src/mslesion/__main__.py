"""Allow running as `python -m mslesion`."""

from mslesion.cli.app import main  # pragma: no cover

main()  # pragma: no cover
