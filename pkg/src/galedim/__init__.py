"""Effective Hausdorff and constructive dimension on spaces with nice covers."""

__version__ = "0.1.0"

from .cover import NiceCover, cube, parse_cover, symbolic  # noqa: E402
from .gale import SupergaleTable, validate_supergale  # noqa: E402
from .compiler import Antichain, cover_to_supergale, maximal_antichain, supergale_to_cover  # noqa: E402

__all__ = [
    "Antichain",
    "NiceCover",
    "SupergaleTable",
    "cover_to_supergale",
    "cube",
    "maximal_antichain",
    "parse_cover",
    "supergale_to_cover",
    "symbolic",
    "validate_supergale",
]
