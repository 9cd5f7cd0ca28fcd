"""nilink: NIL-aware entity linking datasets and desk-scale linkers."""

__version__ = "0.1.0"

from .dataset import NIL, Entity, Entry  # noqa: F401
