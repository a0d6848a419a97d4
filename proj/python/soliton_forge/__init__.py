"""Soliton and integrable-geometry toolkit."""

from ._core import Error, GridSpec, __version__, dressing, gsge, isothermic, sge, surfaces

__all__ = ["Error", "GridSpec", "__version__", "dressing", "gsge", "isothermic", "sge", "surfaces"]
