"""Toric code simulation and decoding under probabilistic stabiliser measurement."""

__version__ = "0.1.0"

from ._accel import NUMBA_ENABLED, backend_name

__all__ = ["NUMBA_ENABLED", "backend_name", "__version__"]
