"""Phonon dynamics and acoustic-horizon signatures on rotating ion rings."""

from .config import RingConfig, ConfigError, NEAREST_NEIGHBOR, FULL_COULOMB

__all__ = ["RingConfig", "ConfigError", "NEAREST_NEIGHBOR", "FULL_COULOMB"]
__version__ = "0.1.0"
