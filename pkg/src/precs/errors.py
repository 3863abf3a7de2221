"""Exception types shared across the package.

Plain ``ValueError`` is raised for invalid arguments (bad shapes, out-of-range
parameters, manifold mismatches); the classes below mark failure modes that
callers are expected to branch on.
"""

from __future__ import annotations


class PrecsError(Exception):
    """Base class for package-specific failures."""


class DegeneratePointError(PrecsError):
    """Conditional state requested where the coherent-state density vanishes."""


class DegenerateConfigurationError(PrecsError):
    """Branch trajectories coincide, so a separation-based quantity is undefined."""


class TruncationTooLargeError(PrecsError):
    """The required Fock truncation exceeds the supported dimension."""


class NotDecoheredError(PrecsError):
    """Measurement requested while too much distribution mass is contested."""


class SupportsNotDisjointError(PrecsError):
    """An identity that only holds after decoherence was evaluated too early."""


class ConfigError(PrecsError):
    """Experiment configuration failed validation."""
