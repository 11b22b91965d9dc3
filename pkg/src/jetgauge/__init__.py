"""Verification toolkit for jet-level identities of maps, gauge fields,
and continuum models: truncated Taylor lifts with exact derivatives, plus
check suites that hold named identities to stated tolerances."""

from .series import kernel_name

__version__ = "0.1.0"

__all__ = ["kernel_name", "__version__"]
