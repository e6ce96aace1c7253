"""symplectiq: symplectic toolkit for Gaussian quantum processes."""

from symplectiq import (  # noqa: F401
    channels,
    control,
    core,
    discrete,
    scattering,
    sensing,
    states,
    transduction,
)

__all__ = [
    "core",
    "states",
    "channels",
    "transduction",
    "control",
    "sensing",
    "scattering",
    "discrete",
]

__version__ = "0.1.0"
