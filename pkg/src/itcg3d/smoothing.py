"""Switching functions and their smooth replacements.

``sgmf`` is the cubic boundary-layer approximation of ``sign`` used inside the
desired lead angle; ``sgmf2`` is the logistic sigmoid that replaces ``sign`` in
the acceleration commands to suppress chattering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError

DEFAULT_SIGMOID_STEEPNESS = 10.0


@dataclass(frozen=True)
class SmoothingParams:
    phi: float
    a: float = DEFAULT_SIGMOID_STEEPNESS

    def __post_init__(self):
        if not self.phi > 0:
            raise ConfigurationError(f"phi must be positive, got {self.phi}")
        if not self.a > 0:
            raise ConfigurationError(f"sigmoid steepness a must be positive, got {self.a}")


def sign(x: float) -> float:
    # sign(0) = 0 keeps sgmf continuous and gives no command at exactly zero error
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def sgmf(x: float, phi: float) -> float:
    """Cubic approximation of ``sign`` with boundary layer ``[-phi, phi]``.

    Inside the layer it is ``-x**3/(2 phi**3) + 3x/(2 phi)``, which meets the
    saturated branch with matching value and zero slope at ``|x| = phi``.
    """
    if not phi > 0:
        raise ConfigurationError(f"phi must be positive, got {phi}")
    if abs(x) <= phi:
        u = x / phi
        return 0.5 * u * (3.0 - u * u)
    return sign(x)


def sgmf_slope(x: float, phi: float) -> float:
    """d sgmf / dx: ``-3x**2/(2 phi**3) + 3/(2 phi)`` inside the layer, 0 outside."""
    if abs(x) <= phi:
        return 1.5 * (1.0 - (x / phi) ** 2) / phi
    return 0.0


def sgmf2(x: float, a: float = DEFAULT_SIGMOID_STEEPNESS) -> float:
    """Logistic replacement for ``sign``: ``2 (1/(1+exp(-a x)) - 1/2)``.

    Evaluated as ``tanh(a x / 2)``, which is the same function without the
    overflow of ``exp`` for large negative arguments.
    """
    return math.tanh(0.5 * a * x)


def switching_function(name: str, a: float = DEFAULT_SIGMOID_STEEPNESS):
    """Return the scalar switching function used inside the acceleration laws."""
    if name == "sgmf2":
        return lambda x: math.tanh(0.5 * a * x)
    if name == "sign":
        return sign
    raise ConfigurationError(f"unknown switching function {name!r} (expected 'sgmf2' or 'sign')")
