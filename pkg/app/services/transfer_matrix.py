"""
Closed-form transfer matrices for piecewise-constant potentials.

Serves as an independent oracle for the Numerov engine. The state (psi, psi')
is carried from the right, where psi = e^{ikx} (T = 1), through each constant
layer to the left edge, where it is split into incident and reflected waves.
"""
import cmath
import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from app.services.models import ScatteringCoefficients
from app.utils.errors import DomainError
from app.utils.validators import validate_finite, validate_positive

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Layer:
    """Constant potential `v` on [start, end]"""
    start: float
    end: float
    v: float

    @property
    def width(self) -> float:
        return self.end - self.start


def square_well_layers(depth: float, half_width: float) -> List[Layer]:
    """v = -depth on |x| < half_width, 0 elsewhere"""
    depth = validate_finite(depth, "depth")
    half_width = validate_positive(half_width, "half_width")
    return [Layer(start=-half_width, end=half_width, v=-depth)]


def _check_layers(layers: Sequence[Layer]) -> None:
    if not layers:
        raise DomainError("At least one layer is required")
    for layer in layers:
        if not layer.width > 0.0:
            raise DomainError(f"Layer [{layer.start}, {layer.end}] has nonpositive width")
    for left, right in zip(layers, layers[1:]):
        if abs(left.end - right.start) > 1e-12 * max(1.0, abs(left.end)):
            raise DomainError("Layers must be contiguous and ordered left to right")


def backward_matrix(k: float, layer: Layer) -> np.ndarray:
    """Map (psi, psi') at the layer's right edge to its left edge"""
    q = cmath.sqrt(complex(k * k - layer.v))
    qL = q * layer.width
    cos_qL = cmath.cos(qL)
    # sin(qL)/q with the q -> 0 limit L
    sin_over_q = layer.width * complex(np.sinc(qL / np.pi))
    return np.array(
        [[cos_qL, -sin_over_q], [q * cmath.sin(qL), cos_qL]],
        dtype=complex,
    )


def transfer_coefficients(layers: Iterable[Layer], k: float) -> ScatteringCoefficients:
    """
    Scattering amplitudes of a layered potential with T fixed to 1.

    Args:
        layers: Contiguous constant layers ordered left to right
        k: Momentum, > 0

    Returns:
        ScatteringCoefficients (I, R, T=1) in the same convention as the
        Numerov solver
    """
    layers = list(layers)
    _check_layers(layers)
    k = validate_positive(k, "k")

    x_right = layers[-1].end
    state = np.array([cmath.exp(1j * k * x_right), 1j * k * cmath.exp(1j * k * x_right)])
    for layer in reversed(layers):
        state = backward_matrix(k, layer) @ state

    x_left = layers[0].start
    psi, dpsi = state
    phase = cmath.exp(1j * k * x_left)
    incident = (psi + dpsi / (1j * k)) / (2.0 * phase)
    reflected = (psi - dpsi / (1j * k)) * phase / 2.0
    return ScatteringCoefficients(k=k, I=complex(incident), R=complex(reflected), T=1.0 + 0j)


def square_well_transmission(depth: float, half_width: float, k: float) -> complex:
    """
    Textbook transmission amplitude t = T/I of a square well.

    t = e^{-2ika} / (cos 2qa - i (q^2 + k^2) / (2qk) sin 2qa), q^2 = k^2 + depth.
    """
    q = cmath.sqrt(complex(k * k + depth))
    a2 = 2.0 * half_width
    denominator = cmath.cos(q * a2) - 1j * (q * q + k * k) / (2.0 * q * k) * cmath.sin(q * a2)
    return cmath.exp(-1j * k * a2) / denominator
