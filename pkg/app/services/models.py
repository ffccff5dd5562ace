"""Result types shared by the analytic, numeric and audit layers"""
import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional, Tuple

import numpy as np

from app.utils.serialization import complex_from_json


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"

    @classmethod
    def of_index(cls, n: int) -> "Parity":
        return cls.EVEN if n % 2 == 0 else cls.ODD

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1


@dataclass(frozen=True)
class ScatteringCoefficients:
    """
    Asymptotic amplitudes: I e^{ikx} + R e^{-ikx} on the left, T e^{ikx} on
    the right.
    """
    k: float
    I: complex
    R: complex
    T: complex

    @property
    def reflection_amplitude(self) -> complex:
        return self.R / self.I

    @property
    def transmission_amplitude(self) -> complex:
        return self.T / self.I

    @property
    def reflection_probability(self) -> float:
        return abs(self.R / self.I) ** 2

    @property
    def transmission_probability(self) -> float:
        return abs(self.T / self.I) ** 2

    @property
    def delta(self) -> float:
        """Half the argument of T/I, reduced to [0, pi)"""
        return (0.5 * cmath.phase(self.T / self.I)) % math.pi

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScatteringCoefficients":
        return cls(
            k=float(data["k"]),
            I=complex_from_json(data["I"]),
            R=complex_from_json(data["R"]),
            T=complex_from_json(data["T"]),
        )


@dataclass(frozen=True, eq=False)
class BoundState:
    """Normalized bound state sampled on a reporting grid"""
    n: int
    energy: float
    parity: Parity
    node_count: int
    xs: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    ell: Optional[int] = None


@dataclass(frozen=True, eq=False)
class HalfBoundState:
    """Zero-energy solution that stays bounded but is not normalizable"""
    ell: int
    parity: Parity
    xs: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    asymptote: float = 1.0


@dataclass(frozen=True)
class BoundStateCensus:
    """Bound-state counts per parity sector plus zero-energy criticality"""
    n_total: int
    n_even: int
    n_odd: int
    critical_even: bool
    critical_odd: bool

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BoundStateCensus":
        return cls(
            n_total=int(data["n_total"]),
            n_even=int(data["n_even"]),
            n_odd=int(data["n_odd"]),
            critical_even=bool(data["critical_even"]),
            critical_odd=bool(data["critical_odd"]),
        )

    @property
    def critical(self) -> bool:
        return self.critical_even or self.critical_odd

    @property
    def critical_sectors(self) -> Tuple[Parity, ...]:
        sectors = []
        if self.critical_even:
            sectors.append(Parity.EVEN)
        if self.critical_odd:
            sectors.append(Parity.ODD)
        return tuple(sectors)
