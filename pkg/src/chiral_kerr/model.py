"""Physical parameters shared by every scattering calculation.

Rates and detunings are dimensionless, measured in units of the total decay
rate ``Gamma = gamma1 + gamma2`` unless a config says otherwise. Detunings are
taken from the resonator frequency, so the resonator itself sits at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ParameterError(ValueError):
    """Raised for physically invalid model parameters."""


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class CouplingConfig:
    """Chiral decay rates into right-going (``gamma1``) and left-going (``gamma2``) modes."""

    gamma1: float
    gamma2: float

    def __post_init__(self) -> None:
        g1 = _finite("gamma1", self.gamma1)
        g2 = _finite("gamma2", self.gamma2)
        if g1 < 0 or g2 < 0:
            raise ParameterError(f"decay rates must be non-negative, got ({g1}, {g2})")
        if g1 + g2 <= 0:
            raise ParameterError("total decay gamma1 + gamma2 must be positive")
        object.__setattr__(self, "gamma1", g1)
        object.__setattr__(self, "gamma2", g2)

    @classmethod
    def from_rates(cls, gamma1: float, gamma2: float, unit: float | None = None) -> CouplingConfig:
        """Build a config from absolute rates, dividing both by ``unit`` when given."""
        if unit is None:
            return cls(gamma1, gamma2)
        unit = _finite("unit", unit)
        if unit <= 0:
            raise ParameterError(f"rate unit must be positive, got {unit}")
        return cls(gamma1 / unit, gamma2 / unit)

    @property
    def total(self) -> float:
        return self.gamma1 + self.gamma2

    @property
    def asymmetry(self) -> float:
        return self.gamma1 - self.gamma2

    def swapped(self) -> CouplingConfig:
        """The mirror-image device: right and left couplings exchanged."""
        return CouplingConfig(self.gamma2, self.gamma1)


@dataclass(frozen=True)
class ModeMixing:
    """Real orthogonal map from (r, l) waveguide modes to (b, c) modes.

    ``b = to_b_from_r * r + to_b_from_l * l`` couples to the resonator;
    ``c = to_c_from_r * r + to_c_from_l * l`` propagates freely.
    """

    to_b_from_r: float
    to_b_from_l: float
    to_c_from_r: float
    to_c_from_l: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.to_b_from_r, self.to_b_from_l], [self.to_c_from_r, self.to_c_from_l]]
        )


def total_decay(cfg: CouplingConfig) -> float:
    return cfg.gamma1 + cfg.gamma2


def coupling_asymmetry(cfg: CouplingConfig) -> float:
    return cfg.gamma1 - cfg.gamma2


def mode_mixing(cfg: CouplingConfig) -> ModeMixing:
    gamma = total_decay(cfg)
    if gamma <= 0:
        raise ParameterError("mode mixing needs a positive total decay")
    right = math.sqrt(cfg.gamma1 / gamma)
    left = math.sqrt(cfg.gamma2 / gamma)
    return ModeMixing(right, left, left, -right)


def is_symmetric(cfg: CouplingConfig, tol: float = 1e-12) -> bool:
    """True when ``|gamma1 - gamma2| <= tol * Gamma``."""
    if tol < 0:
        raise ParameterError(f"tolerance must be non-negative, got {tol}")
    return abs(coupling_asymmetry(cfg)) <= tol * total_decay(cfg)


def check_kerr(u: float) -> float:
    """Validate a Kerr interaction strength; zero is the linear resonator."""
    u = _finite("kerr strength", u)
    if u < 0:
        raise ParameterError(f"kerr strength must be non-negative, got {u}")
    return u


def check_rate(name: str, value: float) -> float:
    value = _finite(name, value)
    if value <= 0:
        raise ParameterError(f"{name} must be positive, got {value}")
    return value
