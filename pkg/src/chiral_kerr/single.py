"""Single-photon scattering off the chirally coupled resonator.

Every amplitude function accepts a scalar or an array of detunings and
broadcasts like a numpy ufunc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from chiral_kerr.model import CouplingConfig, ParameterError, check_rate

DEFAULT_SPECTRUM_HALF_WIDTH = 10.0
DEFAULT_SPECTRUM_POINTS = 2001


@dataclass(frozen=True)
class WavepacketSpec:
    """Lorentzian single-photon packet centred at ``delta`` with half-width ``epsilon``."""

    delta: float
    epsilon: float

    def __post_init__(self) -> None:
        delta = float(self.delta)
        if not math.isfinite(delta):
            raise ParameterError(f"delta must be finite, got {delta!r}")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "epsilon", check_rate("epsilon", self.epsilon))


def initial_amplitude(omega, spec: WavepacketSpec):
    """Incoming packet ``sqrt(eps/pi) / (omega - delta + i eps)``, unit norm over the real line."""
    omega = np.asarray(omega, dtype=float)
    return math.sqrt(spec.epsilon / math.pi) / (omega - spec.delta + 1j * spec.epsilon)


def bare_phase_shift(omega, gamma: float = 1.0):
    """b-mode scattering factor ``(omega - i Gamma) / (omega + i Gamma)``; a pure phase."""
    gamma = check_rate("Gamma", gamma)
    omega = np.asarray(omega, dtype=float)
    return (omega - 1j * gamma) / (omega + 1j * gamma)


def transmission_left_incident(omega, cfg: CouplingConfig):
    """Transmission ``t`` for a right-going photon arriving from the left."""
    omega = np.asarray(omega, dtype=float)
    return (omega - 1j * cfg.asymmetry) / (omega + 1j * cfg.total)


def transmission_right_incident(omega, cfg: CouplingConfig):
    """Transmission ``t'`` for a left-going photon arriving from the right."""
    omega = np.asarray(omega, dtype=float)
    return (omega + 1j * cfg.asymmetry) / (omega + 1j * cfg.total)


def reflection(omega, cfg: CouplingConfig):
    """Reflection ``r``; the same for either incidence side."""
    omega = np.asarray(omega, dtype=float)
    return -2j * math.sqrt(cfg.gamma1 * cfg.gamma2) / (omega + 1j * cfg.total)


class SinglePhotonSpectrumRow(NamedTuple):
    omega: float
    transmittance: float
    reflectance: float
    phase_t: float
    phase_t_prime: float


@dataclass(frozen=True)
class SinglePhotonSpectrum:
    """Columns of a transmission/reflection spectrum, ordered by detuning."""

    omega: np.ndarray
    transmittance: np.ndarray
    reflectance: np.ndarray
    phase_t: np.ndarray
    phase_t_prime: np.ndarray

    def __len__(self) -> int:
        return len(self.omega)

    def rows(self) -> Iterator[SinglePhotonSpectrumRow]:
        for values in zip(
            self.omega, self.transmittance, self.reflectance, self.phase_t, self.phase_t_prime
        ):
            yield SinglePhotonSpectrumRow(*(float(v) for v in values))


def default_grid() -> np.ndarray:
    return np.linspace(
        -DEFAULT_SPECTRUM_HALF_WIDTH, DEFAULT_SPECTRUM_HALF_WIDTH, DEFAULT_SPECTRUM_POINTS
    )


def spectrum(grid, cfg: CouplingConfig) -> SinglePhotonSpectrum:
    omega = np.sort(np.asarray(grid, dtype=float).ravel())
    if omega.size == 0:
        raise ParameterError("spectrum grid is empty")
    t = transmission_left_incident(omega, cfg)
    t_prime = transmission_right_incident(omega, cfg)
    r = reflection(omega, cfg)
    return SinglePhotonSpectrum(
        omega=omega,
        transmittance=np.abs(t) ** 2,
        reflectance=np.abs(r) ** 2,
        phase_t=np.angle(t),
        phase_t_prime=np.angle(t_prime),
    )
