"""Two-photon scattering: incident pair, bound-state term and output channels.

Joint amplitudes live on the whole (omega, omega') plane and are symmetric
under exchange of the two frequencies, so ``sum |C0|^2 dw dw' = 1`` over the
full plane. The noninteracting (NP) part of each channel is a product of
single-photon amplitudes; the interacting (IP) part is the bound-state term
``D`` weighted by how strongly each output pair overlaps the coupled b mode.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from chiral_kerr.model import CouplingConfig, ParameterError, check_kerr, check_rate
from chiral_kerr.single import (
    bare_phase_shift,
    reflection,
    transmission_left_incident,
    transmission_right_incident,
)

DEFAULT_QUADRATURE_POINTS = 1201
TRUNCATION_WARN_LEVEL = 1e-3

CHANNELS = ("rr", "ll", "rl", "lr")


class TruncationWarning(UserWarning):
    """The quadrature box misses a noticeable part of the incident pair."""


@dataclass(frozen=True)
class TwoPhotonSpec:
    """Two Lorentzian photons, centres ``delta1``/``delta2`` and half-widths ``epsilon1``/``epsilon2``."""

    delta1: float
    epsilon1: float
    delta2: float
    epsilon2: float

    def __post_init__(self) -> None:
        for name in ("delta1", "delta2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "epsilon1", check_rate("epsilon1", self.epsilon1))
        object.__setattr__(self, "epsilon2", check_rate("epsilon2", self.epsilon2))

    @classmethod
    def identical(cls, delta: float, epsilon: float) -> TwoPhotonSpec:
        return cls(delta, epsilon, delta, epsilon)

    @property
    def is_identical(self) -> bool:
        return self.delta1 == self.delta2 and self.epsilon1 == self.epsilon2


class Direction(enum.Enum):
    FROM_LEFT = "from_left"  # right-going pair, amplitudes alpha
    FROM_RIGHT = "from_right"  # left-going pair, amplitudes beta


class ChannelAmplitudes(NamedTuple):
    """Output amplitudes for (r, r), (l, l), (r, l) and (l, r) photon pairs."""

    rr: np.ndarray
    ll: np.ndarray
    rl: np.ndarray
    lr: np.ndarray


def norm_const(spec: TwoPhotonSpec) -> float:
    e1, e2 = spec.epsilon1, spec.epsilon2
    overlap = 4 * e1 * e2 / ((spec.delta1 - spec.delta2) ** 2 + (e1 + e2) ** 2)
    return math.sqrt(e1 * e2 / (2 * math.pi**2)) / math.sqrt(1 + overlap)


def initial_joint_amplitude(omega, omega_prime, spec: TwoPhotonSpec):
    """Symmetrised product of the two incident Lorentzians."""
    w = np.asarray(omega, dtype=float)
    wp = np.asarray(omega_prime, dtype=float)
    c = norm_const(spec)
    p1 = 1j * spec.epsilon1 - spec.delta1
    p2 = 1j * spec.epsilon2 - spec.delta2
    return c / ((w + p1) * (wp + p2)) + c / ((wp + p1) * (w + p2))


def bound_state_amplitude(omega, omega_prime, spec: TwoPhotonSpec, u: float, cfg: CouplingConfig):
    """Interacting-photon term ``D(omega, omega')`` generated by the Kerr shift ``u``.

    Only the total decay enters; chirality appears later through the channel weights.
    """
    u = check_kerr(u)
    gamma = cfg.total
    w = np.asarray(omega, dtype=float)
    wp = np.asarray(omega_prime, dtype=float)
    energy = w + wp
    e1, e2 = spec.epsilon1, spec.epsilon2
    pair_pole = energy - spec.delta1 - spec.delta2 + 1j * (e1 + e2)
    branches = 1 / (energy - spec.delta1 + 1j * (e1 + gamma)) + 1 / (
        energy - spec.delta2 + 1j * (e2 + gamma)
    )
    vertex = u / (energy - u + 2j * gamma)
    legs = (bare_phase_shift(w, gamma) - 1) * (bare_phase_shift(wp, gamma) - 1)
    return vertex * 2 * norm_const(spec) * legs / pair_pole * branches


def identical_bound_state_amplitude(
    omega, omega_prime, delta: float, epsilon: float, u: float, gamma: float = 1.0
):
    """``D`` written directly for two identical photons (centre ``delta``, width ``epsilon``)."""
    u = check_kerr(u)
    epsilon = check_rate("epsilon", epsilon)
    gamma = check_rate("Gamma", gamma)
    w = np.asarray(omega, dtype=float)
    wp = np.asarray(omega_prime, dtype=float)
    energy = w + wp
    return (
        u
        / (energy - u + 2j * gamma)
        * (epsilon / math.pi)
        / (energy - 2 * delta + 2j * epsilon)
        * (2j * gamma / (w + 1j * gamma))
        * (2j * gamma / (wp + 1j * gamma))
        * 2
        / (energy - delta + 1j * (epsilon + gamma))
    )


def bound_state_weights(cfg: CouplingConfig, direction: Direction) -> ChannelAmplitudes:
    """Fraction of ``D`` landing in each output channel."""
    g1, g2 = cfg.gamma1, cfg.gamma2
    norm = cfg.total**2
    mixed = g1 * g2 / norm
    if direction is Direction.FROM_LEFT:
        cross = math.sqrt(g1**3 * g2) / norm
        return ChannelAmplitudes(g1**2 / norm, mixed, cross, cross)
    cross = math.sqrt(g2**3 * g1) / norm
    return ChannelAmplitudes(mixed, g2**2 / norm, cross, cross)


def noninteracting_amplitudes(
    omega, omega_prime, spec: TwoPhotonSpec, cfg: CouplingConfig, direction: Direction
) -> ChannelAmplitudes:
    """NP parts: products of single-photon amplitudes times the incident pair."""
    w = np.asarray(omega, dtype=float)
    wp = np.asarray(omega_prime, dtype=float)
    c0 = initial_joint_amplitude(w, wp, spec)
    r, r_p = reflection(w, cfg), reflection(wp, cfg)
    if direction is Direction.FROM_LEFT:
        t, t_p = transmission_left_incident(w, cfg), transmission_left_incident(wp, cfg)
        return ChannelAmplitudes(t * t_p * c0, r * r_p * c0, t * r_p * c0, r * t_p * c0)
    t, t_p = transmission_right_incident(w, cfg), transmission_right_incident(wp, cfg)
    # the transmitted pair of a left-going input leaves in the l modes
    return ChannelAmplitudes(r * r_p * c0, t * t_p * c0, t * r_p * c0, r * t_p * c0)


def channel_amplitudes(
    omega,
    omega_prime,
    spec: TwoPhotonSpec,
    u: float,
    cfg: CouplingConfig,
    direction: Direction = Direction.FROM_LEFT,
) -> ChannelAmplitudes:
    """alpha (``FROM_LEFT``) or beta (``FROM_RIGHT``) amplitudes at ``(omega, omega')``."""
    direction = Direction(direction)
    free = noninteracting_amplitudes(omega, omega_prime, spec, cfg, direction)
    d = bound_state_amplitude(omega, omega_prime, spec, u, cfg)
    weights = bound_state_weights(cfg, direction)
    return ChannelAmplitudes(*(a + wgt * d for a, wgt in zip(free, weights)))


@dataclass(frozen=True)
class FrequencyPairGrid:
    """Uniform detuning axis shared by omega and omega'."""

    axis: np.ndarray

    def __post_init__(self) -> None:
        axis = np.asarray(self.axis, dtype=float)
        if axis.ndim != 1 or axis.size < 2:
            raise ParameterError("frequency grid needs at least two points")
        steps = np.diff(axis)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ParameterError("frequency grid must be uniform and increasing")
        object.__setattr__(self, "axis", axis)

    @classmethod
    def symmetric(cls, half_width: float, points: int) -> FrequencyPairGrid:
        return cls(np.linspace(-half_width, half_width, points))

    @classmethod
    def default_for(
        cls,
        spec: TwoPhotonSpec,
        u: float,
        gamma: float = 1.0,
        points: int = DEFAULT_QUADRATURE_POINTS,
    ) -> FrequencyPairGrid:
        """Box wide enough for the incident tails and the bound state near ``E = u``."""
        centre = max(abs(spec.delta1), abs(spec.delta2))
        half = max(20 * gamma, centre + 20 * gamma + u)
        return cls.symmetric(half, points)

    @property
    def spacing(self) -> float:
        return float(self.axis[1] - self.axis[0])

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis, self.axis, indexing="ij")


def _trapezoid_2d(values: np.ndarray, h: float) -> float:
    return float(np.trapezoid(np.trapezoid(values, dx=h, axis=1), dx=h))


def truncation_estimate(grid: FrequencyPairGrid, spec: TwoPhotonSpec) -> float:
    """Incident-pair probability missing from the grid box."""
    w, wp = grid.mesh()
    inside = _trapezoid_2d(np.abs(initial_joint_amplitude(w, wp, spec)) ** 2, grid.spacing)
    return abs(1.0 - inside)


def channel_probabilities(
    grid: FrequencyPairGrid,
    spec: TwoPhotonSpec,
    u: float,
    cfg: CouplingConfig,
    direction: Direction = Direction.FROM_LEFT,
) -> dict[str, float]:
    """Trapezoid quadrature of every ``|channel|^2`` over the grid box.

    Emits :class:`TruncationWarning` if the box loses more than 1e-3 of the
    incident pair.
    """
    w, wp = grid.mesh()
    amps = channel_amplitudes(w, wp, spec, u, cfg, direction)
    h = grid.spacing
    result = {name: _trapezoid_2d(np.abs(getattr(amps, name)) ** 2, h) for name in CHANNELS}
    missing = truncation_estimate(grid, spec)
    if missing > TRUNCATION_WARN_LEVEL:
        warnings.warn(
            f"quadrature box [{grid.axis[0]:g}, {grid.axis[-1]:g}] misses about "
            f"{missing:.2e} of the incident pair",
            TruncationWarning,
            stacklevel=2,
        )
    return result


def channel_probability(
    channel: str,
    grid: FrequencyPairGrid,
    spec: TwoPhotonSpec,
    u: float,
    cfg: CouplingConfig,
    direction: Direction = Direction.FROM_LEFT,
) -> float:
    """Probability of one output channel; ``channel`` is rr, ll, rl, lr or rl+lr."""
    parts = channel.replace(" ", "").split("+")
    if not parts or any(p not in CHANNELS for p in parts):
        raise ParameterError(f"unknown channel {channel!r}")
    probs = channel_probabilities(grid, spec, u, cfg, Direction(direction))
    return sum(probs[p] for p in parts)


@dataclass(frozen=True)
class NonreciprocityMetrics:
    p_fwd: float
    p_rev: float
    contrast: float  # nan when both densities vanish

    @property
    def defined(self) -> bool:
        return not math.isnan(self.contrast)


def nonreciprocity_metrics(
    omega: float, omega_prime: float, spec: TwoPhotonSpec, u: float, cfg: CouplingConfig
) -> NonreciprocityMetrics:
    """Transmitted-pair densities for both incidence sides and their normalised contrast."""
    fwd = float(np.abs(channel_amplitudes(omega, omega_prime, spec, u, cfg, Direction.FROM_LEFT).rr) ** 2)
    rev = float(np.abs(channel_amplitudes(omega, omega_prime, spec, u, cfg, Direction.FROM_RIGHT).ll) ** 2)
    total = fwd + rev
    contrast = (fwd - rev) / total if total > 0 else math.nan
    return NonreciprocityMetrics(fwd, rev, contrast)


@dataclass(frozen=True)
class IPSlice:
    """``|C0|^2`` and ``|D|^2`` along the anti-diagonal ``omega' = energy - omega``."""

    omega: np.ndarray
    c0_sq: np.ndarray
    d_sq: np.ndarray
    energy: float


def ip_slice(omega, energy: float, spec: TwoPhotonSpec, u: float, cfg: CouplingConfig) -> IPSlice:
    w = np.asarray(omega, dtype=float)
    energy = float(energy)
    if w.ndim != 1 or w.size == 0 or not math.isfinite(energy):
        raise ParameterError("cut needs a non-empty 1D omega axis and a finite energy")
    wp = energy - w
    return IPSlice(
        omega=w,
        c0_sq=np.abs(initial_joint_amplitude(w, wp, spec)) ** 2,
        d_sq=np.abs(bound_state_amplitude(w, wp, spec, u, cfg)) ** 2,
        energy=energy,
    )
