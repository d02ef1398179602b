"""Tabular datasets behind the transmission, bound-state and nonreciprocity plots.

Each builder returns a :class:`Dataset` (fixed column order plus rows of
floats); serialization lives in :mod:`chiral_kerr.serialize`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from chiral_kerr.model import CouplingConfig, ParameterError
from chiral_kerr.single import spectrum
from chiral_kerr.twophoton import (
    Direction,
    FrequencyPairGrid,
    TwoPhotonSpec,
    bound_state_amplitude,
    channel_amplitudes,
    channel_probabilities,
    ip_slice,
    noninteracting_amplitudes,
)

SPECTRUM_COUPLINGS = ((1.0, 0.0), (0.8, 0.2), (0.5, 0.5))
# (E, delta) cuts for U = 10; the U = 2 panel uses SLICE_CUTS_WEAK
SLICE_CUTS = ((0.0, 0.0), (10.0, 5.0), (8.0, 5.0), (10.0, 4.0))
SLICE_CUTS_WEAK = ((2.0, 1.0), (0.0, 1.0), (2.0, 0.0))
# evaluation point (omega, omega') and photon centre delta for each sweep case
SWEEP_CASES = {"a": (0.0, 0.0, 0.0), "b": (0.0, 10.0, 5.0)}

SPECTRUM_COLUMNS = ("omega", "T", "R", "phase_t", "phase_t_prime")
IP_SLICE_COLUMNS = ("omega", "C0_sq", "D_sq", "E", "delta")
MAP_COLUMNS = ("omega", "omega_prime", "value")
MAP_NAMES = ("np_sq", "d_sq", "alpha_rr_sq", "beta_ll_sq")
SWEEP_COLUMNS = ("gamma2", "P_fwd", "P_rev", "P_reflected_pair", "contrast")


class InvariantFailure(RuntimeError):
    """A dataset violated an identity it must satisfy."""


@dataclass
class Dataset:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple[float, ...]] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows])


def spectrum_dataset(cfg: CouplingConfig, grid) -> Dataset:
    spec = spectrum(grid, cfg)
    name = f"spectrum_g1-{cfg.gamma1:g}_g2-{cfg.gamma2:g}"
    rows = [tuple(row) for row in spec.rows()]
    return Dataset(name, SPECTRUM_COLUMNS, rows)


def ip_slices_dataset(cuts, u: float, epsilon: float, omega, gamma: float = 1.0) -> Dataset:
    """|C0|^2 and |D|^2 along ``omega' = E - omega`` for identical photons at each (E, delta)."""
    cfg = CouplingConfig(gamma, 0.0)  # D only sees the total decay
    rows = []
    for energy, delta in cuts:
        cut = ip_slice(omega, energy, TwoPhotonSpec.identical(delta, epsilon), u, cfg)
        rows.extend(
            (float(w), float(c), float(d), float(energy), float(delta))
            for w, c, d in zip(cut.omega, cut.c0_sq, cut.d_sq)
        )
    return Dataset("ip_slices", IP_SLICE_COLUMNS, rows)


def map_arrays(spec: TwoPhotonSpec, u: float, cfg: CouplingConfig, axis) -> dict[str, np.ndarray]:
    axis = np.asarray(axis, dtype=float)
    w, wp = np.meshgrid(axis, axis, indexing="ij")
    free = noninteracting_amplitudes(w, wp, spec, cfg, Direction.FROM_LEFT)
    return {
        "np_sq": np.abs(free.rr) ** 2,
        "d_sq": np.abs(bound_state_amplitude(w, wp, spec, u, cfg)) ** 2,
        "alpha_rr_sq": np.abs(channel_amplitudes(w, wp, spec, u, cfg, Direction.FROM_LEFT).rr) ** 2,
        "beta_ll_sq": np.abs(channel_amplitudes(w, wp, spec, u, cfg, Direction.FROM_RIGHT).ll) ** 2,
    }


def maps_datasets(spec: TwoPhotonSpec, u: float, cfg: CouplingConfig, axis) -> list[Dataset]:
    axis = np.asarray(axis, dtype=float)
    out = []
    for name, values in map_arrays(spec, u, cfg, axis).items():
        rows = [
            (float(axis[i]), float(axis[j]), float(values[i, j]))
            for i in range(axis.size)
            for j in range(axis.size)
        ]
        out.append(Dataset(f"map_{name}", MAP_COLUMNS, rows))
    return out


def _sweep_point(gamma2, case, u, epsilon, quad_points, gamma):
    omega, omega_prime, delta = SWEEP_CASES[case]
    cfg = CouplingConfig(gamma - gamma2, gamma2)
    spec = TwoPhotonSpec.identical(delta, epsilon)
    fwd = float(np.abs(channel_amplitudes(omega, omega_prime, spec, u, cfg, Direction.FROM_LEFT).rr) ** 2)
    rev = float(np.abs(channel_amplitudes(omega, omega_prime, spec, u, cfg, Direction.FROM_RIGHT).ll) ** 2)
    grid = FrequencyPairGrid.default_for(spec, u, gamma, points=quad_points)
    refl_fwd = channel_probabilities(grid, spec, u, cfg, Direction.FROM_LEFT)["ll"]
    refl_rev = channel_probabilities(grid, spec, u, cfg, Direction.FROM_RIGHT)["rr"]
    if abs(refl_fwd - refl_rev) > 1e-12 * max(abs(refl_fwd), 1e-300):
        raise InvariantFailure(
            f"reflected-pair probability differs between directions at gamma2={gamma2}: "
            f"{refl_fwd!r} vs {refl_rev!r}"
        )
    total = fwd + rev
    contrast = (fwd - rev) / total if total > 0 else math.nan
    return (float(gamma2), fwd, rev, refl_fwd, contrast)


def gamma_sweep_dataset(
    case: str,
    gamma2_values,
    u: float = 10.0,
    epsilon: float = 0.1,
    quad_points: int = 1201,
    gamma: float = 1.0,
    threads: int = 1,
) -> Dataset:
    """Transmitted-pair densities for both incidence sides versus ``gamma2 = Gamma - gamma1``."""
    if case not in SWEEP_CASES:
        raise ParameterError(f"unknown sweep case {case!r}; expected one of {sorted(SWEEP_CASES)}")
    values = sorted(float(g) for g in gamma2_values)
    if any(not 0 <= g <= gamma for g in values):
        raise ParameterError("gamma2 values must lie in [0, Gamma]")
    args = (case, u, epsilon, quad_points, gamma)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda g: _sweep_point(g, *args), values))
    else:
        rows = [_sweep_point(g, *args) for g in values]
    return Dataset(f"gamma_sweep_{case}", SWEEP_COLUMNS, rows)
