"""Randomized invariant suite run by ``chiral-kerr validate``.

Functions under test are looked up through their modules at call time so a
deliberately broken build (a monkeypatched amplitude) is caught.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from chiral_kerr import model, single, twophoton
from chiral_kerr.model import CouplingConfig
from chiral_kerr.twophoton import Direction, FrequencyPairGrid, TwoPhotonSpec

DEFAULT_SEED = 20211


@dataclass(frozen=True)
class InvariantResult:
    name: str
    worst_residual: float
    tolerance: float
    draws: int

    @property
    def passed(self) -> bool:
        return math.isfinite(self.worst_residual) and self.worst_residual <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_residual": self.worst_residual,
            "tolerance": self.tolerance,
            "draws": self.draws,
        }


def _cfg(rng) -> CouplingConfig:
    g2 = rng.uniform(0.0, 1.0)
    return CouplingConfig(1.0 - g2, g2)


def _spec(rng) -> TwoPhotonSpec:
    return TwoPhotonSpec(
        rng.uniform(-5, 5), rng.uniform(0.05, 1.0), rng.uniform(-5, 5), rng.uniform(0.05, 1.0)
    )


def _omega(rng, size=None):
    return rng.uniform(-15, 15, size)


def single_unitarity(rng, draws):
    worst = 0.0
    for _ in range(draws):
        cfg, w = _cfg(rng), _omega(rng, 16)
        r2 = np.abs(single.reflection(w, cfg)) ** 2
        for t in (single.transmission_left_incident(w, cfg), single.transmission_right_incident(w, cfg)):
            worst = max(worst, float(np.max(np.abs(np.abs(t) ** 2 + r2 - 1))))
    return worst


def magnitude_reciprocity(rng, draws):
    worst = 0.0
    for _ in range(draws):
        cfg, w = _cfg(rng), _omega(rng, 16)
        diff = np.abs(single.transmission_left_incident(w, cfg)) - np.abs(
            single.transmission_right_incident(w, cfg)
        )
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def composition_identity(rng, draws):
    worst = 0.0
    for _ in range(draws):
        cfg, w = _cfg(rng), _omega(rng, 16)
        tb = single.bare_phase_shift(w, cfg.total)
        t_expected = (cfg.gamma1 * tb + cfg.gamma2) / cfg.total
        r_expected = math.sqrt(cfg.gamma1 * cfg.gamma2) * (tb - 1) / cfg.total
        worst = max(
            worst,
            float(np.max(np.abs(single.transmission_left_incident(w, cfg) - t_expected))),
            float(np.max(np.abs(single.reflection(w, cfg) - r_expected))),
        )
    return worst


def chirality_swap(rng, draws):
    worst = 0.0
    for _ in range(draws):
        cfg, w = _cfg(rng), _omega(rng, 16)
        diff = single.transmission_right_incident(w, cfg) - single.transmission_left_incident(
            w, cfg.swapped()
        )
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def bare_phase_modulus(rng, draws):
    w = _omega(rng, draws)
    return float(np.max(np.abs(np.abs(single.bare_phase_shift(w)) - 1)))


def mode_mixing_orthogonality(rng, draws):
    worst = 0.0
    for _ in range(draws):
        m = model.mode_mixing(_cfg(rng)).matrix
        worst = max(worst, float(np.max(np.abs(m @ m.T - np.eye(2)))))
    return worst


def identical_reduction(rng, draws):
    worst = 0.0
    for _ in range(draws):
        delta, eps, u = rng.uniform(-5, 5), rng.uniform(0.05, 1.0), rng.uniform(0, 15)
        cfg = CouplingConfig(1.0, 0.0)
        w, wp = _omega(rng), _omega(rng)
        general = twophoton.bound_state_amplitude(w, wp, TwoPhotonSpec.identical(delta, eps), u, cfg)
        direct = twophoton.identical_bound_state_amplitude(w, wp, delta, eps, u, 1.0)
        worst = max(worst, float(abs(general - direct) / max(abs(direct), 1e-300)))
    return worst


def _pair_draw(rng):
    return _spec(rng), rng.uniform(0, 15), _cfg(rng), _omega(rng, 8), _omega(rng, 8)


def reflection_reciprocity(rng, draws):
    worst = 0.0
    for _ in range(draws):
        spec, u, cfg, w, wp = _pair_draw(rng)
        a = twophoton.channel_amplitudes(w, wp, spec, u, cfg, Direction.FROM_LEFT).ll
        b = twophoton.channel_amplitudes(w, wp, spec, u, cfg, Direction.FROM_RIGHT).rr
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def mirror_symmetry(rng, draws):
    worst = 0.0
    for _ in range(draws):
        spec, u, cfg, w, wp = _pair_draw(rng)
        b = twophoton.channel_amplitudes(w, wp, spec, u, cfg, Direction.FROM_RIGHT).ll
        a = twophoton.channel_amplitudes(w, wp, spec, u, cfg.swapped(), Direction.FROM_LEFT).rr
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))))
    return worst


def exchange_symmetry(rng, draws):
    worst = 0.0
    for _ in range(draws):
        spec, u, cfg, w, wp = _pair_draw(rng)
        for direction in Direction:
            fwd = twophoton.channel_amplitudes(w, wp, spec, u, cfg, direction)
            bwd = twophoton.channel_amplitudes(wp, w, spec, u, cfg, direction)
            pairs = ((fwd.rr, bwd.rr), (fwd.ll, bwd.ll), (fwd.rl, bwd.lr))
            for x, y in pairs:
                scale = np.maximum(np.abs(x), 1e-300)
                worst = max(worst, float(np.max(np.abs(x - y) / scale)))
    return worst


def factorization_limit(rng, draws):
    worst = 0.0
    for _ in range(draws):
        spec, _, cfg, w, wp = _pair_draw(rng)
        amps = twophoton.channel_amplitudes(w, wp, spec, 0.0, cfg, Direction.FROM_LEFT)
        c0 = twophoton.initial_joint_amplitude(w, wp, spec)
        t = single.transmission_left_incident
        r = single.reflection
        expected = (t(w, cfg) * t(wp, cfg) * c0, r(w, cfg) * r(wp, cfg) * c0)
        worst = max(
            worst,
            float(np.max(np.abs(amps.rr - expected[0]))),
            float(np.max(np.abs(amps.ll - expected[1]))),
        )
    return worst


CONSERVATION_CASES = (
    # (gamma1, gamma2, U, delta, epsilon)
    (0.5, 0.5, 10.0, 0.0, 0.1),
    (0.8, 0.2, 10.0, 0.0, 0.1),
    (0.8, 0.2, 10.0, 5.0, 0.1),
)


def probability_conservation(rng, draws):
    worst = 0.0
    for g1, g2, u, delta, eps in CONSERVATION_CASES:
        cfg = CouplingConfig(g1, g2)
        spec = TwoPhotonSpec.identical(delta, eps)
        grid = FrequencyPairGrid.default_for(spec, u)
        for direction in Direction:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", twophoton.TruncationWarning)
                probs = twophoton.channel_probabilities(grid, spec, u, cfg, direction)
            worst = max(worst, abs(sum(probs.values()) - 1))
    return worst


# name -> (check, tolerance, draws scale relative to the requested count)
INVARIANTS: dict[str, tuple[Callable, float, float]] = {
    "single_unitarity": (single_unitarity, 1e-12, 0.1),
    "magnitude_reciprocity": (magnitude_reciprocity, 1e-12, 0.1),
    "composition_identity": (composition_identity, 1e-12, 0.1),
    "chirality_swap": (chirality_swap, 1e-12, 0.1),
    "bare_phase_modulus": (bare_phase_modulus, 1e-15, 1.0),
    "mode_mixing_orthogonality": (mode_mixing_orthogonality, 1e-12, 0.1),
    "identical_reduction": (identical_reduction, 1e-12, 1.0),
    "reflection_reciprocity": (reflection_reciprocity, 0.0, 0.1),
    "mirror_symmetry": (mirror_symmetry, 1e-12, 0.1),
    "exchange_symmetry": (exchange_symmetry, 1e-12, 0.1),
    "factorization_limit": (factorization_limit, 1e-15, 0.1),
    "probability_conservation": (probability_conservation, 5e-3, 0.0),
}


def run_suite(seed: int = DEFAULT_SEED, draws: int = 1000, names=None) -> dict:
    """Run the invariants and return a JSON-ready report."""
    results = {}
    for name, (check, tol, frac) in INVARIANTS.items():
        if names is not None and name not in names:
            continue
        n = max(1, int(round(draws * frac))) if frac else len(CONSERVATION_CASES)
        # each invariant gets its own stream so subsets reproduce the full run
        rng = np.random.default_rng([seed, sorted(INVARIANTS).index(name)])
        results[name] = InvariantResult(name, float(check(rng, n)), tol, n)
    return {
        "seed": seed,
        "draws": draws,
        "passed": all(r.passed for r in results.values()),
        "invariants": {name: r.as_dict() for name, r in results.items()},
    }
