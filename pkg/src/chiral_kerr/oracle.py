"""Time-domain check of the scattering formulas on a discretized continuum.

The waveguide b modes are replaced by ``N`` equally spaced frequencies in
``[-W, W]``, each coupled to the resonator with ``g = sqrt(Gamma * dw / pi)``.
One- and two-excitation amplitudes are integrated with classical RK4 in the
interaction picture (free phases factored out exactly), long enough for the
resonator to empty. Only the b modes are evolved: the c modes never touch the
resonator, so r/l channel amplitudes follow from the b-space result.

Units: amplitudes are continuum densities. The one-excitation norm is
``|a|^2 + dw * sum |A_k|^2`` and the two-excitation norm is
``|A_c|^2 + dw * sum |B_k|^2 + dw^2 * sum_{jk} |C_jk|^2``, i.e. pair amplitudes
use the full-plane symmetric convention.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from chiral_kerr.model import CouplingConfig, ParameterError, check_kerr, check_rate
from chiral_kerr.single import (
    WavepacketSpec,
    bare_phase_shift,
    initial_amplitude,
    reflection,
    transmission_left_incident,
    transmission_right_incident,
)
from chiral_kerr.twophoton import (
    ChannelAmplitudes,
    Direction,
    TwoPhotonSpec,
    bound_state_amplitude,
    bound_state_weights,
    initial_joint_amplitude,
)

NORM_ABORT_LEVEL = 1e-5
STATIONARITY_LEVEL = 5e-3
POPULATED_LEVEL = 1e-6
SNAPSHOT_FRACTION = 0.9

DUMP_MAGIC = b"CKORC1\n"


class OracleError(RuntimeError):
    """A run that cannot be trusted (integrator or setup problem)."""


class NormDriftError(OracleError):
    pass


class LongTimeWarning(UserWarning):
    """``t_end`` is too short for the resonator to have emptied."""


@dataclass(frozen=True)
class DiscretizedContinuum:
    cutoff: float = 20.0
    mode_count: int = 1601

    def __post_init__(self) -> None:
        check_rate("cutoff", self.cutoff)
        n = int(self.mode_count)
        if n != self.mode_count or n < 3 or n % 2 == 0:
            raise ParameterError(f"mode_count must be an odd integer >= 3, got {self.mode_count}")

    @property
    def spacing(self) -> float:
        return 2 * self.cutoff / (self.mode_count - 1)

    @property
    def frequencies(self) -> np.ndarray:
        # mode (N - 1) / 2 sits exactly at zero detuning
        half = (self.mode_count - 1) // 2
        return np.arange(-half, half + 1) * self.spacing

    def coupling(self, gamma: float = 1.0) -> float:
        return math.sqrt(gamma * self.spacing / math.pi)


@dataclass(frozen=True)
class OracleRunConfig:
    continuum: DiscretizedContinuum = field(default_factory=DiscretizedContinuum)
    step: float = 0.005
    t_end: float = 40.0
    integrator_order: int = 4

    def __post_init__(self) -> None:
        check_rate("step", self.step)
        check_rate("t_end", self.t_end)
        if self.integrator_order != 4:
            raise ParameterError("only the classical fourth-order integrator is available")
        if self.step > 0.2 / self.continuum.cutoff * (1 + 1e-12):
            raise ParameterError(
                f"step {self.step} exceeds 0.2/W = {0.2 / self.continuum.cutoff:g}"
            )
        if self.t_end < self.step:
            raise ParameterError("t_end must cover at least one step")

    @property
    def steps(self) -> int:
        return max(1, int(round(self.t_end / self.step)))

    def long_time_ok(self, gamma: float, *epsilons: float) -> bool:
        """Whether ``t_end`` passes ``t >> 1/Gamma, 1/eps`` as 20/Gamma and 10/eps."""
        resonator_ok = gamma == 0 or self.t_end * gamma >= 20
        return resonator_ok and all(self.t_end * e >= 10 for e in epsilons)


def _check_setup(run: OracleRunConfig, gamma: float, epsilons: tuple[float, ...]) -> None:
    if run.continuum.cutoff < 10 * gamma:
        raise ParameterError(f"cutoff {run.continuum.cutoff} is below 10 * Gamma")
    if not run.long_time_ok(gamma, *epsilons):
        warnings.warn(
            f"t_end = {run.t_end} misses the long-time criterion (20/Gamma, 10/eps)",
            LongTimeWarning,
            stacklevel=3,
        )


@dataclass(frozen=True)
class OneExcitationState:
    a: complex
    modes: np.ndarray
    omega: np.ndarray
    time: float

    @property
    def spacing(self) -> float:
        return float(self.omega[1] - self.omega[0])

    @property
    def norm(self) -> float:
        return abs(self.a) ** 2 + self.spacing * float(np.sum(np.abs(self.modes) ** 2))


@dataclass(frozen=True)
class TwoExcitationState:
    """``ac``: both photons in the resonator; ``b``: one in, one out; ``c``: both in the waveguide."""

    ac: complex
    b: np.ndarray
    c: np.ndarray
    omega: np.ndarray
    time: float

    @property
    def spacing(self) -> float:
        return float(self.omega[1] - self.omega[0])

    @property
    def norm(self) -> float:
        dw = self.spacing
        return (
            abs(self.ac) ** 2
            + dw * float(np.sum(np.abs(self.b) ** 2))
            + dw**2 * float(np.vdot(self.c, self.c).real)
        )


@dataclass(frozen=True)
class OneExcitationRun:
    initial: OneExcitationState
    final: OneExcitationState
    snapshot: OneExcitationState
    scale: float  # renormalisation applied to the sampled packet
    norm_drift: float
    long_time_ok: bool


@dataclass(frozen=True)
class TwoExcitationRun:
    initial: TwoExcitationState
    final: TwoExcitationState
    snapshot: TwoExcitationState
    scale: float
    norm_drift: float
    long_time_ok: bool


def _phases(freq: np.ndarray, t: float) -> np.ndarray:
    return np.exp(1j * freq * t)


def evolve_one(
    spec: WavepacketSpec,
    gamma: float = 1.0,
    run: OracleRunConfig | None = None,
    frame_shift: float = 0.0,
) -> OneExcitationRun:
    """Scatter one photon off the empty resonator.

    ``frame_shift`` offsets the resonator, every mode and the packet centre by
    the same amount; physical results must not depend on it.
    """
    run = run or OracleRunConfig()
    gamma = float(gamma)
    if not gamma >= 0 or not math.isfinite(gamma):
        raise ParameterError(f"Gamma must be non-negative, got {gamma}")
    _check_setup(run, gamma, (spec.epsilon,))
    omega = run.continuum.frequencies + frame_shift
    dw = run.continuum.spacing
    g = run.continuum.coupling(gamma)
    rel = omega - frame_shift  # mode frequency seen from the resonator

    sampled = initial_amplitude(omega, WavepacketSpec(spec.delta + frame_shift, spec.epsilon))
    scale = 1.0 / math.sqrt(dw * float(np.sum(np.abs(sampled) ** 2)))
    modes0 = scale * sampled

    a = 0j
    x = math.sqrt(dw) * modes0
    h = run.step
    nsteps = run.steps
    snap_at = int(round(SNAPSHOT_FRACTION * nsteps))
    snapshot = None

    def rhs(t, a, x):
        p = _phases(rel, t)
        return -1j * g * np.dot(np.conj(p), x), -1j * g * p * a

    t = 0.0
    for n in range(nsteps):
        da1, dx1 = rhs(t, a, x)
        da2, dx2 = rhs(t + h / 2, a + h / 2 * da1, x + h / 2 * dx1)
        da3, dx3 = rhs(t + h / 2, a + h / 2 * da2, x + h / 2 * dx2)
        da4, dx4 = rhs(t + h, a + h * da3, x + h * dx3)
        a = a + h / 6 * (da1 + 2 * da2 + 2 * da3 + da4)
        x = x + h / 6 * (dx1 + 2 * dx2 + 2 * dx3 + dx4)
        t = (n + 1) * h
        if n + 1 == snap_at:
            snapshot = _one_state(a, x, omega, frame_shift, dw, t)

    final = _one_state(a, x, omega, frame_shift, dw, t)
    initial = OneExcitationState(0j, modes0, omega, 0.0)
    drift = abs(final.norm - 1.0)
    if drift > NORM_ABORT_LEVEL:
        raise NormDriftError(f"norm drifted by {drift:.2e}; reduce the step")
    return OneExcitationRun(
        initial=initial,
        final=final,
        snapshot=snapshot or final,
        scale=scale,
        norm_drift=drift,
        long_time_ok=run.long_time_ok(gamma, spec.epsilon),
    )


def _one_state(a, x, omega, shift, dw, t) -> OneExcitationState:
    # back to the Schroedinger picture
    return OneExcitationState(
        a * np.exp(-1j * shift * t), x * np.exp(-1j * omega * t) / math.sqrt(dw), omega, t
    )


@numba.njit(cache=True)
def _pair_sweep(y, xs, ps, qs, out):
    """Add ``sum_k xs[k] (x) ps[k] + ps[k] (x) xs[k]`` to the upper triangle of ``y``.

    In the same pass ``out[m] = Y @ qs[m]`` for the full symmetric ``Y``.
    """
    n = y.shape[0]
    out[:] = 0
    x0, x1, x2 = xs[0], xs[1], xs[2]
    p0, p1, p2 = ps[0], ps[1], ps[2]
    q0, q1, q2 = qs[0], qs[1], qs[2]
    r0, r1, r2 = out[0], out[1], out[2]
    for i in range(n):
        a0, a1, a2 = x0[i], x1[i], x2[i]
        b0, b1, b2 = p0[i], p1[i], p2[i]
        c0, c1, c2 = q0[i], q1[i], q2[i]
        s0 = 0j
        s1 = 0j
        s2 = 0j
        row = y[i]
        for j in range(i + 1, n):
            v = row[j] + a0 * p0[j] + b0 * x0[j] + a1 * p1[j] + b1 * x1[j] + a2 * p2[j] + b2 * x2[j]
            row[j] = v
            s0 += v * q0[j]
            s1 += v * q1[j]
            s2 += v * q2[j]
            r0[j] += v * c0
            r1[j] += v * c1
            r2[j] += v * c2
        v = row[i] + 2 * (a0 * b0 + a1 * b1 + a2 * b2)
        row[i] = v
        r0[i] += s0 + v * c0
        r1[i] += s1 + v * c1
        r2[i] += s2 + v * c2


def _triangle_norm(y: np.ndarray) -> float:
    diag = np.diagonal(y)
    return 2 * float(np.vdot(y, y).real) - float(np.vdot(diag, diag).real)


def _full_from_triangle(y: np.ndarray) -> np.ndarray:
    full = np.triu(y)
    full += np.triu(y, 1).T
    return full


def evolve_two(
    spec: TwoPhotonSpec,
    u: float,
    gamma: float = 1.0,
    run: OracleRunConfig | None = None,
    frame_shift: float = 0.0,
) -> TwoExcitationRun:
    """Scatter a photon pair off the Kerr resonator.

    The pair amplitude is stored as the upper triangle of an ``N x N`` array;
    symmetry is therefore exact and the returned ``c`` is rebuilt from it.
    """
    run = run or OracleRunConfig()
    u = check_kerr(u)
    gamma = check_rate("Gamma", gamma)
    _check_setup(run, gamma, (spec.epsilon1, spec.epsilon2))
    omega = run.continuum.frequencies + frame_shift
    rel = omega - frame_shift
    dw = run.continuum.spacing
    g = run.continuum.coupling(gamma)
    sqrt2 = math.sqrt(2.0)

    shifted = TwoPhotonSpec(
        spec.delta1 + frame_shift, spec.epsilon1, spec.delta2 + frame_shift, spec.epsilon2
    )
    sampled = initial_joint_amplitude(omega[:, None], omega[None, :], shifted)
    scale = 1.0 / (dw * math.sqrt(float(np.vdot(sampled, sampled).real)))
    c0 = scale * sampled
    del sampled

    h = run.step
    nsteps = run.steps
    snap_at = int(round(SNAPSHOT_FRACTION * nsteps))

    # interaction-picture discrete amplitudes
    y = dw * c0
    rows = np.empty((3, omega.size), dtype=complex)
    for m, tau in enumerate((0.0, h / 2, h)):
        rows[m] = y @ np.conj(_phases(rel, tau))
    y = np.triu(y)
    initial = TwoExcitationState(0j, np.zeros_like(omega, dtype=complex), c0, omega, 0.0)
    del c0
    ac = 0j
    x = np.zeros(omega.size, dtype=complex)

    def rhs(t, ac, x, row_sum):
        p = _phases(rel, t)
        kerr = np.exp(1j * u * t)
        dac = -1j * sqrt2 * g * kerr * np.dot(np.conj(p), x)
        dx = -1j * sqrt2 * g * (p * (np.conj(kerr) * ac) + row_sum)
        return dac, dx

    def pair_row_sum(xv, p, q):
        # (x (x) p + p (x) x) @ q for the rank-two pair derivative
        return -1j * g / sqrt2 * (xv * np.dot(p, q) + p * np.dot(xv, q))

    snapshot = None
    coef = -1j * g / sqrt2 * h / 6
    xs = np.empty((3, omega.size), dtype=complex)
    ps = np.empty((3, omega.size), dtype=complex)
    qs = np.empty((3, omega.size), dtype=complex)
    t = 0.0
    for n in range(nsteps):
        pa, pm, pb = _phases(rel, t), _phases(rel, t + h / 2), _phases(rel, t + h)
        qm, qb = np.conj(pm), np.conj(pb)
        x1 = x
        dac1, dx1 = rhs(t, ac, x1, rows[0])
        x2 = x + h / 2 * dx1
        dac2, dx2 = rhs(t + h / 2, ac + h / 2 * dac1, x2, rows[1] + h / 2 * pair_row_sum(x1, pa, qm))
        x3 = x + h / 2 * dx2
        dac3, dx3 = rhs(t + h / 2, ac + h / 2 * dac2, x3, rows[1] + h / 2 * pair_row_sum(x2, pm, qm))
        x4 = x + h * dx3
        dac4, dx4 = rhs(t + h, ac + h * dac3, x4, rows[2] + h * pair_row_sum(x3, pm, qb))
        ac = ac + h / 6 * (dac1 + 2 * dac2 + 2 * dac3 + dac4)
        x = x + h / 6 * (dx1 + 2 * dx2 + 2 * dx3 + dx4)
        xs[0] = coef * x1
        xs[1] = coef * 2 * (x2 + x3)
        xs[2] = coef * x4
        ps[0], ps[1], ps[2] = pa, pm, pb
        t = (n + 1) * h
        for m, tau in enumerate((t, t + h / 2, t + h)):
            qs[m] = np.conj(_phases(rel, tau))
        _pair_sweep(y, xs, ps, qs, rows)
        if n + 1 == snap_at:
            snapshot = _two_state(ac, x, y, omega, rel, u, frame_shift, dw, t)

    final = _two_state(ac, x, y, omega, rel, u, frame_shift, dw, t)
    drift = abs(abs(ac) ** 2 + float(np.vdot(x, x).real) + _triangle_norm(y) - 1.0)
    if drift > NORM_ABORT_LEVEL:
        raise NormDriftError(f"norm drifted by {drift:.2e}; reduce the step")
    return TwoExcitationRun(
        initial=initial,
        final=final,
        snapshot=snapshot or final,
        scale=scale,
        norm_drift=drift,
        long_time_ok=run.long_time_ok(gamma, spec.epsilon1, spec.epsilon2),
    )


def _pair_phase(omega: np.ndarray, t: float) -> np.ndarray:
    # built from omega + omega' so the matrix is exactly symmetric after rounding
    return np.exp(1j * (omega[:, None] + omega[None, :]) * t)


def _two_state(ac, x, y, omega, rel, u, shift, dw, t) -> TwoExcitationState:
    c = _full_from_triangle(y)
    c *= _pair_phase(omega, -t)
    c /= dw
    ac_s = ac * np.exp(-1j * (2 * shift + u) * t)
    b = x * np.exp(-1j * (rel + 2 * shift) * t) / math.sqrt(dw)
    return TwoExcitationState(ac_s, b, c, omega, t)


def strip_one(state: OneExcitationState) -> np.ndarray:
    """Mode amplitudes with the free phase ``exp(-i omega t)`` removed."""
    return state.modes * np.exp(1j * state.omega * state.time)


def extract_asymptotic(state: TwoExcitationState) -> np.ndarray:
    """Pair amplitudes with the free phase ``exp(-i (omega + omega') t)`` removed."""
    return state.c * _pair_phase(state.omega, state.time)


def _rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    ref = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / ref) if ref > 0 else math.inf


def stationarity_residual(run: OneExcitationRun | TwoExcitationRun) -> float:
    """Relative change of the stripped amplitudes between 0.9 t_end and t_end."""
    if isinstance(run, OneExcitationRun):
        return _rel_l2(strip_one(run.snapshot), strip_one(run.final))
    return _rel_l2(extract_asymptotic(run.snapshot), extract_asymptotic(run.final))


@dataclass(frozen=True)
class Comparison:
    rel_l2: float
    max_abs: float
    points: int

    def passed(self, tol: float = 2e-2) -> bool:
        return self.rel_l2 < tol


def compare_to_analytic(stripped, analytic, mask_threshold: float = 0.05) -> Comparison:
    """Deviation on the region where ``|analytic| > mask_threshold * max|analytic|``."""
    stripped = np.asarray(stripped)
    analytic = np.asarray(analytic)
    if stripped.shape != analytic.shape:
        raise ValueError(f"grid mismatch: {stripped.shape} vs {analytic.shape}")
    mag = np.abs(analytic)
    mask = mag > mask_threshold * mag.max() if mag.size else mag.astype(bool)
    if not np.any(mask):
        raise ValueError("comparison mask is empty")
    diff = stripped[mask] - analytic[mask]
    ref = np.linalg.norm(analytic[mask])
    return Comparison(
        rel_l2=float(np.linalg.norm(diff) / ref),
        max_abs=float(np.max(np.abs(diff))),
        points=int(mask.sum()),
    )


def _populated(run: OneExcitationRun) -> np.ndarray:
    mask = np.abs(run.initial.modes) ** 2 * run.initial.spacing > POPULATED_LEVEL
    if not np.any(mask):
        raise ValueError("no populated modes")
    return mask


def _relative_axis(omega: np.ndarray) -> np.ndarray:
    # the middle mode sits on the resonator whatever the frame shift
    return omega - omega[len(omega) // 2]


def check_bare_phase(run: OneExcitationRun, gamma: float = 1.0) -> Comparison:
    """Stripped amplitudes against ``bar_t * A(0)`` on modes holding > 1e-6 probability."""
    mask = _populated(run)
    expected = bare_phase_shift(_relative_axis(run.initial.omega), gamma) * run.initial.modes
    return compare_to_analytic(strip_one(run.final)[mask], expected[mask], mask_threshold=0.0)


def bare_phase_ratio_deviation(run: OneExcitationRun, gamma: float = 1.0) -> float:
    """Unweighted relative L2 of ``stripped / A(0)`` against ``bar_t`` on populated modes.

    Every populated mode counts equally here, so the band edges (where a finite
    cutoff shifts the resonance most) dominate; reported alongside
    :func:`check_bare_phase`.
    """
    mask = _populated(run)
    ratio = strip_one(run.final)[mask] / run.initial.modes[mask]
    expected = bare_phase_shift(_relative_axis(run.initial.omega)[mask], gamma)
    return _rel_l2(ratio, expected)


def factorized_reference(run: TwoExcitationRun, gamma: float = 1.0) -> np.ndarray:
    tb = bare_phase_shift(_relative_axis(run.initial.omega), gamma)
    return tb[:, None] * tb[None, :] * run.initial.c


def check_factorized(run: TwoExcitationRun, gamma: float = 1.0) -> Comparison:
    """Stripped pair amplitude against ``bar_t bar_t C(0)`` (no bound state)."""
    return compare_to_analytic(extract_asymptotic(run.final), factorized_reference(run, gamma))


def check_bound_state(
    run: TwoExcitationRun, spec: TwoPhotonSpec, u: float, gamma: float = 1.0,
    mask_threshold: float = 0.05,
) -> Comparison:
    """Extracted ``D`` (stripped minus factorized part) against the closed form."""
    extracted = extract_asymptotic(run.final) - factorized_reference(run, gamma)
    rel = _relative_axis(run.initial.omega)
    analytic = run.scale * bound_state_amplitude(
        rel[:, None], rel[None, :], spec, u, CouplingConfig(gamma, 0.0)
    )
    return compare_to_analytic(extracted, analytic, mask_threshold)


def channel_amplitudes_from_run(
    run: TwoExcitationRun, cfg: CouplingConfig, direction: Direction = Direction.FROM_LEFT
) -> ChannelAmplitudes:
    """r/l output amplitudes built from a b-space run.

    The c modes evolve freely, so only ``D`` needs the numerics: it is taken
    from the run and spread over the channels with the chiral weights, while
    the NP parts are single-photon factors times the sampled incident pair.
    ``cfg.total`` must equal the ``Gamma`` the run used.
    """
    rel = _relative_axis(run.initial.omega)
    c0 = run.initial.c
    extracted = extract_asymptotic(run.final) - factorized_reference(run, cfg.total)
    r = reflection(rel, cfg)
    if Direction(direction) is Direction.FROM_LEFT:
        t = transmission_left_incident(rel, cfg)
        free = (np.outer(t, t), np.outer(r, r), np.outer(t, r), np.outer(r, t))
    else:
        t = transmission_right_incident(rel, cfg)
        free = (np.outer(r, r), np.outer(t, t), np.outer(t, r), np.outer(r, t))
    weights = bound_state_weights(cfg, Direction(direction))
    return ChannelAmplitudes(*(f * c0 + wgt * extracted for f, wgt in zip(free, weights)))


def write_dump(path, matrix: np.ndarray, continuum: DiscretizedContinuum, params: dict) -> Path:
    """Write a stripped amplitude matrix as little-endian float64 (re, im) pairs, row-major."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    n = continuum.mode_count
    if matrix.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {matrix.shape}")
    header = json.dumps(
        {"N": n, "W": continuum.cutoff, "params": params}, sort_keys=True
    ).encode()
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(DUMP_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(matrix.astype("<c16").tobytes(order="C"))
    return path


def read_dump(path) -> tuple[np.ndarray, dict]:
    data = Path(path).read_bytes()
    if not data.startswith(DUMP_MAGIC):
        raise ValueError(f"{path} is not an oracle dump")
    pos = len(DUMP_MAGIC)
    (size,) = struct.unpack_from("<I", data, pos)
    pos += 4
    header = json.loads(data[pos : pos + size])
    pos += size
    n = header["N"]
    matrix = np.frombuffer(data, dtype="<c16", count=n * n, offset=pos).reshape(n, n)
    return matrix.astype(np.complex128), header
