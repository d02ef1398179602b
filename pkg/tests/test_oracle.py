from __future__ import annotations

import math

import numpy as np
import pytest

from chiral_kerr import oracle
from chiral_kerr.model import ParameterError
from chiral_kerr.oracle import (
    DiscretizedContinuum,
    LongTimeWarning,
    NormDriftError,
    OracleRunConfig,
    check_bare_phase,
    check_bound_state,
    check_factorized,
    compare_to_analytic,
    evolve_one,
    evolve_two,
    extract_asymptotic,
    read_dump,
    stationarity_residual,
    strip_one,
    write_dump,
)
from chiral_kerr.single import WavepacketSpec, bare_phase_shift
from chiral_kerr.twophoton import TwoPhotonSpec

SMALL_ONE = OracleRunConfig(DiscretizedContinuum(20.0, 401), step=0.01, t_end=40.0)
SMALL_PAIR = OracleRunConfig(DiscretizedContinuum(20.0, 201), step=0.01, t_end=30.0)
PAIR_SPEC = TwoPhotonSpec.identical(0.0, 0.5)


@pytest.fixture(scope="module")
def one_run():
    return evolve_one(WavepacketSpec(0.0, 0.5), 1.0, SMALL_ONE)


@pytest.fixture(scope="module")
def pair_run_linear():
    return evolve_two(PAIR_SPEC, 0.0, 1.0, SMALL_PAIR)


@pytest.fixture(scope="module")
def pair_run_kerr():
    return evolve_two(PAIR_SPEC, 10.0, 1.0, SMALL_PAIR)


def test_continuum_layout():
    c = DiscretizedContinuum(20.0, 1601)
    assert c.spacing == pytest.approx(0.025)
    w = c.frequencies
    assert w[800] == 0.0
    assert w[0] == pytest.approx(-20.0) and w[-1] == pytest.approx(20.0)
    assert c.coupling(1.0) == pytest.approx(math.sqrt(0.025 / math.pi))


@pytest.mark.parametrize("n", [2, 4, 1600, 3.5])
def test_continuum_needs_odd_count(n):
    with pytest.raises(ParameterError):
        DiscretizedContinuum(20.0, n)


def test_run_config_rules():
    with pytest.raises(ParameterError):
        OracleRunConfig(DiscretizedContinuum(20.0, 401), step=0.02)
    with pytest.raises(ParameterError):
        OracleRunConfig(integrator_order=2)
    run = OracleRunConfig()
    assert run.steps == 8000
    assert run.long_time_ok(1.0, 0.5)
    assert not run.long_time_ok(1.0, 0.1)
    assert not OracleRunConfig(t_end=1.0).long_time_ok(1.0, 0.5)


def test_cutoff_must_exceed_linewidth():
    run = OracleRunConfig(DiscretizedContinuum(5.0, 101), step=0.01, t_end=1.0)
    with pytest.raises(ParameterError):
        evolve_one(WavepacketSpec(0.0, 0.5), 1.0, run)


def test_short_run_warns():
    run = OracleRunConfig(DiscretizedContinuum(20.0, 101), step=0.01, t_end=1.0)
    with pytest.warns(LongTimeWarning):
        result = evolve_one(WavepacketSpec(0.0, 0.5), 1.0, run)
    assert not result.long_time_ok
    assert stationarity_residual(result) > oracle.STATIONARITY_LEVEL


def test_free_evolution_is_exact():
    run = evolve_one(WavepacketSpec(1.0, 0.5), 0.0, SMALL_ONE)
    np.testing.assert_allclose(strip_one(run.final), run.initial.modes, atol=1e-12)
    assert run.final.a == 0


def test_one_photon_conserves_norm(one_run):
    assert one_run.norm_drift < 1e-6
    assert one_run.final.norm == pytest.approx(1.0, abs=1e-6)
    assert abs(one_run.final.a) ** 2 < 1e-8


def test_one_photon_bare_phase(one_run):
    comp = check_bare_phase(one_run)
    assert comp.passed()
    assert oracle.bare_phase_ratio_deviation(one_run) < 0.1
    assert stationarity_residual(one_run) < oracle.STATIONARITY_LEVEL


def test_one_photon_resonant_mode_flips_sign(one_run):
    mid = len(one_run.initial.omega) // 2
    ratio = strip_one(one_run.final)[mid] / one_run.initial.modes[mid]
    assert ratio == pytest.approx(bare_phase_shift(0.0), abs=2e-2)


def test_frame_shift_invariance(one_run):
    shifted = evolve_one(WavepacketSpec(0.0, 0.5), 1.0, SMALL_ONE, frame_shift=3.0)
    np.testing.assert_allclose(strip_one(shifted.final), strip_one(one_run.final), atol=1e-10)


def test_norm_abort(monkeypatch):
    monkeypatch.setattr(oracle, "NORM_ABORT_LEVEL", 0.0)
    run = OracleRunConfig(DiscretizedContinuum(20.0, 101), step=0.01, t_end=0.5)
    with pytest.warns(LongTimeWarning), pytest.raises(NormDriftError):
        evolve_one(WavepacketSpec(0.0, 0.5), 1.0, run)


def test_pair_state_is_symmetric(pair_run_kerr):
    c = pair_run_kerr.final.c
    assert np.array_equal(c, c.T)
    assert pair_run_kerr.norm_drift < 1e-6


def test_pair_initial_state_normalised(pair_run_linear):
    assert pair_run_linear.initial.norm == pytest.approx(1.0, abs=1e-12)


def test_linear_pair_factorizes(pair_run_linear):
    # coarse grid: about 2% at W = 20, shrinking with the cutoff
    comp = check_factorized(pair_run_linear)
    assert comp.rel_l2 < 3e-2
    assert stationarity_residual(pair_run_linear) < oracle.STATIONARITY_LEVEL


def test_kerr_pair_bound_state(pair_run_kerr):
    comp = check_bound_state(pair_run_kerr, PAIR_SPEC, 10.0)
    assert comp.rel_l2 < 3e-2
    # the bound state is a visible part of the output
    d = extract_asymptotic(pair_run_kerr.final) - oracle.factorized_reference(pair_run_kerr)
    ratio = np.linalg.norm(d) / np.linalg.norm(extract_asymptotic(pair_run_kerr.final))
    assert ratio > 0.1


def test_linear_pair_error_falls_with_cutoff(pair_run_linear):
    wider = OracleRunConfig(DiscretizedContinuum(30.0, 301), step=0.2 / 30, t_end=30.0)
    coarse = check_factorized(pair_run_linear).rel_l2
    fine = check_factorized(evolve_two(PAIR_SPEC, 0.0, 1.0, wider)).rel_l2
    assert fine < 0.8 * coarse


def test_compare_to_analytic_examples():
    analytic = np.array([1.0, 0.5, 0.01])
    comp = compare_to_analytic(analytic * 1.01, analytic)
    assert comp.rel_l2 == pytest.approx(0.01)
    assert comp.points == 2
    with pytest.raises(ValueError):
        compare_to_analytic(np.zeros(2), np.zeros(3))
    with pytest.raises(ValueError):
        compare_to_analytic(np.zeros(2), np.zeros(2))


def test_dump_round_trip(tmp_path, pair_run_kerr):
    matrix = extract_asymptotic(pair_run_kerr.final)
    path = write_dump(tmp_path / "d.bin", matrix, SMALL_PAIR.continuum, {"u": 10.0})
    back, header = read_dump(path)
    assert header == {"N": 201, "W": 20.0, "params": {"u": 10.0}}
    assert np.array_equal(back, matrix)
    assert path.stat().st_size == len(oracle.DUMP_MAGIC) + 4 + len(
        b'{"N": 201, "W": 20.0, "params": {"u": 10.0}}'
    ) + 16 * 201 * 201


def test_dump_rejects_wrong_shape(tmp_path):
    with pytest.raises(ValueError):
        write_dump(tmp_path / "d.bin", np.zeros((3, 3)), DiscretizedContinuum(20.0, 5), {})
    (tmp_path / "x.bin").write_bytes(b"nope")
    with pytest.raises(ValueError):
        read_dump(tmp_path / "x.bin")


def test_compare_identical_is_zero():
    a = np.array([1.0 + 1j, 0.3, -0.2j])
    comp = compare_to_analytic(a, a)
    assert (comp.rel_l2, comp.max_abs) == (0.0, 0.0)


def test_extract_recovers_free_pair():
    omega = DiscretizedContinuum(20.0, 41).frequencies
    c0 = oracle.initial_joint_amplitude(omega[:, None], omega[None, :], PAIR_SPEC)
    t = 13.7
    phase = np.exp(-1j * (omega[:, None] + omega[None, :]) * t)
    state = oracle.TwoExcitationState(0j, np.zeros(41, complex), c0 * phase, omega, t)
    np.testing.assert_allclose(extract_asymptotic(state), c0, rtol=1e-13)


def test_one_photon_converges_in_step_and_modes(one_run):
    half = OracleRunConfig(SMALL_ONE.continuum, step=0.005, t_end=40.0)
    fine_step = evolve_one(WavepacketSpec(0.0, 0.5), 1.0, half)
    base = strip_one(one_run.final)
    assert oracle._rel_l2(strip_one(fine_step.final), base) < 1e-4
    dense = OracleRunConfig(DiscretizedContinuum(20.0, 801), step=0.01, t_end=40.0)
    fine_modes = evolve_one(WavepacketSpec(0.0, 0.5), 1.0, dense)
    # every other mode of the dense grid coincides with the coarse grid
    assert oracle._rel_l2(strip_one(fine_modes.final)[::2], base) < 1e-2


def test_pair_converges_in_step(pair_run_kerr):
    half = OracleRunConfig(SMALL_PAIR.continuum, step=0.005, t_end=30.0)
    fine = evolve_two(PAIR_SPEC, 10.0, 1.0, half)
    diff = oracle._rel_l2(extract_asymptotic(fine.final), extract_asymptotic(pair_run_kerr.final))
    assert diff < 1e-4


def test_pair_frame_shift_invariance():
    run = OracleRunConfig(DiscretizedContinuum(20.0, 101), step=0.01, t_end=20.0)
    base = evolve_two(PAIR_SPEC, 10.0, 1.0, run)
    shifted = evolve_two(PAIR_SPEC, 10.0, 1.0, run, frame_shift=2.5)
    np.testing.assert_allclose(
        np.abs(extract_asymptotic(shifted.final)), np.abs(extract_asymptotic(base.final)), atol=1e-10
    )


@pytest.mark.parametrize("direction", list(oracle.Direction))
def test_channel_assembly_matches_closed_form(pair_run_kerr, direction):
    from chiral_kerr.twophoton import channel_amplitudes

    cfg = oracle.CouplingConfig(0.7, 0.3)
    numeric = oracle.channel_amplitudes_from_run(pair_run_kerr, cfg, direction)
    rel = oracle._relative_axis(pair_run_kerr.initial.omega)
    exact = channel_amplitudes(rel[:, None], rel[None, :], PAIR_SPEC, 10.0, cfg, direction)
    for name in ("rr", "ll", "rl"):
        comp = compare_to_analytic(getattr(numeric, name), pair_run_kerr.scale * getattr(exact, name))
        assert comp.rel_l2 < 3e-2, name
    np.testing.assert_allclose(numeric.rl, numeric.lr.T, rtol=1e-12, atol=1e-15)
