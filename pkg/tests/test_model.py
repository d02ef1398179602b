from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiral_kerr.model import (
    CouplingConfig,
    ParameterError,
    check_kerr,
    coupling_asymmetry,
    is_symmetric,
    mode_mixing,
    total_decay,
)

rates = st.floats(0.0, 10.0, allow_nan=False)


def test_derived_rates():
    cfg = CouplingConfig(0.8, 0.2)
    assert total_decay(cfg) == pytest.approx(1.0, abs=1e-15)
    assert coupling_asymmetry(cfg) == pytest.approx(0.6, abs=1e-15)
    assert cfg.total == total_decay(cfg)
    assert cfg.asymmetry == coupling_asymmetry(cfg)


def test_fully_chiral_is_allowed():
    cfg = CouplingConfig(1.0, 0.0)
    assert cfg.asymmetry == cfg.total == 1.0


@pytest.mark.parametrize("g1, g2", [(-0.1, 0.5), (0.5, -1.0), (0.0, 0.0), (math.nan, 1.0), (math.inf, 0.0)])
def test_invalid_rates_rejected(g1, g2):
    with pytest.raises(ParameterError):
        CouplingConfig(g1, g2)


def test_from_rates_rescales():
    cfg = CouplingConfig.from_rates(3.0, 1.0, unit=4.0)
    assert (cfg.gamma1, cfg.gamma2) == (0.75, 0.25)
    with pytest.raises(ParameterError):
        CouplingConfig.from_rates(1.0, 1.0, unit=0.0)


def test_swapped_mirrors():
    assert CouplingConfig(0.7, 0.3).swapped() == CouplingConfig(0.3, 0.7)


def test_mode_mixing_weights():
    m = mode_mixing(CouplingConfig(0.8, 0.2))
    assert m.to_b_from_r == pytest.approx(math.sqrt(0.8))
    assert m.to_b_from_l == pytest.approx(math.sqrt(0.2))
    assert m.to_c_from_r == pytest.approx(math.sqrt(0.2))
    assert m.to_c_from_l == pytest.approx(-math.sqrt(0.8))


def test_mode_mixing_fully_chiral():
    m = mode_mixing(CouplingConfig(1.0, 0.0)).matrix
    np.testing.assert_array_equal(m, [[1.0, 0.0], [0.0, -1.0]])


@given(rates, rates)
def test_mode_mixing_orthogonal(g1, g2):
    if g1 + g2 <= 1e-6:
        return
    m = mode_mixing(CouplingConfig(g1, g2)).matrix
    np.testing.assert_allclose(m @ m.T, np.eye(2), atol=1e-12)


def test_is_symmetric():
    assert is_symmetric(CouplingConfig(0.5, 0.5))
    assert not is_symmetric(CouplingConfig(0.6, 0.4))
    assert is_symmetric(CouplingConfig(0.6, 0.4), tol=0.25)
    with pytest.raises(ParameterError):
        is_symmetric(CouplingConfig(0.5, 0.5), tol=-1.0)


def test_kerr_validation():
    assert check_kerr(0) == 0.0
    with pytest.raises(ParameterError):
        check_kerr(-1.0)
    with pytest.raises(ParameterError):
        check_kerr(math.inf)
