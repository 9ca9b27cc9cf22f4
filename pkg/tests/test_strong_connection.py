import numpy as np
import pytest

from cocycle_forge.errors import IndexOutOfRange, InvalidArgument, InvariantViolation, PreconditionViolated, ZeroSeed
from cocycle_forge.generators import rotation
from cocycle_forge.spectrum import SpectrumReport
from cocycle_forge.strong_connection import (CenterKind, CenterStableModel, check_pss_spectral_and_directional,
                                             classify_center, normalized_iteration_limit, steps_to_angle)

PARABOLIC = np.array([[0.5, 1.0], [0.0, 0.5]])


def model(block, seed=(0.0, 1.0)):
    return CenterStableModel(np.asarray(block, dtype=float), np.asarray(seed, dtype=float))


def test_classification_examples():
    assert classify_center(model(0.5 * np.eye(2))) is CenterKind.HOMOTHETY
    assert classify_center(model(PARABOLIC)) is CenterKind.PARABOLIC
    assert classify_center(model(0.5 * rotation(0.3))) is CenterKind.COMPLEX


@pytest.mark.parametrize("block", [np.diag([0.5, -0.5]), np.diag([0.5, 0.6]), np.eye(2), np.zeros((2, 2))])
def test_invalid_blocks(block):
    with pytest.raises(InvariantViolation):
        model(block)


def test_shape_checks():
    with pytest.raises(InvalidArgument):
        CenterStableModel(np.eye(3) * 0.5, np.ones(3))


def test_parabolic_angle():
    lim = normalized_iteration_limit(model(PARABOLIC), 1000)
    assert lim.angle < 2e-3
    np.testing.assert_allclose(lim.direction, [1.0, 0.0])
    # direct oracle: iterate the normalized vector
    v = np.array([0.0, 1.0])
    for _ in range(1000):
        v = PARABOLIC @ v
        v /= np.linalg.norm(v)
    assert lim.angle == pytest.approx(np.arctan2(abs(v[1]), abs(v[0])), rel=1e-9)


def test_homothety_returns_seed():
    lim = normalized_iteration_limit(model(0.5 * np.eye(2), (3, 4)), 50)
    np.testing.assert_allclose(lim.vector, [0.6, 0.8])
    assert lim.angle == 0.0


def test_seed_on_eigenline():
    m = model(PARABOLIC, (1.0, 0.0))
    assert all(normalized_iteration_limit(m, s).angle == 0.0 for s in (1, 7, 1000))


def test_errors():
    with pytest.raises(ZeroSeed):
        normalized_iteration_limit(model(PARABOLIC, (0, 0)), 10)
    with pytest.raises(PreconditionViolated):
        normalized_iteration_limit(model(0.5 * rotation(0.3)), 10)
    with pytest.raises(InvalidArgument):
        normalized_iteration_limit(model(PARABOLIC), 0)


def test_pss_examples():
    s = SpectrumReport.from_multipliers(np.exp([-0.8, -0.3, 0.4]), 1)
    assert check_pss_spectral_and_directional(s, 2, 0.0).holds
    v = check_pss_spectral_and_directional(s, 2, 0.0)
    assert "model-level" in v.witness
    tied = SpectrumReport.from_multipliers(np.exp([-0.3, -0.3, 0.4]), 1)
    assert not check_pss_spectral_and_directional(tied, 2, 0.0).holds
    with pytest.raises(IndexOutOfRange):
        check_pss_spectral_and_directional(s, 1, 0.0)


def test_pss_after_iteration():
    m = model(PARABOLIC)
    s = SpectrumReport.from_multipliers(np.exp([-0.8, -0.3, 0.4]), 1)
    short = normalized_iteration_limit(m, 10 ** 4).angle
    assert not check_pss_spectral_and_directional(s, 2, short).holds
    n = steps_to_angle(m, 1e-6)
    assert normalized_iteration_limit(m, n).angle < 1e-6 <= normalized_iteration_limit(m, n - 1).angle
    assert check_pss_spectral_and_directional(s, 2, normalized_iteration_limit(m, n).angle).holds
