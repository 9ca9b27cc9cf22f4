import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cocycle_forge.cocycle import PeriodicCocycle, cocycle_distance
from cocycle_forge.errors import (EndpointMismatch, IndexOutOfRange, InsufficientBudget, InvalidArgument,
                                  PreconditionViolated, SignObstruction)
from cocycle_forge.generators import rotation, slow_cocycle
from cocycle_forge.paths import (PathContract, blend_exponents, collapse_to_sink_or_source, concatenate,
                                 constant_path, realify, verify_contract, weaken_exponent)
from cocycle_forge.spectrum import lyapunov_spectrum


def spiral(ell=50):
    a = rotation(np.pi / 4) @ np.diag([np.exp(0.02), np.exp(-0.02)])
    return PeriodicCocycle.constant(a, ell)


def with_exponents(chi, ell, rng):
    d = len(chi)
    qs = [np.linalg.qr(rng.standard_normal((d, d)))[0] for _ in range(ell)] + []
    qs.append(qs[0])
    dm = np.diag(np.exp(chi))
    return PeriodicCocycle(np.array([qs[n + 1] @ dm @ qs[n].T for n in range(ell)]))


class TestBlend:
    def test_rotating_example(self):
        c = spiral()
        s0 = lyapunov_spectrum(c)
        p = blend_exponents(c, 1, 0.5)
        chi = p.exponent_curves()
        assert np.abs(chi.sum(axis=1) - s0.exponents.sum()).max() <= 1e-10
        assert abs(chi[-1, 0] - chi[-1, 1]) <= 1e-8
        assert chi[-1, 0] == pytest.approx(s0.exponents.mean(), abs=1e-10)
        # det = 1 puts both multipliers on the unit circle: already equal, so nothing moves
        assert not s0.hyperbolic and p.radius == 0.0

    def test_rotating_example_hyperbolic(self):
        c = PeriodicCocycle(spiral().matrices * 0.9)
        p = blend_exponents(c, 1, 0.5)
        assert verify_contract(p, p.contract).passed
        assert lyapunov_spectrum(p.endpoint).exponents[0] == pytest.approx(np.log(0.9), abs=1e-10)

    def test_degenerate_is_constant(self):
        c = PeriodicCocycle.constant(np.diag([0.5, 0.5]), 3)
        p = blend_exponents(c, 1, 0.1)
        assert p.radius == 0.0
        assert all(np.array_equal(p.stacks[k], c.matrices) for k in range(len(p)))

    def test_budget(self):
        with pytest.raises(InsufficientBudget):
            blend_exponents(PeriodicCocycle.constant(np.diag([10.0, 0.1]), 1), 1, 0.01)

    def test_index_range(self):
        with pytest.raises(IndexOutOfRange):
            blend_exponents(spiral(), 2, 1.0)

    def test_radius_matches_samples(self, rng):
        c = slow_cocycle(rng, 3, 12)
        p = blend_exponents(c, 2, 1.0, grid=31)
        assert p.radius == max(cocycle_distance(c, p.cocycle(k)) for k in range(len(p)))

    def test_closed_form_family(self, rng):
        c = slow_cocycle(rng, 3, 8)
        p = blend_exponents(c, 1, 1.0, grid=11)
        for k, t in enumerate(p.grid):
            np.testing.assert_allclose(p.at(t).matrices, p.stacks[k], atol=1e-12)
        mid = p.at(0.33)
        assert cocycle_distance(c, mid) <= p.contract.epsilon

    @given(st.integers(0, 2 ** 32 - 1))
    def test_random_blend_passes(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 4))
        c = slow_cocycle(rng, d, int(rng.integers(4, 16)), twist=0.05)
        p = blend_exponents(c, int(rng.integers(1, d)), 0.6, grid=21)
        assert verify_contract(p, p.contract).passed


class TestRealify:
    def test_slow_spiral(self):
        a = 0.5 ** (1 / 40) * rotation(np.pi / 80)
        c = PeriodicCocycle.constant(a, 40)
        s0 = lyapunov_spectrum(c)
        assert abs(s0.multipliers[0].imag) > 0.1
        np.testing.assert_allclose(np.abs(s0.multipliers), [0.5, 0.5], rtol=1e-12)
        p = realify(c, 0.2)
        s1 = lyapunov_spectrum(p.endpoint)
        assert np.abs(s1.multipliers.imag).max() < 1e-10
        np.testing.assert_allclose(np.abs(s1.multipliers), [0.5, 0.5], rtol=1e-10)
        assert verify_contract(p, p.contract).passed

    def test_real_input_constant(self):
        c = PeriodicCocycle.constant(np.diag([0.5, 3.0]), 4)
        assert realify(c, 0.1).radius == 0.0

    def test_one_step_budget(self):
        c = PeriodicCocycle.constant(0.5 * rotation(np.pi / 3), 1)
        with pytest.raises(InsufficientBudget):
            realify(c, 1e-4)


class TestWeaken:
    def test_endpoint_value(self):
        c = PeriodicCocycle.constant(np.diag([np.exp(-0.3), np.exp(0.5)]), 1)
        p = weaken_exponent(c, 1, 0.1, 1.0)
        chi = lyapunov_spectrum(p.endpoint).exponents
        assert chi[0] == pytest.approx(-0.05, abs=1e-12)
        assert chi.sum() == pytest.approx(0.2, abs=1e-12)

    def test_already_weak(self):
        c = PeriodicCocycle.constant(np.diag([np.exp(-0.05), np.exp(0.5)]), 1)
        assert weaken_exponent(c, 1, 0.1, 1.0).radius == 0.0

    def test_precondition(self):
        c = PeriodicCocycle.constant(np.diag([np.exp(-0.5), np.exp(0.3)]), 1)
        with pytest.raises(PreconditionViolated):
            weaken_exponent(c, 1, 0.1, 1.0)
        with pytest.raises(InvalidArgument):
            weaken_exponent(c, 1, -0.1, 1.0)

    def test_other_exponents_untouched(self, rng):
        c = with_exponents([-0.9, -0.4, 0.3, 0.8], 5, rng)
        p = weaken_exponent(c, 2, 0.2, 10.0)
        chi = p.exponent_curves()
        assert np.abs(chi[:, [0, 3]] - chi[0, [0, 3]]).max() <= 1e-9
        assert verify_contract(p, p.contract).passed


class TestCollapse:
    def test_sink(self, rng):
        c = with_exponents([-0.5, -0.1, 0.2], 60, rng)
        p = collapse_to_sink_or_source(c, "sink", 2.0)
        chi = lyapunov_spectrum(p.endpoint).exponents
        assert chi.max() < 0
        assert chi.sum() == pytest.approx(-0.4, abs=1e-8)
        assert verify_contract(p, p.contract).passed

    def test_already_sink(self):
        c = PeriodicCocycle.constant(np.diag([0.3, 0.6, 0.9]), 2)
        assert collapse_to_sink_or_source(c, "sink", 0.1).radius == 0.0

    def test_sign_obstruction(self, rng):
        c = with_exponents([-0.2, 0.1, 0.4], 3, rng)
        with pytest.raises(SignObstruction):
            collapse_to_sink_or_source(c, "sink", 5.0)

    def test_bad_target(self):
        with pytest.raises(InvalidArgument):
            collapse_to_sink_or_source(PeriodicCocycle.constant(np.diag([0.3, 0.6]), 1), "both", 1.0)


class TestComposition:
    def test_constant_concatenation(self):
        c = PeriodicCocycle.constant(np.diag([0.3, 2.0]), 2)
        p = concatenate(constant_path(c, 11), constant_path(c, 11))
        assert p.radius == 0.0 and len(p) == 21

    def test_triangle_inequality(self, rng):
        c = slow_cocycle(rng, 3, 10, twist=0.2)
        p = blend_exponents(c, 1, 1.0, grid=21)
        q = realify(p.endpoint, 1.0, grid=21)
        pq = concatenate(p, q)
        assert pq.radius <= p.radius + q.radius + 1e-12

    def test_mismatch(self):
        a = constant_path(PeriodicCocycle.constant(np.diag([0.3, 2.0]), 1), 5)
        b = constant_path(PeriodicCocycle.constant(np.diag([0.4, 2.0]), 1), 5)
        with pytest.raises(EndpointMismatch):
            concatenate(a, b)


class TestVerify:
    def test_constant_path_fails_realify(self):
        c = PeriodicCocycle.constant(0.5 * rotation(0.3), 1)
        v = verify_contract(constant_path(c, 5), PathContract("realify", 1.0))
        assert not v.passed and not v.clause("endpoint multipliers real").passed

    def test_radius_clause(self):
        p = blend_exponents(PeriodicCocycle(spiral().matrices * 0.9), 1, 0.5)
        v = verify_contract(p, PathContract("blend", p.radius / 2, j=1))
        assert not v.clause("radius <= eps").passed
        assert v.clause("pair sum conserved").passed

    def test_unknown_kind(self):
        c = PeriodicCocycle.constant(np.diag([0.3, 2.0]), 1)
        with pytest.raises(InvalidArgument):
            verify_contract(constant_path(c, 3), PathContract("teleport", 1.0))
