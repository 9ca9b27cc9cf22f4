import numpy as np
import pytest

from cocycle_forge.cocycle import PeriodicCocycle
from cocycle_forge.errors import (EmptyLanguage, IndexOutOfRange, InvalidArgument, InvalidCocycle, NoCentralPlane,
                                  NotHyperbolic, OrientationObstruction)
from cocycle_forge.generators import rotation
from cocycle_forge.paths import verify_contract
from cocycle_forge.spectrum import lyapunov_spectrum
from cocycle_forge.two_loop import (SftCocycle, TwoLoopSpec, build_two_loop_cocycle, central_orientation_sign,
                                    make_complex, sft_domination_scan)


class TestTwoLoop:
    def test_period(self):
        spec = TwoLoopSpec(np.diag([0.5, 2.0]), (np.eye(2), np.eye(2)), 3)
        assert spec.period == 12 == build_two_loop_cocycle(spec).period

    def test_identity_excursion(self):
        fixed = np.diag([0.5, 2.0])
        c = build_two_loop_cocycle(TwoLoopSpec(fixed, (np.eye(2),), 1))
        assert c.period == 6
        s = lyapunov_spectrum(c)
        np.testing.assert_allclose(s.exponents * 6, 4 * np.log([0.5, 2.0]), atol=1e-12)

    def test_swap_brute_force(self):
        spec = TwoLoopSpec(np.diag([0.9, 1.1]), (np.array([[0.0, 1.0], [1.0, 0.0]]),), 10)
        c = build_two_loop_cocycle(spec)
        w = np.linalg.eigvals(c.return_product())
        expected = np.sort(np.log(np.abs(w))) / c.period
        np.testing.assert_allclose(lyapunov_spectrum(c).exponents, expected, atol=1e-12)

    def test_validation(self):
        with pytest.raises(InvalidCocycle):
            TwoLoopSpec(np.eye(2), (), 1)
        with pytest.raises(InvalidCocycle):
            TwoLoopSpec(np.eye(2), (np.eye(3),), 1)
        with pytest.raises(InvalidArgument):
            TwoLoopSpec(np.eye(2), (np.eye(2),), 0)
        with pytest.raises(NotHyperbolic):
            build_two_loop_cocycle(TwoLoopSpec(np.diag([1.0, 2.0]), (np.eye(2),), 2))

    def test_fixed_sites(self):
        spec = TwoLoopSpec(np.diag([0.5, 2.0]), (np.eye(2),) * 2, 2)
        c = build_two_loop_cocycle(spec)
        for n in spec.fixed_sites():
            assert np.array_equal(c.matrices[n], spec.fixed)
        assert len(spec.fixed_sites()) == 2 * (spec.n + 1)


class TestOrientation:
    spec = TwoLoopSpec(np.diag([0.6, 0.7, 3.0]), (np.diag([1.0, -1.0, 1.0]),), 2)

    def test_parity(self):
        assert central_orientation_sign(build_two_loop_cocycle(self.spec), 1) == 1
        assert central_orientation_sign(self.spec.one_loop(), 1) == -1

    def test_all_positive(self):
        assert central_orientation_sign(PeriodicCocycle.constant(np.diag([0.5, 0.6, 2.0]), 3), 1) == 1

    def test_no_plane(self):
        c = PeriodicCocycle.constant(np.diag([0.5, 0.5, 0.5]), 1)
        with pytest.raises(NoCentralPlane):
            central_orientation_sign(c, 1)
        with pytest.raises(IndexOutOfRange):
            central_orientation_sign(c, 3)


class TestComplexify:
    def test_long_orbit_homothety(self):
        spec = TwoLoopSpec(0.7 ** 0.05 * np.diag([1.0, 1.0, 40.0]), (np.diag([0.7 ** 0.05, 0.7 ** 0.05, 1.0]),), 18)
        c = build_two_loop_cocycle(spec)
        assert c.period == 40
        p = make_complex(c, 1, 0.5, sites=spec.fixed_sites())
        s = lyapunov_spectrum(p.endpoint)
        assert abs(s.multipliers[0].imag) > 0
        assert s.multipliers[0] == np.conj(s.multipliers[1])
        np.testing.assert_allclose(np.abs(s.multipliers[:2]), 0.7 ** 2, rtol=1e-9)
        assert verify_contract(p, p.contract).passed

    def test_already_complex(self):
        m = np.eye(3)
        m[:2, :2] = 0.5 * rotation(0.4)
        m[2, 2] = 3.0
        assert make_complex(PeriodicCocycle.constant(m, 2), 1, 0.1).radius == 0.0

    def test_opposite_signs(self):
        with pytest.raises(OrientationObstruction):
            make_complex(PeriodicCocycle.constant(np.diag([0.5, -0.5, 3.0]), 1), 1, 1.0)


A = np.diag([0.5, 2.0])


class TestSft:
    def test_full_shift_uniform(self):
        report = sft_domination_scan(SftCocycle.full_shift({"a": A, "b": A}), 1, 6)
        assert report.uniform
        assert report.summary(1).worst_ratio == pytest.approx(0.25)

    def test_rotated_symbol_breaks_domination(self):
        sft = SftCocycle.full_shift({"a": A, "b": rotation(np.pi / 2) @ A})
        report = sft_domination_scan(sft, 1, 6)
        assert not report.uniform
        bad = report.summary(1).first_violation
        assert bad is not None and "b" in bad

    def test_word_enumeration(self):
        sft = SftCocycle(("a", "b"), np.array([[True, True], [True, False]]), {"a": A, "b": A})
        words = list(sft.periodic_words(5))
        assert all("bb" not in "".join(w) + w[0] for w in words)
        assert words == sorted(words)
        assert len(set(words)) == len(words)

    def test_empty_language(self):
        sft = SftCocycle(("a", "b"), np.zeros((2, 2), dtype=bool), {"a": A, "b": A})
        with pytest.raises(EmptyLanguage):
            sft_domination_scan(sft, 1, 4)

    def test_length_cap(self):
        with pytest.raises(InvalidArgument):
            list(SftCocycle.full_shift({"a": A}).periodic_words(21))
