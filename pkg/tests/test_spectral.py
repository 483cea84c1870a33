import math

import numpy as np
import pytest

from ffscale.errors import AmbiguousTracking, DegenerateSpectrum, DomainError
from ffscale.linalg import PAULI_X, PAULI_Y, PAULI_Z, op_norm
from ffscale.spectral import (
    CoefficientSchedule,
    ReferenceHamiltonian,
    cd_frame_elements,
    cd_term,
    dh_ds,
    frame_at,
    frame_from_matrix,
    hamiltonian_at,
)
from ffscale.twolevel import TwoLevelParams, analytic_cd

from conftest import gauge_align, random_hermitian


def two_level(hx, hz, t_ref=10.0):
    return TwoLevelParams(hx, hz).reference(t_ref)


C = CoefficientSchedule


class TestCoefficientSchedule:
    @pytest.mark.parametrize("sched", [
        C("constant", [2.0]),
        C("linear", [1.0, -0.5]),
        C("polynomial", [0.3, -1.0, 0.25, 0.01]),
        C("tanh_ramp", [0.5, 2.0, 3.0, 0.7]),
    ])
    def test_derivative_matches_central_difference(self, sched):
        h = 1e-5
        for t in np.linspace(0.0, 6.0, 13):
            fd = (sched.value(t + h) - sched.value(t - h)) / (2 * h)
            assert abs(sched.derivative(t) - fd) < 1e-6

    def test_bad_kind(self):
        with pytest.raises(ValueError, match="unknown"):
            C("sine", [1.0])

    def test_bad_arity(self):
        with pytest.raises(ValueError):
            C("linear", [1.0])

    def test_zero_width(self):
        with pytest.raises(ValueError):
            C("tanh_ramp", [0, 1, 0, 0])

    def test_dilated(self):
        for sched in (C("linear", [1.0, 2.0]), C("polynomial", [1, 2, 3]), C("tanh_ramp", [0, 1, 2, 1])):
            slow = sched.dilated(4.0)
            for t in (0.0, 1.3, 7.9):
                assert slow.value(4.0 * t) == pytest.approx(sched.value(t), rel=1e-13, abs=1e-13)


class TestReferenceHamiltonian:
    def test_constant_fields(self):
        ham = two_level(C.constant(1.0), C.constant(0.0))
        for s in (0.0, 3.3, 10.0):
            np.testing.assert_array_equal(hamiltonian_at(ham, s), -PAULI_X)

    def test_zero_schedules(self):
        ham = two_level(C.constant(0.0), C.constant(0.0))
        assert op_norm(hamiltonian_at(ham, 1.0)) == 0.0

    def test_linear_on_minus_x(self):
        ham = ReferenceHamiltonian((-PAULI_X,), (C.linear(0.0, 1.0),), 5.0)
        np.testing.assert_array_equal(hamiltonian_at(ham, 2.0), [[0, -2], [-2, 0]])

    def test_dh_constant(self):
        ham = two_level(C.constant(1.0), C.constant(3.0))
        assert op_norm(dh_ds(ham, 2.0)) == 0.0

    def test_dh_linear_z(self):
        ham = ReferenceHamiltonian((-PAULI_Z,), (C.linear(0.0, 1.0),), 5.0)
        for s in (0.0, 2.5, 5.0):
            np.testing.assert_array_equal(dh_ds(ham, s), -PAULI_Z)

    def test_dh_finite_difference(self, rng):
        basis = tuple(random_hermitian(rng, 4) for _ in range(3))
        scheds = tuple(C("polynomial", rng.normal(size=4)) for _ in range(3))
        ham = ReferenceHamiltonian(basis, scheds, 2.0)
        h = 1e-5
        for s in (0.3, 1.0, 1.7):
            fd = (hamiltonian_at(ham, s + h) - hamiltonian_at(ham, s - h)) / (2 * h)
            assert op_norm(dh_ds(ham, s) - fd) < 1e-6 * op_norm(hamiltonian_at(ham, s))

    def test_domain(self, lz_ham):
        with pytest.raises(DomainError):
            hamiltonian_at(lz_ham, 20.5)
        with pytest.raises(DomainError):
            dh_ds(lz_ham, -0.1)

    def test_validation(self):
        with pytest.raises(ValueError, match="Hermitian"):
            ReferenceHamiltonian((np.array([[0, 1], [0, 0]]),), (C.constant(1),), 1.0)
        with pytest.raises(ValueError, match="schedules"):
            ReferenceHamiltonian((PAULI_X, PAULI_Z), (C.constant(1),), 1.0)
        with pytest.raises(ValueError, match="shapes"):
            ReferenceHamiltonian((PAULI_X, np.eye(3)), (C.constant(1), C.constant(1)), 1.0)
        with pytest.raises(ValueError, match="t_ref"):
            ReferenceHamiltonian((PAULI_X,), (C.constant(1),), 0.0)

    def test_dilated_path(self, lz_ham):
        slow = lz_ham.dilated(80.0)
        for s in (0.0, 7.0, 20.0):
            np.testing.assert_allclose(hamiltonian_at(slow, 4 * s), hamiltonian_at(lz_ham, s), atol=1e-13)


class TestFrame:
    def test_theta_zero(self):
        fr = frame_at(two_level(C.constant(0.0), C.constant(1.0)), 0.0)
        np.testing.assert_allclose(fr.energies, [-1.0, 1.0])
        np.testing.assert_allclose(fr.states, np.eye(2), atol=1e-15)

    def test_theta_quarter_pi(self):
        fr = frame_at(two_level(C.constant(1.0), C.constant(0.0)), 0.0)
        np.testing.assert_allclose(fr.energies, [-1.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(fr.states[:, 0], np.array([1, 1]) / math.sqrt(2), atol=1e-15)

    def test_parallel_transport(self, rng):
        basis = (random_hermitian(rng, 4), random_hermitian(rng, 4))
        ham = ReferenceHamiltonian(basis, (C.constant(1.0), C.linear(0.0, 1.0)), 1.0)
        prev = frame_at(ham, 0.5)
        nxt = frame_at(ham, 0.5 + 1e-4, prev)
        ov = np.diagonal(prev.states.conj().T @ nxt.states)
        assert np.all(np.abs(ov.imag) < 1e-14)
        assert np.all(ov.real > 0.99)

    def test_first_frame_pivot_real_positive(self, rng):
        fr = frame_from_matrix(random_hermitian(rng, 5), 0.0)
        for n in range(5):
            v = fr.states[:, n]
            p = v[np.argmax(np.abs(v))]
            assert p.real > 0 and abs(p.imag) < 1e-15

    def test_invariants(self, rng):
        h = random_hermitian(rng, 6)
        fr = frame_from_matrix(h, 0.0)
        assert op_norm(fr.states.conj().T @ fr.states - np.eye(6)) < 1e-10
        assert op_norm(h @ fr.states - fr.states * fr.energies) < 1e-10 * op_norm(h)
        assert fr.min_gap == pytest.approx(np.min(np.diff(fr.energies)))

    def test_tracks_through_avoided_crossing(self, lz_ham):
        # energies of each tracked level stay continuous along the sweep
        prev = None
        last = None
        for s in np.linspace(0.0, 20.0, 2001):
            prev = frame_at(lz_ham, s, prev)
            if last is not None:
                assert np.max(np.abs(prev.energies - last)) <= op_norm(dh_ds(lz_ham, s)) * 0.01 + 1e-12
            last = prev.energies

    def test_level_crossing_tracked_by_overlap(self):
        # hz = s - 1 with hx = 0 crosses exactly; tracking must follow the
        # state, not the energy ordering
        ham = two_level(C.constant(0.0), C.linear(-1.0, 1.0), 2.0)
        a = frame_at(ham, 0.9)
        b = frame_at(ham, 1.1, a)
        np.testing.assert_allclose(np.abs(np.diagonal(a.states.conj().T @ b.states)), 1.0)
        assert b.energies[0] > b.energies[1]

    def test_degenerate(self):
        ham = two_level(C.constant(0.0), C.linear(-1.0, 1.0), 2.0)
        with pytest.raises(DegenerateSpectrum) as info:
            frame_at(ham, 1.0)
        assert info.value.s == 1.0

    def test_ambiguous_tracking(self):
        a = frame_from_matrix(np.diag([0.0, 1.0, 2.0]).astype(complex), 0.0)
        # the discrete Fourier basis overlaps every old state by 1/sqrt(3)
        f = np.exp(2j * np.pi * np.outer(range(3), range(3)) / 3) / math.sqrt(3)
        h = f @ np.diag([0.0, 1.0, 2.0]) @ f.conj().T
        with pytest.raises(AmbiguousTracking) as info:
            frame_from_matrix(h, 0.1, a)
        assert info.value.overlap == pytest.approx(1 / math.sqrt(3))

    def test_regauged(self, rng):
        fr = frame_from_matrix(random_hermitian(rng, 3), 0.0)
        g = fr.regauged(rng.uniform(0, 2 * np.pi, 3))
        np.testing.assert_allclose(np.abs(g.states), np.abs(fr.states))
        assert op_norm(g.from_frame(np.diag(g.energies)) - fr.hamiltonian) < 1e-12


class TestCounterdiabatic:
    def test_static(self, rng):
        fr = frame_from_matrix(random_hermitian(rng, 4), 0.0)
        assert op_norm(cd_term(fr, np.zeros((4, 4)))) == 0.0

    def test_lz_at_origin(self):
        # hx = 1, hz = s: d theta/ds = -1/(2(1+s^2)) = -1/2 at s = 0
        ham = two_level(C.constant(1.0), C.linear(0.0, 1.0), 1.0)
        fr = frame_at(ham, 0.0)
        np.testing.assert_allclose(cd_term(fr, dh_ds(ham, 0.0)), -0.5 * PAULI_Y, atol=1e-14)

    def test_zero_frame_diagonal(self, rng):
        basis = (random_hermitian(rng, 5), random_hermitian(rng, 5))
        ham = ReferenceHamiltonian(basis, (C.constant(1.0), C.linear(0.0, 1.0)), 1.0)
        fr = frame_at(ham, 0.4)
        el = cd_frame_elements(fr, dh_ds(ham, 0.4))
        assert np.all(np.diagonal(el) == 0)
        cd = cd_term(fr, dh_ds(ham, 0.4))
        assert abs(np.trace(cd)) < 1e-12
        assert np.max(np.abs(cd - cd.conj().T)) < 1e-12

    def test_matches_two_level_family(self):
        params = TwoLevelParams(C("tanh_ramp", [0.3, 1.0, 2.0, 0.8]), C("polynomial", [-2.0, 0.5, 0.1]))
        ham = params.reference(5.0)
        prev = None
        for s in np.linspace(0.0, 5.0, 101):
            prev = frame_at(ham, s, prev)
            cd = cd_term(prev, dh_ds(ham, s))
            assert op_norm(cd - analytic_cd(params.dtheta_ds(s))) < 1e-9

    def test_gauge_covariance(self, rng):
        basis = (random_hermitian(rng, 3), random_hermitian(rng, 3))
        ham = ReferenceHamiltonian(basis, (C.constant(1.0), C.linear(0.0, 1.0)), 1.0)
        fr = frame_at(ham, 0.2)
        phases = rng.uniform(0, 2 * np.pi, 3)
        g = fr.regauged(phases)
        dh = dh_ds(ham, 0.2)
        # in the computational basis the CD operator does not depend on the gauge
        assert op_norm(cd_term(g, dh) - cd_term(fr, dh)) < 1e-12
        el, el_g = cd_frame_elements(fr, dh), cd_frame_elements(g, dh)
        d = np.exp(1j * phases)
        np.testing.assert_allclose(el_g, d.conj()[:, None] * el * d[None, :], atol=1e-13)


def test_generic_matches_analytic_eigensystem(lz):
    from ffscale.twolevel import analytic_eigensystem

    ham = lz.reference(20.0)
    for s in (0.0, 9.5, 10.0, 14.0):
        fr = frame_at(ham, s)
        hx, hz = lz.fields(s)
        em, ep, vm, vp = analytic_eigensystem(hx, hz)
        np.testing.assert_allclose(fr.energies, [em, ep], atol=1e-12)
        aligned = gauge_align(np.column_stack([vm, vp]), fr.states)
        np.testing.assert_allclose(aligned, np.column_stack([vm, vp]), atol=1e-12)
