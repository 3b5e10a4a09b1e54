import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddlescar import classical as C
from saddlescar import potentials as P
from saddlescar.errors import NotASaddleError, OrbitError, ParameterError, SingularityError


def _frame(s1, s2, m=(1.0, 1.0), pot=None):
    pot = P.QuadraticSaddle((s1, s2)) if pot is None else pot
    cp = P.find_critical_point(pot, [0.0, 0.0])
    return P.saddle_frame(cp, list(m), 1.0, potential=pot)


def test_harmonic_orbit_returns():
    pot = P.QuadraticSaddle((1.0,))
    T = 2 * np.pi / np.sqrt(2)
    tr = C.integrate_orbit(pot, C.TrajectoryState([1.0], [0.0]), [1.0], T, 1e-4)
    assert abs(tr.final.q[0] - 1.0) < 1e-6 and abs(tr.final.p[0]) < 1e-6
    assert tr.accurate and tr.energy_drift < 1e-8


def test_fixed_point_stays():
    pot = P.QuadraticSaddle((1.0, -1.0))
    tr = C.integrate_orbit(pot, C.TrajectoryState([0.0, 0.0], [0.0, 0.0]), [1.0, 1.0], 5.0, 1e-2)
    assert np.all(tr.q == 0) and np.all(tr.p == 0)


def test_inverted_oscillator_growth():
    pot = P.QuadraticSaddle((-1.0,))
    d = 1e-6
    tr = C.integrate_orbit(pot, C.TrajectoryState([d], [0.0]), [1.0], 2.0, 1e-4)
    assert tr.final.q[0] == pytest.approx(d * np.cosh(np.sqrt(2) * 2.0), rel=1e-4)


def test_orbit_uses_general_force_path():
    # quartic term disables the linear kernel; compare orders 2 and 4
    pot = P.QuadraticSaddle((1.0, -1.0), quartic=(0.1, 0.0))
    s0 = C.TrajectoryState([1.0, 0.0], [0.0, 0.0])
    a = C.integrate_orbit(pot, s0, [1.0, 1.0], 3.0, 1e-3, order=2)
    b = C.integrate_orbit(pot, s0, [1.0, 1.0], 3.0, 1e-3, order=4)
    assert np.max(np.abs(a.q - b.q)) < 1e-5
    assert b.energy_drift < a.energy_drift


def test_closed_form_unit_saddle(unit_saddle_frame):
    M = C.closed_form_monodromy(unit_saddle_frame)
    c, s = np.cosh(2 * np.pi), np.sinh(2 * np.pi)
    np.testing.assert_allclose(M.matrix, [[c, s / np.sqrt(2)], [np.sqrt(2) * s, c]], rtol=1e-14)


def test_numerical_monodromy_unit_saddle(unit_saddle_frame):
    orbit = C.SaddleOrbitSpec(unit_saddle_frame, 0, 1.0)
    M = C.integrate_monodromy(orbit, dt=1e-4 * orbit.period, order=4)
    ref = C.closed_form_monodromy(unit_saddle_frame).matrix
    assert np.max(np.abs(M.matrix - ref) / np.abs(ref)) < 1e-8
    assert M.symplectic_error() < 1e-8
    assert M.determinant() == pytest.approx(1.0, abs=1e-8)


def test_order2_monodromy_converges(unit_saddle_frame):
    orbit = C.SaddleOrbitSpec(unit_saddle_frame, 0, 1.0)
    ref = C.closed_form_monodromy(unit_saddle_frame).matrix
    errs = [np.max(np.abs(C.integrate_monodromy(orbit, dt=f * orbit.period).matrix - ref) / np.abs(ref))
            for f in (2e-3, 1e-3)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_stable_transverse_direction_identity():
    f = P.SaddleFrame(np.zeros(2), np.eye(2), np.array([1.0, 1.0]), np.ones(2))
    M = C.integrate_monodromy(C.SaddleOrbitSpec(f, 0, 1.0), dt=1e-3 * np.pi)
    np.testing.assert_allclose(M.matrix, np.eye(2), atol=1e-9)


def test_coulomb_frame_monodromy_symplectic():
    pot = P.CoulombRegularized(0.1)
    cp = P.find_critical_point(pot, np.zeros(6))
    f = P.saddle_frame(cp, potential=pot)
    orbit = C.SaddleOrbitSpec(f, f.default_stable_axis(), 1e-3)
    M = C.integrate_monodromy(orbit, dt=orbit.period / 2000, order=4)
    assert M.size == 5
    assert M.symplectic_error() < 1e-8


def test_period_amplitude_independent(unit_saddle_frame):
    Ts = []
    for A in (0.5, 2.0):
        orbit = C.SaddleOrbitSpec(unit_saddle_frame, 0, A)
        Ts.append(C.integrate_monodromy(orbit, dt=orbit.period / 2000, order=4).period)
    assert abs(Ts[0] - Ts[1]) < 1e-10
    assert C.SaddleOrbitSpec(unit_saddle_frame, 0, 0.5).period == C.SaddleOrbitSpec(unit_saddle_frame, 0, 2.0).period


def test_orbit_error_off_axis():
    pot = P.QuadraticSaddle((1.0, -1.0), quartic=(0.0, 0.0))
    f = _frame(1.0, -1.0, pot=pot)
    bent = P.SaddleFrame(f.origin, P.QuadraticSaddle.rotated_2d((1, -1), 0.1).axes, f.sigmas, f.masses,
                         potential=pot)
    with pytest.raises(OrbitError):
        C.integrate_monodromy(C.SaddleOrbitSpec(bent, 0, 1.0), dt=0.01)


def test_analytic_coefficients_unit(unit_saddle_frame):
    c = C.analytic_saddle_coefficients(unit_saddle_frame)
    assert c.theta == pytest.approx(2 * np.pi)
    assert c.D == pytest.approx(5.283e-3, rel=1e-3)
    assert c.W == pytest.approx(2.8179, rel=1e-4)
    assert c.lyapunov * c.period == pytest.approx(c.theta, rel=1e-15)
    M = C.closed_form_monodromy(unit_saddle_frame)
    e = C.coefficients_from_monodromy(M)
    assert e.D == pytest.approx(c.D, rel=1e-12) and e.W == pytest.approx(c.W, rel=1e-12)


def test_wrong_sign_pattern():
    f = P.SaddleFrame(np.zeros(2), np.eye(2), np.array([1.0, 1.0]), np.ones(2))
    with pytest.raises(NotASaddleError):
        C.analytic_saddle_coefficients(f, 0, 1)


def test_singular_m12():
    M = C.MonodromyMatrix.from_matrix(np.eye(2), 1.0)
    with pytest.raises(SingularityError):
        C.coefficients_from_monodromy(M)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0.5, 2.0), st.floats(0.5, 2.0))
def test_closed_form_is_symplectic(s1, s2, m1, m2):
    f = _frame(s1, -s2, (m1, m2))
    M = C.closed_form_monodromy(f)
    c = C.analytic_saddle_coefficients(f)
    # cancellation in M^T J M scales like cosh(theta)**2
    assert M.symplectic_error() <= 1e-14 * np.cosh(c.theta) ** 2
    assert c.D > 0
    a = np.sqrt(2 * m2 * s2)
    assert c.W == pytest.approx(a * (2 * np.cosh(c.theta) - 2) / np.sinh(c.theta), rel=1e-10)


def test_multi_pass(unit_saddle_frame):
    c = C.analytic_saddle_coefficients(unit_saddle_frame)
    D1, W1 = C.multi_pass_coefficients(c, unit_saddle_frame, 1)
    assert D1 == pytest.approx(c.D, rel=1e-12) and W1 == pytest.approx(c.W, rel=1e-12)
    D2, W2 = C.multi_pass_coefficients(c, unit_saddle_frame, 2)
    assert D2 == pytest.approx(np.sqrt(2) / np.sinh(4 * np.pi), rel=1e-8)
    assert W2 == pytest.approx(np.sqrt(2) * (2 * np.cosh(4 * np.pi) - 2) / np.sinh(4 * np.pi), rel=1e-8)
    with pytest.raises(ParameterError):
        C.multi_pass_coefficients(c, unit_saddle_frame, 0)


def test_multi_pass_monotone_to_W0():
    f = _frame(1.0, -0.05)
    c = C.analytic_saddle_coefficients(f)
    W = [C.multi_pass_coefficients(c, f, n)[1] for n in range(1, 11)]
    W0 = C.limiting_W(f)
    assert np.all(np.diff(W) > 0) and np.all(np.array(W) < W0)
    assert np.all(np.diff(np.abs(W0 - np.array(W))) < 0)
    # matrix power fed through the general extraction
    M1 = C.closed_form_monodromy(f)
    for n in (2, 5):
        e = C.coefficients_from_monodromy(M1.power(n))
        assert e.W == pytest.approx(C.multi_pass_coefficients(c, f, n)[1], rel=1e-8)


def test_action(unit_saddle_frame):
    orbit = C.SaddleOrbitSpec(unit_saddle_frame, 0, 1.0)
    assert C.action_of_orbit(orbit, 0.0) == 0.0
    S1 = C.action_of_orbit(orbit, 1.0)
    assert S1 == pytest.approx(2 * np.pi / np.sqrt(2))
    assert C.action_of_orbit(orbit, 2.0) == pytest.approx(2 * S1)
    with pytest.raises(ParameterError):
        C.action_of_orbit(orbit, -1.0)
    # quadrature of p dq along an integrated orbit with E - V = 1: amplitude 1
    tr = C.integrate_orbit(unit_saddle_frame.potential, orbit.initial_state(), [1.0, 1.0], orbit.period, 1e-4)
    loop = np.sum(0.5 * (tr.p[1:, 0] + tr.p[:-1, 0]) * np.diff(tr.q[:, 0]))
    assert abs(loop) == pytest.approx(S1, rel=1e-6)


def test_divergence_rate(unit_saddle_frame):
    c = C.analytic_saddle_coefficients(unit_saddle_frame)
    rate = C.divergence_rate(unit_saddle_frame.potential, C.TrajectoryState([0.0, 0.0], [0.0, 0.0]), [1, 1],
                             [0.0, 1.0], T=8.0, dt=1e-3)
    assert rate == pytest.approx(c.lyapunov, rel=0.01)
