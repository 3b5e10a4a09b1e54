import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddlescar import potentials as P
from saddlescar.errors import (
    DomainError,
    NotASaddleError,
    NumericError,
    ParameterError,
    SingularityError,
)

coord = st.floats(-2.0, 2.0, allow_nan=False)


def test_cosine_value_and_hessian():
    pot = P.CosinePotential(50.0)
    v, g, H = P.evaluate_with_derivatives(pot, [0.0])
    assert v == pytest.approx(100.0)
    assert abs(g[0]) < 1e-12
    assert H[0, 0] == pytest.approx(-100.0)
    fd = P.CosinePotential(50.0, derivative_mode="finite-difference", fd_step=1e-4)
    assert fd.hessian([0.0])[0, 0] == pytest.approx(-100.0, rel=1e-6)


def test_quadratic_saddle_gradient_zero_at_origin():
    pot = P.QuadraticSaddle((1.0, -2.0))
    np.testing.assert_array_equal(pot.gradient([0.0, 0.0]), [0.0, 0.0])


@settings(max_examples=30, deadline=None)
@given(coord, coord, st.floats(0.0, np.pi))
def test_fd_matches_analytic_quadratic(x1, x2, angle):
    a = P.QuadraticSaddle.rotated_2d((1.0, -2.0), angle, quartic=(0.1, 0.3))
    f = P.QuadraticSaddle.rotated_2d((1.0, -2.0), angle, quartic=(0.1, 0.3), derivative_mode="finite-difference")
    x = np.array([x1, x2])
    np.testing.assert_allclose(f.gradient(x), a.gradient(x), atol=1e-7)
    np.testing.assert_allclose(f.hessian(x), a.hessian(x), atol=1e-4)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=6, max_size=6))
def test_fd_matches_analytic_coulomb(x):
    a = P.CoulombRegularized(0.3)
    f = P.CoulombRegularized(0.3, derivative_mode="finite-difference")
    np.testing.assert_allclose(f.gradient(x), a.gradient(x), rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(f.hessian(x), a.hessian(x), rtol=1e-4, atol=1e-3)


def test_fd_error_is_second_order():
    pot = P.CosinePotential(1.0)
    errs = []
    for h in (1e-2, 5e-3):
        fd = P.CosinePotential(1.0, derivative_mode="finite-difference", fd_step=h)
        errs.append(abs(fd.gradient([0.7])[0] - pot.gradient([0.7])[0]))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_vectorized_values_match_pointwise():
    pot = P.QuadraticSaddle.rotated_2d((1.0, -0.5), 0.3, quartic=(0.0, 0.1))
    pts = np.random.default_rng(0).normal(size=(4, 5, 2))
    ref = np.array([[pot.value(p) for p in row] for row in pts])
    np.testing.assert_allclose(pot.values(pts), ref, rtol=1e-13)
    H = pot.hessians(pts.reshape(-1, 2))
    np.testing.assert_allclose(H[7], pot.hessian(pts.reshape(-1, 2)[7]), rtol=1e-12)


def test_domain_and_non_finite_errors():
    pot = P.QuadraticSaddle((1.0, -1.0), domain=([-1, -1], [1, 1]))
    with pytest.raises(DomainError):
        pot.value([2.0, 0.0])

    class Bad(P.PotentialField):
        def _value(self, x):
            return np.inf

    with pytest.raises(NumericError):
        Bad(1).value([0.0])
    with pytest.raises(ParameterError):
        pot.value([0.0, 0.0, 0.0])


def test_coulomb_closed_values():
    eps = 0.1
    assert P.coulomb_regularized(np.zeros(3), np.zeros(3), eps) == pytest.approx(-1 / eps)
    v = P.coulomb_regularized([eps, 0, 0], np.zeros(3), eps)
    assert v == pytest.approx(1 / (eps * np.sqrt(2)) - 2 / (eps * np.sqrt(5 / 4)), rel=1e-13)
    with pytest.raises(ParameterError):
        P.coulomb_regularized(np.zeros(3), np.zeros(3), 0.0)
    with pytest.raises(ParameterError):
        P.CoulombRegularized(-1.0)


def test_coulomb_hessian_blocks():
    eps = 0.1
    H = P.CoulombRegularized(eps, derivative_mode="finite-difference").hessian(np.zeros(6))
    w = np.linalg.eigvalsh(H)
    np.testing.assert_allclose(w[:3], -1 / (2 * eps**3), rtol=1e-6)
    np.testing.assert_allclose(w[3:], 2 / eps**3, rtol=1e-6)


def test_find_critical_point_cases():
    cp = P.find_critical_point(P.CosinePotential(50.0), [0.3])
    assert abs(cp.location[0]) < 1e-10 and cp.index == 1
    cp = P.find_critical_point(P.QuadraticSaddle((1.0, -2.0)), [3.0, -7.0])
    assert cp.iterations == 1 and np.allclose(cp.location, 0, atol=1e-12)
    cp = P.find_critical_point(P.CoulombRegularized(0.1), np.full(6, 1e-3))
    assert np.allclose(cp.location, 0, atol=1e-10) and cp.index == 3
    assert cp.gradient_norm <= 1e-10


def test_critical_point_eigen_round_trip():
    for pot, x0 in [
        (P.QuadraticSaddle.rotated_2d((1.0, -2.0), 0.4), [0.1, 0.1]),
        (P.CoulombRegularized(0.1), np.zeros(6)),
        (P.CosinePotential(50.0), [0.1]),
    ]:
        cp = P.find_critical_point(pot, x0)
        Q = cp.eigenvectors
        np.testing.assert_allclose(Q.T @ Q, np.eye(len(Q)), atol=1e-10)
        rec = Q @ np.diag(cp.eigenvalues) @ Q.T
        assert np.linalg.norm(rec - cp.hessian) <= 1e-10 * np.linalg.norm(cp.hessian)
        assert np.all(np.diff(cp.eigenvalues) >= 0)


def test_singular_hessian_raises():
    pot = P.QuadraticSaddle((1.0, 0.0))
    with pytest.raises(SingularityError):
        P.find_critical_point(pot, [0.5, 0.5])


def test_saddle_frame_sigmas_and_errors():
    cp = P.find_critical_point(P.QuadraticSaddle((1.0, -2.0)), [0.0, 0.0])
    f = P.saddle_frame(cp, [1.0, 1.0])
    np.testing.assert_allclose(f.sigmas, [1.0, -2.0])
    with pytest.raises(NotASaddleError):
        P.saddle_frame(P.find_critical_point(P.QuadraticSaddle((1.0, 2.0)), [0.1, 0.1]))
    cos = P.find_critical_point(P.CosinePotential(50.0), [0.3])
    with pytest.raises(NotASaddleError):
        P.saddle_frame(cos, [0.5])
    f1 = P.saddle_frame(cos, [0.5], allow_transverse_only=True)
    assert f1.sigmas[0] == pytest.approx(-50.0)
    assert f1.default_stable_axis() is None


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2 * np.pi))
def test_rotated_saddle_frame_invariance(angle):
    pot = P.QuadraticSaddle.rotated_2d((0.7, -1.3), angle)
    cp = P.find_critical_point(pot, [0.1, -0.2])
    f = P.saddle_frame(cp)
    np.testing.assert_allclose(np.sort(f.sigmas), [-1.3, 0.7], atol=1e-12)
    np.testing.assert_allclose(f.axes.T @ f.axes, np.eye(2), atol=1e-12)
    # brute-force eigen-decomposition of the rotated Hessian
    w = np.linalg.eigvalsh(pot.hessian([0.0, 0.0])) / 2
    np.testing.assert_allclose(np.sort(f.sigmas), w, atol=1e-12)


def test_frame_quadratic_model_residual_is_cubic(mathieu_frame):
    # fit exponent of |V - model| along each axis of anharmonic saddles
    pot, frame = mathieu_frame
    cp = P.find_critical_point(P.CoulombRegularized(0.1), np.zeros(6))
    cf = P.saddle_frame(cp, potential=P.CoulombRegularized(0.1))
    for f in (frame, cf):
        U = f.frame_potential()
        for i in range(f.dimension):
            ys = np.array([1e-3, 2e-3, 4e-3]) * (0.1 if f is cf else 1.0)
            res = []
            for y in ys:
                v = np.zeros(f.dimension)
                v[i] = y
                res.append(abs(U.value(v) - f.quadratic_model(v)))
            slope = np.polyfit(np.log(ys), np.log(res), 1)[0]
            assert slope >= 2.9


def test_frame_round_trip(confined_saddle):
    _, f = confined_saddle
    x = np.array([[0.3, -0.2], [1.0, 2.0]])
    np.testing.assert_allclose(f.from_frame(f.to_frame(x)), x, atol=1e-14)
    assert f.frequency(0) == pytest.approx(np.sqrt(2))
    assert f.unstable_rate(1) == pytest.approx(2.0)


def test_make_potential_identifiers():
    assert P.make_potential("cosine", g=2.0).value([0.0]) == pytest.approx(4.0)
    assert P.make_potential("coulomb-regularized", eps=0.5).dimension == 6
    rot = P.make_potential("quadratic-saddle", sigmas=[1.0, -1.0], rotation=np.pi / 4)
    assert abs(rot.value([1.0, 1.0])) == pytest.approx(2.0)
    assert rot.value([1.0, 1.0]) == pytest.approx(-rot.value([1.0, -1.0]))
    with pytest.raises(ParameterError):
        P.make_potential("morse")


def test_sampled_grid_potential():
    x = np.linspace(-2, 2, 81)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    pot = P.SampledGridPotential([x, x], X1**2 - 2 * X2**2)
    assert pot.value([0.5, 0.25]) == pytest.approx(0.25 - 0.125, abs=1e-5)
    cp = P.find_critical_point(pot, [0.1, 0.1])
    np.testing.assert_allclose(np.sort(cp.eigenvalues), [-4.0, 2.0], rtol=1e-4)
    with pytest.raises(DomainError):
        pot.value([3.0, 0.0])
