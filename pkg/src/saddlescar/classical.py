"""Classical orbits, their linearized flow, and saddle monodromy coefficients.

Orbits are integrated with fixed-step symmetric compositions of kick-drift-kick
(second order by default, a fourth-order Yoshida composition on request). The
transverse monodromy over one period of a stable-manifold orbit is obtained by
integrating the variational equations with the same schedule, and reduced to
the amplitude ``D`` and the transverse phase curvature ``W``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import newton

from . import kernels
from .errors import NotASaddleError, NumericError, OrbitError, ParameterError, SingularityError
from .potentials import QuadraticSaddle, SaddleFrame

__all__ = [
    "TrajectoryState",
    "Trajectory",
    "MonodromyMatrix",
    "TransverseCoefficients",
    "SaddleOrbitSpec",
    "integrate_orbit",
    "integrate_monodromy",
    "closed_form_monodromy",
    "coefficients_from_monodromy",
    "analytic_saddle_coefficients",
    "multi_pass_coefficients",
    "limiting_W",
    "action_of_orbit",
    "divergence_rate",
]

_CBRT2 = 2.0 ** (1.0 / 3.0)
_Y1 = 1.0 / (2.0 - _CBRT2)
_Y0 = -_CBRT2 / (2.0 - _CBRT2)

# per step: kick weights (m+1) and drift weights following each kick (last is 0)
_SCHEMES = {
    2: (np.array([0.5, 0.5]), np.array([1.0, 0.0])),
    4: (
        np.array([_Y1 / 2, (_Y1 + _Y0) / 2, (_Y0 + _Y1) / 2, _Y1 / 2]),
        np.array([_Y1, _Y0, _Y1, 0.0]),
    ),
}


def _scheme(order):
    try:
        return _SCHEMES[order]
    except KeyError:
        raise ParameterError(f"integrator order must be one of {sorted(_SCHEMES)}") from None


def _merged_schedule(order, n):
    """Kick/drift weights over the n*m+1 distinct kick positions of n steps."""
    kw, dw = _scheme(order)
    m = kw.size - 1
    kicks = np.tile(kw[:-1], n)
    kicks[m::m] += kw[-1]
    kicks = np.append(kicks, kw[-1])
    drifts = np.append(np.tile(dw[:-1], n), 0.0)
    return kicks, drifts


def _steps(T, dt):
    if not dt > 0 or not T >= dt * (1 - 1e-12):
        raise ParameterError("need dt > 0 and T >= dt")
    n = max(1, int(round(T / dt)))
    return n, T / n


@dataclass(frozen=True)
class TrajectoryState:
    q: np.ndarray
    p: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    energy_drift: float
    accurate: bool

    def __len__(self):
        return self.t.size

    def states(self):
        return [TrajectoryState(q, p, t) for q, p, t in zip(self.q, self.p, self.t)]

    @property
    def final(self):
        return TrajectoryState(self.q[-1], self.p[-1], float(self.t[-1]))


def _kdk(potential, q0, p0, inv_m, dt, n, order, record_kicks=False):
    """Fixed-step composition; returns step states and (optionally) kick positions."""
    lf = potential.linear_force()
    kw, dw = _scheme(order)
    if lf is not None:
        H, c = lf
        Q, P = kernels.kdk_linear(
            np.ascontiguousarray(H), q0 - c, p0.copy(), kw, dw, inv_m, dt, n
        )
        Q = Q + c
        kicks = None
        if record_kicks:
            # positions are only needed for Hessians, which are constant here
            kicks = np.broadcast_to(Q[0], (n * (kw.size - 1) + 1, Q.shape[1]))
        return Q, P, kicks

    q = q0.copy()
    p = p0.copy()
    d = q.size
    Q = np.empty((n + 1, d))
    P = np.empty((n + 1, d))
    Q[0], P[0] = q, p
    kicks = [q.copy()] if record_kicks else None
    f = -potential.gradient(q)
    for s in range(n):
        for a, b in zip(kw, dw):
            p = p + (a * dt) * f
            if b:
                q = q + (b * dt) * inv_m * p
                f = -potential.gradient(q)
                if record_kicks:
                    kicks.append(q)
        Q[s + 1], P[s + 1] = q, p
    if record_kicks:
        kicks = np.array(kicks)
    return Q, P, kicks


def _energy(potential, q, p, inv_m):
    return 0.5 * np.sum(inv_m * p * p, axis=-1) + potential.values(q)


def integrate_orbit(potential, s0, masses, T, dt, order=2, energy_tol=1e-6):
    """Integrate Hamilton's equations for ``H = sum p_i^2 / 2 m_i + V(q)``.

    Parameters
    ----------
    potential : PotentialField
    s0 : TrajectoryState
        Initial state.
    masses : array_like
        Per-coordinate masses.
    T, dt : float
        Total time and nominal step; the step is adjusted to ``T / round(T/dt)``.
    order : {2, 4}
        Order of the symmetric composition.
    energy_tol : float
        Relative energy drift above which the result is flagged inaccurate.

    Returns
    -------
    Trajectory
        States at every step. ``accurate`` is False when the maximum relative
        energy drift exceeds ``energy_tol``.
    """
    q0 = np.asarray(s0.q, dtype=float).reshape(potential.dimension)
    p0 = np.asarray(s0.p, dtype=float).reshape(potential.dimension)
    inv_m = 1.0 / np.broadcast_to(np.asarray(masses, dtype=float), q0.shape)
    n, h = _steps(T, dt)
    Q, P, _ = _kdk(potential, q0, p0, inv_m, h, n, order)
    if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(P))):
        raise NumericError("orbit integration produced non-finite values")
    E = _energy(potential, Q, P, inv_m)
    drift = float(np.max(np.abs(E - E[0])) / max(1.0, abs(E[0])))
    return Trajectory(
        t=s0.t + h * np.arange(n + 1),
        q=Q,
        p=P,
        energy=E,
        energy_drift=drift,
        accurate=drift <= energy_tol,
    )


@dataclass(frozen=True)
class MonodromyMatrix:
    """Linearized transverse return map ``(x_perp, p_perp)(0) -> (x_perp, p_perp)(period)``."""

    m11: np.ndarray
    m12: np.ndarray
    m21: np.ndarray
    m22: np.ndarray
    period: float

    @classmethod
    def from_matrix(cls, M, period):
        M = np.asarray(M, dtype=float)
        k = M.shape[0] // 2
        return cls(M[:k, :k].copy(), M[:k, k:].copy(), M[k:, :k].copy(), M[k:, k:].copy(), float(period))

    @property
    def matrix(self):
        return np.block([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def size(self):
        return self.m11.shape[0]

    def symplectic_error(self):
        M = self.matrix
        k = self.size
        J = np.block([[np.zeros((k, k)), np.eye(k)], [-np.eye(k), np.zeros((k, k))]])
        return float(np.max(np.abs(M.T @ J @ M - J)))

    def determinant(self):
        return float(np.linalg.det(self.matrix))

    def power(self, n):
        return MonodromyMatrix.from_matrix(np.linalg.matrix_power(self.matrix, n), n * self.period)


@dataclass(frozen=True)
class TransverseCoefficients:
    D: float
    W: float | np.ndarray
    theta: float
    lyapunov: float
    period: float


@dataclass(frozen=True)
class SaddleOrbitSpec:
    """Harmonic orbit along a stable axis of a saddle frame, started at a turning point."""

    frame: SaddleFrame
    stable_axis: int
    amplitude: float = 1.0

    def __post_init__(self):
        if self.frame.sigmas[self.stable_axis] <= 0:
            raise NotASaddleError(f"axis {self.stable_axis} is not a stable axis")
        if not self.amplitude > 0:
            raise ParameterError("amplitude must be positive")

    @property
    def omega(self):
        return self.frame.frequency(self.stable_axis)

    @property
    def period(self):
        """``2 pi sqrt(m1 / (2 sigma1))``; independent of the amplitude."""
        return 2 * np.pi / self.omega

    @property
    def transverse_axes(self):
        return [i for i in range(self.frame.dimension) if i != self.stable_axis]

    def initial_state(self):
        y = np.zeros(self.frame.dimension)
        y[self.stable_axis] = self.amplitude
        return TrajectoryState(y, np.zeros_like(y))


def _frame_potential(frame):
    if frame.potential is not None:
        return frame.frame_potential()
    return QuadraticSaddle(frame.sigmas, offset=frame.value)


def _shoot_period(U, orbit, inv_m, n, order, closure_tol):
    """Period for which the discrete orbit returns to its turning point."""
    s0 = orbit.initial_state()
    q0, p0 = s0.q, s0.p
    s = orbit.stable_axis

    def p_end(T):
        _, P, _ = _kdk(U, q0, p0, inv_m, T / n, n, order)
        return P[-1, s]

    T = float(newton(p_end, orbit.period, x1=orbit.period * (1 + 1e-4), tol=1e-13, maxiter=50))
    Q, P, _ = _kdk(U, q0, p0, inv_m, T / n, n, order)
    closure = float(np.max(np.abs(np.concatenate([Q[-1] - q0, P[-1] - p0]))))
    if closure > closure_tol * max(1.0, orbit.amplitude):
        raise OrbitError(f"orbit does not close: phase-space mismatch {closure:.3e} after T={T:.12g}")
    return T


def integrate_monodromy(orbit, dt=None, order=2, closure_tol=1e-8, axis_tol=1e-8):
    """Transverse monodromy matrix of a stable-manifold orbit.

    The orbit is integrated in frame coordinates; its period is fixed by
    shooting so that the discrete orbit closes, then the variational
    equations ``d x_perp/dt = p_perp / m_perp``, ``d p_perp/dt = -V''_perp x_perp``
    are integrated from the identity over that period with the same schedule.

    Parameters
    ----------
    orbit : SaddleOrbitSpec
    dt : float, optional
        Nominal step; defaults to ``period / 1e4``.
    order : {2, 4}
    closure_tol : float
        Phase-space closure tolerance (relative to ``max(1, amplitude)``).
    axis_tol : float
        Allowed transverse force along the stable axis, relative to the
        longitudinal force scale; the orbit must stay on its axis.
    """
    frame = orbit.frame
    U = _frame_potential(frame)
    inv_m = 1.0 / frame.masses
    s = orbit.stable_axis
    perp = orbit.transverse_axes
    if not perp:
        raise ParameterError("monodromy needs at least one transverse direction")

    # the stable axis has to be invariant
    scale = 2 * frame.sigmas[s] * orbit.amplitude
    for a in np.linspace(-1, 1, 5) * orbit.amplitude:
        y = np.zeros(frame.dimension)
        y[s] = a
        g = U.gradient(y)
        if np.max(np.abs(g[perp])) > axis_tol * max(abs(scale), 1.0):
            raise OrbitError(f"transverse force {np.max(np.abs(g[perp])):.3e} along the stable axis")

    dt = orbit.period / 1e4 if dt is None else dt
    n = max(1, int(round(orbit.period / dt)))
    T = _shoot_period(U, orbit, inv_m, n, order, closure_tol)
    h = T / n
    s0 = orbit.initial_state()
    _, _, kicks = _kdk(U, s0.q, s0.p, inv_m, h, n, order, record_kicks=True)
    kw, dw = _merged_schedule(order, n)

    lf = U.linear_force()
    if lf is not None:
        Hp = lf[0][np.ix_(perp, perp)]
        hess = np.ascontiguousarray(np.broadcast_to(Hp, (kw.size,) + Hp.shape))
    else:
        hess = np.ascontiguousarray(U.hessians(kicks)[:, perp][:, :, perp])
    phi = kernels.tangent_flow(hess, kw, dw, np.ascontiguousarray(inv_m[perp]), h)
    if not np.all(np.isfinite(phi)):
        raise NumericError("non-finite monodromy")
    return MonodromyMatrix.from_matrix(phi, T)


def closed_form_monodromy(frame, stable_axis=None, unstable_axis=None, n=1):
    """Exact transverse monodromy of a pure quadratic saddle over ``n`` periods."""
    s = frame.default_stable_axis() if stable_axis is None else stable_axis
    u = frame.default_unstable_axis() if unstable_axis is None else unstable_axis
    if s is None or frame.sigmas[s] <= 0 or frame.sigmas[u] >= 0:
        raise NotASaddleError("need one stable and one unstable axis")
    tau = 2 * np.pi / frame.frequency(s)
    a = np.sqrt(2 * frame.masses[u] * abs(frame.sigmas[u]))
    nt = n * frame.unstable_rate(u) * tau
    c, sh = np.cosh(nt), np.sinh(nt)
    return MonodromyMatrix(
        np.array([[c]]), np.array([[sh / a]]), np.array([[a * sh]]), np.array([[c]]), n * tau
    )


def coefficients_from_monodromy(M, asym_tol=1e-8, cond_tol=1e12):
    """Amplitude ``D`` and transverse curvature ``W`` from a monodromy matrix.

    ``D = |det m12^-1|`` and
    ``W = m12^-1 m11 + (m22 - 1) m12^-1 - (m12^T)^-1``.
    ``W`` is symmetric for a Hamiltonian flow; an asymmetry above ``asym_tol``
    (relative) raises, otherwise it is symmetrized. ``theta`` is the log of the
    largest Floquet multiplier modulus.
    """
    m12 = M.m12
    if np.linalg.cond(m12) > cond_tol:
        raise SingularityError("m12 is singular: no transverse focusing data (conjugate point)")
    inv = np.linalg.inv(m12)
    k = M.size
    W = inv @ M.m11 + (M.m22 - np.eye(k)) @ inv - inv.T
    asym = np.max(np.abs(W - W.T))
    if asym > asym_tol * max(1.0, np.max(np.abs(W))):
        raise NumericError(f"W asymmetric by {asym:.3e}")
    W = 0.5 * (W + W.T)
    D = abs(1.0 / np.linalg.det(m12))
    theta = float(np.log(np.max(np.abs(np.linalg.eigvals(M.matrix)))))
    W_out = float(W[0, 0]) if k == 1 else W
    return TransverseCoefficients(D=D, W=W_out, theta=theta, lyapunov=theta / M.period, period=M.period)


def _axes(frame, stable_axis, unstable_axis):
    s = frame.default_stable_axis() if stable_axis is None else stable_axis
    u = (frame.default_unstable_axis() if frame.unstable_axes else None) if unstable_axis is None else unstable_axis
    if s is None or u is None or frame.sigmas[s] <= 0 or frame.sigmas[u] >= 0:
        raise NotASaddleError("need sigma(stable) > 0 and sigma(unstable) < 0")
    return s, u


def analytic_saddle_coefficients(frame, stable_axis=None, unstable_axis=None):
    """Closed-form ``D``, ``W``, ``theta`` for a two-axis quadratic saddle.

    ``theta = 2 pi sqrt(m1 |s2| / (m2 s1))``, ``D = sqrt(2 m2 |s2|) / sinh(theta)``,
    ``W = sqrt(2 m2 |s2|) (2 cosh(theta) - 2) / sinh(theta)``.
    """
    s, u = _axes(frame, stable_axis, unstable_axis)
    m1, m2 = frame.masses[s], frame.masses[u]
    s1, s2 = frame.sigmas[s], abs(frame.sigmas[u])
    theta = 2 * np.pi * np.sqrt(m1 * s2 / (m2 * s1))
    a = np.sqrt(2 * m2 * s2)
    tau = 2 * np.pi * np.sqrt(m1 / (2 * s1))
    # (2 cosh - 2) / sinh == 2 tanh(theta / 2), stable for large theta
    return TransverseCoefficients(
        D=float(a / np.sinh(theta)),
        W=float(2 * a * np.tanh(theta / 2)),
        theta=float(theta),
        lyapunov=float(theta / tau),
        period=float(tau),
    )


def limiting_W(frame, unstable_axis=None):
    """``W0 = 2 sqrt(2 m2 |sigma2|)``: the curvature of the fixed-point orbit."""
    u = frame.default_unstable_axis() if unstable_axis is None else unstable_axis
    if frame.sigmas[u] >= 0:
        raise NotASaddleError(f"axis {u} is not unstable")
    return float(2 * np.sqrt(2 * frame.masses[u] * abs(frame.sigmas[u])))


def multi_pass_coefficients(coeffs, frame, n, stable_axis=None, unstable_axis=None):
    """``(D_n, W_n)`` for the n-fold repetition of the primitive orbit.

    Obtained by raising the primitive monodromy to the n-th power and applying
    the same reduction as :func:`coefficients_from_monodromy`; for ``n theta``
    beyond the float range the limit form ``2 a tanh(n theta / 2)`` is used.
    """
    if int(n) != n or n < 1:
        raise ParameterError("n must be a positive integer")
    n = int(n)
    s, u = _axes(frame, stable_axis, unstable_axis)
    a = np.sqrt(2 * frame.masses[u] * abs(frame.sigmas[u]))
    if n * coeffs.theta < 300:
        c, sh = np.cosh(coeffs.theta), np.sinh(coeffs.theta)
        M1 = np.array([[c, sh / a], [a * sh, c]])
        M = MonodromyMatrix.from_matrix(np.linalg.matrix_power(M1, n), n * coeffs.period)
        m11, m12, m22 = M.m11[0, 0], M.m12[0, 0], M.m22[0, 0]
        return float(1 / abs(m12)), float((m11 + m22 - 2) / m12)
    return float(a / np.sinh(min(n * coeffs.theta, 700.0))), float(2 * a * np.tanh(n * coeffs.theta / 2))


def action_of_orbit(orbit, E):
    """Primitive action ``S = loop integral p dq = 2 pi (E - V_saddle) / omega1``."""
    dE = E - orbit.frame.value
    if dE < 0:
        raise ParameterError("energy below the saddle value")
    return float(2 * np.pi * dE / orbit.omega)


def divergence_rate(potential, s0, masses, direction, delta=1e-8, T=10.0, dt=1e-3, fit_from=None):
    """Two-trajectory estimate of the local Lyapunov rate.

    Integrates ``s0`` and ``s0`` displaced by ``delta * direction`` and fits the
    slope of ``log |separation|`` over ``[fit_from, T]`` (default ``T/2``).
    """
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    a = integrate_orbit(potential, s0, masses, T, dt)
    b = integrate_orbit(potential, TrajectoryState(np.asarray(s0.q) + delta * direction, s0.p, s0.t), masses, T, dt)
    sep = np.linalg.norm(np.hstack([b.q - a.q, b.p - a.p]), axis=1)
    t0 = T / 2 if fit_from is None else fit_from
    sel = a.t >= t0
    slope = np.polyfit(a.t[sel], np.log(sep[sel]), 1)[0]
    return float(slope)
