"""Potentials, their derivatives, and saddle-point normal forms.

Three analytic potentials are built in (quadratic saddle with optional quartic
confinement, the periodic cosine, and the softened three-charge Coulomb
potential in Jacobi coordinates) plus a potential sampled on a regular grid.
Every potential exposes value, gradient and Hessian; derivatives are analytic
where available and central differences otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import (
    ConvergenceError,
    DomainError,
    NotASaddleError,
    NumericError,
    ParameterError,
    SingularityError,
)

__all__ = [
    "PotentialField",
    "QuadraticSaddle",
    "CosinePotential",
    "CoulombRegularized",
    "SampledGridPotential",
    "CriticalPoint",
    "SaddleFrame",
    "evaluate_with_derivatives",
    "find_critical_point",
    "saddle_frame",
    "coulomb_regularized",
    "make_potential",
]


class PotentialField:
    """Smooth potential on R^d (or on a declared box).

    Subclasses implement ``_value`` and, when they can, ``_gradient`` and
    ``_hessian``. With ``derivative_mode="finite-difference"`` the analytic
    versions are bypassed.
    """

    name = "potential"
    has_analytic_derivatives = False

    def __init__(self, dimension, domain=None, derivative_mode="analytic", fd_step=None):
        if dimension < 1:
            raise ParameterError("dimension must be positive")
        if derivative_mode not in ("analytic", "finite-difference"):
            raise ParameterError(f"unknown derivative_mode {derivative_mode!r}")
        self.dimension = int(dimension)
        if domain is not None:
            lo, hi = (np.asarray(b, dtype=float).reshape(self.dimension) for b in domain)
            if np.any(hi <= lo):
                raise ParameterError("domain box must have hi > lo")
            domain = (lo, hi)
        self.domain = domain
        if derivative_mode == "analytic" and not self.has_analytic_derivatives:
            derivative_mode = "finite-difference"
        self.derivative_mode = derivative_mode
        self.fd_step = fd_step

    # -- subclass hooks -------------------------------------------------
    def _value(self, x):
        raise NotImplementedError

    def _gradient(self, x):
        raise NotImplementedError

    def _hessian(self, x):
        raise NotImplementedError

    def values(self, points):
        """Vectorized evaluation over an array of shape (..., d)."""
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, self.dimension)
        out = np.array([self._value(p) for p in flat])
        return out.reshape(pts.shape[:-1])

    def params(self):
        return {}

    def linear_force(self):
        """``(H, center)`` when the force is exactly ``-H (x - center)``, else None."""
        return None

    def hessians(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        return np.array([self.hessian(p) for p in pts])

    # -- public ---------------------------------------------------------
    def _check(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dimension:
            raise ParameterError(f"expected a {self.dimension}-vector, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise NumericError("non-finite position")
        if self.domain is not None:
            lo, hi = self.domain
            if np.any(x < lo) or np.any(x > hi):
                raise DomainError(f"{x} outside domain box")
        return x

    def value(self, x):
        x = self._check(x)
        v = float(self._value(x))
        if not np.isfinite(v):
            raise NumericError(f"non-finite potential value at {x}")
        return v

    def step_sizes(self, x):
        if self.fd_step is not None:
            return np.full(self.dimension, float(self.fd_step))
        return 1e-5 * (1.0 + np.abs(x))

    def gradient(self, x):
        x = self._check(x)
        if self.derivative_mode == "analytic":
            g = np.asarray(self._gradient(x), dtype=float).reshape(self.dimension)
        else:
            g = fd_gradient(self._value, x, self.step_sizes(x))
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient at {x}")
        return g

    def hessian(self, x):
        x = self._check(x)
        if self.derivative_mode == "analytic":
            h = np.asarray(self._hessian(x), dtype=float).reshape(self.dimension, self.dimension)
        else:
            h = fd_hessian(self._value, x, self.step_sizes(x))
        if not np.all(np.isfinite(h)):
            raise NumericError(f"non-finite hessian at {x}")
        return 0.5 * (h + h.T)

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"


def fd_gradient(f, x, h):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (f(x + e) - f(x - e)) / (2 * h[i])
    return g


def fd_hessian(f, x, h):
    d = x.size
    H = np.empty((d, d))
    f0 = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


class QuadraticSaddle(PotentialField):
    """``V(x) = offset + sum_i sigma_i y_i**2 + quartic_i y_i**4`` with ``y = A^T (x - center)``.

    ``axes`` holds the principal axes as columns (identity by default). The
    quartic terms give a confined saddle with a discrete spectrum.
    """

    name = "quadratic-saddle"
    has_analytic_derivatives = True

    def __init__(self, sigmas, quartic=None, axes=None, center=None, offset=0.0, **kw):
        sigmas = np.asarray(sigmas, dtype=float).reshape(-1)
        d = sigmas.size
        super().__init__(d, **kw)
        self.sigmas = sigmas
        self.quartic = np.zeros(d) if quartic is None else np.asarray(quartic, dtype=float).reshape(d)
        if np.any(self.quartic < 0):
            raise ParameterError("quartic confinement coefficients must be >= 0")
        self.axes = np.eye(d) if axes is None else np.asarray(axes, dtype=float).reshape(d, d)
        if not np.allclose(self.axes.T @ self.axes, np.eye(d), atol=1e-12):
            raise ParameterError("axes must be orthonormal")
        self.center = np.zeros(d) if center is None else np.asarray(center, dtype=float).reshape(d)
        self.offset = float(offset)

    @classmethod
    def rotated_2d(cls, sigmas, angle, **kw):
        c, s = np.cos(angle), np.sin(angle)
        return cls(sigmas, axes=np.array([[c, -s], [s, c]]), **kw)

    def _frame(self, x):
        return (np.asarray(x) - self.center) @ self.axes

    def _value(self, x):
        y = self._frame(x)
        return self.offset + np.sum(self.sigmas * y**2 + self.quartic * y**4)

    def values(self, points):
        y = self._frame(np.asarray(points, dtype=float))
        return self.offset + np.sum(self.sigmas * y**2 + self.quartic * y**4, axis=-1)

    def _gradient(self, x):
        y = self._frame(x)
        return self.axes @ (2 * self.sigmas * y + 4 * self.quartic * y**3)

    def _hessian(self, x):
        y = self._frame(x)
        return (self.axes * (2 * self.sigmas + 12 * self.quartic * y**2)) @ self.axes.T

    def linear_force(self):
        if np.any(self.quartic != 0):
            return None
        return self._hessian(self.center), self.center.copy()

    def hessians(self, points):
        if self.derivative_mode != "analytic":
            return super().hessians(points)
        y = self._frame(np.asarray(points, dtype=float).reshape(-1, self.dimension))
        diag = 2 * self.sigmas + 12 * self.quartic * y**2
        return np.einsum("ik,nk,jk->nij", self.axes, diag, self.axes)

    def params(self):
        return {
            "sigmas": self.sigmas.tolist(),
            "quartic": self.quartic.tolist(),
            "axes": self.axes.tolist(),
            "center": self.center.tolist(),
            "offset": self.offset,
        }


class CosinePotential(PotentialField):
    """``V(x) = 2 g cos(x)`` on the circle (one dimension)."""

    name = "cosine"
    has_analytic_derivatives = True

    def __init__(self, g, **kw):
        super().__init__(1, **kw)
        self.g = float(g)

    def _value(self, x):
        return 2 * self.g * np.cos(x[0])

    def values(self, points):
        return 2 * self.g * np.cos(np.asarray(points, dtype=float)[..., 0])

    def _gradient(self, x):
        return np.array([-2 * self.g * np.sin(x[0])])

    def _hessian(self, x):
        return np.array([[-2 * self.g * np.cos(x[0])]])

    def fourier_coefficients(self):
        """Nonzero Fourier modes ``{k: V_k}`` with ``V(x) = sum_k V_k e^{ikx}``."""
        return {-1: self.g, 1: self.g}

    def params(self):
        return {"g": self.g}


def _soft_inv(rho, eps):
    return 1.0 / np.sqrt(np.sum(rho * rho, axis=-1) + eps * eps)


def coulomb_regularized(r, eta, eps):
    """Softened Coulomb energy of three charges in Jacobi coordinates.

    ``V = 1/|r|_eps - 1/|r/2 - eta|_eps - 1/|r/2 + eta|_eps`` with
    ``|rho|_eps = sqrt(rho.rho + eps**2)``.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    r = np.asarray(r, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return _soft_inv(r, eps) - _soft_inv(0.5 * r - eta, eps) - _soft_inv(0.5 * r + eta, eps)


class CoulombRegularized(PotentialField):
    """Six-dimensional potential over ``x = (r, eta)``; see :func:`coulomb_regularized`."""

    name = "coulomb-regularized"
    has_analytic_derivatives = True

    # each term: (charge sign, Jacobian d rho / d x)
    _I = np.eye(3)
    _TERMS = (
        (1.0, np.hstack([_I, 0 * _I])),
        (-1.0, np.hstack([0.5 * _I, -_I])),
        (-1.0, np.hstack([0.5 * _I, _I])),
    )

    def __init__(self, eps, **kw):
        if not eps > 0:
            raise ParameterError("eps must be positive")
        super().__init__(6, **kw)
        self.eps = float(eps)

    def _value(self, x):
        return coulomb_regularized(x[:3], x[3:], self.eps)

    def values(self, points):
        pts = np.asarray(points, dtype=float)
        return coulomb_regularized(pts[..., :3], pts[..., 3:], self.eps)

    def _gradient(self, x):
        g = np.zeros(6)
        for q, J in self._TERMS:
            rho = J @ x
            s = np.sqrt(rho @ rho + self.eps**2)
            g += q * (J.T @ (-rho / s**3))
        return g

    def _hessian(self, x):
        H = np.zeros((6, 6))
        for q, J in self._TERMS:
            rho = J @ x
            s = np.sqrt(rho @ rho + self.eps**2)
            h = -np.eye(3) / s**3 + 3 * np.outer(rho, rho) / s**5
            H += q * (J.T @ h @ J)
        return H

    def params(self):
        return {"eps": self.eps}


class SampledGridPotential(PotentialField):
    """Potential given by samples on a regular grid, cubic-interpolated.

    Derivatives are always central differences; the domain is the grid box.
    """

    name = "sampled-grid"

    def __init__(self, axes, samples, method="cubic", **kw):
        axes = [np.asarray(a, dtype=float) for a in axes]
        samples = np.asarray(samples, dtype=float)
        if samples.shape != tuple(a.size for a in axes):
            raise ParameterError("samples shape must match the grid axes")
        if not np.all(np.isfinite(samples)):
            raise NumericError("non-finite potential samples")
        domain = ([a[0] for a in axes], [a[-1] for a in axes])
        super().__init__(len(axes), domain=domain, derivative_mode="finite-difference", **kw)
        self._interp = RegularGridInterpolator(axes, samples, method=method)
        self.grid_axes = axes

    def step_sizes(self, x):
        h = super().step_sizes(x)
        spacing = np.array([a[1] - a[0] for a in self.grid_axes])
        return np.maximum(h, 1e-3 * spacing)

    def _value(self, x):
        # stencils may poke past the box edge by one step
        lo, hi = self.domain
        return float(self._interp(np.clip(x, lo, hi)[None, :])[0])

    def values(self, points):
        pts = np.asarray(points, dtype=float)
        return self._interp(pts.reshape(-1, self.dimension)).reshape(pts.shape[:-1])

    def params(self):
        return {"shape": [a.size for a in self.grid_axes]}


def make_potential(identifier, **params):
    """Build a built-in potential from its config identifier."""
    if identifier == "quadratic-saddle":
        sigmas = params.pop("sigmas")
        angle = params.pop("rotation", None)
        if angle:
            if len(sigmas) != 2:
                raise ParameterError("rotation is only defined for 2D saddles")
            return QuadraticSaddle.rotated_2d(sigmas, angle, **params)
        return QuadraticSaddle(sigmas, **params)
    if identifier == "cosine":
        return CosinePotential(**params)
    if identifier == "coulomb-regularized":
        return CoulombRegularized(**params)
    raise ParameterError(f"unknown potential identifier {identifier!r}")


def evaluate_with_derivatives(potential, x):
    """Return ``(value, gradient, hessian)`` at ``x``."""
    return potential.value(x), potential.gradient(x), potential.hessian(x)


@dataclass(frozen=True)
class CriticalPoint:
    location: np.ndarray
    value: float
    hessian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gradient_norm: float
    iterations: int

    @property
    def index(self):
        return int(np.sum(self.eigenvalues < 0))


def find_critical_point(potential, x0, newton_tol=1e-10, max_iter=100, sing_tol=1e-13):
    """Newton iteration on the gradient, started at ``x0``.

    Returns a :class:`CriticalPoint` with the Hessian eigen-decomposition
    (eigenvalues ascending).
    """
    x = np.asarray(x0, dtype=float).reshape(potential.dimension).copy()
    g = potential.gradient(x)
    it = 0
    while np.linalg.norm(g) > newton_tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"Newton did not converge in {max_iter} iterations (|grad|={np.linalg.norm(g):.3e})"
            )
        H = potential.hessian(x)
        w = np.linalg.eigvalsh(H)
        if np.min(np.abs(w)) <= sing_tol * max(np.max(np.abs(w)), 1e-300):
            raise SingularityError(f"singular Hessian at {x}")
        x = x - np.linalg.solve(H, g)
        g = potential.gradient(x)
        it += 1
    H = potential.hessian(x)
    w, Q = np.linalg.eigh(H)
    if np.min(np.abs(w)) <= sing_tol * max(np.max(np.abs(w)), 1e-300):
        raise SingularityError(f"degenerate critical point at {x}")
    return CriticalPoint(
        location=x,
        value=potential.value(x),
        hessian=H,
        eigenvalues=w,
        eigenvectors=Q,
        gradient_norm=float(np.linalg.norm(g)),
        iterations=it,
    )


@dataclass(frozen=True)
class SaddleFrame:
    """Local normal form ``V ~ value + sum_i sigma_i y_i**2`` around a saddle.

    ``axes`` columns are the principal directions; ``sigmas`` are half the
    Hessian eigenvalues (signed). Axes with ``sigma > 0`` carry the harmonic
    orbits of the stable manifold; ``sigma < 0`` axes are transverse-unstable.
    """

    origin: np.ndarray
    axes: np.ndarray
    sigmas: np.ndarray
    masses: np.ndarray
    hbar: float = 1.0
    value: float = 0.0
    potential: PotentialField | None = field(default=None, compare=False, repr=False)

    @property
    def dimension(self):
        return self.sigmas.size

    @property
    def stable_axes(self):
        return [i for i, s in enumerate(self.sigmas) if s > 0]

    @property
    def unstable_axes(self):
        return [i for i, s in enumerate(self.sigmas) if s < 0]

    def default_stable_axis(self):
        st = self.stable_axes
        return st[0] if st else None

    def default_unstable_axis(self):
        return self.unstable_axes[0]

    def frequency(self, axis):
        """Harmonic frequency ``sqrt(2 sigma / m)`` of a stable axis."""
        s = self.sigmas[axis]
        if s <= 0:
            raise NotASaddleError(f"axis {axis} is not stable (sigma={s})")
        return float(np.sqrt(2 * s / self.masses[axis]))

    def unstable_rate(self, axis):
        """Exponential rate ``sqrt(2 |sigma| / m)`` of an unstable axis."""
        s = self.sigmas[axis]
        if s >= 0:
            raise NotASaddleError(f"axis {axis} is not unstable (sigma={s})")
        return float(np.sqrt(2 * abs(s) / self.masses[axis]))

    def to_frame(self, x):
        """Frame coordinates ``y`` of physical points ``x`` (shape (..., d))."""
        return (np.asarray(x, dtype=float) - self.origin) @ self.axes

    def from_frame(self, y):
        return self.origin + np.asarray(y, dtype=float) @ self.axes.T

    def quadratic_model(self, y):
        y = np.asarray(y, dtype=float)
        return self.value + np.sum(self.sigmas * y**2, axis=-1)

    def frame_potential(self):
        """The potential expressed in frame coordinates (same derivative mode)."""
        if self.potential is None:
            raise ParameterError("frame has no attached potential")
        return FramePotential(self.potential, self)


class FramePotential(PotentialField):
    """``U(y) = V(origin + A y)`` for a :class:`SaddleFrame`."""

    has_analytic_derivatives = True

    def __init__(self, base, frame):
        super().__init__(base.dimension)
        self.base = base
        self.frame = frame
        self.name = base.name

    def _value(self, y):
        return self.base.value(self.frame.from_frame(y))

    def values(self, points):
        return self.base.values(self.frame.from_frame(points))

    def _gradient(self, y):
        return self.frame.axes.T @ self.base.gradient(self.frame.from_frame(y))

    def _hessian(self, y):
        A = self.frame.axes
        return A.T @ self.base.hessian(self.frame.from_frame(y)) @ A

    def hessians(self, points):
        A = self.frame.axes
        H = self.base.hessians(self.frame.from_frame(np.asarray(points, dtype=float).reshape(-1, self.dimension)))
        return np.einsum("ki,nkl,lj->nij", A, H, A)

    def linear_force(self):
        lf = self.base.linear_force()
        if lf is None:
            return None
        H, c = lf
        A = self.frame.axes
        return A.T @ H @ A, self.frame.to_frame(c)


def saddle_frame(cp, masses=None, hbar=1.0, potential=None, allow_transverse_only=False):
    """Build the normal-form frame of a saddle critical point.

    ``masses`` are per principal axis (all ones by default). A 1D potential
    maximum has no stable axis; it is accepted as a purely transverse frame
    only when ``allow_transverse_only`` is set.
    """
    d = cp.eigenvalues.size
    masses = np.ones(d) if masses is None else np.broadcast_to(np.asarray(masses, dtype=float), (d,)).copy()
    if np.any(masses <= 0):
        raise ParameterError("masses must be positive")
    if not hbar > 0:
        raise ParameterError("hbar must be positive")
    idx = cp.index
    if idx == 0 or (idx == d and not allow_transverse_only):
        kind = "minimum" if idx == 0 else "maximum"
        raise NotASaddleError(f"critical point is a pure {kind} (index {idx} of {d})")
    # stable axes first (the orbit coordinate x1), then unstable, each by |sigma|
    sig = cp.eigenvalues / 2.0
    order = sorted(range(d), key=lambda i: (sig[i] < 0, abs(sig[i]), i))
    axes = cp.eigenvectors[:, order].copy()
    lead = np.argmax(np.abs(axes), axis=0)
    axes *= np.sign(axes[lead, np.arange(d)])
    return SaddleFrame(
        origin=cp.location.copy(),
        axes=axes,
        sigmas=sig[order],
        masses=masses,
        hbar=float(hbar),
        value=cp.value,
        potential=potential,
    )
