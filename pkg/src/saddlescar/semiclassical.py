"""Saddle-scar densities predicted from the local saddle dynamics.

Near a two-axis saddle the scarred density factorizes into a transverse
phase-curvature factor ``cos(W_n x2**2 / 2 hbar)`` and a longitudinal harmonic
oscillator density ``|psi_n(x1)|**2``. This module builds that model, the sum
over repeated passings of the primitive orbit, the energy-smoothed spectral
density that the model approximates, and the rule of thumb for scar energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, fresnel

from .classical import (
    TransverseCoefficients,
    analytic_saddle_coefficients,
    limiting_W,
    multi_pass_coefficients,
)
from .errors import ParameterError, ValidityError

__all__ = [
    "transverse_scar_factor",
    "first_node",
    "longitudinal_wavefunction",
    "ScarDensityModel",
    "scar_model",
    "scar_density",
    "SmoothedGreen",
    "smoothed_green_density",
    "factorized_green_density",
    "PassingSum",
    "passing_sum",
    "scar_energy_estimate",
]


def transverse_scar_factor(W, hbar, x2):
    """``cos(W x2**2 / (2 hbar))``."""
    return np.cos(W * np.asarray(x2, dtype=float) ** 2 / (2 * hbar))


def first_node(W, hbar):
    """Smallest ``|x2|`` where the transverse factor vanishes: ``sqrt(pi hbar / W)``."""
    if not W > 0:
        raise ParameterError("W must be positive")
    return math.sqrt(math.pi * hbar / W)


def longitudinal_wavefunction(frame, n, x1, axis=None):
    """Normalized harmonic-oscillator eigenfunction along a stable axis.

    Frequency ``omega1 = sqrt(2 sigma1 / m1)`` and mass ``m1`` come from the
    frame. Evaluated with the three-term Hermite-function recurrence, which
    stays finite for large ``n``.
    """
    if int(n) != n or n < 0:
        raise ParameterError("n must be a non-negative integer")
    s = frame.default_stable_axis() if axis is None else axis
    if s is None:
        raise ParameterError("frame has no stable axis")
    m, w, hbar = frame.masses[s], frame.frequency(s), frame.hbar
    xi = np.sqrt(m * w / hbar) * np.asarray(x1, dtype=float)
    pref = (m * w / (np.pi * hbar)) ** 0.25
    prev = np.zeros_like(xi)
    cur = pref * np.exp(-0.5 * xi**2)
    for k in range(1, int(n) + 1):
        prev, cur = cur, np.sqrt(2.0 / k) * xi * cur - np.sqrt((k - 1) / k) * prev
    return cur


@dataclass(frozen=True)
class ScarDensityModel:
    """Predicted scar density ``cos(W_n x2**2 / 2 hbar) |psi_n(x1)|**2 / scale``.

    ``scale`` fixes the proportionality: the density is 1 at the origin for
    even ``n`` and has maximum 1 for odd ``n``. For a frame with no stable
    axis (a 1D maximum) the longitudinal factor is 1 and the model depends on
    ``x2`` only.
    """

    frame: object
    n: int
    W_n: float
    stable_axis: int | None
    unstable_axis: int
    scale: float = 1.0
    longitudinal: object = field(default=None, compare=False, repr=False)

    @property
    def hbar(self):
        return self.frame.hbar

    @property
    def validity_halfwidth(self):
        return first_node(self.W_n, self.hbar)

    @property
    def has_longitudinal(self):
        return self.stable_axis is not None

    def coordinates(self, x):
        """``(x1, x2)`` frame coordinates of physical points ``x`` (shape (..., d))."""
        x = np.asarray(x, dtype=float)
        if self.frame.dimension == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        y = self.frame.to_frame(x)
        x2 = y[..., self.unstable_axis]
        x1 = y[..., self.stable_axis] if self.has_longitudinal else np.zeros_like(x2)
        return x1, x2

    def longitudinal_density(self, x1):
        if not self.has_longitudinal:
            return np.ones_like(np.asarray(x1, dtype=float))
        return self.longitudinal(x1) ** 2

    def evaluate(self, x1, x2, clamp=True):
        """Model density on frame coordinates; zero past the first node when clamped."""
        x2 = np.asarray(x2, dtype=float)
        f = transverse_scar_factor(self.W_n, self.hbar, x2)
        if clamp:
            f = np.where(np.abs(x2) <= self.validity_halfwidth, np.maximum(f, 0.0), 0.0)
        return f * self.longitudinal_density(x1) / self.scale

    def tube_integral(self):
        """Integral of the model over the validity tube (all x1, |x2| <= first node)."""
        c = self.W_n / (2 * self.hbar)
        a = self.validity_halfwidth
        # int_{-a}^{a} cos(c x^2) dx with the Fresnel cosine integral
        z = math.sqrt(2 * c / math.pi) * a
        transverse = 2 * math.sqrt(math.pi / (2 * c)) * float(fresnel(z)[1])
        return transverse / self.scale


def scar_model(frame, n=0, coeffs=None, stable_axis=None, unstable_axis=None, W=None):
    """Build the :class:`ScarDensityModel` for longitudinal level ``n``.

    The lowest state (``n = 0``) sits on the fixed-point orbit and uses
    ``W0 = 2 sqrt(2 m2 |sigma2|)``; excited states use the primitive-orbit ``W``.
    A frame without stable axis always uses ``W0``. ``W`` overrides both.
    """
    u = frame.default_unstable_axis() if unstable_axis is None else unstable_axis
    s = frame.default_stable_axis() if stable_axis is None else stable_axis
    if W is None:
        if s is None or n == 0:
            W = limiting_W(frame, u)
        else:
            coeffs = analytic_saddle_coefficients(frame, s, u) if coeffs is None else coeffs
            W = coeffs.W
    if s is None:
        return ScarDensityModel(frame, int(n), float(W), None, u, 1.0)
    psi = lambda x1: longitudinal_wavefunction(frame, n, x1, axis=s)  # noqa: E731
    if n % 2 == 0:
        scale = float(psi(0.0) ** 2)
    else:
        # maximum of |psi_n|^2 on a fine grid spanning the classically allowed zone
        m, w, hbar = frame.masses[s], frame.frequency(s), frame.hbar
        turn = math.sqrt((2 * n + 1) * hbar / (m * w))
        xs = np.linspace(0, 1.2 * turn, 4001)
        scale = float(np.max(psi(xs) ** 2))
    return ScarDensityModel(frame, int(n), float(W), s, u, scale, psi)


def scar_density(model, x, strict=True):
    """Evaluate a scar model at physical point(s) ``x``.

    Points with ``|x2|`` past the first transverse node are outside the
    model's validity region: they raise :class:`ValidityError`, or evaluate
    to 0 when ``strict`` is False.
    """
    x1, x2 = model.coordinates(x)
    outside = np.abs(x2) > model.validity_halfwidth * (1 + 1e-12)
    if strict and np.any(outside):
        raise ValidityError("point outside the validity tube |x2| <= first node")
    return model.evaluate(x1, x2, clamp=True)


# -- energy-smoothed Green's function -------------------------------------

def _kernel(kind, dE, width):
    if kind == "lorentzian":
        return (width / np.pi) / (dE**2 + width**2)
    if kind == "gaussian":
        return np.exp(-0.5 * (dE / width) ** 2) / (width * np.sqrt(2 * np.pi))
    raise ParameterError(f"unknown kernel {kind!r}")


def _kernel_cdf(kind, dE, width):
    if kind == "lorentzian":
        return 0.5 + np.arctan(dE / width) / np.pi
    return 0.5 * (1 + erf(dE / (width * np.sqrt(2))))


@dataclass(frozen=True)
class SmoothedGreen:
    """Levels ``E_n`` with their densities ``|Psi_n|**2`` sampled on a common grid.

    ``densities`` has shape (n_levels, ...) matching ``energies``.
    """

    energies: np.ndarray
    densities: np.ndarray
    smoothing_width: float
    kernel: str = "lorentzian"

    def __post_init__(self):
        if not self.smoothing_width > 0:
            raise ParameterError("smoothing width must be positive")
        if len(self.energies) == 0:
            raise ParameterError("empty spectrum")
        if self.kernel not in ("lorentzian", "gaussian"):
            raise ParameterError(f"unknown kernel {self.kernel!r}")
        if np.shape(self.densities)[0] != len(self.energies):
            raise ParameterError("one density sample set per level is required")

    def weights(self, E0):
        return _kernel(self.kernel, E0 - np.asarray(self.energies, dtype=float), self.smoothing_width)

    def integrated_weights(self, E_lo, E_hi):
        """Kernel mass of each level inside ``[E_lo, E_hi]`` (closed form)."""
        E = np.asarray(self.energies, dtype=float)
        w = self.smoothing_width
        return _kernel_cdf(self.kernel, E_hi - E, w) - _kernel_cdf(self.kernel, E_lo - E, w)


def smoothed_green_density(sg, E0, x=None):
    """``-(1/pi) Im G`` smoothed over ``Delta E``: ``sum_n |Psi_n(x)|**2 K(E0 - E_n)``.

    The principal-value part of the resolvent averages out and is dropped.
    ``x`` optionally indexes into the sampled grid; by default the whole grid
    is returned.
    """
    w = sg.weights(E0)
    dens = np.asarray(sg.densities, dtype=float)
    if x is not None:
        dens = dens[(slice(None),) + np.index_exp[x]]
    return np.tensordot(w, dens, axes=(0, 0))


def factorized_green_density(frame, E0, width, x1, x2, W=None, n_max=40, kernel="lorentzian"):
    """Energy-averaged density in the factorized regime.

    ``cos(W x2**2 / 2 hbar) sum_n |psi_n(x1)|**2 K(E0 - E_n)`` with harmonic
    levels ``E_n = V_saddle + (n + 1/2) hbar omega1`` along the stable axis.
    """
    s = frame.default_stable_axis()
    w1 = frame.frequency(s)
    W = analytic_saddle_coefficients(frame).W if W is None else W
    x1 = np.asarray(x1, dtype=float)
    total = np.zeros(np.broadcast(x1, np.asarray(x2)).shape)
    for n in range(n_max + 1):
        En = frame.value + (n + 0.5) * frame.hbar * w1
        total = total + longitudinal_wavefunction(frame, n, x1, s) ** 2 * _kernel(kernel, E0 - En, width)
    return transverse_scar_factor(W, frame.hbar, x2) * total


# -- sum over repeated passings -----------------------------------------

@dataclass(frozen=True)
class PassingSum:
    theta: float
    action: float = 0.0
    nu: int = 0
    hbar: float = 1.0
    n_max: int = 10
    coeffs: TransverseCoefficients | None = None

    def __post_init__(self):
        if self.n_max < 1:
            raise ParameterError("n_max must be >= 1")
        if not self.theta > 0:
            raise ParameterError("theta must be positive")

    @classmethod
    def for_frame(cls, frame, action=0.0, nu=0, n_max=10):
        c = analytic_saddle_coefficients(frame)
        return cls(c.theta, action, nu, frame.hbar, n_max, c)


def passing_terms(ps, frame, x2):
    """Individual complex terms ``n = 1 .. n_max`` evaluated at ``x2``."""
    u = frame.default_unstable_axis()
    a4 = (2 * frame.masses[u] * abs(frame.sigmas[u])) ** 0.25
    coeffs = ps.coeffs if ps.coeffs is not None else analytic_saddle_coefficients(frame)
    x2 = np.asarray(x2, dtype=float)
    terms = []
    for n in range(1, ps.n_max + 1):
        _, Wn = multi_pass_coefficients(coeffs, frame, n)
        amp = a4 / np.sqrt(np.sinh(min(n * ps.theta, 700.0)))
        phase = (n * ps.action + 0.5 * Wn * x2**2) / ps.hbar - 0.5 * np.pi * ps.nu * n
        terms.append(amp * np.exp(1j * phase))
    return np.array(terms)


def passing_sum(ps, frame, x2):
    """Partial sum over passings and the magnitude of its last term.

    Returns
    -------
    total : complex or ndarray
    last_magnitude : float
        ``|term_{n_max}|``, a certificate for the truncation error.
    """
    terms = passing_terms(ps, frame, x2)
    return terms.sum(axis=0), float(np.max(np.abs(terms[-1])))


def scar_energy_estimate(frame, n, E_loc, stable_axis=None):
    """``V_saddle + E_loc + (n + 1/2) hbar omega1``.

    ``E_loc`` is the kinetic localization energy of the transverse state. A
    frame with no stable axis contributes no harmonic term.
    """
    if E_loc < 0:
        raise ParameterError("localization energy must be >= 0")
    s = frame.default_stable_axis() if stable_axis is None else stable_axis
    if s is None:
        return float(frame.value + E_loc)
    return float(frame.value + E_loc + (n + 0.5) * frame.hbar * frame.frequency(s))
