"""Scar scoring, resurgence/peak analysis, level densities and 1D density comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks, peak_widths

from .errors import GeometryError, InsufficientSignalError, ParameterError, SelectionError
from .semiclassical import scar_energy_estimate, scar_model
from .spectra import GridSpectrum, Spectrum1D

__all__ = [
    "Tube",
    "default_tube",
    "ScarScore",
    "correlation_score",
    "scar_rank",
    "ScarDetection",
    "detect_scars",
    "PeakSet",
    "PeakAnalysis",
    "peak_and_decay_analysis",
    "level_density",
    "Fig1Result",
    "fig1_comparison",
]


@dataclass(frozen=True)
class Tube:
    """Box ``|x1| <= stable_halfwidth, |x2| <= unstable_halfwidth`` in frame coordinates.

    ``stable_halfwidth=None`` leaves ``x1`` unrestricted (1D models).
    """

    unstable_halfwidth: float
    stable_halfwidth: float | None = None

    def mask(self, x1, x2):
        m = np.abs(x2) <= self.unstable_halfwidth
        if self.stable_halfwidth is not None:
            m &= np.abs(x1) <= self.stable_halfwidth
        return m


def default_tube(model):
    """First transverse node across; turning point of ``psi_n`` plus two widths along."""
    if not model.has_longitudinal:
        return Tube(model.validity_halfwidth)
    f = model.frame
    s = model.stable_axis
    m, w, hbar = f.masses[s], f.frequency(s), f.hbar
    width = math.sqrt(hbar / (m * w))
    turn = math.sqrt((2 * model.n + 1) * hbar / (m * w))
    return Tube(model.validity_halfwidth, turn + 2 * width)


@dataclass(frozen=True)
class ScarScore:
    index: int
    energy: float
    score: float
    tube: Tube


def correlation_score(density, reference):
    """Pearson correlation of two samples; in [-1, 1], scale-invariant."""
    a = np.asarray(density, dtype=float).ravel()
    b = np.asarray(reference, dtype=float).ravel()
    if a.size < 2:
        raise GeometryError("fewer than two samples in the tube")
    a = a - a.mean()
    b = b - b.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def _spectrum_samples(spectrum):
    if isinstance(spectrum, Spectrum1D):
        return spectrum.x[:, None], spectrum.grid_samples, spectrum.eigenvalues
    if isinstance(spectrum, GridSpectrum):
        dens = np.abs(spectrum.eigenvectors) ** 2
        return spectrum.points(), dens, spectrum.eigenvalues
    raise ParameterError(f"unsupported spectrum type {type(spectrum).__name__}")


def scar_rank(spectrum, model, tube=None, indices=None):
    """Score eigenstates against ``model`` inside ``tube``; best first.

    The score is the Pearson correlation between the exact density and the
    model density over the grid points in the tube.

    Parameters
    ----------
    spectrum : Spectrum1D or GridSpectrum
    model : ScarDensityModel
    tube : Tube, optional
        Defaults to :func:`default_tube`.
    indices : sequence of int, optional
        Restrict scoring to these states.

    Returns
    -------
    list of ScarScore
        Sorted by descending score, ties broken by state index.
    """
    tube = default_tube(model) if tube is None else tube
    pts, dens, E = _spectrum_samples(spectrum)
    x1, x2 = model.coordinates(pts)
    mask = tube.mask(x1, x2)
    if np.count_nonzero(mask) < 2:
        raise GeometryError("tube does not intersect the spectrum grid")
    ref = model.evaluate(x1[mask], x2[mask], clamp=False)
    idx = range(len(E)) if indices is None else indices
    scores = [ScarScore(int(i), float(E[i]), correlation_score(dens[i][mask], ref), tube) for i in idx]
    return sorted(scores, key=lambda s: (-s.score, s.index))


@dataclass(frozen=True)
class ScarDetection:
    n: int
    estimate: float
    best: ScarScore | None
    candidates: tuple


def detect_scars(spectrum, frame, n_values, E_loc, window=None, coeffs=None, tube=None):
    """Find the best-scoring state near each predicted scar energy.

    Candidates are the states within ``window`` (default ``hbar omega1 / 2``)
    of ``scar_energy_estimate(frame, n, E_loc)``.
    """
    s = frame.default_stable_axis()
    if window is None:
        if s is None:
            raise ParameterError("window is required for a frame without a stable axis")
        window = 0.5 * frame.hbar * frame.frequency(s)
    out = []
    for n in n_values:
        est = scar_energy_estimate(frame, n, E_loc)
        model = scar_model(frame, n, coeffs=coeffs)
        near = [i for i in np.argsort(spectrum.eigenvalues) if abs(spectrum.eigenvalues[i] - est) <= window]
        ranked = scar_rank(spectrum, model, tube, near) if near else []
        out.append(ScarDetection(int(n), est, ranked[0] if ranked else None, tuple(ranked)))
    return out


@dataclass(frozen=True)
class PeakSet:
    """Peaks of a sampled signal: refined positions, heights, FWHM and partition masses."""

    positions: np.ndarray
    heights: np.ndarray
    widths: np.ndarray
    masses: np.ndarray

    def __len__(self):
        return self.positions.size


@dataclass(frozen=True)
class PeakAnalysis:
    """Resurgences of ``|C(t)|`` and peaks of ``S(E)``.

    ``decay_rate`` is the fitted log-amplitude slope per unit time (to compare
    with ``lambda / 2``); ``decay_per_traversal = exp(-decay_rate * tau_fit)``.
    """

    time_peaks: PeakSet
    tau_fit: float
    decay_rate: float
    decay_per_traversal: float
    energy_peaks: PeakSet | None
    energy_spacing: float | None
    tau: float
    lam: float
    hbar: float

    @property
    def predicted_decay_per_traversal(self):
        return math.exp(-0.5 * self.tau * self.lam)

    @property
    def predicted_spacing(self):
        return 2 * math.pi * self.hbar / self.tau

    @property
    def predicted_width(self):
        return self.hbar * self.lam

    def position_errors(self):
        """``|t_k - n_k tau|`` for each time peak."""
        t = self.time_peaks.positions
        return np.abs(t - np.round(t / self.tau) * self.tau)


def _refine(y, i):
    """Sub-sample offset and height by a parabola through log (or plain) samples."""
    if i <= 0 or i >= y.size - 1:
        return 0.0, float(y[i])
    a, b, c = y[i - 1], y[i], y[i + 1]
    if min(a, b, c) > 0:
        a, b, c = math.log(a), math.log(b), math.log(c)
        den = a - 2 * b + c
        if den >= 0:
            return 0.0, float(y[i])
        d = 0.5 * (a - c) / den
        return d, math.exp(b - 0.25 * (a - c) * d)
    den = a - 2 * b + c
    if den >= 0:
        return 0.0, float(y[i])
    d = 0.5 * (a - c) / den
    return d, b - 0.25 * (a - c) * d


def _find(x, y, distance, floor=None):
    """Peaks of ``y`` above the noise floor; masses from a midpoint partition."""
    h = float(x[1] - x[0])
    med = float(np.median(y))
    mad = float(np.median(np.abs(y - med)))
    floor = med + 3.0 * mad if floor is None else floor
    # prominence guards against rounding ripple on a flat signal
    prom = max(3.0 * mad, 1e-8 * float(np.max(np.abs(y))))
    idx, _ = find_peaks(y, height=floor, prominence=prom, distance=max(1, int(distance / h)) if distance else None)
    if idx.size == 0:
        return PeakSet(*(np.empty(0) for _ in range(4)))
    w = peak_widths(y, idx, rel_height=0.5)[0] * h
    pos, hts = np.empty(idx.size), np.empty(idx.size)
    for j, i in enumerate(idx):
        d, hts[j] = _refine(y, i)
        pos[j] = x[i] + d * h
    edges = np.concatenate([[0], (idx[1:] + idx[:-1]) // 2, [y.size - 1]])
    mass = np.array([np.trapezoid(y[edges[j] : edges[j + 1] + 1], x[edges[j] : edges[j + 1] + 1])
                     for j in range(idx.size)])
    return PeakSet(pos, hts, w, mass)


def peak_and_decay_analysis(run, weights=None, tau=None, lam=None, hbar=None, min_peaks=3):
    """Locate ``|C(t)|`` resurgences near ``n tau`` and fit their decay.

    Parameters
    ----------
    run : WavePacketRun or (times, overlaps)
        Uniformly sampled autocorrelation starting at ``t = 0``.
    weights : SpectralWeights, optional
        When given, the peaks of ``S(E)`` and their mean spacing are measured too.
    tau, lam : float
        Classical period and Lyapunov rate of the orbit.
    hbar : float, optional
        Defaults to ``run.hbar`` (or 1).

    Raises
    ------
    InsufficientSignalError
        Fewer than ``min_peaks`` peaks above the noise floor (median plus three
        median absolute deviations).
    """
    if tau is None or not tau > 0 or lam is None or lam < 0:
        raise ParameterError("need tau > 0 and lam >= 0")
    if isinstance(run, tuple):
        t, C = (np.asarray(a) for a in run)
        hbar = 1.0 if hbar is None else hbar
    else:
        t, C = run.times, run.overlaps
        hbar = run.hbar if hbar is None else hbar
    a = np.abs(C)
    # mirror through t = 0 (|C(-t)| = |C(t)|) so the t = 0 maximum is a regular peak
    tt = np.concatenate([-t[:0:-1], t])
    aa = np.concatenate([a[:0:-1], a])
    ps = _find(tt, aa, 0.5 * tau)
    keep = ps.positions >= -0.5 * (t[1] - t[0])
    ps = PeakSet(*(getattr(ps, f)[keep] for f in ("positions", "heights", "widths", "masses")))
    if ps.masses.size:
        # the t = 0 peak was split by the mirror: count only its t >= 0 half
        if abs(ps.positions[0]) < t[1] - t[0]:
            ps.masses[0] *= 0.5
    if len(ps) < min_peaks:
        raise InsufficientSignalError(f"{len(ps)} resurgence peak(s) above the noise floor, need {min_peaks}")
    n = np.round(ps.positions / tau)
    if np.unique(n).size < 2:
        raise InsufficientSignalError("resurgences do not span two periods")
    tau_fit = float(np.polyfit(n, ps.positions, 1)[0])
    slope = float(np.polyfit(ps.positions, np.log(ps.heights), 1)[0])
    decay = -slope

    ep = spacing = None
    if weights is not None:
        dE = 2 * math.pi * hbar / tau
        ep = _find(weights.energies, weights.S, 0.5 * dE)
        if len(ep) < min_peaks:
            raise InsufficientSignalError(f"{len(ep)} spectral peak(s) above the noise floor, need {min_peaks}")
        k = np.round((ep.positions - ep.positions[0]) / dE)
        spacing = float(np.polyfit(k, ep.positions, 1)[0])
    return PeakAnalysis(ps, tau_fit, decay, math.exp(-decay * tau_fit), ep, spacing, float(tau), float(lam),
                        float(hbar))


def level_density(energies, smoothing, grid=None, n_points=2001):
    """Gaussian-smoothed level density ``d(E) = sum_n g(E - E_n)``.

    Returns ``(E, d)``. The default grid extends eight smoothing widths past
    the extreme levels, so ``d`` integrates to the level count.
    """
    E = np.sort(np.asarray(energies, dtype=float))
    if E.size < 10:
        raise ParameterError("need at least 10 levels")
    if not smoothing > 0:
        raise ParameterError("smoothing must be positive")
    if grid is None:
        grid = np.linspace(E[0] - 8 * smoothing, E[-1] + 8 * smoothing, n_points)
    grid = np.asarray(grid, dtype=float)
    z = (grid[:, None] - E[None, :]) / smoothing
    d = np.exp(-0.5 * z**2).sum(axis=1) / (smoothing * math.sqrt(2 * math.pi))
    return grid, d


@dataclass(frozen=True)
class Fig1Result:
    """Exact versus model density on the clamp region of a 1D spectrum."""

    index: int
    energy: float
    x: np.ndarray
    exact: np.ndarray
    model: np.ndarray
    max_deviation: float
    mean_deviation: float
    window: float

    def rows(self):
        return np.column_stack([self.x, self.exact, self.model])


def fig1_comparison(spectrum, model, target_energy, energy_window=1.0):
    """Compare the exact density nearest ``target_energy`` with the scar model.

    The selected state is the one closest to the target among those whose
    density peaks at ``x = 0``. Samples are kept where ``|x|`` is within the
    model's first node, and the model is rescaled to the exact density at
    ``x = 0``. Relative deviations are reported on ``|x| <=`` half the node.

    Raises
    ------
    SelectionError
        No state peaked at the origin lies within ``energy_window``.
    """
    if not isinstance(spectrum, Spectrum1D):
        raise ParameterError("fig1_comparison needs a Spectrum1D")
    x = spectrum.x
    i0 = int(np.argmin(np.abs(x)))
    E = spectrum.eigenvalues
    order = np.argsort(np.abs(E - target_energy), kind="stable")
    sel = None
    for i in order:
        if abs(E[i] - target_energy) > energy_window:
            break
        if int(np.argmax(spectrum.grid_samples[i])) == i0:
            sel = int(i)
            break
    if sel is None:
        raise SelectionError(f"no state peaked at x=0 within {energy_window} of E={target_energy}")
    node = model.validity_halfwidth
    keep = np.abs(x) <= node
    xs = x[keep]
    exact = spectrum.grid_samples[sel][keep]
    x1, x2 = model.coordinates(xs[:, None])
    raw = model.evaluate(x1, x2, clamp=True)
    ref = float(model.evaluate(*model.coordinates(np.array([[x[i0]]])), clamp=True)[0])
    mod = raw * (spectrum.grid_samples[sel][i0] / ref)
    inner = np.abs(xs) <= 0.5 * node
    rel = np.abs(mod[inner] - exact[inner]) / exact[inner]
    return Fig1Result(sel, float(E[sel]), xs, exact, mod, float(rel.max()), float(rel.mean()), 0.5 * node)
