"""Split-step wave-packet propagation and the autocorrelation spectrum.

A Gaussian packet is propagated with the symmetric (Strang) splitting
``exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2)`` on a periodic grid, the kinetic
factor being applied exactly in momentum space. The overlap
``C(t) = <Psi(t)|Psi(0)>`` is recorded at every step and Fourier transformed
into the weighted spectral density ``S(E)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, GeometryError, ParameterError, ResolutionError

__all__ = [
    "PeriodicGrid",
    "GaussianPacket",
    "WavePacketRun",
    "SpectralWeights",
    "propagate_splitstep",
    "heller_analysis",
    "free_gaussian_overlap",
    "scar_packet",
]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid; axis ``i`` has points ``lo_i + j h_i``, ``j < N_i``."""

    lo: tuple
    hi: tuple
    shape: tuple

    @property
    def dimension(self):
        return len(self.shape)

    @property
    def spacing(self):
        return tuple((h - l) / n for l, h, n in zip(self.lo, self.hi, self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axes(self):
        return tuple(l + d * np.arange(n) for l, d, n in zip(self.lo, self.spacing, self.shape))

    def points(self):
        """Array of shape grid_shape + (d,). Array axes run (x_d, ..., x1): x1 fastest."""
        ax = self.axes()
        mesh = np.meshgrid(*ax[::-1], indexing="ij")[::-1]
        return np.stack(mesh, axis=-1)

    def wavenumbers(self):
        """Per-axis angular wavenumbers, broadcastable against the grid array."""
        ks = []
        d = self.dimension
        for i, (h, n) in enumerate(zip(self.spacing, self.shape)):
            k = 2 * np.pi * np.fft.fftfreq(n, h)
            shape = [1] * d
            shape[d - 1 - i] = n
            ks.append(k.reshape(shape))
        return ks


@dataclass(frozen=True)
class GaussianPacket:
    """``prod_i (2 pi s_i^2)^(-1/4) exp(-(x_i - q_i)^2 / 4 s_i^2 + i p_i x_i / hbar)``."""

    center: tuple
    momentum: tuple
    widths: tuple

    def evaluate(self, grid, hbar=1.0):
        X = grid.points()
        q = np.asarray(self.center, dtype=float)
        p = np.asarray(self.momentum, dtype=float)
        s = np.asarray(self.widths, dtype=float)
        arg = -np.sum((X - q) ** 2 / (4 * s**2), axis=-1) + 1j * np.sum(p * (X - q), axis=-1) / hbar
        psi = np.exp(arg) * np.prod((2 * np.pi * s**2) ** -0.25)
        # renormalize on the grid so that C(0) = 1 exactly
        return psi / np.sqrt(np.sum(np.abs(psi) ** 2) * grid.cell_volume)


@dataclass
class WavePacketRun:
    grid: PeriodicGrid
    packet: GaussianPacket
    dt: float
    steps: int
    masses: tuple
    hbar: float = 1.0
    times: np.ndarray | None = None
    overlaps: np.ndarray | None = None
    norms: np.ndarray | None = None
    energy_mean: float | None = None
    energy_std: float | None = None
    edge_occupancy: float | None = None
    initial: np.ndarray | None = field(default=None, repr=False)
    final: np.ndarray | None = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    @property
    def total_time(self):
        return self.dt * self.steps

    def max_norm_drift_per_step(self):
        return float(np.max(np.abs(np.diff(self.norms)))) if self.norms.size > 1 else 0.0

    def to_json(self):
        return {
            "kind": "wavepacket",
            "times": self.times.tolist(),
            "overlap_real": self.overlaps.real.tolist(),
            "overlap_imag": self.overlaps.imag.tolist(),
            "norms": self.norms.tolist(),
            "metadata": {
                "grid": {"lo": list(self.grid.lo), "hi": list(self.grid.hi), "shape": list(self.grid.shape)},
                "packet": {
                    "center": list(self.packet.center),
                    "momentum": list(self.packet.momentum),
                    "widths": list(self.packet.widths),
                },
                "dt": self.dt,
                "steps": self.steps,
                "masses": list(self.masses),
                "hbar": self.hbar,
                "energy_mean": self.energy_mean,
                "energy_std": self.energy_std,
                **self.meta,
            },
        }


def _kinetic_symbol(grid, masses, hbar):
    T = 0.0
    for k, m in zip(grid.wavenumbers(), masses):
        T = T + (hbar * k) ** 2 / (2 * m)
    return T


def _edge_occupancy(psi, grid, fraction=0.1):
    """Probability carried by the top ``fraction`` of each axis' momentum band."""
    phi = np.abs(np.fft.fftn(psi)) ** 2
    phi /= phi.sum()
    mask = np.zeros(phi.shape, dtype=bool)
    for k, h in zip(grid.wavenumbers(), grid.spacing):
        kmax = np.pi / h
        mask |= np.broadcast_to(np.abs(k) >= (1 - fraction) * kmax, phi.shape)
    return float(phi[mask].sum())


def propagate_splitstep(run, potential, masses=None, progress=None, alias_tol=1e-6, check_every=500,
                        initial=None):
    """Propagate ``run.packet`` for ``run.steps`` steps of ``run.dt``.

    Fills ``times``, ``overlaps`` (``C(t_k) = <Psi(t_k)|Psi(0)>``), ``norms``,
    the initial-state energy moments and the final state, and returns the run.
    Raises :class:`AccuracyError` if the probability in the outermost 10% of
    the momentum band exceeds ``alias_tol``.

    ``progress(step, total)`` is called every ``check_every`` steps.
    """
    grid = run.grid
    masses = run.masses if masses is None else masses
    masses = tuple(float(m) for m in np.broadcast_to(np.asarray(masses, dtype=float), (grid.dimension,)))
    if any(m <= 0 for m in masses):
        raise ParameterError("masses must be positive")
    # negative dt runs backwards in time
    if run.dt == 0 or not np.isfinite(run.dt) or run.steps < 1:
        raise ParameterError("need a finite non-zero dt and steps >= 1")
    hbar = run.hbar
    vol = grid.cell_volume
    V = potential.values(grid.points()) if hasattr(potential, "values") else np.asarray(potential, dtype=float)
    Tk = _kinetic_symbol(grid, masses, hbar)
    half_v = np.exp(-0.5j * run.dt * V / hbar)
    kin = np.exp(-1j * run.dt * Tk / hbar)

    psi0 = run.packet.evaluate(grid, hbar) if initial is None else np.asarray(initial, dtype=complex)
    occ = _edge_occupancy(psi0, grid)
    if occ > alias_tol:
        raise AccuracyError(f"initial state occupies the momentum-band edge ({occ:.2e})")

    phi0 = np.fft.fftn(psi0)
    ekin = np.sum(Tk * np.abs(phi0) ** 2) / np.sum(np.abs(phi0) ** 2)
    epot = np.sum(V * np.abs(psi0) ** 2) * vol
    Hpsi = np.fft.ifftn(Tk * phi0) + V * psi0
    e_mean = float(ekin + epot)
    e2 = np.sum(np.abs(Hpsi) ** 2) * vol
    run.energy_mean = e_mean
    run.energy_std = float(np.sqrt(max(e2 - e_mean**2, 0.0)))

    overlaps = np.empty(run.steps + 1, dtype=complex)
    norms = np.empty(run.steps + 1)
    conj0 = np.conj(psi0)
    psi = psi0.copy()
    overlaps[0] = np.vdot(psi, psi0) * vol
    norms[0] = np.vdot(psi, psi).real * vol
    for s in range(1, run.steps + 1):
        psi = half_v * np.fft.ifftn(kin * np.fft.fftn(half_v * psi))
        overlaps[s] = np.sum(np.conj(psi) * psi0) * vol
        norms[s] = np.vdot(psi, psi).real * vol
        if s % check_every == 0:
            occ = max(occ, _edge_occupancy(psi, grid))
            if occ > alias_tol:
                raise AccuracyError(f"aliasing: momentum-band edge occupancy {occ:.2e} at step {s}")
            if progress is not None:
                progress(s, run.steps)
    occ = max(occ, _edge_occupancy(psi, grid))
    if occ > alias_tol:
        raise AccuracyError(f"aliasing: momentum-band edge occupancy {occ:.2e} at the end of the run")
    del conj0
    run.times = run.dt * np.arange(run.steps + 1)
    run.overlaps = overlaps
    run.norms = norms
    run.edge_occupancy = occ
    run.initial = psi0
    run.final = psi
    return run


def free_gaussian_overlap(t, packet, masses, hbar=1.0):
    """Closed-form ``<Psi(t)|Psi(0)>`` for a free Gaussian packet.

    Each axis contributes the characteristic function of ``p**2`` under the
    packet's Gaussian momentum distribution.
    """
    t = np.asarray(t, dtype=float)
    C = np.ones_like(t, dtype=complex)
    for p0, s, m in zip(packet.momentum, packet.widths, np.broadcast_to(masses, (len(packet.widths),))):
        var = hbar**2 / (4 * s**2)
        a = t / (2 * m * hbar)
        den = 1 - 2j * a * var
        C = C * np.exp(1j * a * p0**2 / den) / np.sqrt(den)
    return C


@dataclass(frozen=True)
class SpectralWeights:
    """``S(E)`` on an energy grid, optionally with exact discrete weights ``|c_n|**2``."""

    energies: np.ndarray
    S: np.ndarray
    resolution: float
    levels: np.ndarray | None = None
    weights: np.ndarray | None = None

    def mass_between(self, lo, hi):
        sel = (self.energies >= lo) & (self.energies <= hi)
        return float(np.trapezoid(self.S[sel], self.energies[sel]))


def heller_analysis(run, spectrum=None, energies=None, resolution=None, n_energies=4096, window="hann"):
    """Weighted spectral density of a propagated packet.

    ``S(E) = (1/pi hbar) Re int_0^T w(t) C(t) exp(-iEt/hbar) dt``, using
    ``C(-t) = conj C(t)``; ``w`` is a Hann taper on ``[-T, T]`` (or ``"none"``).
    Each isolated level contributes a peak of integrated mass ``|c_n|**2``.

    When a grid spectrum on the run's grid is supplied, the exact coefficients
    ``c_n = <Psi_n|Psi(0)>`` are returned as ``weights``.

    Raises :class:`ResolutionError` if ``resolution`` is finer than the
    record allows (``2 pi hbar / T``).
    """
    if run.overlaps is None:
        raise ParameterError("run has not been propagated")
    hbar = run.hbar
    T = run.total_time
    if not T > 0:
        raise ParameterError("spectral analysis needs a forward-time run")
    dE = 2 * np.pi * hbar / T
    if resolution is not None and resolution < dE:
        raise ResolutionError(f"record of length {T:.6g} resolves {dE:.4g}, requested {resolution:.4g}")
    t = run.times
    if window == "hann":
        w = np.cos(0.5 * np.pi * t / T) ** 2
    elif window == "none":
        w = np.ones_like(t)
    else:
        raise ParameterError(f"unknown window {window!r}")
    w = w * run.dt
    w[0] *= 0.5
    if energies is None:
        spread = max(run.energy_std, dE)
        energies = np.linspace(run.energy_mean - 6 * spread, run.energy_mean + 6 * spread, n_energies)
    energies = np.asarray(energies, dtype=float)
    S = np.empty_like(energies)
    wc = w * run.overlaps
    for i0 in range(0, energies.size, 512):
        block = energies[i0 : i0 + 512]
        S[i0 : i0 + 512] = (np.exp(-1j * np.outer(block, t) / hbar) @ wc).real / (np.pi * hbar)

    levels = weights = None
    if spectrum is not None:
        vecs = spectrum.eigenvectors
        if vecs.shape[1:] != run.initial.shape:
            raise GeometryError("spectrum grid does not match the run grid")
        for a, b in zip(spectrum.axes, run.grid.axes()):
            if a.size != b.size or not np.allclose(a, b):
                raise GeometryError("spectrum grid does not match the run grid")
        c = vecs.reshape(len(spectrum.eigenvalues), -1).conj() @ run.initial.ravel() * run.grid.cell_volume
        levels = np.asarray(spectrum.eigenvalues, dtype=float)
        weights = np.abs(c) ** 2
    return SpectralWeights(energies, S, dE, levels, weights)


def scar_packet(frame, amplitude, stable_axis=None, unstable_axis=None):
    """Gaussian on the stable-manifold orbit: ground-state widths, at a turning point.

    Returns a :class:`GaussianPacket` in the physical coordinates of a 2D frame
    whose axes coincide with the coordinate axes.
    """
    s = frame.default_stable_axis() if stable_axis is None else stable_axis
    if not np.allclose(np.abs(frame.axes), np.abs(frame.axes).round()):
        raise ParameterError("scar_packet needs frame axes aligned with the coordinates")
    w = frame.frequency(s)
    width = np.sqrt(frame.hbar / (2 * frame.masses[s] * w))
    y = np.zeros(frame.dimension)
    y[s] = amplitude
    x = frame.from_frame(y)
    return GaussianPacket(tuple(x.tolist()), tuple([0.0] * frame.dimension), tuple([float(width)] * frame.dimension))
