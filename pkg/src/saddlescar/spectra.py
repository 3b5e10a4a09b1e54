"""Exact eigensolvers: plane waves on the circle, finite differences on 1D/2D grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import ConvergenceError, NumericError, ParameterError, SelectionError

__all__ = [
    "Spectrum1D",
    "GridSpectrum",
    "Spectrum2D",
    "solve_periodic_1d",
    "solve_grid_1d",
    "solve_grid_2d",
    "grid_axes",
    "transverse_localization_energy",
    "localized_level",
]


@dataclass(frozen=True)
class Spectrum1D:
    """Eigenpairs of a 2 pi-periodic 1D Hamiltonian in the basis ``e^{ikx}/sqrt(2 pi)``.

    ``eigenvectors[:, i]`` holds the plane-wave coefficients of level ``i``;
    ``grid_samples[i]`` is ``|F_i(x)|**2`` on ``x`` (uniform over [-pi, pi)).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    wavenumbers: np.ndarray
    x: np.ndarray
    grid_samples: np.ndarray
    mass: float
    hbar: float = 1.0
    residuals: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def wavefunction(self, i, x=None):
        x = self.x if x is None else np.asarray(x, dtype=float)
        basis = np.exp(1j * np.multiply.outer(x, self.wavenumbers)) / np.sqrt(2 * np.pi)
        return basis @ self.eigenvectors[:, i]

    @property
    def dx(self):
        return 2 * np.pi / self.x.size

    def to_json(self):
        return {
            "kind": "periodic-1d",
            "eigenvalues": self.eigenvalues.tolist(),
            "x": self.x.tolist(),
            "densities": self.grid_samples.tolist(),
            "coefficients_real": self.eigenvectors.real.T.tolist(),
            "coefficients_imag": self.eigenvectors.imag.T.tolist(),
            "wavenumbers": self.wavenumbers.tolist(),
            "metadata": {"mass": self.mass, "hbar": self.hbar, **self.meta},
        }


def _fourier_table(fourier_coefficients, K):
    if isinstance(fourier_coefficients, dict):
        return {int(q): complex(v) for q, v in fourier_coefficients.items()}
    arr = np.asarray(fourier_coefficients, dtype=complex)
    if arr.ndim != 1 or arr.size % 2 == 0:
        raise ParameterError("Fourier coefficient arrays must have odd length (modes -Q..Q)")
    Q = arr.size // 2
    return {q: arr[q + Q] for q in range(-Q, Q + 1) if arr[q + Q] != 0}


def solve_periodic_1d(mass, fourier_coefficients, K=128, n_levels=None, hbar=1.0, n_grid=None):
    """Diagonalize ``p**2/2m + V(x)`` on the circle in a plane-wave basis ``k = -K..K``.

    Parameters
    ----------
    mass : float
    fourier_coefficients : dict or array
        ``V(x) = sum_q V_q e^{iqx}``, as ``{q: V_q}`` or an odd-length array over
        ``q = -Q..Q``. Must satisfy ``V_{-q} = conj(V_q)``.
    K : int
        Basis half-size, at least 16.
    n_levels : int, optional
        Number of lowest levels returned (all ``2K+1`` by default).
    n_grid : int, optional
        Density sampling points on [-pi, pi); default ``4K`` (exact quadrature of
        the band-limited density).
    """
    if K < 16:
        raise ParameterError("K must be >= 16")
    if not mass > 0 or not hbar > 0:
        raise ParameterError("mass and hbar must be positive")
    table = _fourier_table(fourier_coefficients, K)
    for q, v in table.items():
        if abs(table.get(-q, 0.0) - np.conj(v)) > 1e-12 * max(1.0, abs(v)):
            raise ParameterError(f"potential is not real: V_{-q} != conj(V_{q})")
    k = np.arange(-K, K + 1)
    n = k.size
    H = np.diag((hbar * k) ** 2 / (2 * mass)).astype(complex)
    for q, v in table.items():
        if q == 0:
            H += v * np.eye(n)
        elif abs(q) < n:
            # <k|V|k'> = V_{k - k'}
            H += v * np.eye(n, k=-q)
    real = np.allclose(H.imag, 0.0)
    try:
        E, U = np.linalg.eigh(H.real if real else H)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    n_levels = n if n_levels is None else int(n_levels)
    E, U = E[:n_levels], U[:, :n_levels].astype(complex)
    res = np.linalg.norm(H @ U - U * E, axis=0)
    n_grid = 4 * K if n_grid is None else int(n_grid)
    x = -np.pi + 2 * np.pi * np.arange(n_grid) / n_grid
    basis = np.exp(1j * np.outer(x, k)) / np.sqrt(2 * np.pi)
    dens = np.abs(basis @ U).T ** 2
    return Spectrum1D(E, U, k, x, dens, float(mass), float(hbar), res, {"K": int(K)})


@dataclass(frozen=True)
class GridSpectrum:
    """Eigenpairs of a finite-difference Hamiltonian with zero boundary values.

    ``axes`` lists the coordinate arrays (x1 first). ``eigenvectors`` has shape
    (n_levels, N2, N1) in 2D (row-major, x1 fastest) or (n_levels, N1) in 1D,
    normalized so that ``sum |psi|**2 * cell_volume == 1``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    axes: tuple
    masses: np.ndarray
    hbar: float = 1.0
    residuals: np.ndarray | None = None
    hamiltonian: object = field(default=None, repr=False, compare=False)
    meta: dict = field(default_factory=dict)

    @property
    def spacing(self):
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def shape(self):
        return self.eigenvectors.shape[1:]

    def points(self):
        """Grid points, shape grid_shape + (d,), in (x1, x2) order."""
        if len(self.axes) == 1:
            return self.axes[0][:, None]
        X1, X2 = np.meshgrid(self.axes[0], self.axes[1])
        return np.stack([X1, X2], axis=-1)

    def density(self, i):
        return np.abs(self.eigenvectors[i]) ** 2

    def overlap_matrix(self):
        V = self.eigenvectors.reshape(len(self.eigenvalues), -1)
        return (V.conj() @ V.T) * self.cell_volume

    def rayleigh_quotients(self):
        if self.hamiltonian is None:
            raise ParameterError("hamiltonian not attached")
        V = self.eigenvectors.reshape(len(self.eigenvalues), -1)
        HV = (self.hamiltonian @ V.T).T
        return np.einsum("ij,ij->i", V.conj(), HV).real / np.einsum("ij,ij->i", V.conj(), V).real

    def to_json(self):
        return {
            "kind": f"grid-{len(self.axes)}d",
            "eigenvalues": self.eigenvalues.tolist(),
            "axes": [a.tolist() for a in self.axes],
            "shape": list(self.shape),
            "eigenvectors": [v.ravel().tolist() for v in self.eigenvectors],
            "metadata": {"masses": self.masses.tolist(), "hbar": self.hbar, **self.meta},
        }


Spectrum2D = GridSpectrum


def grid_axes(box, N):
    """Interior points of a Dirichlet box: ``N`` per axis, boundary excluded."""
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    Ns = np.broadcast_to(np.asarray(N, dtype=int), (box.shape[0],))
    return tuple(np.linspace(lo, hi, n + 2)[1:-1] for (lo, hi), n in zip(box, Ns))


def _second_difference(n, h):
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


def _check_uniform(a):
    d = np.diff(a)
    if a.size < 3 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
        raise ParameterError("grid axes must be uniform with at least 3 points")
    return float(d[0])


def _eigs(H, n_levels, sigma, tol, maxiter, dense_limit=2000):
    n = H.shape[0]
    if n_levels is None or n <= dense_limit:
        E, U = np.linalg.eigh(H.toarray())
        if sigma is not None:
            order = np.argsort(np.abs(E - sigma))[: n_levels or n]
            order = np.sort(order)
            E, U = E[order], U[:, order]
        elif n_levels is not None:
            E, U = E[:n_levels], U[:, :n_levels]
        return E, U
    if sigma is None:
        # shift-invert below the spectrum returns the lowest levels
        gersh = H.diagonal() - np.asarray(abs(H).sum(axis=1)).ravel() + np.abs(H.diagonal())
        sigma = float(np.min(gersh)) - 1.0
    # seeded start vector: reproducible, and not orthogonal to any symmetry sector
    v0 = np.random.default_rng(0).standard_normal(n)
    try:
        E, U = sla.eigsh(H.tocsc(), k=n_levels, sigma=sigma, which="LM", tol=tol, maxiter=maxiter, v0=v0)
    except sla.ArpackNoConvergence as exc:
        r = np.linalg.norm(H @ exc.eigenvectors - exc.eigenvectors * exc.eigenvalues, axis=0) if exc.eigenvalues.size else []
        raise ConvergenceError(
            f"eigsh did not converge: {exc.eigenvalues.size} of {n_levels} pairs, residuals {np.round(r, 12)}"
        ) from exc
    order = np.argsort(E)
    return E[order], U[:, order]


def _finish(H, E, U, axes, masses, hbar, shape, meta):
    res = np.linalg.norm(H @ U - U * E, axis=0)
    vol = float(np.prod([a[1] - a[0] for a in axes]))
    U = U / np.sqrt(vol)
    # deterministic sign: largest-magnitude component positive
    lead = np.argmax(np.abs(U), axis=0)
    U = U * np.sign(U[lead, np.arange(U.shape[1])])
    vecs = U.T.reshape((U.shape[1],) + shape)
    return GridSpectrum(E, vecs, tuple(axes), np.asarray(masses, dtype=float), float(hbar), res, H, meta)


def solve_grid_1d(mass, potential, box=None, N=None, n_levels=None, sigma=None, hbar=1.0,
                  axis=None, tol=0.0, maxiter=None):
    """Three-point finite-difference eigenpairs on a 1D grid with zero boundary values.

    ``potential`` is a :class:`PotentialField` of dimension 1 or an array of
    values on the grid. Give either ``box=(lo, hi)`` and ``N`` interior points,
    or the grid itself via ``axis``.
    """
    x = grid_axes([box], N)[0] if axis is None else np.asarray(axis, dtype=float)
    h = _check_uniform(x)
    V = potential.values(x[:, None]) if hasattr(potential, "values") else np.asarray(potential, dtype=float)
    H = (-(hbar**2) / (2 * mass)) * _second_difference(x.size, h) + sp.diags(V)
    E, U = _eigs(H.tocsr(), n_levels, sigma, tol, maxiter)
    return _finish(H, E, U, [x], [mass], hbar, (x.size,), {"N": int(x.size)})


def solve_grid_2d(masses, potential, box=None, N=128, n_levels=10, sigma=None, hbar=1.0,
                  axes=None, tol=0.0, maxiter=None):
    """Five-point finite-difference eigenpairs on a 2D box with zero boundary values.

    Parameters
    ----------
    masses : (m1, m2)
    potential : PotentialField
        Two-dimensional potential, evaluated on the grid.
    box : (x1_lo, x1_hi, x2_lo, x2_hi)
    N : int or (N1, N2)
        Interior points per axis.
    n_levels : int
        Number of eigenpairs: the lowest ones, or those closest to ``sigma``.
    sigma : float, optional
        Target energy for shift-invert Lanczos.
    axes : (x1, x2), optional
        Explicit uniform grid axes instead of ``box``/``N``.
    """
    if axes is None:
        if box is None:
            raise ParameterError("give box or axes")
        axes = grid_axes(np.asarray(box, dtype=float).reshape(2, 2), N)
    x1, x2 = (np.asarray(a, dtype=float) for a in axes)
    h1, h2 = _check_uniform(x1), _check_uniform(x2)
    m1, m2 = np.broadcast_to(np.asarray(masses, dtype=float), (2,))
    if m1 <= 0 or m2 <= 0:
        raise ParameterError("masses must be positive")
    X1, X2 = np.meshgrid(x1, x2)
    V = potential.values(np.stack([X1, X2], axis=-1))
    if not np.all(np.isfinite(V)):
        raise NumericError("non-finite potential on grid")
    T1 = (-(hbar**2) / (2 * m1)) * _second_difference(x1.size, h1)
    T2 = (-(hbar**2) / (2 * m2)) * _second_difference(x2.size, h2)
    H = (sp.kron(sp.identity(x2.size), T1) + sp.kron(T2, sp.identity(x1.size)) + sp.diags(V.ravel())).tocsr()
    E, U = _eigs(H, n_levels, sigma, tol, maxiter)
    meta = {"N": [int(x1.size), int(x2.size)], "potential": getattr(potential, "name", "array")}
    return _finish(H, E, U, [x1, x2], [m1, m2], hbar, (x2.size, x1.size), meta)


def localized_level(energies, densities, x, center=0.0, e_floor=-np.inf, tol=None):
    """Index of the lowest level with ``E >= e_floor`` whose density peaks at ``center``.

    ``densities`` has shape (n_levels, n_x). The peak must land on the grid
    point nearest ``center`` (within ``tol``, default one grid spacing).
    """
    x = np.asarray(x, dtype=float)
    tol = (x[1] - x[0]) * (1 + 1e-9) if tol is None else tol
    for i in np.argsort(energies):
        if energies[i] < e_floor:
            continue
        if abs(x[np.argmax(densities[i])] - center) <= tol:
            return int(i)
    raise SelectionError(f"no level above {e_floor} peaks at x={center}")


def transverse_localization_energy(frame, axis=None, halfwidth=None, N=None, spacing=None, n_levels=None):
    """Localization energy of the transverse state sitting on top of the saddle.

    Solves the 1D problem along the unstable axis through the saddle, on a
    Dirichlet grid of half-width ``halfwidth`` (``N`` points, or points at the
    given ``spacing`` with one of them on the saddle), and returns
    ``E - V_saddle`` for the lowest level above the saddle value whose density
    peaks at the saddle.
    """
    u = frame.default_unstable_axis() if axis is None else axis
    if frame.potential is None:
        raise ParameterError("frame needs an attached potential")
    U = frame.frame_potential()
    if spacing is not None:
        n_half = int(round(halfwidth / spacing))
        t = spacing * np.arange(-n_half, n_half + 1)
    else:
        t = grid_axes([(-halfwidth, halfwidth)], N)[0]
    pts = np.zeros((t.size, frame.dimension))
    pts[:, u] = t
    V = U.values(pts)
    spec = solve_grid_1d(frame.masses[u], V, axis=t, n_levels=n_levels, hbar=frame.hbar)
    dens = np.array([spec.density(i) for i in range(len(spec.eigenvalues))])
    i = localized_level(spec.eigenvalues, dens, t, 0.0, e_floor=frame.value)
    return float(spec.eigenvalues[i] - frame.value)
