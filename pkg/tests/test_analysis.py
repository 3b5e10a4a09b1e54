import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddlescar import analysis as A
from saddlescar import potentials as P
from saddlescar import semiclassical as S
from saddlescar import spectra
from saddlescar import wavepacket as wp
from saddlescar.errors import GeometryError, InsufficientSignalError, ParameterError, SelectionError


@pytest.fixture(scope="module")
def saddle_spectrum():
    pot = P.QuadraticSaddle((1.0, -2.0), quartic=(0.0, 0.02))
    f = P.saddle_frame(P.find_critical_point(pot, [0, 0]), [1, 1], potential=pot)
    E_loc = spectra.transverse_localization_energy(f, halfwidth=10.0, N=128)
    est = S.scar_energy_estimate(f, 0, E_loc)
    sp = spectra.solve_grid_2d((1, 1), pot, (-10, 10, -10, 10), N=128, n_levels=12, sigma=est)
    return f, E_loc, sp


def test_model_scores_itself(unit_saddle_frame):
    m = S.scar_model(unit_saddle_frame, 1)
    x = np.linspace(-4, 4, 81)
    X1, X2 = np.meshgrid(x, x)
    ref = m.evaluate(X1, X2, clamp=False)
    tube = A.default_tube(m)
    mask = tube.mask(X1, X2)
    assert A.correlation_score(ref[mask], ref[mask]) == pytest.approx(1.0, abs=1e-12)
    assert A.correlation_score(7.0 * ref[mask], 0.1 * ref[mask]) == pytest.approx(1.0, abs=1e-12)


def test_scar_rank_scale_invariance_and_parity(saddle_spectrum):
    f, _, sp = saddle_spectrum
    m0 = S.scar_model(f, 0)
    ranked = A.scar_rank(sp, m0)
    assert [r.score for r in ranked] == sorted((r.score for r in ranked), reverse=True)
    top = ranked[0]
    assert top.score >= 0.9
    # same state, rescaled density
    scaled = spectra.GridSpectrum(sp.eigenvalues, 3.0 * sp.eigenvectors, sp.axes, sp.masses)
    np.testing.assert_allclose([r.score for r in A.scar_rank(scaled, m0)], [r.score for r in ranked], atol=1e-12)
    # odd-n model against the even scar state: far below the matched score
    m1 = S.scar_model(f, 1)
    odd = A.scar_rank(sp, m1, indices=[top.index])[0]
    assert odd.score < 0.5 * top.score


@pytest.mark.xfail(strict=True, reason="density correlation keeps the shared transverse profile; see notes")
def test_scar_rank_parity_mismatch_bound(saddle_spectrum):
    f, _, sp = saddle_spectrum
    top = A.scar_rank(sp, S.scar_model(f, 0))[0]
    odd = A.scar_rank(sp, S.scar_model(f, 1), indices=[top.index])[0]
    assert abs(odd.score) <= 0.1


def test_scar_rank_empty_tube(saddle_spectrum):
    f, _, sp = saddle_spectrum
    with pytest.raises(GeometryError):
        A.scar_rank(sp, S.scar_model(f, 0), A.Tube(1e-6, 1e-6))


def test_detect_scars_ladder(saddle_spectrum):
    f, E_loc, _ = saddle_spectrum
    pot = f.potential
    energies = []
    for n in range(3):
        est = S.scar_energy_estimate(f, n, E_loc)
        sp = spectra.solve_grid_2d((1, 1), pot, (-10, 10, -10, 10), N=128, n_levels=12, sigma=est)
        d = A.detect_scars(sp, f, [n], E_loc)[0]
        assert d.best.score >= 0.9
        energies.append(d.best.energy)
    np.testing.assert_allclose(np.diff(energies), np.sqrt(2), rtol=0.1)


def _synthetic(tau, lam, width=0.08, n=5, dt=1e-3):
    t = np.arange(0, (n - 0.5) * tau, dt)
    C = sum(np.exp(-k * tau * lam / 2) * np.exp(-((t - k * tau) ** 2) / (2 * width**2)) for k in range(n))
    return t, C


def test_synthetic_peaks():
    t, C = _synthetic(2.0, 0.6)
    pa = A.peak_and_decay_analysis((t, C), tau=2.0, lam=0.6)
    assert pa.tau_fit == pytest.approx(2.0, rel=0.01)
    assert pa.decay_rate == pytest.approx(0.3, rel=0.01)
    assert pa.decay_per_traversal == pytest.approx(pa.predicted_decay_per_traversal, rel=0.01)
    ps = pa.time_peaks
    assert np.all(np.diff(ps.positions) > 0) and np.all(ps.widths > 0)
    assert ps.masses.sum() <= np.trapezoid(C, t) * (1 + 1e-12)
    assert ps.widths[1] == pytest.approx(2 * np.sqrt(2 * np.log(2)) * 0.08, rel=0.02)


@settings(max_examples=10, deadline=None, derandomize=True)
@given(st.floats(1.0, 6.0), st.floats(0.05, 1.0), st.floats(0.03, 0.15))
def test_synthetic_suite(tau, lam, width):
    t, C = _synthetic(tau, lam, width)
    pa = A.peak_and_decay_analysis((t, C), tau=tau, lam=lam)
    assert pa.tau_fit == pytest.approx(tau, rel=0.01)
    assert pa.decay_rate == pytest.approx(lam / 2, rel=0.01)


def test_stationary_signal_is_insufficient():
    t = np.linspace(0, 10, 1001)
    with pytest.raises(InsufficientSignalError):
        A.peak_and_decay_analysis((t, np.exp(-1.3j * t)), tau=2.0, lam=0.1)
    with pytest.raises(ParameterError):
        A.peak_and_decay_analysis((t, np.ones_like(t)), tau=0.0, lam=0.1)


def test_stationary_run_is_insufficient():
    pot = P.QuadraticSaddle((0.5,))
    g = wp.PeriodicGrid((-10.0,), (10.0,), (128,))
    run = wp.WavePacketRun(g, wp.GaussianPacket((0.0,), (0.0,), (1 / np.sqrt(2),)), 0.01, 2000, (1.0,))
    wp.propagate_splitstep(run, pot)
    with pytest.raises(InsufficientSignalError):
        A.peak_and_decay_analysis(run, wp.heller_analysis(run), tau=2 * np.pi, lam=0.1)


def test_level_density():
    E = np.arange(100) * 0.5
    grid, d = A.level_density(E, 1.0)
    assert np.trapezoid(d, grid) == pytest.approx(100, rel=1e-6)
    bulk = (grid > 10) & (grid < 40)
    np.testing.assert_allclose(d[bulk], 2.0, rtol=0.02)
    g2, d2 = A.level_density(2 * E, 2.0, grid=2 * grid)
    np.testing.assert_allclose(d2[bulk], 0.5 * d[bulk], rtol=1e-12)
    with pytest.raises(ParameterError):
        A.level_density(E[:5], 1.0)


def test_level_density_grows_on_confined_saddle(confined_saddle):
    pot, _ = confined_saddle
    sp = spectra.solve_grid_2d((1, 1), pot, (-10, 10, -10, 10), N=64, n_levels=80)
    grid, d = A.level_density(sp.eigenvalues, 1.0)
    inner = (grid > sp.eigenvalues[0] + 2) & (grid < sp.eigenvalues[-1] - 2)
    slope = np.polyfit(grid[inner], d[inner], 1)[0]
    assert slope > 0


def test_fig1(mathieu_frame):
    _, f = mathieu_frame
    sp = spectra.solve_periodic_1d(0.5, {-1: 50.0, 1: 50.0}, K=128)
    m = S.scar_model(f, 0)
    r = A.fig1_comparison(sp, m, 101.189)
    assert abs(r.energy - 101.189) < 0.05
    i0 = np.argmin(np.abs(r.x))
    assert r.model[i0] == r.exact[i0]
    assert np.all(np.abs(r.x) <= m.validity_halfwidth)
    assert r.window == pytest.approx(0.236, abs=1e-3)
    assert r.mean_deviation <= 0.1
    fine = A.fig1_comparison(spectra.solve_periodic_1d(0.5, {-1: 50.0, 1: 50.0}, K=192, n_grid=512), m, 101.189)
    common = np.isin(np.round(fine.x, 12), np.round(r.x, 12))
    np.testing.assert_allclose(fine.exact[common], r.exact, atol=1e-3)
    with pytest.raises(SelectionError):
        A.fig1_comparison(sp, m, 101.189 + 5.0, energy_window=0.5)
