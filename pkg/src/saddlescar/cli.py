"""Command-line scenario runner.

Each subcommand reads a scenario config, runs one pipeline and writes its
data files plus ``manifest.json`` into the output directory. Nothing is
written unless the pipeline completes.

Exit status: 0 on success, 2 for usage or configuration errors, 1 for
numerical or I/O failures.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import analysis, classical, io, potentials, semiclassical, spectra, wavepacket
from .config import ConfigError, load_config
from .errors import GeometryError, ParameterError, SaddleScarError

COMMANDS = {
    "critical-points": "locate a critical point and its principal axes",
    "monodromy": "transverse monodromy and D, W of the stable-manifold orbit",
    "scar-predict": "transverse scar profiles, passing sums and scar energies",
    "solve1d": "1D spectrum (plane waves on the circle, or a Dirichlet grid)",
    "solve2d": "2D finite-difference spectrum in a box",
    "wavepacket": "split-step packet run, autocorrelation and spectral peaks",
    "detect-scars": "score exact 2D states against the scar model",
    "fig1": "exact versus semiclassical density at a 1D maximum",
    "coulomb-saddle": "Hessian signature of the regularized three-charge potential",
}


class Context:
    """Potential, masses and saddle frame derived from a validated config."""

    def __init__(self, cfg):
        self.cfg = cfg
        p = cfg["potential"]
        if p["id"] == "quadratic-saddle":
            self.potential = potentials.make_potential(
                "quadratic-saddle", sigmas=p["sigmas"], quartic=p["quartic"] or None, rotation=p["rotation"]
            )
        elif p["id"] == "cosine":
            self.potential = potentials.CosinePotential(p["g"])
        else:
            self.potential = potentials.CoulombRegularized(p["eps"], derivative_mode="finite-difference")
        d = self.potential.dimension
        m = cfg["physics"]["masses"]
        if len(m) not in (1, d):
            raise ConfigError(f"physics.masses needs 1 or {d} entries, got {len(m)}")
        self.masses = np.broadcast_to(np.asarray(m, dtype=float), (d,)).copy()
        self.hbar = cfg["physics"]["hbar"]
        start = cfg["solver"]["start"]
        if start and len(start) != d:
            raise ConfigError(f"solver.start needs {d} entries")
        self.start = np.asarray(start, dtype=float) if start else np.zeros(d)
        self._frame = None
        self._cp = None

    @property
    def dimension(self):
        return self.potential.dimension

    def critical_point(self):
        if self._cp is None:
            self._cp = potentials.find_critical_point(self.potential, self.start)
        return self._cp

    def frame(self):
        if self._frame is None:
            self._frame = potentials.saddle_frame(
                self.critical_point(), self.masses, self.hbar, potential=self.potential,
                allow_transverse_only=self.dimension == 1,
            )
        return self._frame

    def require(self, d, command):
        if self.dimension != d:
            raise ConfigError(f"{command} needs a {d}D potential, got {self.dimension}D")

    def box(self):
        """Dirichlet box as ((lo, hi), ...): configured, or 6 x max(turning point, packet width)."""
        b = self.cfg["solver"]["box"]
        d = self.dimension
        if b:
            if len(b) != 2 * d:
                raise ConfigError(f"solver.box needs {2 * d} numbers")
            return np.asarray(b, dtype=float).reshape(d, 2)
        return self._auto_box()

    def grid_box(self):
        b = self.cfg["solver"]["grid_box"]
        d = self.dimension
        if b:
            if len(b) != 2 * d:
                raise ConfigError(f"solver.grid_box needs {2 * d} numbers")
            return np.asarray(b, dtype=float).reshape(d, 2)
        return self._auto_box()

    def _auto_box(self):
        f = self.frame()
        s = f.default_stable_axis()
        if s is None:
            raise ConfigError("solver.box is required for this potential")
        width = math.sqrt(self.hbar / (2 * f.masses[s] * f.frequency(s)))
        half = 6 * max(self.cfg["analysis"]["amplitude"], width)
        c = f.origin
        return np.column_stack([c - half, c + half])

    def n_points(self, key):
        N = self.cfg["solver"][key]
        if len(N) not in (1, self.dimension):
            raise ConfigError(f"solver.{key} needs 1 or {self.dimension} entries")
        return [int(n) for n in np.broadcast_to(N, (self.dimension,))]

    def localization_energy(self):
        f = self.frame()
        if self.cfg["potential"]["id"] == "cosine":
            # periodic problem: lowest level above the maximum that peaks on it
            sp = spectra.solve_periodic_1d(self.masses[0], self.potential.fourier_coefficients(),
                                           K=self.cfg["solver"]["K"], hbar=self.hbar)
            i = spectra.localized_level(sp.eigenvalues, sp.grid_samples, sp.x, f.origin[0], f.value)
            return float(sp.eigenvalues[i] - f.value)
        u = f.default_unstable_axis()
        half = self.cfg["analysis"]["localization_halfwidth"]
        if half <= 0:
            box = self.box()
            half = float(np.min(np.abs(box[u] - f.origin[u])))
        N = self.n_points("N")[u]
        return spectra.transverse_localization_energy(f, u, halfwidth=half, N=N)


def _say(quiet, msg):
    if not quiet:
        print(msg)


def cmd_critical_points(ctx, quiet):
    cp = ctx.critical_point()
    f = ctx.frame()
    kinds = ["stable" if s > 0 else "unstable" for s in f.sigmas]
    rows = []
    for i, (s, k) in enumerate(zip(f.sigmas, kinds)):
        rate = f.frequency(i) if s > 0 else f.unstable_rate(i)
        rows.append((i, k, 2 * s, s, rate))
    out = [
        io.Table("principal_axes.csv", ("axis", "kind", "eigenvalue", "sigma", "rate"), rows),
        io.Document("critical_point.json", {
            "location": cp.location, "value": cp.value, "hessian": cp.hessian,
            "eigenvalues": cp.eigenvalues, "eigenvectors": cp.eigenvectors, "index": cp.index,
            "gradient_norm": cp.gradient_norm, "iterations": cp.iterations,
            "frame_axes": f.axes, "frame_sigmas": f.sigmas,
        }),
    ]
    n_s = kinds.count("stable")
    _say(quiet, f"critical-points: V={io.fmt(cp.value)} at {[io.fmt(x) for x in cp.location]}, "
                f"{n_s} stable / {len(kinds) - n_s} unstable")
    return out


def cmd_monodromy(ctx, quiet):
    f = ctx.frame()
    s = f.default_stable_axis()
    if s is None or not f.unstable_axes:
        raise ParameterError("monodromy needs a saddle with stable and unstable axes")
    orbit = classical.SaddleOrbitSpec(f, s, ctx.cfg["analysis"]["amplitude"])
    sv = ctx.cfg["solver"]
    M = classical.integrate_monodromy(orbit, dt=sv["monodromy_dt"] * orbit.period, order=sv["order"])
    c = classical.coefficients_from_monodromy(M)
    k = M.size
    closed = None
    doc = {
        "period": M.period, "D": c.D, "W": c.W, "theta": c.theta, "lyapunov": c.lyapunov,
        "symplectic_error": M.symplectic_error(), "W0": classical.limiting_W(f),
    }
    if k == 1:
        closed = classical.closed_form_monodromy(f, s).matrix
        a = classical.analytic_saddle_coefficients(f, s)
        doc.update({"closed_form": {"D": a.D, "W": a.W, "theta": a.theta, "period": a.period},
                    "max_entry_error": float(np.max(np.abs(M.matrix - closed)))})
    rows = []
    for i in range(2 * k):
        for j in range(2 * k):
            rows.append((i, j, M.matrix[i, j], closed[i, j] if closed is not None else float("nan")))
    _say(quiet, f"monodromy: T={io.fmt(M.period)} theta={io.fmt(c.theta)} D={io.fmt(c.D)} "
                f"symplectic error {M.symplectic_error():.2e}")
    return [io.Table("monodromy.csv", ("row", "col", "numeric", "closed_form"), rows),
            io.Document("coefficients.json", doc)]


def cmd_scar_predict(ctx, quiet):
    f = ctx.frame()
    an = ctx.cfg["analysis"]
    s = f.default_stable_axis()
    W0 = classical.limiting_W(f)
    node = semiclassical.first_node(W0, f.hbar)
    xmax = an["x2_max"] if an["x2_max"] > 0 else node
    x2 = np.linspace(-xmax, xmax, an["n_points"])
    cols = [x2, semiclassical.transverse_scar_factor(W0, f.hbar, x2)]
    header = ["x2", "factor_W0"]
    E_loc = ctx.localization_energy()
    energies = []
    if s is not None:
        coeffs = classical.analytic_saddle_coefficients(f, s)
        cols.append(semiclassical.transverse_scar_factor(coeffs.W, f.hbar, x2))
        ps = semiclassical.PassingSum.for_frame(f, nu=an["nu"], n_max=an["n_passings"])
        total, last = semiclassical.passing_sum(ps, f, x2)
        cols += [total.real, total.imag]
        header += ["factor_W", "passing_sum_real", "passing_sum_imag"]
        for n in an["n_values"]:
            m = semiclassical.scar_model(f, n, coeffs)
            energies.append((n, semiclassical.scar_energy_estimate(f, n, E_loc), m.W_n, m.validity_halfwidth))
    else:
        energies.append((0, semiclassical.scar_energy_estimate(f, 0, E_loc), W0, node))
    _say(quiet, f"scar-predict: W0={io.fmt(W0)} first node {io.fmt(node)}, E_loc={io.fmt(E_loc)}, "
                f"E(n={energies[0][0]})={io.fmt(energies[0][1])}")
    return [io.Table("scar_profile.csv", tuple(header), list(zip(*cols))),
            io.Table("scar_energies.csv", ("n", "energy", "W", "first_node"), energies)]


def cmd_solve1d(ctx, quiet):
    ctx.require(1, "solve1d")
    sv = ctx.cfg["solver"]
    if ctx.cfg["potential"]["id"] == "cosine":
        sp = spectra.solve_periodic_1d(ctx.masses[0], ctx.potential.fourier_coefficients(), K=sv["K"],
                                       n_levels=sv["n_levels"], hbar=ctx.hbar)
    else:
        (lo, hi), = ctx.box()
        sp = spectra.solve_grid_1d(ctx.masses[0], ctx.potential, box=(lo, hi), N=ctx.n_points("N")[0],
                                   n_levels=sv["n_levels"], hbar=ctx.hbar)
    rows = list(zip(range(len(sp.eigenvalues)), sp.eigenvalues, sp.residuals))
    _say(quiet, f"solve1d: {len(rows)} levels, E0={io.fmt(sp.eigenvalues[0])}, max residual {max(sp.residuals):.1e}")
    return [io.Table("eigenvalues.csv", ("index", "energy", "residual"), rows),
            io.Document("spectrum1d.json", sp.to_json())]


def _solve2d(ctx, n_levels, sigma=None):
    box = ctx.box()
    return spectra.solve_grid_2d(ctx.masses, ctx.potential, box=box.ravel(), N=ctx.n_points("N"),
                                 n_levels=n_levels, sigma=sigma, hbar=ctx.hbar)


def cmd_solve2d(ctx, quiet):
    ctx.require(2, "solve2d")
    sp = _solve2d(ctx, ctx.cfg["solver"]["n_levels"])
    rows = list(zip(range(len(sp.eigenvalues)), sp.eigenvalues, sp.residuals))
    out = [io.Table("eigenvalues.csv", ("index", "energy", "residual"), rows),
           io.Document("spectrum2d.json", sp.to_json())]
    if len(sp.eigenvalues) >= 10:
        E, d = analysis.level_density(sp.eigenvalues, ctx.cfg["analysis"]["smoothing"])
        out.append(io.Table("level_density.csv", ("energy", "density"), list(zip(E, d))))
    _say(quiet, f"solve2d: {len(rows)} levels in [{io.fmt(sp.eigenvalues[0])}, {io.fmt(sp.eigenvalues[-1])}]")
    return out


def cmd_wavepacket(ctx, quiet):
    ctx.require(2, "wavepacket")
    f = ctx.frame()
    s = f.default_stable_axis()
    if s is None:
        raise ParameterError("wavepacket needs a stable axis")
    sv, an = ctx.cfg["solver"], ctx.cfg["analysis"]
    gb = ctx.grid_box()
    grid = wavepacket.PeriodicGrid(tuple(gb[:, 0]), tuple(gb[:, 1]), tuple(ctx.n_points("grid")))
    packet = wavepacket.scar_packet(f, an["amplitude"])
    run = wavepacket.WavePacketRun(grid, packet, sv["dt"], sv["steps"], tuple(ctx.masses), ctx.hbar)
    progress = None if quiet else (lambda k, n: print(f"  step {k}/{n}", file=sys.stderr))
    wavepacket.propagate_splitstep(run, ctx.potential, progress=progress, check_every=max(500, sv["steps"] // 10))
    weights = wavepacket.heller_analysis(run)
    coeffs = classical.analytic_saddle_coefficients(f, s)
    pa = analysis.peak_and_decay_analysis(run, weights, tau=coeffs.period, lam=coeffs.lyapunov)
    peaks = [("time", *r) for r in zip(pa.time_peaks.positions, pa.time_peaks.widths, pa.time_peaks.masses)]
    peaks += [("energy", *r) for r in zip(pa.energy_peaks.positions, pa.energy_peaks.widths, pa.energy_peaks.masses)]
    C = run.overlaps
    summary = {
        "energy_mean": run.energy_mean, "energy_std": run.energy_std, "tau": coeffs.period,
        "lyapunov": coeffs.lyapunov, "tau_fit": pa.tau_fit, "decay_rate": pa.decay_rate,
        "decay_per_traversal": pa.decay_per_traversal,
        "predicted_decay_per_traversal": pa.predicted_decay_per_traversal,
        "energy_spacing": pa.energy_spacing, "predicted_spacing": pa.predicted_spacing,
        "max_norm_drift_per_step": run.max_norm_drift_per_step(), "resolution": weights.resolution,
    }
    _say(quiet, f"wavepacket: {len(pa.time_peaks)} resurgences, tau_fit={io.fmt(pa.tau_fit)} "
                f"(tau={io.fmt(coeffs.period)}), S(E) spacing {io.fmt(pa.energy_spacing)}")
    return [io.Table("overlaps.csv", ("t", "re", "im", "abs", "norm"),
                     list(zip(run.times, C.real, C.imag, np.abs(C), run.norms))),
            io.Table("spectral_density.csv", ("energy", "S"), list(zip(weights.energies, weights.S))),
            io.Table("peaks.csv", ("kind", "position", "width", "mass"), peaks),
            io.Document("wavepacket.json", summary)]


def cmd_detect_scars(ctx, quiet):
    ctx.require(2, "detect-scars")
    f = ctx.frame()
    if f.default_stable_axis() is None:
        raise ParameterError("detect-scars needs a stable axis")
    E_loc = ctx.localization_energy()
    n_levels = ctx.cfg["solver"]["n_levels"]
    found = []
    all_E = []
    for n in ctx.cfg["analysis"]["n_values"]:
        est = semiclassical.scar_energy_estimate(f, n, E_loc)
        sp = _solve2d(ctx, n_levels, sigma=est)
        det = analysis.detect_scars(sp, f, [n], E_loc)[0]
        if det.best is None:
            raise GeometryError(f"no state within the search window of E({n})={est:.6g}")
        found.append(det)
        all_E.extend(sp.eigenvalues.tolist())
    # state_index: position in the merged, energy-sorted set of computed states
    merged = sorted(set(round(e, 10) for e in all_E))
    index = {e: i for i, e in enumerate(merged)}
    scores, ladder = [], []
    for det in found:
        for sc in det.candidates:
            scores.append((index[round(sc.energy, 10)], sc.energy, sc.score))
        b = det.best
        ladder.append((det.n, det.estimate, index[round(b.energy, 10)], b.energy, b.score))
    w1 = f.hbar * f.frequency(f.default_stable_axis())
    spacing = np.diff([r[3] for r in ladder]) / np.diff([r[0] for r in ladder]) if len(ladder) > 1 else []
    _say(quiet, "detect-scars: " + ", ".join(f"n={r[0]} E={io.fmt(r[3])} score={r[4]:.4f}" for r in ladder)
         + (f"; spacing/hbar w1 = {[round(float(x / w1), 4) for x in spacing]}" if len(spacing) else ""))
    return [io.Table("scores.csv", ("state_index", "energy", "score"), scores),
            io.Table("scar_ladder.csv", ("n", "estimate", "state_index", "energy", "score"), ladder)]


def cmd_fig1(ctx, quiet):
    ctx.require(1, "fig1")
    if ctx.cfg["potential"]["id"] != "cosine":
        raise ConfigError("fig1 needs potential.id = cosine")
    an = ctx.cfg["analysis"]
    sp = spectra.solve_periodic_1d(ctx.masses[0], ctx.potential.fourier_coefficients(), K=ctx.cfg["solver"]["K"],
                                   hbar=ctx.hbar)
    model = semiclassical.scar_model(ctx.frame(), 0)
    r = analysis.fig1_comparison(sp, model, an["target_energy"], an["delta_e"])
    _say(quiet, f"fig1: selected E={io.fmt(r.energy)} (level {r.index}), {len(r.x)} rows, "
                f"mean deviation {r.mean_deviation:.4f}, max {r.max_deviation:.4f} on |x|<={io.fmt(r.window)}")
    return [io.Table("fig1.csv", ("x", "exact_density", "semiclassical_density"), r.rows().tolist()),
            io.Document("fig1_summary.json", {
                "energy": r.energy, "index": r.index, "W0": model.W_n, "first_node": model.validity_halfwidth,
                "window": r.window, "max_relative_deviation": r.max_deviation,
                "mean_relative_deviation": r.mean_deviation, "rows": len(r.x),
            })]


def cmd_coulomb_saddle(ctx, quiet):
    if ctx.cfg["potential"]["id"] != "coulomb-regularized":
        raise ConfigError("coulomb-saddle needs potential.id = coulomb-regularized")
    eps = ctx.cfg["potential"]["eps"]
    x0 = np.zeros(6)
    H = ctx.potential.hessian(x0)
    sig = 0.5 * np.linalg.eigvalsh(H)
    expected = np.array([-1 / (4 * eps**3)] * 3 + [1 / eps**3] * 3)
    rel = np.abs(sig - expected) / np.abs(expected)
    rows = [(i, 2 * s, s, e, r) for i, (s, e, r) in enumerate(zip(sig, expected, rel))]
    n_st, n_un = int(np.sum(sig > 0)), int(np.sum(sig < 0))
    _say(quiet, f"coulomb-saddle: eps={io.fmt(eps)} signature {n_st} stable + {n_un} unstable, "
                f"max relative error {rel.max():.2e}")
    return [io.Table("coulomb_saddle.csv", ("axis", "eigenvalue", "sigma", "expected_sigma", "relative_error"), rows),
            io.Document("coulomb_saddle.json", {
                "eps": eps, "value": ctx.potential.value(x0), "hessian": H,
                "stable": n_st, "unstable": n_un, "max_relative_error": float(rel.max()),
            })]


PIPELINES = {
    "critical-points": cmd_critical_points,
    "monodromy": cmd_monodromy,
    "scar-predict": cmd_scar_predict,
    "solve1d": cmd_solve1d,
    "solve2d": cmd_solve2d,
    "wavepacket": cmd_wavepacket,
    "detect-scars": cmd_detect_scars,
    "fig1": cmd_fig1,
    "coulomb-saddle": cmd_coulomb_saddle,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="saddlescar",
        description="Saddle-point scar scenarios: classical saddle data, scar predictions and exact quantum checks.",
    )
    sub = p.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name, text in COMMANDS.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", metavar="PATH", help="scenario file (INI sections or JSON)")
        sp.add_argument("--out", metavar="DIR", help="output directory (overrides output.directory)")
        sp.add_argument("--override", metavar="KEY=VALUE", action="append", default=[],
                        help="set section.key=value; repeatable")
        sp.add_argument("--quiet", action="store_true", help="suppress the summary lines")
    return p


def run_command(argv=None):
    """Parse ``argv``, run the pipeline and write outputs; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, args.override)
        ctx = Context(cfg)
    except ConfigError as exc:
        print(f"saddlescar: config error: {exc}", file=sys.stderr)
        return 2
    except SaddleScarError as exc:
        print(f"saddlescar: config error: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out or cfg["output"]["directory"]
    try:
        results = PIPELINES[args.command](ctx, args.quiet)
    except ConfigError as exc:
        print(f"saddlescar: config error: {exc}", file=sys.stderr)
        return 2
    except SaddleScarError as exc:
        print(f"saddlescar: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    try:
        io.emit_outputs(results, out_dir, cfg.digest(), args.command)
    except OSError as exc:
        print(f"saddlescar: cannot write outputs: {exc}", file=sys.stderr)
        return 1
    _say(args.quiet, f"wrote {len(results)} file(s) + {io.MANIFEST} to {out_dir}")
    return 0


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
