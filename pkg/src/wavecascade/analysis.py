"""Post-processing: oracle curves on the simulation lattice, fit windows, CSV output.

Fit windows are picked from the oracle, never from Monte-Carlo data: inside
the nominal window, keep the longest contiguous stretch where the oracle
curve's local log-log slope is within ``tol`` of the target exponent.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .forcing import effective_psi
from .integrator import SimulationConfig
from .oracle.spectrum import AnalyticParams, theoretical_spectrum
from .stats import PowerLawFit, StatsAccumulator, fit_power_law, lag1_autocorrelation


def oracle_params(cfg: SimulationConfig, mode: str = "lattice") -> AnalyticParams:
    return AnalyticParams(d=cfg.d, H=cfg.H, c=cfg.c, kappa=cfg.params.kappa,
                          psi=effective_psi(cfg.forcing_spec, mode), nu=cfg.nu)


def oracle_shell_spectrum(cfg: SimulationConfig, t: float = np.inf) -> np.ndarray:
    """Predicted periodogram per shell (NaN at and below kappa)."""
    r = np.arange(cfg.grid.n_shells) * cfg.grid.dk
    out = np.full(r.shape, np.nan)
    live = r > cfg.params.kappa * (1 + 1e-12)
    out[live] = theoretical_spectrum(oracle_params(cfg), t, r[live])
    return out


def oracle_structure_function(cfg: SimulationConfig, lags, t: float = np.inf) -> np.ndarray:
    """Expected S2 of the lattice field whose mode variances follow the oracle.

    Uses the same normalisation as the estimator (physical field by inverse
    DFT), averaged over the d axes.
    """
    g = cfg.grid
    shell = oracle_shell_spectrum(cfg, t)
    mode_var = np.nan_to_num(shell[g.shell_id])
    mode_var[g.low_mode_mask(cfg.params.kappa)] = 0.0
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    norm = float(g.N) ** (2 * g.d)
    out = np.zeros(lags.size)
    for j in range(g.d):
        kj = np.broadcast_to(g.k_axes[j], g.shape).ravel() / g.dk
        w = mode_var.ravel()
        for i, m in enumerate(lags):
            out[i] += np.sum(w * 2 * (1 - np.cos(2 * np.pi * kj * m / g.N))) / norm
    return out / g.d


def local_slopes(x, y) -> np.ndarray:
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return np.gradient(ly, lx)


def oracle_window(x, y, target: float, tol: float, bounds=None, min_points: int = 5):
    """Longest run (in log x) of points whose oracle local slope is within tol of target."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(y) & (y > 0) & (x > 0)
    if bounds is not None:
        ok &= (x >= bounds[0] * (1 - 1e-12)) & (x <= bounds[1] * (1 + 1e-12))
    idx = np.flatnonzero(ok)
    slopes = np.full(x.shape, np.nan)
    if idx.size >= 2:
        slopes[idx] = local_slopes(x[idx], y[idx])
    good = ok & (np.abs(slopes - target) <= tol)
    best, best_len, start = None, -1.0, None
    for i in range(x.size + 1):
        inside = i < x.size and good[i]
        if inside and start is None:
            start = i
        elif not inside and start is not None:
            run = (start, i - 1)
            span = np.log(x[run[1]] / x[run[0]])
            if run[1] - run[0] + 1 >= min_points and span > best_len:
                best, best_len = run, span
            start = None
    if best is None:
        raise ValueError(f"no window of {min_points} points with oracle slope within "
                         f"{tol} of {target} inside {bounds}")
    return float(x[best[0]]), float(x[best[1]])


def default_spectrum_window(cfg: SimulationConfig) -> tuple[float, float]:
    g = cfg.grid
    return 2 * cfg.k_hi * g.dk, g.k_max / 4


def default_s2_window(cfg: SimulationConfig) -> tuple[float, float]:
    g = cfg.grid
    return 4 * g.dx, g.L_tot / 8


def viscous_compensation(cfg: SimulationConfig, r) -> np.ndarray:
    """``exp(8 pi^2 nu r^3 / 3c)``: undoes the viscous factor of the predicted spectrum."""
    return np.exp(8 * np.pi**2 * cfg.nu / (3 * cfg.c) * np.asarray(r, dtype=float) ** 3)


@dataclass
class RunSummary:
    spectrum_fit: PowerLawFit | None
    spectrum_fit_raw: PowerLawFit | None
    s2_fit: PowerLawFit | None
    s2_dissipative_fit: PowerLawFit | None
    l2_mean: float
    l2_stderr: float
    l2_lag1: float
    n_effective: float


def summarize(acc: StatsAccumulator, cfg: SimulationConfig, tol: float = 0.1) -> RunSummary:
    """Fit the spectrum (viscous-compensated) and S2 in oracle-selected windows."""
    g = cfg.grid
    r = acc.shell_r
    q = -(2 * cfg.H + cfg.d)
    oracle = oracle_shell_spectrum(cfg) * viscous_compensation(cfg, r)
    spec = acc.spectrum()
    try:
        win = oracle_window(r, oracle, q, tol, default_spectrum_window(cfg))
        spec_fit = fit_power_law(r, spec * viscous_compensation(cfg, r), win)
    except ValueError:
        # grid too small for an inertial range
        spec_fit = None
    try:
        raw_fit = fit_power_law(r, spec, default_spectrum_window(cfg))
    except ValueError:
        raw_fit = None
    s2_fit = s2_diss = None
    ell, s2 = acc.ell, acc.s2()
    expected = oracle_structure_function(cfg, acc.lags)
    try:
        s2_win = oracle_window(ell, expected, 2 * cfg.H, tol, default_s2_window(cfg))
        s2_fit = fit_power_law(ell, s2, s2_win)
    except ValueError:
        pass
    try:
        d_win = oracle_window(ell, expected, 2.0, 0.1, (0, 4 * g.dx), min_points=4)
        s2_diss = fit_power_law(ell, s2, d_win, min_points=4)
    except ValueError:
        pass
    l2 = acc.l2_values()
    rho = lag1_autocorrelation(l2)
    n_eff = l2.size * (1 - rho) / (1 + rho) if np.isfinite(rho) and rho < 1 else float(l2.size)
    n_eff = float(min(max(n_eff, 1.0), l2.size)) if l2.size else 0.0
    stderr = float(np.std(l2, ddof=1) / np.sqrt(n_eff)) if l2.size > 1 else float("nan")
    return RunSummary(spec_fit, raw_fit, s2_fit, s2_diss, acc.l2_mean(), stderr, rho, n_eff)


def _write_rows(path, header, rows):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.10g}" if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_spectrum_csv(path, acc: StatsAccumulator, cfg: SimulationConfig):
    r = acc.shell_r
    counts = cfg.grid.shell_counts()
    mean, se = acc.spectrum(), acc.spectrum_stderr()
    oracle = oracle_shell_spectrum(cfg)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = mean / oracle
    rows = [(float(r[i]), float(mean[i]), float(se[i]), float(oracle[i]), float(ratio[i]), int(counts[i]))
            for i in range(r.size) if counts[i] > 0]
    return _write_rows(path, ["r", "C_u", "stderr", "oracle", "ratio", "count"], rows)


def write_s2_csv(path, acc: StatsAccumulator, fit: PowerLawFit | None):
    slope = fit.exponent if fit is not None else float("nan")
    rows = [(float(l), float(s), float(e), slope) for l, s, e in zip(acc.ell, acc.s2(), acc.s2_stderr())]
    return _write_rows(path, ["ell", "S2", "stderr", "fitted_slope"], rows)


def write_l2_csv(path, acc: StatsAccumulator):
    return _write_rows(path, ["t", "sigma2_u"], [(float(t), float(v)) for t, v in acc.l2_series])


def write_fits(path, summary: RunSummary, extra: dict | None = None):
    items = {}
    for name, fit in (("spectrum", summary.spectrum_fit), ("spectrum_raw", summary.spectrum_fit_raw),
                      ("s2", summary.s2_fit), ("s2_dissipative", summary.s2_dissipative_fit)):
        if fit is None:
            items[f"{name}_slope"] = "nan"
            continue
        items[f"{name}_slope"] = f"{fit.exponent:.8g}"
        items[f"{name}_window"] = f"{fit.window[0]:.8g},{fit.window[1]:.8g}"
        items[f"{name}_residual"] = f"{fit.residual:.4g}"
    items["l2_mean"] = f"{summary.l2_mean:.8g}"
    items["l2_stderr"] = f"{summary.l2_stderr:.4g}"
    items["l2_lag1_autocorrelation"] = f"{summary.l2_lag1:.4g}"
    items["l2_effective_samples"] = f"{summary.n_effective:.4g}"
    items.update({k: str(v) for k, v in (extra or {}).items()})
    path = Path(path)
    path.write_text("".join(f"{k}={v}\n" for k, v in items.items()))
    return path


def write_oracle_csvs(out_dir, cfg: SimulationConfig, times=(np.inf,), n_ell: int = 60) -> list:
    """Reference curves: spectrum per requested time, seam diagnostics, increment variance."""
    from .oracle.correlation import increment_variance
    from .oracle.spectrum import F_window, big_psi, c_constant

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    p = oracle_params(cfg)
    g = cfg.grid
    r = np.arange(1, g.n_shells) * g.dk
    r = r[r > p.kappa]
    paths = []
    rows = []
    for t in times:
        rows += [(float(t), float(x), float(v)) for x, v in zip(r, theoretical_spectrum(p, t, r))]
    paths.append(_write_rows(out_dir / "oracle_spectrum.csv", ["t", "r", "spectrum"], rows))
    pi = p.inviscid()
    seam_rows = []
    for t in times:
        if not np.isfinite(t):
            continue
        seam = p.c * t + p.kappa
        seam_rows.append((float(t), seam, float(F_window(pi, t, seam)),
                          float(big_psi(pi, p.kappa) - big_psi(pi, seam)), c_constant(pi)))
    paths.append(_write_rows(out_dir / "oracle_seam.csv",
                             ["t", "seam_r", "F_at_seam", "Psi_kappa_minus_Psi_seam", "C"], seam_rows))
    if 0 < cfg.H < 1:
        ell = np.logspace(np.log10(g.dx / 4), np.log10(g.L_tot / 2), n_ell)
        paths.append(_write_rows(out_dir / "oracle_increment_variance.csv", ["ell", "variance"],
                                 [(float(l), increment_variance(pi, l)) for l in ell]))
    return paths
