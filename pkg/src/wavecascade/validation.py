"""Acceptance criteria as plain functions returning ``CriterionResult``.

``run_suite("quick")`` runs criteria 1-4 and 7; ``"full"`` adds 5, 6, 8, 9.
Tolerances are fixed here; the ensemble sizes and sampling plans are the only
knobs, and they default to the documented acceptance settings.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .analysis import oracle_params, oracle_shell_spectrum, summarize
from .field import (SpectralField, enforce_hermitian, hermitian_defect, l2_norm, low_mode_residual,
                    project_low_modes)
from .integrator import IntegratorState, SimulationConfig, deterministic_step, pc_step, run
from .oracle import complex1d
from .oracle.kernels import duhamel_reference
from .oracle.spectrum import theoretical_spectrum
from .stats import StatsAccumulator, fit_power_law, shell_average

log = logging.getLogger(__name__)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: str
    expected: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"criterion {self.number} [{status}] {self.name}: measured {self.measured}; "
                f"expected {self.expected} ({self.seconds:.1f}s)")


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        if isinstance(res, CriterionResult):
            res.seconds = time.perf_counter() - t0
        else:
            for r in res:
                r.seconds = (time.perf_counter() - t0) / len(res)
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def s2_lags(N: int) -> np.ndarray:
    """Integer lags 1..N/2 plus sub-grid lags down to dx/32 for the dissipative range."""
    sub = np.logspace(-5, -0.25, 20, base=2.0)
    return np.concatenate([sub, np.arange(1, N // 2 + 1, dtype=float)])


class _FirstSamples:
    """Sink that feeds only the first ``n`` sampling events to ``acc``."""

    def __init__(self, acc: StatsAccumulator, n: int):
        self.acc, self.n, self.seen = acc, n, 0

    def __call__(self, state):
        if self.seen < self.n:
            self.acc.sink(state)
        self.seen += 1


D1_DESK = SimulationConfig(d=1, N=1024, nu=1e-8, H=1 / 3, c=1.0, dt=5e-3, n_samples=50, sample_stride=200)


@_timed
def criteria_d1_desk(members: int = 8, long_samples: int = 400, seed: int = 0):
    """Criteria 1 and 2 from the first 50 samples, plus the N=1024 half of criterion 3.

    One ensemble run of ``members`` seeded trajectories; criteria 1-2 use the
    desk plan (50 samples, stride 200), criterion 3 keeps sampling to
    ``long_samples``.
    """
    cfg = D1_DESK.with_updates(seed=seed, n_samples=long_samples)
    desk = StatsAccumulator(cfg.grid, lags=s2_lags(cfg.N))
    long = StatsAccumulator(cfg.grid, lags=np.array([1.0]))
    run(cfg, sinks=[_FirstSamples(desk, D1_DESK.n_samples)], members=members, stats=long)
    summary = summarize(desk, cfg)
    target = -5 / 3
    sf = summary.spectrum_fit
    raw = summary.spectrum_fit_raw
    c1 = CriterionResult(
        1, "d=1 spectral power law", abs(sf.exponent - target) <= 0.15,
        f"slope {sf.exponent:.4f} on [{sf.window[0]:g}, {sf.window[1]:g}] (viscous-compensated; "
        f"raw {raw.exponent:.4f})", "-5/3 +- 0.15",
        {"slope": sf.exponent, "raw_slope": raw.exponent, "members": members})
    s2, s2d = summary.s2_fit, summary.s2_dissipative_fit
    ok2 = (s2 is not None and abs(s2.exponent - 2 / 3) <= 0.15
           and s2d is not None and abs(s2d.exponent - 2.0) <= 0.2)
    c2 = CriterionResult(
        2, "d=1 structure-function law", ok2,
        f"inertial slope {s2.exponent:.4f} on [{s2.window[0]:.4g}, {s2.window[1]:.4g}], "
        f"dissipative slope {s2d.exponent:.4f} on [{s2d.window[0]:.3g}, {s2d.window[1]:.3g}]",
        "2/3 +- 0.15 and 2 +- 0.2",
        {"inertial": s2.exponent, "dissipative": s2d.exponent})
    return c1, c2, long


@_timed
def criterion3(long_1024: StatsAccumulator | None = None, members_2048: int = 4, members_1024: int = 8,
               n_samples: int = 400, seed: int = 0) -> CriterionResult:
    """Stationary variance at (N=1024, nu=1e-8) vs (N=2048, nu=1e-9)."""
    if long_1024 is None:
        *_, long_1024 = criteria_d1_desk(members_1024, n_samples, seed)
    cfg = D1_DESK.with_updates(N=2048, nu=1e-9, n_samples=n_samples, seed=seed)
    acc = StatsAccumulator(cfg.grid, lags=np.array([1.0]))
    run(cfg, members=members_2048, stats=acc)
    a, b = long_1024.l2_mean(), acc.l2_mean()
    rel = abs(a - b) / (0.5 * (a + b))
    oa = 2 * np.nansum(oracle_shell_spectrum(D1_DESK)[2:])
    ob = 2 * np.nansum(oracle_shell_spectrum(cfg)[2:])
    return CriterionResult(
        3, "viscosity independence of variance", rel < 0.10,
        f"sigma2 {a:.3f} (nu=1e-8) vs {b:.3f} (nu=1e-9), relative difference {rel:.4f}",
        f"< 0.10 (oracle difference {abs(oa - ob) / (0.5 * (oa + ob)):.4f})",
        {"sigma2_1024": a, "sigma2_2048": b, "rel": rel})


def criterion4_stop_time(cfg: SimulationConfig) -> float:
    """Stop when the top of the forced band is one shell short of k_max."""
    g = cfg.grid
    return (g.k_max - cfg.k_hi * g.dk - g.dk) / cfg.c


@_timed
def criterion4(members: int = 64, seed: int = 0, n_sigma: float = 3.0, min_fraction: float = 0.9
               ) -> CriterionResult:
    """Per-shell ensemble mean periodogram vs the finite-time oracle spectrum."""
    base = SimulationConfig(d=1, N=256, nu=0.0, H=1 / 3, c=1.0, dt=5e-3, n_samples=0, seed=seed)
    t_stop = criterion4_stop_time(base)
    cfg = base.with_updates(t_spinup=t_stop)
    res = run(cfg, members=members)
    state = res.spinup_state
    g = cfg.grid
    per_member = shell_average(np.abs(state.uh.data) ** 2, g)
    mean = per_member.mean(axis=0)
    se = per_member.std(axis=0, ddof=1) / np.sqrt(members)
    r = np.arange(g.n_shells) * g.dk
    shells = (r > cfg.params.kappa) & ~((r >= cfg.k_lo * g.dk) & (r <= cfg.k_hi * g.dk))
    pred = theoretical_spectrum(oracle_params(cfg), state.t, r[shells])
    diff = mean[shells] - pred
    s = se[shells]
    # a shell with no scatter passes only if it matches the oracle to rounding
    exact = np.abs(diff) <= 1e-12 * np.abs(pred).max()
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(s > 0, diff / s, np.where(exact, 0.0, np.inf))
    ok = np.abs(z) <= n_sigma
    frac = float(ok.mean())
    bad = r[shells][~ok]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = mean[shells] / pred
    return CriterionResult(
        4, "oracle vs Monte-Carlo spectrum", frac >= min_fraction,
        f"{ok.sum()}/{ok.size} shells within {n_sigma:g} SE ({frac:.3f}) at t={state.t:g}; "
        f"failing shells {bad.astype(int).tolist()}",
        f">= {min_fraction:.2f}",
        {"fraction": frac, "failing": bad.tolist(), "ratio": ratio.tolist(), "z": z.tolist(),
         "t": state.t, "median_ratio": float(np.nanmedian(ratio))})


def _bump_forcing(k0: float = 20.0, width: float = 2.0):
    def profile(s, k):
        return (1 + 0.5 * np.sin(2 * np.pi * s)) * np.exp(-(np.abs(k) - k0) ** 2 / (2 * width**2))

    return profile


@_timed
def criterion5(dts=(4e-3, 2e-3, 1e-3), N: int = 256, t_end: float = 1.0) -> CriterionResult:
    """Deterministic Heun error against the Duhamel oracle at t=1."""
    profile = _bump_forcing()
    errors = []
    for dt in dts:
        cfg = SimulationConfig(d=1, N=N, nu=0.0, dt=dt, n_samples=0)
        k = np.broadcast_to(cfg.grid.k_axes[0], cfg.grid.shape)
        state = IntegratorState.zero(cfg)
        for _ in range(int(round(t_end / dt))):
            state = deterministic_step(state, cfg, lambda s: profile(s, k).astype(complex))
        ref = duhamel_reference(oracle_params(cfg), profile, t_end)(k)
        errors.append(float(np.max(np.abs(state.uh.data - ref)) / np.max(np.abs(ref))))
    orders = [float(np.log(errors[i] / errors[i + 1]) / np.log(dts[i] / dts[i + 1]))
              for i in range(len(dts) - 1)]
    return CriterionResult(
        5, "deterministic convergence order", min(orders) >= 1.8,
        f"errors {', '.join(f'{e:.3e}' for e in errors)}; orders {', '.join(f'{o:.3f}' for o in orders)}",
        "order >= 1.8", {"errors": errors, "orders": orders})


@_timed
def criterion6(n_paths: int = 10_000, t: float = 2.0, c: float = 1.0, x=(0.3, 0.5), dt: float = 1e-2,
               seed: int = 0, width: float = 0.5) -> CriterionResult:
    """Monte Carlo of the complex 1D model: variance and covariance at z != 0."""
    phi = complex1d.GaussianProfile(width)
    rng = np.random.Generator(np.random.Philox(seed))
    u = complex1d.simulate(t, c, x, phi.autocorrelation, n_paths, dt, rng)
    v = np.abs(u[:, 0]) ** 2
    v_mean, v_se = v.mean(), v.std(ddof=1) / np.sqrt(n_paths)
    v_exact = complex1d.variance(t, phi.norm_sq)
    z = x[1] - x[0]
    prod = u[:, 1] * np.conj(u[:, 0])
    cov_exact = complex1d.covariance(t, c, z, phi.autocorrelation)
    re_se = prod.real.std(ddof=1) / np.sqrt(n_paths)
    im_se = prod.imag.std(ddof=1) / np.sqrt(n_paths)
    zv = (v_mean - v_exact) / v_se
    zr = (prod.mean().real - cov_exact.real) / re_se
    zi = (prod.mean().imag - cov_exact.imag) / im_se
    ok = max(abs(zv), abs(zr), abs(zi)) <= 4
    return CriterionResult(
        6, "complex 1D reference model", bool(ok),
        f"variance {v_mean:.4f} vs {v_exact:.4f} ({zv:+.2f} SE); covariance "
        f"{prod.mean():.4f} vs {cov_exact:.4f} ({zr:+.2f}, {zi:+.2f} SE)",
        "within 4 SE", {"z_var": zv, "z_re": zr, "z_im": zi})


def _invariant_run(cfg: SimulationConfig, steps: int):
    state = IntegratorState.zero(cfg)
    worst_h = worst_k = 0.0
    for _ in range(steps):
        state = pc_step(state, cfg)
        worst_h = max(worst_h, hermitian_defect(state.uh))
        worst_k = max(worst_k, low_mode_residual(state.uh, cfg.params.kappa))
    return state, worst_h, worst_k


@_timed
def criterion7(steps: int = 1000) -> CriterionResult:
    """Hermitian defect and |k| <= kappa residual every step; bit-identical reruns."""
    cfgs = [D1_DESK.with_updates(seed=3), SimulationConfig(d=2, N=64, nu=1e-5, seed=3),
            SimulationConfig(d=3, N=16, nu=1e-3, seed=3)]
    worst_h = worst_k = 0.0
    identical = True
    for cfg in cfgs:
        a, h, k = _invariant_run(cfg, steps)
        b, *_ = _invariant_run(cfg, steps)
        identical &= a.uh.data.tobytes() == b.uh.data.tobytes()
        worst_h, worst_k = max(worst_h, h), max(worst_k, k)
    ok = worst_h < 1e-12 and worst_k < 1e-12 and identical
    return CriterionResult(
        7, "structural invariants", ok,
        f"max Hermitian defect {worst_h:.2e}, max low-mode residual {worst_k:.2e}, "
        f"bit-identical reruns {identical}", "< 1e-12, < 1e-12, True",
        {"hermitian": worst_h, "low_mode": worst_k, "identical": identical})


D2_DESK = SimulationConfig(d=2, N=128, nu=1e-5, H=1 / 3, c=1.0, dt=5e-3, n_samples=50, sample_stride=200)
D3_DESK = SimulationConfig(d=3, N=32, nu=1e-3, H=1 / 3, c=1.0, dt=5e-3, n_samples=20, sample_stride=200)


@_timed
def criterion8(members: int = 8, seed: int = 0, smoke_d3: bool = True) -> CriterionResult:
    """d=2 angle-averaged spectrum slope; d=3 reported but not gating."""
    cfg = D2_DESK.with_updates(seed=seed)
    acc = StatsAccumulator(cfg.grid, lags=np.array([1.0, 2.0]))
    run(cfg, members=members, stats=acc)
    summary = summarize(acc, cfg)
    sf = summary.spectrum_fit
    details = {"slope": sf.exponent, "raw": summary.spectrum_fit_raw.exponent}
    extra = ""
    if smoke_d3:
        c3 = D3_DESK.with_updates(seed=seed)
        a3 = StatsAccumulator(c3.grid, lags=np.array([1.0]))
        run(c3, stats=a3)
        r = a3.shell_r
        # at N=32 the viscous factor drops the oracle below round-off within a few
        # shells, so compensation is meaningless here; compare raw slopes instead
        win = (c3.k_hi + 1.0, c3.grid.k_max)
        try:
            s3 = fit_power_law(r, a3.spectrum(), win).exponent
            o3 = fit_power_law(r, oracle_shell_spectrum(c3), win).exponent
            extra = (f"; d=3 N=32 smoke raw slope {s3:.2f} on [{win[0]:g}, {win[1]:g}] vs oracle "
                     f"{o3:.1f} (no inertial range at this size; non-gating)")
            details.update(d3_slope=s3, d3_oracle_slope=o3)
        except ValueError as exc:
            extra = f"; d=3 smoke fit unavailable ({exc})"
    return CriterionResult(
        8, "d=2 smoke test", abs(sf.exponent + 8 / 3) <= 0.25,
        f"slope {sf.exponent:.4f} on [{sf.window[0]:g}, {sf.window[1]:g}] (viscous-compensated; raw "
        f"{summary.spectrum_fit_raw.exponent:.4f}){extra}", "-8/3 +- 0.25", details)


def random_admissible_state(cfg: SimulationConfig, seed: int = 0, n_bumps: int = 6) -> SpectralField:
    """Sum of smooth radial bumps with random complex amplitudes and spatial offsets.

    Supported well inside ``kappa < |k| < k_max`` (the Gaussian tails are below
    1e-12 at the cutoff, so the inflow condition u = 0 at kappa holds to
    rounding); each bump is localized at a
    random position in physical space so the transport term acts at rate
    ``2 pi c x``.
    """
    g = cfg.grid
    rng = np.random.Generator(np.random.Philox(seed))
    k = g.k_mod / g.dk
    data = np.zeros(g.shape, dtype=complex)
    hi = 0.7 * g.k_max / g.dk
    for _ in range(n_bumps):
        centre = rng.uniform(30, hi)
        width = rng.uniform(3, 4)
        amp = rng.normal() + 1j * rng.normal()
        phase = sum(g.k_axes[j] * rng.uniform(-0.15, 0.15) for j in range(g.d))
        data += amp * np.exp(-(k - centre) ** 2 / (2 * width**2)) * np.exp(-2j * np.pi * phase)
    return enforce_hermitian(project_low_modes(SpectralField(g, data), cfg.params.kappa))


def l2_drift(cfg: SimulationConfig, u0: SpectralField, t_end: float = 1.0) -> float:
    state = IntegratorState(u0)
    s0 = float(l2_norm(u0))
    for _ in range(int(round(t_end / cfg.step_dt))):
        state = deterministic_step(state, cfg)
    return abs(float(l2_norm(state.uh)) - s0) / s0 / t_end


@_timed
def criterion9(dt: float = 1e-3, N: int = 256, seed: int = 0) -> CriterionResult:
    """Unforced, H=-d/2, nu=0: L2 drift per unit time and its decrease under dt halving."""
    cfg = SimulationConfig(d=1, N=N, H=-0.5, nu=0.0, dt=dt, n_samples=0)
    u0 = random_admissible_state(cfg, seed)
    d1 = l2_drift(cfg, u0)
    d2 = l2_drift(cfg.with_updates(dt=dt / 2), u0)
    ratio = d1 / d2 if d2 > 0 else np.inf
    ok = d1 < 1e-4 and ratio >= 3.5
    return CriterionResult(
        9, "L2 conservation at H=-d/2", ok,
        f"drift {d1:.3e}/unit time at dt={dt:g}, {d2:.3e} at dt={dt / 2:g}, ratio {ratio:.3f}",
        "< 1e-4 and ratio >= 3.5 (second order or better; Heun on a skew operator gives 8)",
        {"drift": d1, "drift_half": d2, "ratio": ratio})


QUICK = (1, 2, 3, 4, 7)
FULL = (1, 2, 3, 4, 5, 6, 7, 8, 9)


def run_suite(level: str = "quick", report=print) -> list[CriterionResult]:
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    wanted = QUICK if level == "quick" else FULL
    results = []

    def emit(res):
        results.append(res)
        if report is not None:
            report(res.line())

    c1, c2, long = criteria_d1_desk()
    emit(c1)
    emit(c2)
    emit(criterion3(long))
    emit(criterion4())
    for n, fn in ((5, criterion5), (6, criterion6), (7, criterion7), (8, criterion8), (9, criterion9)):
        if n in wanted:
            emit(fn())
    return sorted(results, key=lambda r: r.number)
