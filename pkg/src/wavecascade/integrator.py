"""Explicit predictor-corrector time stepping and run orchestration.

One forcing draw ``f`` per step is shared by both stages::

    u*      = u + dt * (-(L + D)(u)) + sqrt(dt) * f
    u_next  = u + dt * (-((L + D)(u*) + (L + D)(u)) / 2) + sqrt(dt) * f

``dt * f * dt**-0.5`` is the Euler-Maruyama increment ``sqrt(dt) * xi``.  After
the corrector the field is projected to zero on ``|k| <= kappa`` and made
Hermitian.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .field import SpectralField, enforce_hermitian, l2_norm, project_low_modes, write_snapshot
from .forcing import ForcingSpec, sample_forcing
from .grid import WavenumberGrid, build_grid
from .operators import OperatorParams, rhs_array

log = logging.getLogger(__name__)


class BlowUpError(RuntimeError):
    """Raised when the integration produces NaN/Inf or runaway growth."""

    def __init__(self, message, step=None, t=None, l2=None, partial=None):
        super().__init__(message)
        self.step = step
        self.t = t
        self.l2 = l2
        self.partial = partial


@dataclass(frozen=True)
class SimulationConfig:
    d: int = 1
    N: int = 1024
    L_tot: float = 1.0
    c: float = 1.0
    H: float = 1.0 / 3.0
    nu: float = 1e-8
    kappa: float | None = None
    dt: float = 5e-3
    dt_mode: str = "fixed"
    k_lo: float = 3.0
    k_hi: float = 5.0
    seed: int = 0
    t_spinup: float | None = None
    n_samples: int = 100
    sample_stride: int = 1000
    checkpoint_every: int = 0
    blowup_factor: float = 1e6

    def __post_init__(self):
        if self.dt_mode not in ("fixed", "heat"):
            raise ValueError(f"dt_mode must be 'fixed' or 'heat', got {self.dt_mode!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_samples < 0 or self.sample_stride < 1:
            raise ValueError("n_samples must be >= 0 and sample_stride >= 1")
        if not -self.d / 2 <= self.H < 1:
            raise ValueError(f"H must lie in [-d/2, 1), got {self.H}")
        # validate the derived objects eagerly
        self.params, self.forcing_spec  # noqa: B018

    @cached_property
    def grid(self) -> WavenumberGrid:
        return build_grid(self.d, self.N, self.L_tot)

    @cached_property
    def params(self) -> OperatorParams:
        kappa = self.grid.dk if self.kappa is None else self.kappa
        return OperatorParams(c=self.c, H=self.H, nu=self.nu, kappa=kappa)

    @cached_property
    def forcing_spec(self) -> ForcingSpec:
        return ForcingSpec(self.grid, self.k_lo, self.k_hi, self.seed, self.params.kappa)

    @property
    def step_dt(self) -> float:
        if self.dt_mode == "heat":
            return min(self.dt, self.grid.dx**2 / 2)
        return self.dt

    @property
    def spinup_time(self) -> float:
        return self.grid.k_max / self.c if self.t_spinup is None else self.t_spinup

    @property
    def spinup_steps(self) -> int:
        return int(round(self.spinup_time / self.step_dt))

    @property
    def damping_ratio(self) -> float:
        """``nu k_max**3 / c``; well above 1 means the top of the box is damped."""
        return self.nu * self.grid.k_max**3 / self.c

    def with_updates(self, **kw) -> "SimulationConfig":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class IntegratorState:
    uh: SpectralField
    t: float = 0.0
    step: int = 0

    @classmethod
    def zero(cls, cfg: SimulationConfig, members: int | None = None) -> "IntegratorState":
        batch = () if members is None else (members,)
        return cls(SpectralField.zeros(cfg.grid, batch))


def _finalize(data: np.ndarray, grid: WavenumberGrid, kappa: float) -> SpectralField:
    return enforce_hermitian(project_low_modes(SpectralField(grid, data), kappa))


def _check_finite(uh: SpectralField, step: int, t: float):
    if not np.all(np.isfinite(uh.data)):
        raise BlowUpError(f"non-finite values at step {step} (t={t:.6g})", step=step, t=t)


def pc_step(state: IntegratorState, cfg: SimulationConfig, scale: float = 1.0) -> IntegratorState:
    """One stochastic predictor-corrector step; ``scale`` multiplies the forcing."""
    g, p, dt = cfg.grid, cfg.params, cfg.step_dt
    members = state.uh.batch_shape[0] if state.uh.batch_shape else None
    f = sample_forcing(cfg.forcing_spec, state.step, members).data
    kick = (scale * dt * dt**-0.5) * f
    u = state.uh.data
    r0 = rhs_array(u, g, p)
    u_star = u - dt * r0 + kick
    r1 = rhs_array(u_star, g, p)
    u_new = u - 0.5 * dt * (r0 + r1) + kick
    new = _finalize(u_new, g, p.kappa)
    t = state.t + dt
    _check_finite(new, state.step + 1, t)
    return IntegratorState(new, t, state.step + 1)


def deterministic_step(state: IntegratorState, cfg: SimulationConfig,
                       forcing: Callable[[float], np.ndarray] | None = None) -> IntegratorState:
    """Heun step for the deterministic system ``du/dt = -(L+D)u + f(t)``.

    The predictor uses ``f(t)``; the corrector uses the trapezoidal average
    ``(f(t) + f(t+dt))/2`` so the scheme stays second order for
    time-dependent forcing.
    """
    g, p, dt = cfg.grid, cfg.params, cfg.step_dt
    u = state.uh.data
    r0 = rhs_array(u, g, p)
    if forcing is None:
        f0 = f1 = 0.0
    else:
        f0, f1 = forcing(state.t), forcing(state.t + dt)
    u_star = u + dt * (-r0 + f0)
    r1 = rhs_array(u_star, g, p)
    u_new = u + dt * (-0.5 * (r0 + r1) + 0.5 * (f0 + f1))
    new = _finalize(u_new, g, p.kappa)
    t = state.t + dt
    _check_finite(new, state.step + 1, t)
    return IntegratorState(new, t, state.step + 1)


@dataclass
class RunResult:
    stats: "object"
    state: IntegratorState
    spinup_state: IntegratorState | None = None
    checkpoints: list = field(default_factory=list)
    steps: int = 0


class _BlowUpMonitor:
    def __init__(self, factor: float, every: int = 50):
        self.factor = factor
        self.every = every
        self.history: list = []

    def check(self, state: IntegratorState):
        if state.step % self.every:
            return
        l2 = float(np.max(l2_norm(state.uh)))
        positive = [v for v in self.history if v > 0]
        if positive:
            median = float(np.median(positive))
            if l2 > self.factor * median:
                raise BlowUpError(
                    f"blow-up at step {state.step} (t={state.t:.6g}): l2 norm {l2:.3e} "
                    f"exceeds {self.factor:g} x running median {median:.3e}",
                    step=state.step, t=state.t, l2=l2)
        self.history.append(l2)


def run(cfg: SimulationConfig, sinks: Iterable[Callable] = (), members: int | None = None,
        checkpoint_dir=None, stats=None, progress: Callable | None = None) -> RunResult:
    """Integrate from rest to ``T_*`` then sample ``n_samples`` times.

    Each sink is called as ``sink(state)`` every ``sample_stride`` steps after
    spin-up.  Statistics are gathered into ``stats`` (a fresh
    ``StatsAccumulator`` by default).  On blow-up the partially filled
    accumulator is attached to the raised ``BlowUpError`` as ``partial``.
    """
    from .stats import StatsAccumulator

    if stats is None:
        stats = StatsAccumulator(cfg.grid)
    sinks = [stats.sink, *sinks]
    ckpt_dir = None if checkpoint_dir is None else Path(checkpoint_dir)
    if ckpt_dir is not None:
        ckpt_dir.mkdir(parents=True, exist_ok=True)
    checkpoints = []

    def checkpoint(state, tag):
        if ckpt_dir is not None:
            checkpoints.append(write_snapshot(ckpt_dir / f"{tag}_{state.step:09d}.bin",
                                              state.uh, state.t))

    state = IntegratorState.zero(cfg, members)
    monitor = _BlowUpMonitor(cfg.blowup_factor)
    n_spin = cfg.spinup_steps
    n_total = n_spin + cfg.n_samples * cfg.sample_stride
    if cfg.damping_ratio < 1 and cfg.n_samples:
        log.warning("nu*k_max^3/c = %.3g < 1: the top of the box is weakly damped",
                    cfg.damping_ratio)
    spinup_state = None
    try:
        for _ in range(n_total):
            state = pc_step(state, cfg)
            monitor.check(state)
            if cfg.checkpoint_every and state.step % cfg.checkpoint_every == 0:
                checkpoint(state, "ckpt")
            if state.step == n_spin:
                spinup_state = state
                checkpoint(state, "spinup")
            elif state.step > n_spin and (state.step - n_spin) % cfg.sample_stride == 0:
                for sink in sinks:
                    sink(state)
            if progress is not None:
                progress(state)
        if n_spin == 0:
            spinup_state = state
            checkpoint(state, "spinup")
    except BlowUpError as err:
        err.partial = stats
        err.state = state
        raise
    if n_total > n_spin:
        checkpoint(state, "final")
    return RunResult(stats, state, spinup_state, checkpoints, n_total)
