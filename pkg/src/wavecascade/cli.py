"""Command-line entry point: ``wavecascade simulate | oracle | validate``.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical blow-up, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis
from .config import PRESETS, ConfigError, build_config, parse_overrides, write_manifest
from .integrator import BlowUpError, run
from .oracle.spectrum import IntegrabilityError
from .stats import StatsAccumulator

log = logging.getLogger("wavecascade")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3, 4


def _add_config_args(p: argparse.ArgumentParser):
    p.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
    p.add_argument("--config", type=Path, help="INI file with a [simulation] section")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    p.add_argument("--seed", type=int, help="forcing seed (overrides config)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")


def _resolve(args):
    return build_config(args.preset, args.config, parse_overrides(args.overrides), args.seed)


def _write_outputs(out: Path, acc: StatsAccumulator, cfg, extra: dict) -> list:
    paths = []
    if acc.count:
        summary = analysis.summarize(acc, cfg)
        paths.append(analysis.write_spectrum_csv(out / "spectrum.csv", acc, cfg))
        paths.append(analysis.write_s2_csv(out / "s2.csv", acc, summary.s2_fit))
        paths.append(analysis.write_l2_csv(out / "l2.csv", acc))
        paths.append(analysis.write_fits(out / "fits.txt", summary, {"samples": acc.count, **extra}))
    return paths


def cmd_simulate(args) -> int:
    cfg = _resolve(args)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    members = args.ensemble if args.ensemble and args.ensemble > 1 else None
    acc = StatsAccumulator(cfg.grid)
    n_total = cfg.spinup_steps + cfg.n_samples * cfg.sample_stride
    every = max(n_total // 10, 1)

    def progress(state):
        if state.step % every == 0:
            log.info("step %d/%d  t=%.3f", state.step, n_total, state.t)

    extra = {"ensemble": members or 1, "steps": n_total}
    t0 = time.perf_counter()
    try:
        result = run(cfg, members=members, checkpoint_dir=out / "checkpoints", stats=acc,
                     progress=progress)
    except BlowUpError as err:
        wall = time.perf_counter() - t0
        log.error("%s", err)
        extra.update(blowup_step=err.step, blowup_t=err.t)
        paths = _write_outputs(out, acc, cfg, extra)
        write_manifest(out / "manifest.ini", cfg, [Path(p).relative_to(out) for p in paths],
                       {"wall_s": wall}, extra)
        return EXIT_BLOWUP
    wall = time.perf_counter() - t0
    timings = {"wall_s": wall, "step_ms": 1e3 * wall / max(result.steps, 1)}
    paths = _write_outputs(out, acc, cfg, extra) + result.checkpoints
    write_manifest(out / "manifest.ini", cfg, [Path(p).relative_to(out) for p in paths], timings, extra)
    log.info("wrote %d files to %s in %.1fs", len(paths) + 1, out, wall)
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _resolve(args)
    times = [float(t) for t in args.times.split(",")] if args.times else [cfg.spinup_time, np.inf]
    paths = analysis.write_oracle_csvs(args.out, cfg, times)
    write_manifest(Path(args.out) / "manifest.ini", cfg, [p.name for p in paths], extra={"times": args.times})
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_suite

    results = run_suite(args.level)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return EXIT_VALIDATION if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavecascade", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", help="run the stochastic solver and write statistics")
    _add_config_args(sim)
    sim.add_argument("--ensemble", type=int, default=1,
                     help="number of seeded trajectories (seed, seed+1, ...) integrated together")
    sim.set_defaults(func=cmd_simulate)
    orc = sub.add_parser("oracle", help="write analytical reference curves")
    _add_config_args(orc)
    orc.add_argument("--times", help="comma-separated times (inf allowed); default T_* and inf")
    orc.set_defaults(func=cmd_oracle)
    val = sub.add_parser("validate", help="run the acceptance criteria")
    val.add_argument("--level", choices=("quick", "full"), default="quick")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, IntegrabilityError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
