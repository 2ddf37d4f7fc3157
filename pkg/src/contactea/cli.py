"""Command-line scenario runner.

Exit codes: 0 success, 1 usage/config error, 2 numerical blowup (outputs are
still written), 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import diagnostics, lagrangian, verify
from .config import PRESETS, ConfigError, ScenarioConfig, build_config, expand_preset, parse_raw
from .evolution import CFLWarning, Reduced1D, StepperConfig, run
from .peakon import PeakonState, green_periodic, hamiltonian, integrate_peakons
from .spectral import Grid, ScalarField, save_snapshot

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("contactea")


class UsageError(Exception):
    pass


def _override_pairs(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--override expects KEY=VAL, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def scenario_from_args(args) -> ScenarioConfig:
    raw: dict[str, str] = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        raw = parse_raw(text)
    if args.preset:
        raw = expand_preset({**raw, "preset": args.preset})
    flags = {"out": args.out, "dt": args.dt, "t_end": args.t_end, "grid": args.grid,
             "cadence": args.cadence, "seed": args.seed}
    raw.update({k: str(v) for k, v in flags.items() if v is not None})
    raw.update(_override_pairs(args.override))
    return build_config(raw)


def _particle_count(cfg, grid: Grid) -> int:
    return max(1, round(cfg.particles ** (1.0 / grid.ndim)))


def _run_reporting_cfl(*args, **kwargs):
    """``run`` with CFL warnings summarised on stderr instead of repeated."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CFLWarning)
        result = run(*args, **kwargs)
    cfl = [w for w in caught if issubclass(w.category, CFLWarning)]
    for w in caught:
        if not issubclass(w.category, CFLWarning):
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    if cfl:
        print(f"warning: {len(cfl)} CFL violations; first: {cfl[0].message}", file=sys.stderr)
    return result


def cmd_run(args) -> int:
    cfg = scenario_from_args(args)
    eq, m0 = cfg.build()
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    save_snapshot(m0, out / "m_initial.cea")

    flow = None
    model = getattr(eq, "model", None)
    if cfg.particles > 0:
        if model is None:
            raise UsageError("particle tracking is not available for reduced1d")
        flow = lagrangian.seed_flow(m0, per_axis=_particle_count(cfg, eq.grid))
    particle_rows = []

    def track(state, record, fl):
        if fl is not None:
            tr = lagrangian.transport_residual(fl, model, state.m, eq.n)
            particle_rows.append((state.t, fl, tr.m_interp, tr.per_particle))

    result = _run_reporting_cfl(eq, m0, cfg.stepper, cfg.t_end, observers=[track],
                                cadence=cfg.cadence, flow=flow)

    diagnostics.write_csv(result.records, out / "diagnostics.csv")
    save_snapshot(result.state.m, out / "m_final.cea")
    if particle_rows:
        lagrangian.write_particles_csv(out / "particles.csv", particle_rows)

    first, last = result.records[0], result.records[-1]
    print(f"status: {result.status}")
    print(f"t = {result.state.t:.6g} after {result.state.step_count} steps")
    print(f"final ||E(f)||_inf = {last.reeb_f_linf:.3e}")
    print(f"final ||m - m0||_inf = {np.max(np.abs(result.state.m.values - m0.values)):.3e}")
    print(f"C0 drift = {last.c0 - first.c0:.3e}, C1 drift = {last.c1 - first.c1:.3e}")
    print(f"BKM integral = {result.bkm_integral:.6g}")
    if particle_rows:
        print(f"max transport residual = {np.max(np.abs(particle_rows[-1][3])):.3e}")
    print(f"outputs written to {out}")
    if result.blew_up:
        print(f"blowup detected near t = {result.blowup_time:.6g}: {result.message}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def _floats(s: str | None) -> list[float] | None:
    if s is None:
        return None
    return [float(v) for v in s.split(",") if v.strip()]


def cmd_peakon(args) -> int:
    n = args.n
    p = _floats(args.p) or [1.0]
    if len(p) == 1:
        p = p * n
    q = _floats(args.q)
    if q is None:
        q = [args.length * k / n for k in range(n)]
    if len(p) != n or len(q) != n:
        raise UsageError("--p and --q must give one value per peakon (or a single p)")
    state = PeakonState(np.array(q), np.array(p), args.length)
    traj = integrate_peakons(state, args.t_end, args.dt)
    H0 = hamiltonian(state)
    H1 = hamiltonian(traj.final)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        traj.write_csv(Path(args.out) / "peakons.csv")
    print(f"G(0) = {green_periodic(0.0, args.length):.12f}")
    for k in range(n):
        print(f"peakon {k + 1}: q0 = {q[k]:.12f}  q(T) = {traj.final.q[k]:.12f}  p(T) = {traj.final.p[k]:.12f}")
    if n == 1:
        expected = math.fmod(q[0] + green_periodic(0.0, args.length) * p[0] * args.t_end, args.length)
        print(f"traveling-wave prediction q(T) = {expected % args.length:.12f}")
    print(f"Hamiltonian drift = {abs(H1 - H0):.3e}")
    print(f"total momentum drift = {abs(traj.final.p.sum() - state.p.sum()):.3e}")
    return EXIT_OK


def cmd_reduce1d(args) -> int:
    grid = Grid((args.grid,), (args.length,))
    eq = Reduced1D(grid)
    y = grid.centered_coords(0)
    sign = 1.0 if args.sign == "positive" else -1.0
    m0 = ScalarField(grid, sign * args.amplitude * np.exp(-y * y))
    cfg = StepperConfig(args.dt)
    i0 = int(np.argmin(np.abs(y)))
    series = []

    def probe(state, record, fl):
        g = eq.stream_function(state.m.values)
        series.append((state.t, g[i0], float(np.max(np.abs(g)))))

    result = _run_reporting_cfl(eq, m0, cfg, args.t_end, observers=[probe], cadence=args.cadence)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        diagnostics.write_csv(result.records, out / "diagnostics.csv")
        with open(out / "profile_origin.csv", "w") as fh:
            fh.write("t,g0,g_linf\n")
            for row in series:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    print(f"status: {result.status}")
    print(f"t = {result.state.t:.6g}, g(t,0) = {series[-1][1]:.6g}, max|g| = {max(r[2] for r in series):.6g}")
    if result.blew_up:
        bound = 1.0 / (math.sqrt(6.0) * abs(series[0][1]))
        print(f"blowup near t = {result.blowup_time:.6g} (upper bound from g_t <= -sqrt6 g^2: {bound:.6g})")
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify.run_all(seed=args.seed or 0, only=args.suite)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.ok]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_presets(args) -> int:
    for name, spec in PRESETS.items():
        print(f"{name:18s} {spec['_help']}")
    return EXIT_OK


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--preset", metavar="NAME")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--grid", metavar="N[,N,N]")
    p.add_argument("--cadence", type=int, metavar="K")
    p.add_argument("--seed", type=int, metavar="S")
    p.add_argument("--override", action="append", metavar="KEY=VAL", default=[])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contactea", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario from a config file or preset")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("peakon", help="integrate the periodic N-peakon system")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--p", help="momenta, comma separated (one value = same for all)")
    p.add_argument("--q", help="initial positions, comma separated")
    p.add_argument("--length", type=float, default=2 * math.pi)
    p.add_argument("--t-end", dest="t_end", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_peakon)

    p = sub.add_parser("reduce1d", help="run the reduced 1-d profile equation")
    p.add_argument("--sign", choices=("positive", "negative"), default="negative")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--length", type=float, default=40.0)
    p.add_argument("--t-end", dest="t_end", type=float, default=3.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--cadence", type=int, default=10)
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_reduce1d)

    p = sub.add_parser("verify", help="run the built-in identity suites")
    p.add_argument("--suite", action="append", choices=list(verify.SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("presets", help="list named scenarios")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
