"""Command line front end.

Subcommands: ``stationary`` (Gummel loop at the configured bias),
``transient`` (time loop from a converged stationary state), ``resonance``
(one-shot resonance of the configured device on a supplied or zero
self-consistent potential), ``chi-check`` (closed-form peak integrals
against adaptive quadrature).
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, build_config, emit_config, ingest_config
from .driver import (
    cached_stationary,
    emit_stationary,
    emit_transient,
    load_potential,
    run_stationary,
    run_transient,
)


def _load_cfg(args):
    if args.config is None:
        return build_config({})
    return ingest_config(args.config)


def _cmd_stationary(args):
    cfg = _load_cfg(args)
    V0 = load_potential(args.warm_start) if args.warm_start else None
    art = run_stationary(cfg, engine=args.engine, V0=V0)
    out = Path(args.out)
    emit_stationary(art, out, cfg)
    emit_config(cfg, out / "config.json")
    print(f"converged in {art.iterations} iterations "
          f"({art.k_points} frequency points, {art.wall_time:.2f} s)")
    if art.resonance_row:
        r = art.resonance_row
        print(f"resonance: E0 = {r['E0_meV']:.2f} meV, E = {r['E_meV']:.2f} meV, "
              f"Gamma/E = {r['gamma_over_E']:.3e}, N_cv = {r['newton_iterations']}")
    print(f"artifacts written to {out}")
    return 0


def _cmd_transient(args):
    cfg = _load_cfg(args)
    if args.snapshots is not None:
        cfg.raw["transient"]["snapshots"] = args.snapshots
        cfg = build_config(cfg.raw)
    stat_engine = "oma" if args.engine == "reference" else args.engine
    if args.warm_start:
        from .driver import StationaryArtifacts

        man = json.loads((Path(args.warm_start) / "manifest.json").read_text())
        if man.get("kind") != "stationary":
            raise SystemExit("--warm-start must point at stationary artifacts")
        initial = cached_stationary(cfg, man["engine"], B=man["bias_eV"],
                                    cache_dir=None)
        initial.V = load_potential(args.warm_start)
        initial.B = man["bias_eV"]
    else:
        print("converging initial stationary state ...")
        initial = run_stationary(cfg, engine=stat_engine, B=cfg.bias.B_I)
    reference = None
    if cfg.bias.B_inf != cfg.bias.B_I and cfg.bias.mode != "constant":
        print("converging final-bias stationary reference ...")
        ref = run_stationary(cfg, engine=stat_engine, B=cfg.bias.B_inf,
                             V0=initial.V)
        reference = ref.n
    art = run_transient(cfg, initial, engine=args.engine,
                        reference_density=reference)
    out = Path(args.out)
    emit_transient(art, out, cfg)
    emit_config(cfg, out / "config.json")
    print(f"{art.times.size - 1} steps, {art.step_wall * 1e3:.2f} ms/step; "
          f"counters: {art.counters}")
    print(f"artifacts written to {out}")
    return 0


def _cmd_resonance(args):
    cfg = _load_cfg(args)
    from .core import external_potential
    from .driver import _resonance_table_row

    x = cfg.grids.x_nodes()
    V = load_potential(args.warm_start) if args.warm_start else np.zeros(x.size)
    U = external_potential(cfg.geom, cfg.bias.B_I, x)
    row = _resonance_table_row(cfg, cfg.bias.B_I, U, V, x)
    if row is None:
        print("barrier height is zero: no resonance to compute")
        return 1
    print(json.dumps(row, indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "resonance.json").write_text(json.dumps(row, indent=2) + "\n")
    return 0


def _cmd_chi_check(args):
    from scipy.integrate import quad

    from .oma_stationary import chi

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.count):
        a = rng.uniform(-5.0, 5.0)
        b = a + rng.uniform(0.0, 5.0)
        c = rng.uniform(1e-3, 10.0)
        d = rng.uniform(1e-3, 10.0)
        for n in (0, 1):
            exact = chi(n, a, b, c, d)
            ref, _err = quad(
                lambda t: t**n / ((t * t - c) ** 2 + d * d), a, b,
                limit=400, epsabs=1e-14, epsrel=1e-13,
            )
            scale = max(abs(ref), 1e-30)
            worst = max(worst, abs(exact - ref) / scale)
    print(f"{args.count} random tuples, both moments: "
          f"max relative error {worst:.3e} (seed {args.seed})")
    if worst < 1e-10:
        print("PASS")
        return 0
    print("FAIL")
    return 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rtd1d",
        description="1D resonant tunneling diode simulator "
                    "(self-consistent stationary and transient solvers)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--warm-start", help="artifact directory to start from")

    p = sub.add_parser("stationary", parents=[common],
                       help="converge the coupled system at the initial bias")
    p.add_argument("--engine", choices=("direct", "oma", "reference"),
                   default="oma")
    p.add_argument("--out", default="out_stationary")
    p.set_defaults(func=_cmd_stationary)

    p = sub.add_parser("transient", parents=[common],
                       help="time-march the coupled system")
    p.add_argument("--engine", choices=("direct", "oma"), default="oma")
    p.add_argument("--out", default="out_transient")
    p.add_argument("--snapshots", type=int, default=None)
    p.set_defaults(func=_cmd_transient)

    p = sub.add_parser("resonance", parents=[common],
                       help="one-shot resonance of the configured device")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_resonance)

    p = sub.add_parser("chi-check",
                       help="closed-form peak integrals vs adaptive quadrature")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=20260809)
    p.set_defaults(func=_cmd_chi_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
