"""Command-line front end.

    racketchaos [--config cfg.json] [--out DIR] [--seed N] [--figures] COMMAND

Commands: constants, orbit, scaffold, chaos, sweep, selftest.  Exit status is
0 when every check passes, 1 when a check fails, and 2 on an error (a
machine-readable ``error.json`` is written to the output directory).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path

from .coding import check_disjoint_bands, kset_rows
from .errors import RacketChaosError
from .extension import alpha_beta_rows
from .generating import ConstantsBundle
from .impact_map import ImpactState, estimate_domain, iterate, orbit_rows
from .io import write_csv, write_json
from .pipeline import (
    ExperimentConfig,
    all_checks_pass,
    complete_world,
    energy_band,
    estimate_base,
    finish_reports,
    run_code,
)
from .racket import normalize

log = logging.getLogger("racketchaos")

CONFIG_HEADER = ["n", "t", "gap", "residual_n", "lower", "upper"]
KSET_HEADER = ["t_mod_1", "E", "code_id", "block_index"]


def _world(cfg, Q=None, base=None):
    base = base or estimate_base(cfg)
    return complete_world(base, cfg, Q=Q), base


def cmd_constants(cfg, out, args):
    world, _ = _world(cfg)
    write_json(out / "constants.json", world.constants_report())
    log.info("K=%.4g delta=%.4g C=%.4g M_eff=%.6g m=%d Q=%d", world.consts.K, world.consts.delta,
             world.consts.C, world.M_eff, world.consts.m, world.consts.Q)
    return True


def cmd_orbit(cfg, out, args):
    spec, _ = normalize(cfg.forcing())
    K1, v_bar = estimate_domain(spec)
    consts = ConstantsBundle(g=spec.g, v_bar=v_bar, K1=K1)
    o = cfg.orbit
    state = ImpactState(float(o["t0"]), float(o["v0"]))
    states = iterate(state, int(o["steps"]), spec, consts, dps=o.get("dps"))
    write_csv(out / "orbit.csv", ["n", "t", "v", "E", "gap"], orbit_rows(states))
    return True


def cmd_scaffold(cfg, out, args):
    world, _ = _world(cfg)
    rows = []
    for seq in (world.sub, world.sup, world.w_lower, world.w_upper):
        rows.extend(seq.rows())
    write_csv(out / "scaffold.csv", ["n", "value", "kind", "glue"], rows)
    write_csv(out / "alpha_beta.csv", ["t0", "alpha", "beta"], alpha_beta_rows(world.field))
    summary = {
        "sub": world.sub.info,
        "super": world.sup.info,
        "envelopes": world.w_lower.info,
        "constants": world.consts.to_dict(),
    }
    write_json(out / "scaffold.json", summary)
    if args.figures:
        from .plotting import plot_scaffolds
        plot_scaffolds(world, out / "scaffold.png")
    return True


def _chaos(cfg, world, out, figures, tag=""):
    results = [run_code(world, w, cfg) for w in cfg.codes]
    seps, floor = finish_reports(results, world)
    provenance = world.constants_report()
    for r in results:
        write_csv(out / f"config_{tag}{r.word}.csv", CONFIG_HEADER, r.config.rows(world.field))
        payload = r.report.to_dict()
        payload.update(certificate=r.certificate, round_trip=r.round_trip,
                       flow=r.config.info, constants=provenance)
        write_json(out / f"chaos_{tag}{r.word}.json", payload)
        log.info("code %s: residual %.2g, shift %s, round trip %s", r.word, r.config.residual,
                 r.report.shift_verified, r.round_trip)
    if figures:
        from .plotting import plot_configuration
        for r in results:
            plot_configuration(r, out / f"config_{tag}{r.word}.png")
    return results, seps, floor


def cmd_chaos(cfg, out, args):
    world, _ = _world(cfg)
    results, seps, floor = _chaos(cfg, world, out, args.figures)
    rows = kset_rows([r.config for r in results], world.spec, world.consts,
                     [r.word for r in results])
    write_csv(out / "kset.csv", KSET_HEADER, rows)
    ok = all_checks_pass(results, seps, floor)
    write_json(out / "chaos_summary.json", {
        "all_pass": ok,
        "separation_floor": floor,
        "separations": [{"a": a, "b": b, "value": v} for (a, b), v in sorted(seps.items())],
    })
    if args.figures:
        from .plotting import plot_kset
        plot_kset({r.word: r.report.K_points for r in results}, out / "kset.png")
    return ok


def cmd_sweep(cfg, out, args):
    base = None
    rows, bands, ok, pts = [], [], True, {}
    for Q in cfg.sweep_Q:
        world, base = _world(cfg, Q=Q, base=base)
        results, seps, floor = _chaos(cfg, world, out, False, tag=f"Q{Q}_")
        ok &= all_checks_pass(results, seps, floor)
        rows += kset_rows([r.config for r in results], world.spec, world.consts,
                          [f"Q{Q}:{r.word}" for r in results])
        lo, hi = energy_band(results)
        bands.append({"Q": Q, "m": world.consts.m, "E_min": lo, "E_max": hi})
        pts[f"Q={Q}"] = [p for r in results for p in r.report.K_points]
    disjoint = check_disjoint_bands([(b["E_min"], b["E_max"]) for b in bands])
    write_csv(out / "kset.csv", KSET_HEADER, rows)
    write_json(out / "sweep.json", {"bands": bands, "disjoint": disjoint, "all_pass": ok and disjoint})
    if args.figures:
        from .plotting import plot_kset
        plot_kset(pts, out / "kset_sweep.png")
    return ok and disjoint


def cmd_selftest(cfg, out, args):
    from .selftest import run_all

    world, _ = _world(cfg)
    checks = run_all(world, seed=cfg.seed)
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['check']}")
    write_json(out / "selftest.json", checks)
    return all(c["pass"] for c in checks)


COMMANDS = {
    "constants": cmd_constants,
    "orbit": cmd_orbit,
    "scaffold": cmd_scaffold,
    "chaos": cmd_chaos,
    "sweep": cmd_sweep,
    "selftest": cmd_selftest,
}


def build_parser():
    p = argparse.ArgumentParser(prog="racketchaos", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="JSON experiment configuration")
    p.add_argument("--out", type=Path, help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="seed for randomized checks")
    p.add_argument("--codes", help="comma-separated code words (overrides the config)")
    p.add_argument("--figures", action="store_true", help="also render PNG figures")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def error_report(exc, command):
    """Module and operation of the innermost package frame, plus the error kind."""
    frames = [f for f in traceback.extract_tb(exc.__traceback__) if "racketchaos" in f.filename]
    frame = frames[-1] if frames else None
    out = {
        "command": command,
        "module": Path(frame.filename).stem if frame else None,
        "operation": frame.name if frame else None,
    }
    if isinstance(exc, RacketChaosError):
        out.update(exc.to_dict())
    else:
        out.update(kind=type(exc).__name__, message=str(exc))
    return out


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    except RacketChaosError as exc:
        print(json.dumps(error_report(exc, args.command)), file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.codes:
        cfg.codes = tuple(c.strip() for c in args.codes.split(",") if c.strip())
    out = args.out or Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        ok = COMMANDS[args.command](cfg, out, args)
    except (RacketChaosError, ValueError) as exc:
        report = error_report(exc, args.command)
        write_json(out / "error.json", report)
        print(json.dumps(report), file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
