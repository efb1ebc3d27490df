"""Command-line front end.

    hycomp validate PATH [--json]
    hycomp simulate PATH [--system S] [--init MODE:c0,...] [--policy P] [--seed N]
                         [--t-max T] [--step H] [--max-jumps J] [--out FILE] [--format csv|json]
    hycomp check-map PATH --map NAME [--executions K]
    hycomp network PATH [--network NAME] [--apply] [--check-theorem] [--map NAME]
    hycomp demo NAME [--export]

``PATH`` is a YAML config file or ``demo:NAME`` for a built-in example.

Exit codes: 0 success, 1 semantic failure, 2 parse or structural failure,
3 runtime failure (NaN or stuck execution).  ``HYCOMP_TOL`` overrides the
default containment tolerance; ``--tol`` overrides both.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import config as cfgmod
from .config import Config, ConfigError, parse_init
from .corpus import DEMOS, build
from .geometry import default_tol, set_default_tol
from .hyds import check_hds_map, pushforward_execution, to_csv, to_json, validate_execution
from .hyph import UnderlyingPoint, label, validate_map, validate_space
from .networks import apply_interconnection, induced_system_map, validate_network, validate_network_map
from .opensys import crl_check, validate_ssub_map, validate_submersion
from .report import Report
from .simulate import POLICIES, JumpPolicy, SimConfig, sim_tolerance, simulate

EXIT_OK, EXIT_SEMANTIC, EXIT_STRUCTURAL, EXIT_RUNTIME = 0, 1, 2, 3
REPORT_SCHEMA = 1


def load_config(path: str) -> Config:
    if path.startswith("demo:"):
        name = path[5:]
        if name not in DEMOS:
            raise ConfigError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}", path)
        return Config(cfgmod.export(name), path)
    try:
        return Config.from_path(path)
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", path) from None


def _exit_code(reports: list[Report]) -> int:
    if not all(r.structural_ok for r in reports):
        return EXIT_STRUCTURAL
    if not all(r.ok for r in reports):
        return EXIT_SEMANTIC
    return EXIT_OK


def _emit(args, reports: list[Report], extra: dict | None = None) -> int:
    code = _exit_code(reports)
    if args.json:
        doc = {"schema": REPORT_SCHEMA, "exit": code, "reports": [r.to_dict() for r in reports]}
        doc.update(extra or {})
        print(json.dumps(doc, indent=1))
    else:
        for r in reports:
            print(r.summary())
        for k, v in (extra or {}).items():
            print(f"{k}: {v}")
    return code


def validate_config(c: Config, nsamples: int = 8, tol: float | None = None) -> list[Report]:
    """Run every validator that applies to the objects a config declares."""
    reports = []
    for section, name, obj in c.resolve_all():
        where = f"{section}.{name}"
        if section == "spaces":
            r = validate_space(obj, nsamples, tol)
        elif section == "maps":
            r = validate_map(obj, nsamples, tol)
        elif section == "systems":
            r = Report(f"system {name}")
            for m, f in obj.field.items():
                for x in obj.space.modes[m].sample(np.random.default_rng(0), nsamples):
                    r.checked += 1
                    if not np.all(np.isfinite(f(x))):
                        r.semantic(f"mode {label(m)}", f"non-finite field at {x.tolist()}")
                        break
        elif section == "submersions":
            r = validate_submersion(obj, nsamples, tol)
        elif section == "open_systems":
            r = crl_check(obj, nsamples)
        elif section == "ssub_maps":
            r = validate_ssub_map(obj, nsamples, tol)
        elif section == "networks":
            r = validate_network(obj, nsamples, tol)
        elif section == "network_maps":
            r = validate_network_map(obj, nsamples, tol)
        elif section == "hds_maps":
            r = check_hds_map(*obj, nsamples=nsamples, tol=tol)
        else:
            continue
        r.name = where
        reports.append(r)
    return reports


def cmd_validate(args) -> int:
    c = load_config(args.path)
    return _emit(args, validate_config(c, args.samples, args.tol))


def _sim_settings(c: Config, args) -> dict:
    sims = c.names("simulations")
    base = {}
    if args.simulation:
        base = c.simulation(args.simulation)
    elif sims:
        base = c.simulation(sims[0])
    over = {"system": args.system, "init": args.init, "policy": args.policy, "seed": args.seed,
            "t_max": args.t_max, "step": args.step, "max_jumps": args.max_jumps,
            "integrator": args.integrator}
    s = dict(base)
    s.update({k: v for k, v in over.items() if v is not None})
    if "system" not in s:
        systems = c.names("systems")
        if not systems:
            raise ConfigError("no system to simulate", "simulate")
        s["system"] = systems[-1]
    if "init" not in s:
        raise ConfigError("no initial state given (use --init MODE:c0,c1,...)", "simulate")
    return s


def cmd_simulate(args) -> int:
    c = load_config(args.path)
    s = _sim_settings(c, args)
    h = c.system(s["system"])
    init = parse_init(str(s["init"]), h)
    try:
        policy = JumpPolicy(str(s.get("policy", "priority")), int(s.get("seed", 0)))
        sc = SimConfig(step=float(s.get("step", 1e-3)), t_max=float(s.get("t_max", 10.0)),
                       max_jumps=int(s.get("max_jumps", 100)), integrator=str(s.get("integrator", "rk4")))
        e = simulate(h, init, policy, sc, args.tol)
    except ValueError as exc:
        raise ConfigError(str(exc), "simulate") from None
    text = to_json(e) + "\n" if args.format == "json" else to_csv(e)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    mode, x = e.final
    summary = {"system": s["system"], "status": e.status, "jumps": len(e.jumps),
               "jump_times": [float(t) for t in e.jump_times],
               "final": {"t": float(e.track[-1]), "mode": label(mode), "x": [float(v) for v in x]}}
    if args.check:
        r = validate_execution(e, h, sim_tolerance(sc))
        summary["validation"] = r.to_dict()
    out = sys.stderr if not args.out else sys.stdout
    if args.json:
        print(json.dumps({"schema": REPORT_SCHEMA, **summary}, indent=1), file=out)
    else:
        print(f"{s['system']}: status {e.status}, {len(e.jumps)} jumps, final t={e.track[-1]:.6g} "
              f"mode {label(mode)} x={[float(v) for v in x]}", file=out)
        if args.check:
            print(r.summary(), file=out)
    if e.status in ("nan", "stuck"):
        return EXIT_RUNTIME
    if args.check and not r.ok:
        return EXIT_SEMANTIC
    return EXIT_OK


def check_map_executions(F, src, dst, inits, sc: SimConfig, policy: JumpPolicy, tol=None) -> Report:
    """Push executions of ``src`` through ``F`` and validate them as executions of ``dst``."""
    report = Report(f"executions through {F.name or '?'}")
    etol = 10 * sim_tolerance(sc)
    for k, init in enumerate(inits):
        e = simulate(src, init, policy, sc, tol)
        if e.status == "nan":
            report.add("runtime", f"execution {k}", "simulation produced NaN")
            continue
        report.extend(validate_execution(pushforward_execution(F, e), dst, etol), f"execution {k}: ")
    return report


def cmd_check_map(args) -> int:
    c = load_config(args.path)
    names = [args.map] if args.map else c.names("hds_maps")
    if not names:
        raise ConfigError("no hds map to check", "check-map")
    reports = []
    for n in names:
        F, src, dst = c.hds_map(n)
        r = check_hds_map(F, src, dst, args.samples, args.tol)
        r.name = f"hds_maps.{n}"
        reports.append(r)
        if r.ok and args.executions > 0:
            rng = np.random.default_rng(args.seed)
            modes = list(src.space.modes)
            inits = []
            for _ in range(args.executions):
                m = modes[int(rng.integers(len(modes)))]
                inits.append(UnderlyingPoint(m, src.space.modes[m].sample(rng, 1)[0]))
            sc = SimConfig(step=args.step, t_max=args.t_max, max_jumps=args.max_jumps)
            reports.append(check_map_executions(F, src, dst, inits, sc, JumpPolicy("priority", args.seed),
                                                args.tol))
    return _emit(args, reports)


def cmd_network(args) -> int:
    c = load_config(args.path)
    names = [args.network] if args.network else c.names("networks")
    reports, extra = [], {}
    for n in names:
        r = validate_network(c.network(n), args.samples, args.tol)
        r.name = f"networks.{n}"
        reports.append(r)
    if args.apply:
        extra["apply"] = {}
        for sname in c.names("systems"):
            defn = c.doc["systems"][sname]
            if "network" not in defn or str(defn["network"]) not in map(str, names):
                continue
            net = c.network(defn["network"])
            w = {x: c.open_system(defn["open_systems"][cfgmod._key(defn["open_systems"], x, sname)])
                 for x in net.index}
            o = apply_interconnection(net, w)
            rng = np.random.default_rng(args.seed)
            rows = []
            for m, box in o.carrier.tot.modes.items():
                for q in box.sample(rng, args.samples):
                    rows.append({"mode": label(m), "x": [float(v) for v in q],
                                 "field": [float(v) for v in o(m, q)]})
            extra["apply"][str(sname)] = rows
    if args.check_theorem:
        maps = [args.map] if args.map else [
            m for m in c.names("network_maps")
            if not args.network or str(args.network) in (str(c.doc["network_maps"][m].get("src")),
                                                         str(c.doc["network_maps"][m].get("dst")))]
        if not maps:
            raise ConfigError("no network map to check", "network")
        extra["theorem"] = {}
        for mn in maps:
            w, u = c.network_map_systems(mn)
            chk = induced_system_map(c.network_map(mn), w, u, max(args.samples, 16), args.tol, args.seed)
            chk.hypotheses.name = f"network_maps.{mn} hypotheses"
            reports.append(chk.hypotheses)
            if chk.conclusion is not None:
                chk.conclusion.name = f"network_maps.{mn} conclusion"
                reports.append(chk.conclusion)
            extra["theorem"][str(mn)] = {
                "hypotheses": "PASS" if chk.hypotheses_ok else "FAIL",
                "conclusion": {True: "PASS", False: "FAIL", None: "NOT ATTEMPTED"}[chk.conclusion_ok],
                "residual": None if chk.conclusion is None else chk.conclusion.worst,
            }
    if args.apply and not args.json:
        rows = extra.pop("apply")
        for sname, rr in rows.items():
            print(f"induced field of {sname}:")
            for row in rr:
                print(f"  {row['mode']} x={row['x']} -> {row['field']}")
    return _emit(args, reports, extra)


def cmd_demo(args) -> int:
    if args.name not in DEMOS:
        raise ConfigError(f"unknown demo {args.name!r}; choose from {', '.join(DEMOS)}", "demo")
    if args.export:
        sys.stdout.write(cfgmod.export_text(args.name))
        return EXIT_OK
    d = build(args.name)
    c = Config(cfgmod.export(args.name), f"demo:{args.name}")
    reports = validate_config(c, args.samples, args.tol)
    if d.kind == "network-map":
        chk = induced_system_map(d.main, d.parts["w"], d.parts["u"], 16, args.tol)
        chk.hypotheses.name = "hypotheses"
        reports.append(chk.hypotheses)
        if chk.conclusion is not None:
            reports.append(chk.conclusion)
    return _emit(args, reports, {"demo": args.name, "kind": d.kind})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hycomp", description="Compose, simulate and check hybrid systems.")
    p.add_argument("--tol", type=float, default=None, help="containment / residual tolerance")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, samples=8):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--samples", type=int, default=samples, help="sample points per mode")
        sp.add_argument("--tol", type=float, default=argparse.SUPPRESS)

    v = sub.add_parser("validate", help="validate every object in a config")
    v.add_argument("path")
    common(v)
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("simulate", help="simulate a system and write a trace")
    s.add_argument("path")
    s.add_argument("--simulation", help="named entry in the simulations section")
    s.add_argument("--system")
    s.add_argument("--init", help="MODE:c0,c1,...")
    s.add_argument("--policy", choices=POLICIES)
    s.add_argument("--seed", type=int)
    s.add_argument("--t-max", type=float)
    s.add_argument("--step", type=float)
    s.add_argument("--max-jumps", type=int)
    s.add_argument("--integrator", choices=("rk4", "euler"))
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--check", action="store_true", help="validate the generated execution")
    common(s)
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("check-map", help="check that a map relates two systems")
    m.add_argument("path")
    m.add_argument("--map")
    m.add_argument("--executions", type=int, default=5, help="simulated executions to push forward")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--step", type=float, default=0.01)
    m.add_argument("--t-max", type=float, default=3.0)
    m.add_argument("--max-jumps", type=int, default=50)
    common(m, 16)
    m.set_defaults(func=cmd_check_map)

    n = sub.add_parser("network", help="validate networks, apply interconnections, check network maps")
    n.add_argument("path")
    n.add_argument("--network")
    n.add_argument("--apply", action="store_true", help="sample the interconnected field")
    n.add_argument("--check-theorem", action="store_true", help="check relatedness induced by network maps")
    n.add_argument("--map")
    n.add_argument("--seed", type=int, default=0)
    common(n)
    n.set_defaults(func=cmd_network)

    d = sub.add_parser("demo", help="run or export a built-in example")
    d.add_argument("name", choices=DEMOS)
    d.add_argument("--export", action="store_true", help="print the example as a config document")
    common(d)
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol is not None:
        set_default_tol(args.tol)
    try:
        return args.func(args)
    except ConfigError as exc:
        if getattr(args, "json", False):
            print(json.dumps({"schema": REPORT_SCHEMA, "exit": EXIT_STRUCTURAL, "error": str(exc),
                              "where": exc.where}, indent=1))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
