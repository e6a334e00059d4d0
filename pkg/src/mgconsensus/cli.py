"""Command-line interface.

Subcommands: run, design, attacks generate, attacks verify, sweep. Outputs
are byte-deterministic for a fixed scenario and seed (sorted JSON keys,
repr-formatted floats in CSV).

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from pathlib import Path

import yaml

from .attacks import ChannelSet, podf_bound, verify_sequence
from .engine import RunMetrics, Simulation
from .errors import ConfigError
from .scenario import MODES, Scenario, load_scenario


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _write_trace_csv(path: Path, metrics: RunMetrics, n: int) -> None:
    header = ["time"] + [f"x{i}" for i in range(n)] + [f"u{i}" for i in range(n)]
    lines = [",".join(header)]
    for t, row, urow in zip(metrics.times, metrics.states, metrics.inputs):
        vals = [repr(float(t))] + [repr(float(v)) for v in row]
        vals += [repr(float(v)) for v in urow]
        lines.append(",".join(vals))
    path.write_text("\n".join(lines) + "\n")


def _write_events_csv(path: Path, metrics: RunMetrics) -> None:
    header = "time,edge_i,edge_j,comm_healthy,diff,u,theta,eps,rate,dwell_floor"
    lines = [header]
    for t, e, h, diff, u, theta, eps, rate, floor_ in metrics.trigger_log:
        i, j = metrics.directed_edges[e]
        lines.append(",".join([
            repr(float(t)), str(i), str(j), str(int(h)),
            "" if diff is None else repr(float(diff)),
            str(u), repr(float(theta)), repr(float(eps)), repr(float(rate)),
            repr(float(floor_)),
        ]))
    path.write_text("\n".join(lines) + "\n")


def _metrics_summary(metrics: RunMetrics) -> dict:
    return {
        "entry_time": metrics.entry_time,
        "converged": metrics.converged,
        "delta": metrics.delta,
        "final_states": [float(v) for v in metrics.final_states],
        "final_spread": float(metrics.spread_series[-1]) if metrics.spread_series.size else None,
        "final_v": float(metrics.v_series[-1]) if metrics.v_series.size else None,
        "trigger_count": len(metrics.trigger_log),
        "channel_stats": metrics.channel_stats,
    }


def _run_instance(scen: Scenario, name: str, channels, outdir: Path) -> dict:
    cfg = scen.engine_config(name, channels)
    metrics = Simulation(cfg).run()
    _write_trace_csv(outdir / f"{name}_trace.csv", metrics, scen.topology.node_count)
    _write_events_csv(outdir / f"{name}_events.csv", metrics)
    summary = _metrics_summary(metrics)
    _write_json(outdir / f"{name}_metrics.json", summary)
    return summary


def cmd_run(args) -> int:
    scen = load_scenario(args.scenario)
    if args.mode:
        scen = scen.with_mode(args.mode)
    if args.seed is not None:
        scen = scen.with_seed(args.seed)
    outdir = Path(args.out or (Path(args.scenario).stem + ".out"))
    outdir.mkdir(parents=True, exist_ok=True)

    channels = scen.build_channels()
    if channels is not None:
        _write_json(outdir / "attack_trace.json", channels.to_dict())

    names = list(scen.instances) if args.instance == "all" else [args.instance]
    summary = {
        "scenario": str(args.scenario),
        "mode": scen.mode,
        "seed": scen.seed,
        "instances": {},
    }
    for name in names:
        summary["instances"][name] = _run_instance(scen, name, channels, outdir)
    if scen.mode != "nominal" or scen.has_attacks:
        summary["certificate"] = scen.certificate().to_dict()
    _write_json(outdir / "summary.json", summary)
    print(f"wrote {outdir}/summary.json")
    for name, s in summary["instances"].items():
        entry = "never" if s["entry_time"] is None else f"{s['entry_time']:.4f}"
        print(f"{name}: converged={s['converged']} entry_time={entry} "
              f"delta={s['delta']:.6g}")
    return 0


def cmd_design(args) -> int:
    scen = load_scenario(args.scenario)
    if args.mode:
        scen = scen.with_mode(args.mode)
    cert = scen.certificate()
    data = cert.to_dict()
    out = Path(args.out) if args.out else Path(args.scenario).with_suffix(".certificate.json")
    _write_json(out, data)
    print(f"wrote {out}")
    print(f"design satisfied: {cert.satisfied}")
    return 0 if cert.satisfied else 1


def cmd_attacks_generate(args) -> int:
    scen = load_scenario(args.scenario)
    if args.seed is not None:
        scen = scen.with_seed(args.seed)
    channels = scen.build_channels()
    if channels is None:
        raise ConfigError("scenario defines no attack channels")
    out = Path(args.out) if args.out else Path(args.scenario).with_suffix(".trace.json")
    _write_json(out, channels.to_dict())
    n_windows = sum(len(s.intervals) for s in channels.sequences.values())
    print(f"wrote {out} ({len(channels.sequences)} channels, {n_windows} windows)")
    return 0


def cmd_attacks_verify(args) -> int:
    with open(args.trace) as fh:
        data = json.load(fh) if args.trace.endswith(".json") else yaml.safe_load(fh)
    try:
        channels = ChannelSet.from_dict(data)
    except (ValueError, KeyError, TypeError) as exc:
        print(f"malformed trace: {exc}", file=sys.stderr)
        return 1
    ok = True
    for key in sorted(channels.sequences):
        rep = verify_sequence(channels.sequences[key], channels.params[key])
        label = "/".join(str(k) for k in key)
        status = "ok" if rep.ok else "VIOLATION"
        print(f"{label}: {status} freq_slack={rep.frequency_slack:.6g} "
              f"dur_slack={rep.duration_slack:.6g}")
        for v in rep.violations:
            print(f"  {v}")
        ok = ok and rep.ok
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    scen = load_scenario(args.scenario)
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    seeds = list(range(args.seeds))
    instance = args.instance

    def median_entry(scale_class, intensity) -> tuple[float, int]:
        entries, missed = [], 0
        for s in seeds:
            ch = scen.build_channels(seed=scen.seed + s, scale_class=scale_class,
                                     intensity=intensity)
            cfg = scen.engine_config(instance, ch, stop_when_frozen=True)
            if scale_class == "actuation":
                # a hardened budget also shrinks the offline bound the
                # adaptive input scaling is designed against
                _, act_params, _ = scen.channel_params()
                cfg.phi_act = [
                    podf_bound(p.scaled(intensity)) if p else 0.0
                    for p in act_params
                ]
            m = Simulation(cfg).run()
            if m.entry_time is None:
                missed += 1
            else:
                entries.append(m.entry_time)
        med = statistics.median(entries) if entries else float("nan")
        return med, missed

    base_med, base_miss = median_entry(None, 1.0)
    result = {
        "scenario": str(args.scenario),
        "instance": instance,
        "intensity": args.intensity,
        "seeds": args.seeds,
        "baseline": {"median_entry_time": base_med, "unconverged": base_miss},
        "reduced": {},
    }
    for cls in classes:
        med, miss = median_entry(cls, args.intensity)
        result["reduced"][cls] = {
            "median_entry_time": med,
            "unconverged": miss,
            "improvement": base_med - med,
        }
        print(f"{cls}: median entry {med:.4f} (baseline {base_med:.4f}, "
              f"improvement {base_med - med:+.4f})")
    if args.out:
        _write_json(Path(args.out), result)
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mgconsensus",
        description="Self-triggered ternary consensus under DoS: simulate, "
                    "design, and audit attack traces.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="simulate a scenario")
    pr.add_argument("scenario")
    pr.add_argument("--mode", choices=MODES)
    pr.add_argument("--seed", type=int)
    pr.add_argument("--instance", default="all")
    pr.add_argument("--out", help="output directory")
    pr.set_defaults(func=cmd_run)

    pd = sub.add_parser("design", help="compute the offline design certificate")
    pd.add_argument("scenario")
    pd.add_argument("--mode", choices=MODES)
    pd.add_argument("--out")
    pd.set_defaults(func=cmd_design)

    pa = sub.add_parser("attacks", help="attack-trace tooling")
    asub = pa.add_subparsers(dest="attacks_command", required=True)
    pg = asub.add_parser("generate", help="generate budget-satisfying traces")
    pg.add_argument("scenario")
    pg.add_argument("--seed", type=int)
    pg.add_argument("--out")
    pg.set_defaults(func=cmd_attacks_generate)
    pv = asub.add_parser("verify", help="audit a trace file against its budgets")
    pv.add_argument("trace")
    pv.set_defaults(func=cmd_attacks_verify)

    ps = sub.add_parser("sweep", help="attack-reduction sweep over seeds")
    ps.add_argument("scenario")
    ps.add_argument("--classes", default="measurement,actuation,communication")
    ps.add_argument("--intensity", type=float, default=0.5)
    ps.add_argument("--seeds", type=int, default=20)
    ps.add_argument("--instance", default="frequency")
    ps.add_argument("--out")
    ps.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
