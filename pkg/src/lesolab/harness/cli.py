"""Command-line entry point: ``lesolab run | compare | metrics | configs``.

Results go to stdout as JSON. Failures print one JSON line
``{"error": <kind>, "message": <text>}`` to stderr and exit nonzero
(2 for bad input, 1 for a failed simulation).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from ..errors import ConfigError, LesoError
from .compare import compare_variants
from .metrics import compute_metrics, metrics_for
from .runner import run_scenario
from .scenario import bundled_configs, load_scenario
from .trace import export_trace, read_trace

OUT_ENV = "LESOLAB_OUT"


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    return obj


def _emit(payload) -> None:
    print(json.dumps(_clean(payload), indent=2, sort_keys=True))


def _overrides(args) -> dict[str, str]:
    out = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    if args.seed is not None:
        out["scenario.seed"] = str(args.seed)
    if args.dt is not None:
        out["scenario.dt"] = str(args.dt)
    return out


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV, "lesolab_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    sc = load_scenario(args.config, _overrides(args))
    out = _out_dir(args)
    trace = run_scenario(sc)
    path = export_trace(trace, out / "trace.csv")
    payload = {"scenario": sc.name, "variant": sc.observer.variant, "trace": str(path),
               "status": trace.meta["status"], "steps": len(trace)}
    if not trace.failed:
        payload["metrics"] = metrics_for(trace, sc.metrics).as_dict()
    (out / "summary.json").write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")
    _emit(payload)
    if trace.failed:
        print(json.dumps({"error": "simulation", "message": trace.meta["status"]}), file=sys.stderr)
        return 1
    return 0


def cmd_compare(args) -> int:
    sc = load_scenario(args.config, _overrides(args))
    out = _out_dir(args)
    report = compare_variants(sc, [v for v in args.variants.split(",") if v.strip()], out)
    (out / "metrics.txt").write_text(report.table() + "\n")
    payload = report.as_dict()
    (out / "metrics.json").write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")
    print(report.table(), file=sys.stderr)
    _emit(payload)
    return 0 if all(r.error is None for r in report.rows) else 1


def cmd_metrics(args) -> int:
    trace = read_trace(args.trace)
    window = tuple(args.window) if args.window else None
    m = compute_metrics(trace, args.step_time, window, args.band, args.step_end)
    _emit(m.as_dict())
    return 0


def cmd_configs(args) -> int:
    _emit(bundled_configs())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lesolab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_opts(sp):
        sp.add_argument("--config", required=True, help="scenario .ini file or bundled config name")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./lesolab_out)")
        sp.add_argument("--seed", type=int, help="override scenario.seed")
        sp.add_argument("--dt", type=float, help="override scenario.dt")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any flat key")

    sp = sub.add_parser("run", help="simulate one scenario")
    scenario_opts(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("compare", help="simulate several observer variants")
    scenario_opts(sp)
    sp.add_argument("--variants", default="mf,mb,l", help="comma list; tag@omega overrides omega_o")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("metrics", help="metrics of an exported trace")
    sp.add_argument("--trace", required=True)
    sp.add_argument("--step-time", type=float, required=True)
    sp.add_argument("--step-end", type=float)
    sp.add_argument("--window", type=float, nargs=2, metavar=("START", "END"))
    sp.add_argument("--band", type=float, default=0.02)
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("configs", help="list bundled scenario files")
    sp.set_defaults(func=cmd_configs)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    except (LesoError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
