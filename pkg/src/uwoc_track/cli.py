"""Command-line front end.

    uwoc-track run <preset|config.toml> [--controller pd|nlpd] [--seed N]
                   [--timeseries out.csv] [--metrics out.json]
    uwoc-track cone-solve [--config cfg.toml]
    uwoc-track contour [--config cfg.toml] [--out grid.csv]
    uwoc-track compare <A> <B>

``compare`` accepts a metrics JSON written by ``run`` or anything ``run``
accepts, with an optional ``:pd``/``:nlpd`` suffix (``case1:nlpd``).
Exit status: 0 success, 1 invalid input or I/O failure, 2 divergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from .cone import BracketError, UnreachableRateError, solve_slant_height
from .config import CONTROLLER_TYPES, PRESETS, ConfigError, RunConfig, load_config, preset
from .export import (ExportError, export_contour, export_metrics, export_timeseries,
                     load_metrics, metrics_text)
from .sim import run
from .vehicle import DivergenceError

EXIT_OK, EXIT_INVALID, EXIT_DIVERGED = 0, 1, 2
COMPARED = ("rmse_x", "rmse_y", "rmse_rho", "t_a", "t_b")


def resolve_config(spec: str, controller: str | None = None, seed: int | None = None) -> RunConfig:
    """Preset name or config path, with an optional ``:controller`` suffix."""
    base, sep, suffix = spec.rpartition(":")
    if not sep or suffix not in CONTROLLER_TYPES:
        base, suffix = spec, ""
    cfg = preset(base) if base in PRESETS else load_config(base)
    kind = controller or suffix or None
    if kind:
        cfg = cfg.with_values(controller__type=kind)
    if seed is not None:
        cfg = cfg.with_values(noise__seed=seed)
    return cfg


def _config_or_default(path: str | None) -> RunConfig:
    return load_config(path) if path else preset("nominal")


def cmd_run(args) -> int:
    cfg = resolve_config(args.config, args.controller, args.seed)
    t0 = time.perf_counter()
    record = run(cfg.scenario)
    elapsed = time.perf_counter() - t0
    out = cfg.output
    ts_path = args.timeseries or out.timeseries
    m_path = args.metrics or out.metrics
    if ts_path:
        export_timeseries(record, ts_path)
    if m_path:
        export_metrics([(cfg, record)], m_path)
    m = record.metrics
    print(f"{cfg.scenario.name} [{cfg.scenario.controller.kind}] {len(record)} rows in {elapsed:.3f} s;"
          f" d_C = {record.cone.slant_height:.6f} m", file=sys.stderr)
    if not m_path:
        sys.stdout.write(metrics_text([(cfg, record)]))
    elif not m.established:
        print("communication never established", file=sys.stderr)
    return EXIT_OK


def cmd_cone_solve(args) -> int:
    cfg = _config_or_default(args.config)
    v = cfg.values
    d_c = solve_slant_height(cfg.link, v["cone.target_ber"], v["cone.min_bit_rate"])
    psi = cfg.link.rx.fov_half_angle
    print(json.dumps({"slant_height": d_c, "height": d_c * math.cos(psi), "half_angle": psi,
                      "target_ber": v["cone.target_ber"], "min_bit_rate": v["cone.min_bit_rate"]},
                     indent=2))
    return EXIT_OK


def cmd_contour(args) -> int:
    cfg = _config_or_default(args.config)
    path = args.out or cfg.output.contour or "contour.csv"
    offsets, depths = cfg.contour.axes()
    export_contour(cfg.link, offsets, depths, cfg.values["cone.target_ber"], path)
    print(f"wrote {len(depths)} x {len(offsets)} grid to {path}", file=sys.stderr)
    return EXIT_OK


def _metrics_for(spec: str) -> tuple[str, dict]:
    if spec.endswith(".json") and os.path.exists(spec):
        doc = load_metrics(spec)
        try:
            entry = doc["runs"][0]
            return f"{entry['name']}[{entry['controller']}]", entry["metrics"]
        except (KeyError, IndexError, TypeError):
            raise ConfigError(f"{spec}: not a metrics file written by 'run'") from None
    cfg = resolve_config(spec)
    record = run(cfg.scenario)
    return f"{cfg.scenario.name}[{cfg.scenario.controller.kind}]", record.metrics.as_dict()


def improvement(a, b) -> float | None:
    """Percent reduction from ``a`` to ``b``."""
    if a is None or b is None or isinstance(a, str) or isinstance(b, str) or a == 0:
        return None
    return 100.0 * (a - b) / a


def cmd_compare(args) -> int:
    name_a, ma = _metrics_for(args.a)
    name_b, mb = _metrics_for(args.b)
    print(f"{'metric':<10}{name_a:>18}{name_b:>18}{'improvement %':>16}")
    for key in COMPARED:
        a, b = ma.get(key), mb.get(key)
        imp = improvement(a, b)
        fa = "--" if a is None else f"{a:.6g}" if not isinstance(a, str) else a
        fb = "--" if b is None else f"{b:.6g}" if not isinstance(b, str) else b
        fi = "--" if imp is None else f"{imp:.2f}"
        print(f"{key:<10}{fa:>18}{fb:>18}{fi:>16}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input, not divergence
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="uwoc-track",
                                description="AUV-to-ship optical link tracking simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a preset or config file")
    r.add_argument("config", help=f"preset ({', '.join(PRESETS)}) or TOML config path")
    r.add_argument("--controller", choices=("pd", "nlpd", "none"))
    r.add_argument("--seed", type=int, help="override noise.seed")
    r.add_argument("--timeseries", help="CSV output path")
    r.add_argument("--metrics", help="metrics JSON output path (default: stdout)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("cone-solve", help="solve the cone slant height")
    c.add_argument("--config")
    c.set_defaults(func=cmd_cone_solve)

    g = sub.add_parser("contour", help="write the log10 bit-rate grid")
    g.add_argument("--config")
    g.add_argument("--out")
    g.set_defaults(func=cmd_contour)

    k = sub.add_parser("compare", help="improvement of run B over run A")
    k.add_argument("a")
    k.add_argument("b")
    k.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigError, UnreachableRateError, BracketError, ExportError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
