"""Command-line entry point: ``solve``, ``sweep`` and ``manifold``.

All rates on the command line, in config files and in CSV output are GHz
(value/2pi).  CSV numbers are printed with 17 significant digits so they
round-trip exactly; undefined values are empty fields.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, replace
from datetime import datetime, timezone
from pathlib import Path

from .config import RunConfig, build_config, parse_assignments, read_config_file
from .dynamics import observables, steady_state
from .errors import CavityError, ConfigError, InvalidParameter, UnknownFigure, UnknownLabel
from .model import TWO_PI, build
from .presets import FIGURES, figure_preset
from .spectra import bimodal_manifold
from .sweep import SweepResult, SweepSpec, run_sweep

log = logging.getLogger("bimodal_cavity")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
SOLVE_COLUMNS = (
    "delta_ghz", "occupation_a", "transmission_a", "g2_a", "occupation_b", "transmission_b", "g2_b",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def write_csv(stream, header, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def load_config(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    values.update(parse_assignments(args.set))
    cfg = build_config(values)
    if args.system:
        cfg = build_config({"system": args.system}, cfg)
    if args.out:
        cfg = replace(cfg, out=args.out)
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    if cfg.threads < 1:
        raise ConfigError("threads must be at least 1")
    return cfg


def cmd_solve(args, out) -> int:
    cfg = load_config(args)
    params = cfg.params if args.delta is None else cfg.params.with_values(delta=args.delta)
    m = build(cfg.system, params)
    rho = steady_state(m, cfg.settings)
    row: list = [params.delta]
    for label in ("a", "b"):
        try:
            obs = observables(m, rho, label, cfg.settings)
        except UnknownLabel:
            row += [None, None, None]
            continue
        row += [obs.occupation, obs.transmission, obs.g2]
    write_csv(out, SOLVE_COLUMNS, [row])
    return EXIT_OK


def sweep_spec(cfg: RunConfig, preset: str | None) -> SweepSpec:
    if preset:
        return figure_preset(preset, cfg.grid_points_1d, cfg.grid_points_2d, base=cfg.params)
    if not cfg.axes:
        raise ConfigError("sweep needs --preset or axis1 (and optionally axis2) in the configuration")
    return SweepSpec(cfg.params, cfg.system, cfg.axes, cfg.observe, cfg.drive_rule, cfg.compare, name="custom")


def result_rows(result: SweepResult):
    cols = result.spec.observable_columns()
    for row in result.rows:
        yield [*row.point, *(row.values[c] for c in cols), row.converged, row.fock_trunc, row.status]


def gnuplot_script(csv_path: Path, spec: SweepSpec) -> str:
    cols = spec.columns()
    lines = [
        "# gnuplot script generated alongside " + csv_path.name,
        "set datafile separator ','",
        "set datafile missing ''",
        "set key autotitle columnhead",
        f"set xlabel '{spec.axes[-1].name} (GHz)'",
    ]
    if spec.axes[-1].spacing == "log":
        lines.append("set logscale x")
    first = len(spec.axes) + 1
    data = range(first, first + len(spec.observable_columns()))
    if len(spec.axes) == 1:
        plots = [f"'{csv_path.name}' using 1:{i} with lines title '{cols[i - 1]}'" for i in data]
        lines.append("plot " + ", \\\n     ".join(plots))
    else:
        lines += [f"set ylabel '{spec.axes[0].name} (GHz)'", "set view map", "set dgrid3d"]
        for i in data:
            lines.append(f"splot '{csv_path.name}' using 2:1:{i} with pm3d title '{cols[i - 1]}'")
            lines.append("pause -1")
    return "\n".join(lines) + "\n"


def cmd_sweep(args, out) -> int:
    cfg = load_config(args)
    preset = args.preset
    spec = sweep_spec(cfg, preset)
    result = run_sweep(spec, cfg.settings, workers=cfg.threads)
    path = Path(cfg.out or f"{spec.name or 'sweep'}.csv")
    buf = io.StringIO()
    write_csv(buf, spec.columns(), result_rows(result))
    path.write_text(buf.getvalue(), encoding="utf-8")
    meta = {
        "created": datetime.now(timezone.utc).isoformat(),
        "preset": preset,
        "sweep": spec.to_dict(),
        "settings": asdict(cfg.settings),
        "threads": cfg.threads,
        "format": cfg.format,
        "rows": len(result.rows),
        "failed_rows": sum(row.status != "ok" for row in result.rows),
        "unconverged_rows": sum(not row.converged for row in result.rows),
    }
    path.with_suffix(".meta").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    if cfg.format == "csv+gnuplot":
        path.with_suffix(".gp").write_text(gnuplot_script(path, spec), encoding="utf-8")
    log.info("wrote %d rows to %s", len(result.rows), path)
    print(path, file=out)
    return EXIT_OK


def cmd_manifold(args, out) -> int:
    if args.n < 1:
        raise InvalidParameter("n must be at least 1")
    if args.g_a < 0 or args.g_b < 0:
        raise InvalidParameter("couplings must be non-negative")
    spec = bimodal_manifold(args.n, TWO_PI * args.g_a, TWO_PI * args.g_b)
    rows = [[spec.n_quanta, spec.dimension, i, lam / TWO_PI] for i, lam in enumerate(spec.eigenvalues)]
    write_csv(out, ("n_quanta", "dimension", "index", "eigenvalue_ghz"), rows)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one configuration key")
    common.add_argument("--system", help="single | bimodal | effective | molecule")
    common.add_argument("--out", help="output CSV path (sweep)")
    common.add_argument("--threads", type=int, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="bimodal-cavity", description="Photon statistics of a quantum dot in a bimodal cavity.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="steady state at one parameter point")
    p.add_argument("--delta", type=float, help="laser-cavity detuning in GHz (overrides the config)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", parents=[common], help="1-D or 2-D parameter sweep to CSV")
    p.add_argument("--preset", choices=FIGURES, help="figure preset")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("manifold", parents=[common], help="eigenvalues of the n-quanta bimodal manifold")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--g-a", type=float, default=10.0, help="GHz")
    p.add_argument("--g-b", type=float, default=10.0, help="GHz")
    p.set_defaults(func=cmd_manifold)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = make_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args, out)
    except (ConfigError, InvalidParameter, UnknownFigure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CavityError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
