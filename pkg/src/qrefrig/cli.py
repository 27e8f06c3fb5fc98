"""Command-line interface: ``refrig report|sweep|figure|validate``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .io import ConfigError, ResultTable, derived_quantities, heatmap_svg, line_svg, load_config, write_atomic
from .metrics import SweepRow, performance_report, sweep

EXIT_OK, EXIT_CONFIG, EXIT_OUT_OF_WINDOW, EXIT_VALIDATION = 0, 1, 2, 3

EPILOG = """\
CSV columns: sweep axes in declaration order, then metric columns sorted
alphabetically (case-insensitive). Numbers use 12 significant digits; undefined
metrics (vanishing mean flux) are written as nan and in_window as 1/0. Sweeps
over several models prefix metrics with the model name (qrc_J_c) and add
comparison columns such as power_ratio_qrc_qri.

Exit codes: 0 ok, 1 usage or config error, 2 out-of-window result (report),
3 validation failure. REFRIG_JOBS sets the default for --jobs.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors share the config-error exit code
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _default_jobs() -> int:
    raw = os.environ.get("REFRIG_JOBS", "1")
    try:
        jobs = int(raw)
    except ValueError:
        raise ConfigError(f"REFRIG_JOBS must be an integer, got {raw!r}") from None
    if jobs < 1:
        raise ConfigError("REFRIG_JOBS must be >= 1")
    return jobs


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="refrig",
        description="Quantum absorption refrigerators: currents, fluctuations and bounds.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON run configuration")
        p.add_argument("--out", help="directory for CSV/JSON (and SVG) output")
        p.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps (default: REFRIG_JOBS or 1)")
        p.add_argument("--svg", action="store_true", help="also write a minimal SVG plot")

    common(sub.add_parser("report", help="performance report at one parameter point", epilog=EPILOG,
                          formatter_class=argparse.RawDescriptionHelpFormatter))
    common(sub.add_parser("sweep", help="grid over one or two parameters", epilog=EPILOG,
                          formatter_class=argparse.RawDescriptionHelpFormatter))
    fig = sub.add_parser("figure", help="standard figure grids: fig2, fig4a, fig4b, fig4c, fig5")
    fig.add_argument("name")
    common(fig, config_required=False)
    common(sub.add_parser("validate", help="run the invariant suite at the config's parameters"))
    return parser


def _paths(cfg_outputs, out_dir: str | None, stem: str, svg: bool) -> dict[str, str]:
    paths = dict(cfg_outputs or {})
    if out_dir:
        base = Path(out_dir)
        paths.setdefault("csv_path", str(base / f"{stem}.csv"))
        paths.setdefault("json_path", str(base / f"{stem}.json"))
        if svg:
            paths.setdefault("svg_path", str(base / f"{stem}.svg"))
    if not svg:
        paths.pop("svg_path", None)
    return paths


def _emit(table: ResultTable, paths: dict[str, str], svg_text=None) -> None:
    if paths.get("csv_path") or paths.get("json_path"):
        table.write(paths.get("csv_path"), paths.get("json_path"))
        for key in ("csv_path", "json_path"):
            if paths.get(key):
                print(f"wrote {paths[key]}")
    else:
        sys.stdout.write(table.to_csv())
    if paths.get("svg_path") and svg_text is not None:
        write_atomic(paths["svg_path"], svg_text())
        print(f"wrote {paths['svg_path']}")


def _spec_metadata(spec) -> dict:
    return {"spec": spec.params(), "version": __version__, **derived_quantities(spec)}


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    if cfg.axes:
        raise ConfigError("report takes no sweep axes; use the sweep command")
    spec = cfg.spec()
    rep = performance_report(spec)
    meta = {**_spec_metadata(spec), "command": "report", "beta_s_k_label": rep.beta_s_k_label}
    table = ResultTable.from_records([], [rep.metrics()], meta)
    _emit(table, _paths(cfg.outputs, args.out, "report", False))
    return EXIT_OK if rep.in_window else EXIT_OUT_OF_WINDOW


def _sweep_record(row: SweepRow, models: Sequence[str]) -> dict:
    rec: dict = dict(row.point)
    single = len(models) == 1
    for model in models:
        rep = row.reports.get(model)
        if rep is None:
            continue
        for k, v in rep.metrics().items():
            rec[k if single else f"{model}_{k}"] = v
    for name, cmp in row.comparisons.items():
        rec[f"power_ratio_{name}"] = None if cmp is None else cmp.power_ratio
        rec[f"nsr_ratio_{name}"] = None if cmp is None else cmp.nsr_ratio
    if not single:
        rec["in_window"] = float(row.in_window)
    return rec


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not cfg.axes:
        raise ConfigError("sweep needs at least one axis under 'sweep'")
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    models = cfg.sweep_models
    rows = sweep(cfg.params, cfg.axes, models, jobs=jobs)
    axes = [a.param for a in cfg.axes]
    records = [_sweep_record(r, models) for r in rows]
    meta = {
        "command": "sweep",
        "version": __version__,
        "base": dict(cfg.params),
        "models": list(models),
        "axes": [{"param": a.param, "from": a.start, "to": a.stop, "points": a.points} for a in cfg.axes],
    }
    try:
        meta.update(_spec_metadata(cfg.spec()))
    except ValueError:
        pass
    table = ResultTable.from_records(axes, records, meta)
    jc = "J_c" if len(models) == 1 else f"{models[0]}_J_c"

    def svg():
        if len(axes) == 1:
            ys = [c for c in table.columns if c == "J_c" or c.endswith("_J_c")]
            return line_svg(table, axes[0], ys)
        return heatmap_svg(table, axes[0], axes[1], jc)

    _emit(table, _paths(cfg.outputs, args.out, "sweep", args.svg), svg)
    return EXIT_OK


def cmd_figure(args) -> int:
    from .figures import FIGURES, figure_svg, figure_table

    if args.name not in FIGURES:
        raise ConfigError(f"unknown figure {args.name!r}; valid names: {', '.join(FIGURES)}")
    outputs = load_config(args.config).outputs if args.config else {}
    table = figure_table(args.name)
    _emit(table, _paths(outputs, args.out, args.name, args.svg), lambda: figure_svg(args.name, table))
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import format_checks, run_checks

    cfg = load_config(args.config)
    checks = run_checks(cfg.spec(), cfg.tolerances)
    print(format_checks(checks))
    failed = [c.name for c in checks if c.failed]
    print(f"{len(checks) - len(failed)} of {len(checks)} checks without failure" if not failed
          else f"FAILED: {', '.join(failed)}")
    return EXIT_VALIDATION if failed else EXIT_OK


COMMANDS = {"report": cmd_report, "sweep": cmd_sweep, "figure": cmd_figure, "validate": cmd_validate}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"refrig: error: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
