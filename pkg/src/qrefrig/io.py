"""Run configuration parsing, result tables, and CSV/JSON/SVG writers.

Config files are JSON objects::

    {
      "model": "qrc",                      # qri | qrc | qrcn
      "beta_h": 1.0, "beta_c": 2.0, "beta_w": 0.09,
      "omega_h": 10.0, "omega_c": 0.9, "gamma0": 0.01,
      "sweep": [{"param": "beta_c", "from": 1.05, "to": 10.15, "points": 100}],
      "models": ["qri", "qrc"],            # optional, sweeps only
      "outputs": {"csv_path": "out.csv", "json_path": "out.json", "svg_path": "out.svg"},
      "tolerances": {"fcs_rel": 1e-8, "oracle_rel": 1e-4}
    }

QRCN configs use ``beta_w1``, ``beta_w2`` and ``omega_prime`` instead of
``beta_w``. Sweeps over several models may give the union of the keys.
"""

from __future__ import annotations

import json
import math
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .metrics import SweepAxis
from .model import RefrigeratorSpec, SpecError, Variant, cooling_window, synthetic_inverse_temperature

__all__ = [
    "ConfigError",
    "RunConfig",
    "ResultTable",
    "parse_config",
    "load_config",
    "format_number",
    "write_atomic",
    "derived_quantities",
    "line_svg",
    "heatmap_svg",
]

_COMMON_KEYS = ("beta_h", "beta_c", "omega_h", "omega_c", "gamma0")
_MODEL_KEYS = {
    Variant.QRI: ("beta_w",),
    Variant.QRC: ("beta_w",),
    Variant.QRCN: ("beta_w1", "beta_w2", "omega_prime"),
}
_TOP_LEVEL = {"model", "models", "sweep", "outputs", "tolerances", "beta_w", "beta_w1", "beta_w2", "omega_prime", *_COMMON_KEYS}
DEFAULT_TOLERANCES = {"fcs_rel": 1e-8, "oracle_rel": 1e-4}


class ConfigError(ValueError):
    """Malformed configuration; ``line`` points into the source text when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RunConfig:
    model: Variant
    params: Mapping[str, float]
    axes: tuple[SweepAxis, ...] = ()
    models: tuple[str, ...] = ()
    outputs: Mapping[str, str] = field(default_factory=dict)
    tolerances: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def spec(self) -> RefrigeratorSpec:
        return RefrigeratorSpec.from_params({"model": self.model.value, **self.params})

    @property
    def sweep_models(self) -> tuple[str, ...]:
        return self.models or (self.model.value,)


def _key_line(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _number(text: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}", _key_line(text, key))
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite", _key_line(text, key))
    return float(value)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", 1)
    unknown = sorted(set(raw) - _TOP_LEVEL)
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}", _key_line(text, unknown[0]))
    if "model" not in raw:
        raise ConfigError("missing required key 'model'", 1)
    try:
        model = Variant(str(raw["model"]).lower())
    except ValueError:
        raise ConfigError(
            f"model must be one of qri, qrc, qrcn, got {raw['model']!r}", _key_line(text, "model")
        ) from None

    models: tuple[str, ...] = ()
    if "models" in raw:
        line = _key_line(text, "models")
        if not isinstance(raw["models"], list) or not raw["models"]:
            raise ConfigError("models must be a non-empty list", line)
        try:
            models = tuple(Variant(str(m).lower()).value for m in raw["models"])
        except ValueError:
            raise ConfigError(f"models entries must be qri, qrc or qrcn, got {raw['models']!r}", line) from None

    needed = set(_COMMON_KEYS)
    for m in models or (model.value,):
        needed.update(_MODEL_KEYS[Variant(m)])
    missing = sorted(needed - set(raw))
    if missing:
        raise ConfigError(f"missing required key(s) for {model.value}: {', '.join(missing)}", 1)
    optional = set(raw) & {"beta_w", "beta_w1", "beta_w2", "omega_prime"}
    params = {k: _number(text, k, raw[k]) for k in sorted(needed | optional)}

    axes = []
    sweep = raw.get("sweep", [])
    sline = _key_line(text, "sweep")
    if not isinstance(sweep, list):
        raise ConfigError("sweep must be a list of axes", sline)
    for i, ax in enumerate(sweep):
        if not isinstance(ax, dict) or set(ax) != {"param", "from", "to", "points"}:
            raise ConfigError(f"sweep[{i}] needs exactly the keys param, from, to, points", sline)
        pts = ax["points"]
        if isinstance(pts, bool) or not isinstance(pts, int) or pts < 2:
            raise ConfigError(f"sweep[{i}].points must be an integer >= 2", sline)
        try:
            axes.append(SweepAxis(str(ax["param"]), _number(text, "from", ax["from"]), _number(text, "to", ax["to"]), pts))
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), sline) from None
        if axes[-1].param not in needed:
            raise ConfigError(f"sweep axis {axes[-1].param!r} is not a parameter of the selected models", sline)
    if len(axes) > 2:
        raise ConfigError("at most two sweep axes are supported", sline)

    outputs = raw.get("outputs", {})
    if not isinstance(outputs, dict) or not set(outputs) <= {"csv_path", "json_path", "svg_path"}:
        raise ConfigError("outputs accepts csv_path, json_path and svg_path", _key_line(text, "outputs"))
    tolerances = dict(DEFAULT_TOLERANCES)
    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict) or not set(tol) <= set(DEFAULT_TOLERANCES):
        raise ConfigError("tolerances accepts fcs_rel and oracle_rel", _key_line(text, "tolerances"))
    for k, v in tol.items():
        tolerances[k] = _number(text, k, v)
        if tolerances[k] <= 0:
            raise ConfigError(f"{k} must be positive", _key_line(text, k))

    cfg = RunConfig(model, params, tuple(axes), models, {k: str(v) for k, v in outputs.items()}, tolerances)
    if not axes:
        try:
            cfg.spec()
        except (SpecError, ValueError) as exc:
            raise ConfigError(f"invalid parameters: {exc}", 1) from None
    return cfg


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def format_number(x: float | None) -> str:
    """Fixed CSV formatting: 12 significant digits; None and NaN become ``nan``."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    x = float(x)
    return f"{x + 0.0 if x == 0 else x:.12g}"


def write_atomic(path: str | os.PathLike, data: str) -> None:
    """Write ``data`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def derived_quantities(spec: RefrigeratorSpec) -> dict[str, float | None]:
    win = cooling_window(spec)
    beta_sw = synthetic_inverse_temperature(spec) if spec.variant is Variant.QRCN else None
    return {"beta_s": win.beta_s, "beta_s_prime": win.beta_s_prime, "beta_sw": beta_sw}


def _json_number(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(x) + 0.0


@dataclass
class ResultTable:
    """Rectangular table with a JSON metadata block.

    Column order: sweep axes in declaration order, then metric columns sorted
    case-insensitively.
    """

    columns: list[str]
    rows: list[list[float | None]]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {i} has {len(row)} entries, expected {len(self.columns)}")

    @classmethod
    def from_records(cls, axes: Sequence[str], records: Sequence[Mapping[str, float | None]], metadata=None) -> ResultTable:
        metric_names = sorted({k for r in records for k in r} - set(axes), key=lambda s: (s.casefold(), s))
        columns = list(axes) + metric_names
        rows = [[r.get(c) for c in columns] for r in records]
        return cls(columns, rows, dict(metadata or {}))

    def column(self, name: str) -> list[float | None]:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(format_number(x) for x in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        """Columns, rows (undefined values as null) and the metadata block."""
        rows = [[_json_number(x) for x in row] for row in self.rows]
        doc = {"columns": self.columns, "rows": rows, "metadata": self.metadata}
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def write(self, csv_path=None, json_path=None) -> None:
        if csv_path:
            write_atomic(csv_path, self.to_csv())
        if json_path:
            write_atomic(json_path, self.to_json())


# ------------------------------------------------------------------ minimal SVG

_W, _H, _PAD = 640, 420, 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _frame(xlo, xhi, ylo, yhi, xlabel, ylabel) -> list[str]:
    out = [
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" fill="none" stroke="black"/>',
        f'<text x="{_W / 2}" y="{_H - 15}" text-anchor="middle" font-size="14">{xlabel}</text>',
        f'<text x="15" y="{_H / 2}" text-anchor="middle" font-size="14" transform="rotate(-90 15 {_H / 2})">{ylabel}</text>',
    ]
    for t in _ticks(xlo, xhi):
        x = _sx(t, xlo, xhi)
        out.append(f'<line x1="{x:.2f}" y1="{_H - _PAD}" x2="{x:.2f}" y2="{_H - _PAD + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{_H - _PAD + 20}" text-anchor="middle" font-size="11">{t:.4g}</text>')
    for t in _ticks(ylo, yhi):
        y = _sy(t, ylo, yhi)
        out.append(f'<line x1="{_PAD - 5}" y1="{y:.2f}" x2="{_PAD}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{_PAD - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{t:.4g}</text>')
    return out


def _sx(v, lo, hi):
    return _PAD + (v - lo) / ((hi - lo) or 1.0) * (_W - 2 * _PAD)


def _sy(v, lo, hi):
    return _H - _PAD - (v - lo) / ((hi - lo) or 1.0) * (_H - 2 * _PAD)


def _svg(body: list[str]) -> str:
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">'
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def _finite(values) -> list[float]:
    return [v for v in values if v is not None and math.isfinite(v)]


def line_svg(table: ResultTable, x: str, ys: Sequence[str]) -> str:
    """Polylines of columns ``ys`` against column ``x``, with axis ticks and a legend."""
    xs = table.column(x)
    series = {y: table.column(y) for y in ys}
    xf = _finite(xs)
    yf = _finite(v for s in series.values() for v in s)
    xlo, xhi = min(xf), max(xf)
    ylo, yhi = min(yf), max(yf)
    body = _frame(xlo, xhi, ylo, yhi, x, ", ".join(ys))
    for i, (name, vals) in enumerate(series.items()):
        pts = " ".join(
            f"{_sx(a, xlo, xhi):.2f},{_sy(b, ylo, yhi):.2f}"
            for a, b in zip(xs, vals)
            if a is not None and b is not None and math.isfinite(a) and math.isfinite(b)
        )
        color = _COLORS[i % len(_COLORS)]
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        body.append(f'<text x="{_W - _PAD - 5}" y="{_PAD + 15 + 15 * i}" text-anchor="end" font-size="12" fill="{color}">{name}</text>')
    return _svg(body)


def heatmap_svg(table: ResultTable, x: str, y: str, z: str) -> str:
    """Rect-grid heatmap of column ``z`` over the ``x`` by ``y`` grid, two-color ramp."""
    xs, ys, zs = table.column(x), table.column(y), table.column(z)
    ux, uy = sorted(set(xs)), sorted(set(ys))
    zf = _finite(zs)
    zlo, zhi = min(zf), max(zf)
    body = _frame(ux[0], ux[-1], uy[0], uy[-1], x, y)
    cw = (_W - 2 * _PAD) / len(ux)
    ch = (_H - 2 * _PAD) / len(uy)
    lo_rgb, hi_rgb = (255, 255, 204), (128, 0, 38)
    for a, b, v in zip(xs, ys, zs):
        if v is None or not math.isfinite(v):
            fill = "#cccccc"
        else:
            t = (v - zlo) / ((zhi - zlo) or 1.0)
            fill = "#%02x%02x%02x" % tuple(round(l + t * (h - l)) for l, h in zip(lo_rgb, hi_rgb))
        i, j = ux.index(a), uy.index(b)
        body.append(
            f'<rect x="{_PAD + i * cw:.2f}" y="{_H - _PAD - (j + 1) * ch:.2f}" width="{cw:.2f}" height="{ch:.2f}" fill="{fill}"/>'
        )
    body.append(f'<text x="{_W - _PAD}" y="{_PAD - 10}" text-anchor="end" font-size="12">{z}: {zlo:.4g} to {zhi:.4g}</text>')
    return _svg(body)
