"""Parameter grids for the standard figures, rendered as result tables."""

from __future__ import annotations

import numpy as np

from . import __version__
from .io import ResultTable, heatmap_svg, line_svg
from .metrics import compare_qrc_qri, compare_qrcn_qrc, performance_report
from .model import RefrigeratorSpec, synthetic_inverse_temperature

__all__ = ["FIGURES", "CAPTION", "figure_table", "figure_svg"]

#: Shared caption parameters.
CAPTION = {
    "omega_h": 10.0,
    "omega_c": 0.90,
    "gamma0": 0.01,
    "beta_h": 1.00,
    "beta_w": 0.09,
    "beta_w1": 0.09,
    "beta_w2": 1.00,
}
FIG5_OMEGA_PRIME = 2.0

BETA_C_LINE = (1.05, 10.15, 100)
BETA_C_GRID = (1.05, 10.15, 40)
OMEGA_PRIME_LINE = (0.1, 10.0, 100)
OMEGA_PRIME_GRID = (1.0, 10.0, 40)


def _lin(spec: tuple[float, float, int]) -> np.ndarray:
    return np.linspace(*spec)


def _qrc(beta_c: float) -> RefrigeratorSpec:
    c = CAPTION
    return RefrigeratorSpec.qrc(c["beta_h"], beta_c, c["beta_w"], c["omega_h"], c["omega_c"], c["gamma0"])


def _qri(beta_c: float) -> RefrigeratorSpec:
    c = CAPTION
    return RefrigeratorSpec.qri(c["beta_h"], beta_c, c["beta_w"], c["omega_h"], c["omega_c"], c["gamma0"])


def _qrcn(beta_c: float, omega_prime: float) -> RefrigeratorSpec:
    c = CAPTION
    return RefrigeratorSpec.qrcn(
        c["beta_h"], beta_c, c["beta_w1"], c["beta_w2"], c["omega_h"], c["omega_c"], omega_prime, c["gamma0"]
    )


def _fig2() -> tuple[list[str], list[dict]]:
    c = CAPTION
    recs = []
    for bc in _lin(BETA_C_LINE):
        r = compare_qrc_qri(c["beta_h"], float(bc), c["beta_w"], c["omega_h"], c["omega_c"], c["gamma0"])
        recs.append({"beta_c": float(bc), "power_ratio": r.power_ratio, "nsr_ratio": r.nsr_ratio})
    return ["beta_c"], recs


def _fig4a() -> tuple[list[str], list[dict]]:
    recs = []
    for wp in _lin(OMEGA_PRIME_LINE):
        recs.append({"omega_prime": float(wp), "minus_beta_sw": -synthetic_inverse_temperature(_qrcn(2.0, float(wp)))})
    return ["omega_prime"], recs


def _fig4_grid(metric: str) -> tuple[list[str], list[dict]]:
    recs = []
    for bc in _lin(BETA_C_GRID):
        qrc = _qrc(float(bc))
        for wp in _lin(OMEGA_PRIME_GRID):
            r = compare_qrcn_qrc(_qrcn(float(bc), float(wp)), qrc)
            recs.append({"beta_c": float(bc), "omega_prime": float(wp), metric: getattr(r, metric)})
    return ["beta_c", "omega_prime"], recs


def _fig5() -> tuple[list[str], list[dict]]:
    recs = []
    for bc in _lin(BETA_C_LINE):
        bc = float(bc)
        recs.append({
            "beta_c": bc,
            "Q_qri": performance_report(_qri(bc)).tur_Q,
            "Q_qrc": performance_report(_qrc(bc)).tur_Q,
            "Q_qrcn": performance_report(_qrcn(bc, FIG5_OMEGA_PRIME)).tur_Q,
        })
    return ["beta_c"], recs


FIGURES = {
    "fig2": _fig2,
    "fig4a": _fig4a,
    "fig4b": lambda: _fig4_grid("power_ratio"),
    "fig4c": lambda: _fig4_grid("nsr_ratio"),
    "fig5": _fig5,
}


def figure_table(name: str) -> ResultTable:
    """Result table of one figure; raises KeyError listing the valid names."""
    if name not in FIGURES:
        raise KeyError(f"unknown figure {name!r}; valid names: {', '.join(FIGURES)}")
    axes, recs = FIGURES[name]()
    meta = {"figure": name, "version": __version__, "caption_parameters": dict(CAPTION)}
    if name == "fig5":
        meta["omega_prime"] = FIG5_OMEGA_PRIME
    return ResultTable.from_records(axes, recs, meta)


def figure_svg(name: str, table: ResultTable) -> str:
    if name in ("fig4b", "fig4c"):
        return heatmap_svg(table, "beta_c", "omega_prime", table.columns[-1])
    x = table.columns[0]
    return line_svg(table, x, table.columns[1:])
