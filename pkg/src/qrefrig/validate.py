"""Invariant checks run by ``refrig validate`` at one parameter point."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .fcs import flux_statistics_closed_form, flux_statistics_fcs
from .liouvillian import (
    channels_for_bath,
    dissipator_current,
    generator,
    hamiltonian,
    jump_channels,
    steady_state,
    vec,
)
from .metrics import compare_qrc_qri, compare_qrcn_qrc, cooling_ability_bound, performance_report
from .model import RefrigeratorSpec, Variant, cooling_window
from .oracle import oracle_flux_statistics

__all__ = ["Check", "run_checks", "format_checks"]


@dataclass(frozen=True)
class Check:
    """One row of the validation table.

    ``status`` is ``pass`` or ``fail`` for counted checks, ``info`` for
    reported-only quantities and ``skip`` when a premise does not apply.
    """

    name: str
    value: float
    limit: str
    status: str

    @property
    def failed(self) -> bool:
        return self.status == "fail"


def _rel(a: float, b: float, floor: float = 0.0) -> float:
    den = max(abs(b), floor)
    return abs(a - b) / den if den > 0 else abs(a - b)


def _close(name: str, a: float, b: float, rtol: float, atol: float) -> Check:
    """Pass iff ``|a - b| <= max(rtol |b|, atol)``; the value shown is relative to ``max(|b|, atol/rtol)``."""
    return _cmp(name, _rel(a, b, atol / rtol), rtol)


def _cmp(name: str, value: float, tol: float, le: bool = True) -> Check:
    ok = value <= tol if le else value >= tol
    op = "<=" if le else ">="
    return Check(name, value, f"{op} {tol:.3g}", "pass" if ok else "fail")


def _skip(name: str, why: str) -> Check:
    return Check(name, math.nan, why, "skip")


def run_checks(spec: RefrigeratorSpec, tolerances: Mapping[str, float]) -> list[Check]:
    """Method equivalence, oracle agreement, conservation, bounds and TUR at ``spec``.

    Variance tolerances are 100x ``fcs_rel`` (closed form against FCS) and
    10x ``oracle_rel`` (oracle against FCS).
    """
    fcs_rel, oracle_rel = tolerances["fcs_rel"], tolerances["oracle_rel"]
    out: list[Check] = []
    win = cooling_window(spec)

    fcs = flux_statistics_fcs(spec, "cold")
    cf = flux_statistics_closed_form(spec, "cold")
    # Absolute floors at the roundoff level of the natural flux and current scales.
    flux_atol = 1e-14 * spec.gamma0
    current_atol = flux_atol * spec.hot.omega
    out.append(_close("closed_form_vs_fcs_mean", cf.mean_flux, fcs.mean_flux, fcs_rel, flux_atol))
    out.append(_cmp("closed_form_vs_fcs_variance", _rel(cf.variance_rate, fcs.variance_rate), 100 * fcs_rel))
    orc = oracle_flux_statistics(spec, "cold")
    out.append(_close("oracle_vs_fcs_mean", orc.mean_flux, fcs.mean_flux, oracle_rel, flux_atol))
    out.append(_cmp("oracle_vs_fcs_variance", _rel(orc.variance_rate, fcs.variance_rate), 10 * oracle_rel))

    H = hamiltonian(spec)
    channels = jump_channels(spec)
    L = generator(H, channels).matrix
    trace_row = vec(np.eye(spec.dim)).conj() @ L
    out.append(_cmp("trace_preservation", float(np.max(np.abs(trace_row))), 1e-12 * max(1.0, np.max(np.abs(L)))))
    sigma = steady_state(generator(H, channels))
    off = sigma - np.diag(np.diag(sigma))
    out.append(_cmp("steady_state_offdiagonal", float(np.max(np.abs(off))), 1e-10))
    out.append(_cmp("steady_state_min_eigenvalue", float(np.min(np.linalg.eigvalsh(sigma))), -1e-10, le=False))

    rep = performance_report(spec)
    scale = max(abs(rep.J_c), abs(rep.J_h), abs(rep.J_w))
    out.append(_cmp("first_law", abs(rep.J_c + rep.J_h + rep.J_w), 1e-12 * max(1.0, scale)))
    wh, wc, ww = spec.hot.omega, spec.cold.omega, spec.omega_w
    out.append(_close("tight_coupling_hot", rep.J_h, -wh / wc * rep.J_c, 1e-10, current_atol))
    work = channels_for_bath(channels, "work")
    out.append(_close("work_dissipator_current", dissipator_current(sigma, work, H), rep.J_w, 1e-10, current_atol))
    if rep.cop is not None:
        out.append(_cmp("cop_identity", _rel(rep.cop, wc / ww), 1e-12))
    else:
        out.append(_skip("cop_identity", "mean flux vanishes"))
    if rep.tur_Q is not None:
        out.append(_cmp("tur_bound", rep.tur_Q, 2 - 1e-9, le=False))
    else:
        out.append(_skip("tur_bound", "mean flux vanishes"))
    if win.in_window:
        out.append(_cmp("entropy_production_positive", rep.entropy_rate, 0.0, le=False)
                   if rep.entropy_rate > 0 else Check("entropy_production_positive", rep.entropy_rate, "> 0", "fail"))
    else:
        out.append(_cmp("entropy_production_nonnegative", rep.entropy_rate, -1e-12 * max(1.0, scale), le=False))
    out.append(_cmp("cooling_bound_equals_window_limit", _rel(cooling_ability_bound(spec).bound, win.limit), 1e-12))

    p = spec.params()
    if spec.variant is not Variant.QRCN:
        if win.in_window:
            cmp = compare_qrc_qri(p["beta_h"], p["beta_c"], p["beta_w"], p["omega_h"], p["omega_c"], p["gamma0"])
            out.append(_cmp("power_ratio_above_2", cmp.power_ratio, 2.0, le=False))
            out.append(_cmp("nsr_ratio_above_2", cmp.nsr_ratio, 2.0, le=False))
            out.append(Check("nsr_ratio_minus_power_ratio", cmp.nsr_ratio - cmp.power_ratio, "reported only", "info"))
        else:
            out.append(_skip("power_ratio_above_2", "outside cooling window"))
    else:
        qrc = RefrigeratorSpec.qrc(p["beta_h"], p["beta_c"], p["beta_w1"], p["omega_h"], p["omega_c"], p["gamma0"])
        if win.in_window and cooling_window(qrc).in_window:
            cmp = compare_qrcn_qrc(spec, qrc)
            for name, ok in cmp.bound_satisfied.items():
                if ok is None:
                    out.append(_skip(f"ordering: {name}", "premise does not hold"))
                else:
                    out.append(Check(f"ordering: {name}", cmp.power_ratio if "power" in name else cmp.nsr_ratio,
                                     name, "pass" if ok else "fail"))
            cond = cmp.ordering_conditions
            agree = cond["beta_sw <= beta_w"] == cond["g4p/g3p >= g4/g3"]
            out.append(Check("beta_sw_rate_equivalence", float(agree), "conditions agree", "pass" if agree else "fail"))
        else:
            out.append(_skip("ordering implications", "matched QRC outside cooling window"))
    return out


def format_checks(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  {'status':<6}  {'value':>13}  limit"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {c.status:<6}  {c.value:>13.6g}  {c.limit}")
    return "\n".join(lines)
