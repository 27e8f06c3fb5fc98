"""Performance metrics, model comparisons, bound checks and parameter sweeps."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .fcs import FluxStatistics, flux_statistics_closed_form, flux_statistics_fcs
from .model import (
    RefrigeratorSpec,
    Variant,
    cooling_window,
    rate_set,
    synthetic_inverse_temperature,
)

__all__ = [
    "PerformanceReport",
    "ComparisonReport",
    "CoolingBound",
    "SweepAxis",
    "SweepRow",
    "OrderingTrialSummary",
    "UNDEFINED_FANO",
    "performance_report",
    "compare_qrc_qri",
    "compare_qrcn_qrc",
    "cooling_ability_bound",
    "sweep",
    "axis_values",
    "two_state_statistics",
    "ordering_implication_trials",
]

#: Fano factors above this are treated as a vanishing mean flux.
UNDEFINED_FANO = 1e12

_STATS = {
    "fcs": flux_statistics_fcs,
    "closed_form": flux_statistics_closed_form,
}


def _stats(spec: RefrigeratorSpec, bath: str, method: str) -> FluxStatistics:
    try:
        fn = _STATS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(_STATS)}") from None
    return fn(spec, bath)


@dataclass(frozen=True)
class PerformanceReport:
    """Steady-state performance of one refrigerator.

    Currents are energy currents into the working system. ``nsr``, ``cop``,
    ``fano`` and ``tur_Q`` are None when the mean flux vanishes (equilibrium or
    the window boundary). ``beta_s_k`` names the cooling limit used in the TUR
    factor: ``beta_s`` for QRI/QRC and ``beta_s_prime`` for QRCN.
    """

    spec: RefrigeratorSpec
    J_c: float
    J_h: float
    J_w: float
    delta_J_c: float
    mean_flux: float
    variance_rate: float
    nsr: float | None
    cop: float | None
    entropy_rate: float
    tur_f: float
    tur_Q: float | None
    fano: float | None
    in_window: bool
    beta_s_k: float
    beta_s_k_label: str
    method: str = "fcs"

    def metrics(self) -> dict[str, float | None]:
        """Flat numeric fields (None for undefined)."""
        return {
            "J_c": self.J_c,
            "J_h": self.J_h,
            "J_w": self.J_w,
            "delta_J_c": self.delta_J_c,
            "mean_flux": self.mean_flux,
            "variance_rate": self.variance_rate,
            "nsr": self.nsr,
            "cop": self.cop,
            "entropy_rate": self.entropy_rate,
            "tur_f": self.tur_f,
            "tur_Q": self.tur_Q,
            "fano": self.fano,
            "in_window": float(self.in_window),
            "beta_s_k": self.beta_s_k,
        }


def performance_report(spec: RefrigeratorSpec, method: str = "fcs") -> PerformanceReport:
    """Cooling power, NSR, COP, entropy production and TUR factor of ``spec``.

    Each bath current comes from its own counting-statistics evaluation.
    """
    cold = _stats(spec, "cold", method)
    J_c = cold.mean_current
    J_h = _stats(spec, "hot", method).mean_current
    J_w = _stats(spec, "work", method).mean_current
    win = cooling_window(spec)
    if spec.variant is Variant.QRCN:
        beta_work, label = synthetic_inverse_temperature(spec), "beta_s_prime"
    else:
        beta_work, label = spec.work.beta, "beta_s"
    entropy = -(spec.hot.beta * J_h + spec.cold.beta * J_c + beta_work * J_w) + 0.0
    f = (win.limit - spec.cold.beta) * spec.cold.omega
    N, dN = cold.mean_flux, cold.variance_rate
    defined = abs(N) * UNDEFINED_FANO > abs(dN)
    fano = dN / N if defined else None
    return PerformanceReport(
        spec=spec,
        J_c=J_c,
        J_h=J_h,
        J_w=J_w,
        delta_J_c=cold.variance_current,
        mean_flux=N,
        variance_rate=dN,
        nsr=dN / N**2 if defined else None,
        cop=J_c / J_w if defined and J_w != 0 else None,
        entropy_rate=entropy,
        tur_f=f,
        tur_Q=f * fano if defined else None,
        fano=fano,
        in_window=win.in_window,
        beta_s_k=win.limit,
        beta_s_k_label=label,
        method=method,
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Ratios between two refrigerators sharing hot and cold baths.

    ``power_ratio`` is the cooling power of the first model over the second
    and ``nsr_ratio`` the NSR of the second over the first, so both exceed 1
    when the first model is the better one. ``bound_satisfied`` holds the
    claimed bounds that apply (a None entry means its premise failed).
    """

    models: tuple[str, str]
    power_ratio: float
    nsr_ratio: float
    bound_satisfied: Mapping[str, bool | None]
    ordering_conditions: Mapping[str, bool] = field(default_factory=dict)

    @property
    def all_bounds_hold(self) -> bool:
        return all(v is not False for v in self.bound_satisfied.values())


def _cold_pair(a: RefrigeratorSpec, b: RefrigeratorSpec, method: str):
    for s in (a, b):
        if not cooling_window(s).in_window:
            raise ValueError("comparison undefined outside cooling window")
    sa, sb = _stats(a, "cold", method), _stats(b, "cold", method)
    power = sa.mean_flux / sb.mean_flux
    nsr_a = sa.variance_rate / sa.mean_flux**2
    nsr_b = sb.variance_rate / sb.mean_flux**2
    return power, nsr_b / nsr_a


def compare_qrc_qri(
    beta_h: float,
    beta_c: float,
    beta_w: float,
    omega_h: float,
    omega_c: float,
    gamma0: float,
    method: str = "fcs",
) -> ComparisonReport:
    """Correlated versus independent qutrit refrigerator at shared parameters.

    Checks that the correlated model has more than twice the cooling power and
    a still larger NSR advantage. Violations are reported, not raised.
    """
    qrc = RefrigeratorSpec.qrc(beta_h, beta_c, beta_w, omega_h, omega_c, gamma0)
    qri = RefrigeratorSpec.qri(beta_h, beta_c, beta_w, omega_h, omega_c, gamma0)
    power, nsr = _cold_pair(qrc, qri, method)
    return ComparisonReport(
        models=("qrc", "qri"),
        power_ratio=power,
        nsr_ratio=nsr,
        bound_satisfied={
            "power_ratio > 2": power > 2,
            "nsr_ratio > power_ratio": nsr > power,
        },
    )


def _shared(a: RefrigeratorSpec, b: RefrigeratorSpec) -> bool:
    return (
        a.hot == b.hot
        and a.cold == b.cold
        and a.gamma0 == b.gamma0
    )


def compare_qrcn_qrc(qrcn: RefrigeratorSpec, qrc: RefrigeratorSpec, method: str = "fcs") -> ComparisonReport:
    """Synthetic-bath refrigerator versus the QRC with the same hot and cold baths.

    The ordering conditions are ``g4p >= g4``, ``g3p <= g3`` and
    ``g2/g1 <= (g4p - g4)/(g3 - g3p)`` (the last cross-multiplied so that
    ``g3p = g3`` is handled). The first two imply a power ratio of at least 1;
    all three imply an NSR ratio of at least 1. ``beta_sw <= beta_w`` is
    reported next to its rate form ``g4p/g3p >= g4/g3``, which is equivalent.
    """
    if qrcn.variant is not Variant.QRCN or qrc.variant is not Variant.QRC:
        raise ValueError("compare_qrcn_qrc expects a QRCN spec and a QRC spec")
    if not _shared(qrcn, qrc):
        raise ValueError("specs must share beta_h, beta_c, omega_h, omega_c and gamma0")
    power, nsr = _cold_pair(qrcn, qrc, method)
    r, rn = rate_set(qrc), rate_set(qrcn)
    g1, g2, g3, g4 = r["g1"], r["g2"], r["g3"], r["g4"]
    g3p, g4p = rn["g3p"], rn["g4p"]
    c1, c2 = g4p >= g4, g3p <= g3
    c3 = g2 * (g3 - g3p) <= g1 * (g4p - g4)
    premises = c1 and c2
    beta_sw = synthetic_inverse_temperature(qrcn)
    conditions = {
        "g4p >= g4": c1,
        "g3p <= g3": c2,
        "g2/g1 <= (g4p - g4)/(g3 - g3p)": c3,
        "beta_sw <= beta_w": beta_sw <= qrc.work.beta,
        "g4p/g3p >= g4/g3": g4p * g3 >= g4 * g3p,
    }
    # Rounding can only make these disagree at exact ties.
    tol = 1e-12
    return ComparisonReport(
        models=("qrcn", "qrc"),
        power_ratio=power,
        nsr_ratio=nsr,
        bound_satisfied={
            "power_ratio >= 1": (power >= 1 - tol) if premises else None,
            "nsr_ratio >= 1": (nsr >= 1 - tol) if premises and c3 else None,
        },
        ordering_conditions=conditions,
    )


class CoolingBound(NamedTuple):
    #: Largest cold-bath inverse temperature the autonomous device can reach.
    bound: float
    #: The reference (omega_h/omega_c) beta_h of a non-autonomous refrigerator.
    non_autonomous: float


def cooling_ability_bound(spec: RefrigeratorSpec) -> CoolingBound:
    """Lowest reachable cold temperature, as a maximum inverse temperature."""
    wh, wc, ww = spec.hot.omega, spec.cold.omega, spec.omega_w
    bw = synthetic_inverse_temperature(spec) if spec.variant is Variant.QRCN else spec.work.beta
    ref = wh / wc * spec.hot.beta
    return CoolingBound(ref - ww / wc * bw, ref)


# --------------------------------------------------------------------------- sweeps

_SWEEPABLE = ("beta_h", "beta_c", "beta_w", "beta_w1", "beta_w2", "omega_h", "omega_c", "omega_prime", "gamma0")


@dataclass(frozen=True)
class SweepAxis:
    """``points`` evenly spaced values of ``param`` from ``start`` to ``stop``."""

    param: str
    start: float
    stop: float
    points: int

    def __post_init__(self) -> None:
        if self.param not in _SWEEPABLE:
            raise KeyError(f"unknown sweep axis {self.param!r}; sweepable parameters: {', '.join(_SWEEPABLE)}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError(f"axis {self.param}: range must be finite")
        if int(self.points) != self.points or self.points < 1:
            raise ValueError(f"axis {self.param}: points must be a positive integer")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, int(self.points))


def axis_values(axes: Sequence[SweepAxis]) -> list[dict[str, float]]:
    """Grid points in row-major order (the last axis varies fastest)."""
    grids = [a.values() for a in axes]
    names = [a.param for a in axes]
    return [dict(zip(names, map(float, combo))) for combo in itertools.product(*grids)]


@dataclass(frozen=True)
class SweepRow:
    point: Mapping[str, float]
    reports: Mapping[str, PerformanceReport | None]
    comparisons: Mapping[str, ComparisonReport | None]
    in_window: bool
    #: Model name -> error message for points where a spec could not be built.
    errors: Mapping[str, str] = field(default_factory=dict)


def _model_params(base: Mapping[str, float], model: str) -> dict[str, float | str]:
    out: dict[str, float | str] = dict(base)
    out["model"] = model
    return out


def _sweep_row(args) -> SweepRow:
    base, point, models, method = args
    params = dict(base)
    params.update(point)
    specs: dict[str, RefrigeratorSpec] = {}
    reports: dict[str, PerformanceReport | None] = {}
    errors: dict[str, str] = {}
    for model in models:
        try:
            spec = RefrigeratorSpec.from_params(_model_params(params, model))
        except (ValueError, KeyError) as exc:
            reports[model] = None
            errors[model] = str(exc)
            continue
        specs[model] = spec
        reports[model] = performance_report(spec, method)
    comparisons: dict[str, ComparisonReport | None] = {}
    if "qrc" in specs and "qri" in specs:
        try:
            comparisons["qrc_qri"] = compare_qrc_qri(
                params["beta_h"], params["beta_c"], params["beta_w"],
                params["omega_h"], params["omega_c"], params["gamma0"], method,
            )
        except ValueError:
            comparisons["qrc_qri"] = None
    if "qrcn" in specs and "qrc" in specs:
        try:
            comparisons["qrcn_qrc"] = compare_qrcn_qrc(specs["qrcn"], specs["qrc"], method)
        except ValueError:
            comparisons["qrcn_qrc"] = None
    in_window = bool(reports) and all(r is not None and r.in_window for r in reports.values())
    return SweepRow(point, reports, comparisons, in_window, errors)


def sweep(
    base: Mapping[str, float],
    axes: Sequence[SweepAxis],
    models: Sequence[str] = ("qrc",),
    jobs: int = 1,
    method: str = "fcs",
) -> list[SweepRow]:
    """Evaluate performance reports (and pairwise comparisons) over a grid.

    Parameters
    ----------
    base : mapping
        Flat parameters shared by all models, e.g. ``beta_w`` for QRI/QRC and
        ``beta_w1, beta_w2, omega_prime`` for QRCN.
    axes : sequence of SweepAxis
        One or two axes; rows come out in row-major order.
    models : sequence of str
        Any of ``qri``, ``qrc``, ``qrcn``. Comparisons are added for the pairs
        (qrc, qri) and (qrcn, qrc) when both are present.
    jobs : int
        Worker processes; the output order never depends on it.

    Returns
    -------
    list of SweepRow
        Out-of-window rows are kept and flagged.
    """
    if not 1 <= len(axes) <= 2:
        raise ValueError("a sweep takes one or two axes")
    names = [a.param for a in axes]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate sweep axes: {names}")
    for m in models:
        Variant(m)
    work = [(dict(base), p, tuple(models), method) for p in axis_values(axes)]
    if jobs <= 1 or len(work) < 2:
        return [_sweep_row(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_row, work, chunksize=max(1, len(work) // (4 * jobs))))


# ------------------------------------------------------------ vectorized closed forms


def two_state_statistics(g1, g2, g3, g4) -> tuple[np.ndarray, np.ndarray]:
    """Mean photon flux and variance rate of the correlated two-state models, elementwise.

    ``mean = m/S`` and ``variance = p/S - 2 m^2/S^3`` with ``m = g1 g4 - g2 g3``,
    ``p = g1 g4 + g2 g3`` and ``S`` the sum of the four rates.
    """
    g1, g2, g3, g4 = (np.asarray(x, dtype=float) for x in (g1, g2, g3, g4))
    total = g1 + g2 + g3 + g4
    m = g1 * g4 - g2 * g3
    p = g1 * g4 + g2 * g3
    return m / total, p / total - 2 * m**2 / total**3


def _bose(x: np.ndarray) -> np.ndarray:
    return 1.0 / np.expm1(x)


class OrderingTrialSummary(NamedTuple):
    trials: int
    in_window: int
    power_premises: int
    nsr_premises: int
    power_violations: int
    nsr_violations: int


def ordering_implication_trials(n: int, seed: int = 0, rtol: float = 1e-12) -> OrderingTrialSummary:
    """Randomized test of the rate-ordering implications between QRCN and QRC.

    Draws ``n`` random parameter sets (log-uniform inverse temperatures and
    frequencies), keeps those where both models cool, and counts the cases
    where a premise holds but its conclusion fails.
    """
    rng = np.random.default_rng(seed)
    wc = rng.uniform(0.1, 5.0, n)
    wh = wc + rng.uniform(0.1, 10.0, n)
    ww = wh - wc
    wp = np.exp(rng.uniform(np.log(0.05), np.log(20.0), n))
    w1 = wp + ww
    lb = lambda lo, hi: np.exp(rng.uniform(np.log(lo), np.log(hi), n))  # noqa: E731
    bh, bw, b1, b2 = lb(0.05, 5.0), lb(0.01, 5.0), lb(0.01, 5.0), lb(0.01, 5.0)
    bc = bh * (1 + lb(1e-3, 10.0))
    nh, nc, nw = _bose(bh * wh), _bose(bc * wc), _bose(bw * ww)
    n1, n2 = _bose(b1 * w1), _bose(b2 * wp)
    g1, g2 = nc * (nh + 1), nh * (nc + 1)
    g3, g4 = nw + 1, nw
    g3p, g4p = n2 * (n1 + 1), n1 * (n2 + 1)
    mean_c, var_c = two_state_statistics(g1, g2, g3, g4)
    mean_n, var_n = two_state_statistics(g1, g2, g3p, g4p)
    ok = (mean_c > 0) & (mean_n > 0) & np.isfinite(mean_c) & np.isfinite(mean_n)
    c12 = ok & (g4p >= g4) & (g3p <= g3)
    c123 = c12 & (g2 * (g3 - g3p) <= g1 * (g4p - g4))
    with np.errstate(divide="ignore", invalid="ignore"):
        nsr_c, nsr_n = var_c / mean_c**2, var_n / mean_n**2
    power_bad = c12 & (mean_n < mean_c * (1 - rtol))
    nsr_bad = c123 & (nsr_n > nsr_c * (1 + rtol))
    return OrderingTrialSummary(
        trials=n,
        in_window=int(ok.sum()),
        power_premises=int(c12.sum()),
        nsr_premises=int(c123.sum()),
        power_violations=int(power_bad.sum()),
        nsr_violations=int(nsr_bad.sum()),
    )
