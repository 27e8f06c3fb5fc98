"""Refrigerator parameter sets, thermal occupations, decay rates and cooling windows.

Units follow hbar = k_B = 1: frequencies are energies, inverse temperatures are
1/energy and rates are 1/time.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, NamedTuple

__all__ = [
    "Variant",
    "BathSpec",
    "RefrigeratorSpec",
    "RateSet",
    "CoolingWindow",
    "PairTemperature",
    "SpecError",
    "OccupationUnderflowWarning",
    "bose_occupation",
    "rate_set",
    "synthetic_inverse_temperature",
    "effective_pair_temperature",
    "cooling_window",
    "OCCUPATION_CLAMP",
]

#: Above this value of beta*omega the occupation is clamped to zero.
OCCUPATION_CLAMP = 700.0
_SERIES_CUTOFF = 1e-6
_FREQ_RTOL = 1e-12


class SpecError(ValueError):
    """Raised when a refrigerator parameter set violates its invariants."""


class OccupationUnderflowWarning(RuntimeWarning):
    """Emitted when a Bose occupation is clamped to zero."""


class Variant(str, Enum):
    QRI = "qri"
    QRC = "qrc"
    QRCN = "qrcn"


def bose_occupation(beta: float, omega: float) -> float:
    """Mean photon number ``1/(exp(beta*omega) - 1)`` of a bosonic mode.

    Parameters
    ----------
    beta : float
        Inverse temperature.
    omega : float
        Mode frequency.

    Returns
    -------
    float
        The occupation. Values of ``beta*omega`` above ``OCCUPATION_CLAMP`` are
        clamped to 0 and an :class:`OccupationUnderflowWarning` is emitted.

    Raises
    ------
    ValueError
        If ``beta*omega == 0``.
    """
    x = float(beta) * float(omega)
    if x == 0.0:
        raise ValueError("infinite occupation at zero βω")
    if not math.isfinite(x):
        raise ValueError(f"non-finite βω = {x!r}")
    if x > OCCUPATION_CLAMP:
        warnings.warn(
            f"βω = {x:g} exceeds {OCCUPATION_CLAMP:g}; occupation clamped to 0",
            OccupationUnderflowWarning,
            stacklevel=2,
        )
        return 0.0
    if abs(x) < _SERIES_CUTOFF:
        return 1.0 / x - 0.5 + x / 12.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class BathSpec:
    """A thermal bath seen through one transition: inverse temperature and frequency."""

    beta: float
    omega: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.beta):
            raise SpecError(f"bath inverse temperature must be finite, got {self.beta!r}")
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise SpecError(f"bath frequency must be positive, got {self.omega!r}")

    @property
    def occupation(self) -> float:
        return bose_occupation(self.beta, self.omega)


def _same_frequency(a: float, b: float, scale: float) -> bool:
    return abs(a - b) <= _FREQ_RTOL * max(abs(scale), 1.0)


@dataclass(frozen=True)
class RefrigeratorSpec:
    """Parameters of one refrigerator model.

    Use the :meth:`qri`, :meth:`qrc` and :meth:`qrcn` constructors; they derive
    the work frequencies from ``omega_h`` and ``omega_c`` so the resonance
    conditions hold exactly. ``work`` is set for QRI/QRC, ``work1``/``work2``
    for QRCN.
    """

    variant: Variant
    hot: BathSpec
    cold: BathSpec
    gamma0: float
    work: BathSpec | None = None
    work1: BathSpec | None = None
    work2: BathSpec | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        if not (math.isfinite(self.gamma0) and self.gamma0 > 0):
            raise SpecError(f"gamma0 must be positive, got {self.gamma0!r}")
        if not self.hot.omega > self.cold.omega:
            raise SpecError("require omega_h > omega_c > 0")
        gap = self.hot.omega - self.cold.omega
        if self.variant is Variant.QRCN:
            if self.work1 is None or self.work2 is None or self.work is not None:
                raise SpecError("QRCN needs work1 and work2 and no single work bath")
            if not _same_frequency(self.work1.omega - self.work2.omega, gap, self.hot.omega):
                raise SpecError("QRCN requires omega_w1 - omega_w2 == omega_h - omega_c")
            inputs = (self.hot, self.cold, self.work1, self.work2)
        else:
            if self.work is None or self.work1 is not None or self.work2 is not None:
                raise SpecError(f"{self.variant.value.upper()} needs exactly one work bath")
            if not _same_frequency(self.work.omega, gap, self.hot.omega):
                raise SpecError("require omega_w == omega_h - omega_c")
            inputs = (self.hot, self.cold, self.work)
        for bath in inputs:
            if not bath.beta > 0:
                raise SpecError("input baths need positive inverse temperature")

    @classmethod
    def qri(cls, beta_h, beta_c, beta_w, omega_h, omega_c, gamma0) -> RefrigeratorSpec:
        """Qutrit refrigerator with three independent one-photon baths."""
        return cls._qutrit(Variant.QRI, beta_h, beta_c, beta_w, omega_h, omega_c, gamma0)

    @classmethod
    def qrc(cls, beta_h, beta_c, beta_w, omega_h, omega_c, gamma0) -> RefrigeratorSpec:
        """Qutrit refrigerator with a correlated (two-photon) hot-cold channel."""
        return cls._qutrit(Variant.QRC, beta_h, beta_c, beta_w, omega_h, omega_c, gamma0)

    @classmethod
    def _qutrit(cls, variant, beta_h, beta_c, beta_w, omega_h, omega_c, gamma0):
        omega_h, omega_c = float(omega_h), float(omega_c)
        return cls(
            variant=variant,
            hot=BathSpec(float(beta_h), omega_h),
            cold=BathSpec(float(beta_c), omega_c),
            work=BathSpec(float(beta_w), omega_h - omega_c),
            gamma0=float(gamma0),
        )

    @classmethod
    def qrcn(
        cls, beta_h, beta_c, beta_w1, beta_w2, omega_h, omega_c, omega_prime, gamma0
    ) -> RefrigeratorSpec:
        """Four-level refrigerator whose work channel is a pair of baths.

        ``omega_prime`` is the |1>-|3> spacing, i.e. ``omega_w2``; then
        ``omega_w1 = omega_prime + omega_h - omega_c``.
        """
        omega_h, omega_c, omega_prime = float(omega_h), float(omega_c), float(omega_prime)
        return cls(
            variant=Variant.QRCN,
            hot=BathSpec(float(beta_h), omega_h),
            cold=BathSpec(float(beta_c), omega_c),
            work1=BathSpec(float(beta_w1), omega_prime + (omega_h - omega_c)),
            work2=BathSpec(float(beta_w2), omega_prime),
            gamma0=float(gamma0),
        )

    @property
    def omega_w(self) -> float:
        """Spacing of the |0>-|1> work transition (omega_h - omega_c)."""
        if self.variant is Variant.QRCN:
            return self.work1.omega - self.work2.omega
        return self.work.omega

    @property
    def dim(self) -> int:
        return 4 if self.variant is Variant.QRCN else 3

    @property
    def baths(self) -> tuple[str, ...]:
        """Labels accepted as counting fields."""
        return ("hot", "cold", "work")

    def bath_frequency(self, label: str) -> float:
        """Energy quantum exchanged with the named bath per photon."""
        if label == "hot":
            return self.hot.omega
        if label == "cold":
            return self.cold.omega
        if label == "work":
            return self.omega_w
        raise KeyError(f"unknown bath label {label!r}; expected one of {self.baths}")

    def params(self) -> dict[str, float | str]:
        """Flat parameter dictionary (the inverse of :meth:`from_params`)."""
        out: dict[str, float | str] = {
            "model": self.variant.value,
            "beta_h": self.hot.beta,
            "beta_c": self.cold.beta,
            "omega_h": self.hot.omega,
            "omega_c": self.cold.omega,
            "gamma0": self.gamma0,
        }
        if self.variant is Variant.QRCN:
            out.update(beta_w1=self.work1.beta, beta_w2=self.work2.beta, omega_prime=self.work2.omega)
        else:
            out["beta_w"] = self.work.beta
        return out

    @classmethod
    def from_params(cls, params: Mapping[str, object]) -> RefrigeratorSpec:
        """Build a spec from a flat mapping such as a parsed config file."""
        model = Variant(str(params["model"]).lower())
        common = ("beta_h", "beta_c", "omega_h", "omega_c", "gamma0")
        extra = ("beta_w1", "beta_w2", "omega_prime") if model is Variant.QRCN else ("beta_w",)
        missing = [k for k in common + extra if k not in params]
        if missing:
            raise SpecError(f"missing keys for {model.value}: {', '.join(missing)}")
        v = {k: float(params[k]) for k in common + extra}
        if model is Variant.QRCN:
            return cls.qrcn(v["beta_h"], v["beta_c"], v["beta_w1"], v["beta_w2"],
                            v["omega_h"], v["omega_c"], v["omega_prime"], v["gamma0"])
        ctor = cls.qri if model is Variant.QRI else cls.qrc
        return ctor(v["beta_h"], v["beta_c"], v["beta_w"], v["omega_h"], v["omega_c"], v["gamma0"])

    def replace(self, **changes: float) -> RefrigeratorSpec:
        """Copy with some flat parameters changed (see :meth:`params`)."""
        params = self.params()
        unknown = set(changes) - set(params)
        if unknown:
            raise KeyError(f"unknown parameter(s) for {self.variant.value}: {sorted(unknown)}")
        params.update(changes)
        return self.from_params(params)


@dataclass(frozen=True)
class RateSet(Mapping[str, float]):
    """Jump rates keyed by channel label.

    QRC: ``g1, g2`` (hot-cold pair), ``g3, g4`` (work emission/absorption).
    QRCN: ``g1, g2`` and ``g3p, g4p`` (synthetic work pair).
    QRI: ``h_emit, h_abs, c_emit, c_abs, w_emit, w_abs`` i.e. gamma_x (n_x+1)
    and gamma_x n_x for each bath.
    """

    variant: Variant
    rates: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, value in self.rates.items():
            if not value >= 0:
                raise SpecError(f"rate {key} must be non-negative, got {value!r}")

    def __getitem__(self, key: str) -> float:
        return self.rates[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self.rates)

    def __len__(self) -> int:
        return len(self.rates)


def rate_set(spec: RefrigeratorSpec) -> RateSet:
    """Decay rates of every jump channel of ``spec``."""
    g0 = spec.gamma0
    nh, nc = spec.hot.occupation, spec.cold.occupation
    if spec.variant is Variant.QRI:
        nw = spec.work.occupation
        rates = {
            "h_emit": g0 * (nh + 1), "h_abs": g0 * nh,
            "c_emit": g0 * (nc + 1), "c_abs": g0 * nc,
            "w_emit": g0 * (nw + 1), "w_abs": g0 * nw,
        }
    else:
        rates = {"g1": g0 * nc * (nh + 1), "g2": g0 * nh * (nc + 1)}
        if spec.variant is Variant.QRC:
            nw = spec.work.occupation
            rates.update(g3=g0 * (nw + 1), g4=g0 * nw)
        else:
            n1, n2 = spec.work1.occupation, spec.work2.occupation
            rates.update(g3p=g0 * n2 * (n1 + 1), g4p=g0 * n1 * (n2 + 1))
    return RateSet(spec.variant, rates)


class PairTemperature(NamedTuple):
    beta_eff: float
    #: Steady excited/ground population ratio exp(-(beta_L w_L - beta_R w_R)).
    population_ratio: float


def effective_pair_temperature(beta_l, omega_l, beta_r, omega_r) -> PairTemperature:
    """Effective inverse temperature of two baths driving one Raman transition."""
    if omega_l == omega_r:
        raise ValueError("degenerate work pair: omega_L == omega_R")
    bias = beta_l * omega_l - beta_r * omega_r
    return PairTemperature(bias / (omega_l - omega_r), math.exp(-bias))


def synthetic_inverse_temperature(spec: RefrigeratorSpec) -> float:
    """Inverse temperature of the composite work bath of a QRCN spec. May be negative."""
    if spec.variant is not Variant.QRCN:
        raise ValueError("synthetic temperature is defined for QRCN specs only")
    w1, w2 = spec.work1, spec.work2
    if w1.omega == w2.omega:
        raise ValueError("degenerate work pair")
    return effective_pair_temperature(w1.beta, w1.omega, w2.beta, w2.omega).beta_eff


@dataclass(frozen=True)
class CoolingWindow:
    """Refrigeration window of one spec.

    ``beta_s`` is the limit for QRI/QRC specs and ``beta_s_prime`` the limit for
    QRCN specs (the other is None). ``ordering_diagnostics`` lists each strict
    inequality of the chain with its truth value.
    """

    beta_s: float | None
    beta_s_prime: float | None
    beta_work: float
    in_window: bool
    ordering_diagnostics: tuple[tuple[str, bool], ...]

    @property
    def limit(self) -> float:
        """The cooling limit that applies to this spec."""
        return self.beta_s_prime if self.beta_s is None else self.beta_s


def _window_limit(beta_h, omega_h, beta_work, omega_w) -> float:
    return (beta_h * omega_h - beta_work * omega_w) / (omega_h - omega_w)


def cooling_window(spec: RefrigeratorSpec) -> CoolingWindow:
    """Evaluate the chain ``beta_work < beta_h < beta_c < limit``.

    For QRCN the work inverse temperature is the synthetic one.
    """
    bh, bc, wh, ww = spec.hot.beta, spec.cold.beta, spec.hot.omega, spec.omega_w
    if spec.variant is Variant.QRCN:
        bwork, name, wname = synthetic_inverse_temperature(spec), "beta_s_prime", "beta_sw"
    else:
        bwork, name, wname = spec.work.beta, "beta_s", "beta_w"
    limit = _window_limit(bh, wh, bwork, ww)
    checks = (
        (f"{wname} < beta_h", bwork < bh),
        ("beta_h < beta_c", bh < bc),
        (f"beta_c < {name}", bc < limit),
    )
    in_window = all(ok for _, ok in checks)
    if spec.variant is Variant.QRCN:
        return CoolingWindow(None, limit, bwork, in_window, checks)
    return CoolingWindow(limit, None, bwork, in_window, checks)
