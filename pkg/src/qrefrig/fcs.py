"""Current mean and variance from the characteristic polynomial of the tilted generator.

For a generator with a simple zero eigenvalue, write its characteristic
polynomial as ``sum_n a_n(chi) lambda^n``. With primes denoting d/d(i chi) at
chi = 0, the dominant eigenvalue's first two derivatives are

    <M>  = -a0' / a1
    <<M^2>> = (a0''/a0' - 2 a1'/a1) <M> - 2 (a2/a1) <M>^2

Coefficients come from the Faddeev-LeVerrier recurrence. The derivatives are
taken either exactly, by running the recurrence on truncated Taylor series of
the generator in ``s = i chi`` ("analytic"), or by central differences with one
Richardson step ("richardson").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .liouvillian import (
    GeneratorMatrix,
    JumpChannel,
    SteadyStateError,
    connected_block,
    dark_indices,
    generator,
    hamiltonian,
    jump_channels,
    population_indices,
    tilted_generator,
)
from .model import RefrigeratorSpec, Variant, rate_set

__all__ = [
    "CharPolyCoefficients",
    "DerivedCoefficients",
    "FluxStatistics",
    "ClosedFormIntermediates",
    "FCSError",
    "char_poly_coefficients",
    "faddeev_leverrier",
    "coefficient_derivatives",
    "cumulants_from_coefficients",
    "flux_statistics_fcs",
    "flux_statistics_closed_form",
    "statistics_block",
]

MAX_DIM2 = 256
IMAG_RTOL = 1e-8
#: Mean fluxes below this fraction of the variance rate are reported as exactly zero.
ZERO_MEAN_RTOL = 1e-12
#: Largest statistics block handled in exact rational arithmetic.
EXACT_MAX_BLOCK = 6


class FCSError(RuntimeError):
    pass


@dataclass(frozen=True)
class CharPolyCoefficients:
    """Coefficients ``a[0..n]`` of ``det(lambda I - L)``; ``a[n] == 1``."""

    a: np.ndarray
    chi_point: Mapping[str, float] = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return len(self.a) - 1


@dataclass(frozen=True)
class DerivedCoefficients:
    """Polynomial coefficients at chi = 0 and their derivatives in d/d(i chi)."""

    a1: complex
    a2: complex
    a0p: complex
    a0pp: complex
    a1p: complex
    method: str
    block_dim: int
    step: float | None = None


@dataclass(frozen=True)
class ClosedFormIntermediates:
    m: float
    p: float
    #: QRI only.
    k: float | None = None
    #: p/m, or None on the window boundary where m = 0.
    alpha: float | None = None


@dataclass(frozen=True)
class FluxStatistics:
    """Photon-flux statistics for one counted bath.

    ``mean_flux`` carries the sign of the energy current into the system
    (positive for cold and work baths inside the cooling window, negative for
    the hot bath). ``variance_rate`` is the long-time variance rate of the
    photon count.
    """

    mean_flux: float
    variance_rate: float
    counted_bath: str
    method: str
    omega: float
    intermediates: ClosedFormIntermediates | None = None

    @property
    def mean_current(self) -> float:
        return self.mean_flux * self.omega

    @property
    def variance_current(self) -> float:
        return self.variance_rate * self.omega**2

    @property
    def fano(self) -> float:
        return self.variance_rate / abs(self.mean_flux)


def _identity_like(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    if A.dtype == object:
        eye = np.zeros((n, n), dtype=object)
        eye[...] = 0
        for i in range(n):
            eye[i, i] = 1
        return eye
    return np.eye(n, dtype=A.dtype)


def _jet_mul(X: Sequence[np.ndarray], Y: Sequence[np.ndarray]) -> list:
    K = len(X)
    return [sum(X[i] @ Y[k - i] for i in range(k + 1)) for k in range(K)]


def faddeev_leverrier(jets: Sequence[np.ndarray]) -> np.ndarray:
    """Characteristic polynomial coefficients of a matrix given as a Taylor jet.

    ``jets[k]`` is the k-th Taylor coefficient of A(s). Returns an array of
    shape ``(len(jets), n + 1)`` whose entry ``[k, j]`` is the k-th Taylor
    coefficient of ``a_j(s)``. Object arrays (e.g. of ``Fraction``) are handled
    in exact arithmetic.
    """
    A = [np.asarray(J) for J in jets]
    n = A[0].shape[0]
    if A[0].shape != (n, n):
        raise ValueError(f"matrix must be square, got {A[0].shape}")
    K = len(A)
    exact = A[0].dtype == object
    eye = _identity_like(A[0])
    zero = eye * 0
    coeffs = np.zeros((K, n + 1), dtype=object if exact else complex)
    coeffs[0, n] = 1
    if exact:
        coeffs[1:, n] = 0
    AM = [zero] * K
    c = [1] + [0] * (K - 1)
    for k in range(1, n + 1):
        M = [AM[j] + c[j] * eye for j in range(K)]
        AM = _jet_mul(A, M)
        if exact:
            c = [-Fraction(np.trace(AM[j])) / k for j in range(K)]
        else:
            c = [-np.trace(AM[j]) / k for j in range(K)]
        for j in range(K):
            coeffs[j, n - k] = c[j]
    if not exact and not np.all(np.isfinite(coeffs)):
        raise FCSError(
            "characteristic polynomial overflowed; rescale the generator (e.g. rates by gamma0)"
        )
    return coeffs


def char_poly_coefficients(G: GeneratorMatrix | np.ndarray) -> CharPolyCoefficients:
    """Faddeev-LeVerrier coefficients of ``det(lambda I - G)``."""
    if isinstance(G, GeneratorMatrix):
        matrix, chi = G.matrix, dict(G.chi)
    else:
        matrix, chi = np.asarray(G), {}
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"generator must be square, got shape {matrix.shape}")
    if matrix.shape[0] > MAX_DIM2:
        raise ValueError(f"generator dimension {matrix.shape[0]} exceeds {MAX_DIM2}")
    with np.errstate(over="ignore", invalid="ignore"):
        a = faddeev_leverrier([matrix])[0]
    return CharPolyCoefficients(a, chi)


def statistics_block(L: np.ndarray) -> np.ndarray:
    """Indices of the block of ``L`` that contains the steady state.

    Decoupled levels are dropped and the remaining populations must lie in a
    single connected block, otherwise the steady state is not unique.
    """
    d = int(round(np.sqrt(L.shape[0])))
    dark = set(dark_indices(L).tolist())
    pops = [int(p) for p in population_indices(d) if p not in dark]
    if not pops:
        raise SteadyStateError("non-unique steady state: every level is decoupled")
    block = connected_block(L, pops[:1])
    if not set(pops) <= set(block.tolist()):
        raise SteadyStateError("non-unique steady state: populations split into blocks")
    return block


def _sandwich(ch: JumpChannel) -> np.ndarray:
    J = np.asarray(ch.jump, dtype=complex)
    return np.kron(J.conj(), J)


def _setup(spec: RefrigeratorSpec, counted_bath: str):
    omega = spec.bath_frequency(counted_bath)
    H = hamiltonian(spec)
    channels = jump_channels(spec)
    block = statistics_block(generator(H, channels).matrix)
    return omega, H, channels, block


def _to_fraction(A: np.ndarray) -> np.ndarray:
    F = np.empty(A.shape, dtype=object)
    for idx, x in np.ndenumerate(A):
        F[idx] = Fraction(float(x))
    return F


def _analytic_jets(H, channels, block, bath) -> list[np.ndarray]:
    """Taylor jet ``[L0, L1, L2]`` of the tilted block in powers of ``i chi``.

    When the block is real and small the jet is assembled in exact rational
    arithmetic. Each channel's block is exact in floating point (its entries
    are the rate or half of it), so only the sums over channels and the
    products with the counting weights need care: rounding those in floating
    point breaks the exact balance between baths, which near the window edge
    is amplified by the large, nearly cancelling work-bath rates.
    """
    ix = np.ix_(block, block)
    d = H.shape[0]
    eye = np.eye(d)
    Hc = np.asarray(H, dtype=complex)
    commutator = (-1j * (np.kron(eye, Hc) - np.kron(Hc.T, eye)))[ix]
    pieces = []
    for ch in channels:
        J = np.asarray(ch.jump, dtype=complex)
        JdJ = J.conj().T @ J
        sandwich = (ch.rate * _sandwich(ch))[ix]
        loss = (ch.rate * 0.5 * (np.kron(eye, JdJ) + np.kron(JdJ.T, eye)))[ix]
        pieces.append((sandwich, loss, ch.weights.get(bath, 0.0)))
    exact = len(block) <= EXACT_MAX_BLOCK and not np.any(commutator) and all(
        not np.any(S.imag) and not np.any(D.imag) for S, D, _ in pieces
    )
    if exact:
        n = len(block)
        jets = [_to_fraction(np.zeros((n, n))) for _ in range(3)]
        for S, D, w in pieces:
            Sf = _to_fraction(S.real)
            jets[0] = jets[0] + Sf - _to_fraction(D.real)
            if w:
                wf = Fraction(w)
                jets[1] = jets[1] + wf * Sf
                jets[2] = jets[2] + wf * wf / 2 * Sf
        return jets
    L0 = commutator.copy()
    L1 = np.zeros_like(commutator)
    L2 = np.zeros_like(commutator)
    for S, D, w in pieces:
        L0 += S - D
        if w:
            L1 += w * S
            L2 += 0.5 * w * w * S
    return [L0, L1, L2]


def coefficient_derivatives(
    spec: RefrigeratorSpec,
    counted_bath: str,
    step: float | None = None,
    method: str = "richardson",
) -> DerivedCoefficients:
    """Coefficients a1, a2 and derivatives a0', a0'', a1' for one counted bath.

    ``method="richardson"`` uses central differences at ``step`` and
    ``step/2`` (default ``step = 1e-2 / omega_counted``) combined by one
    Richardson extrapolation. ``method="analytic"`` differentiates the
    ``exp(i w chi)`` factors exactly.
    """
    omega, H, channels, block = _setup(spec, counted_bath)
    nb = len(block)
    if method == "analytic":
        coeffs = faddeev_leverrier(_analytic_jets(H, channels, block, counted_bath))
        a = coeffs[0]
        d1 = coeffs[1]
        d2 = 2 * coeffs[2]
        return DerivedCoefficients(
            a1=a[1], a2=a[2] if nb >= 2 else 0.0, a0p=d1[0], a0pp=d2[0], a1p=d1[1],
            method=method, block_dim=nb,
        )
    if method != "richardson":
        raise ValueError(f"unknown derivative method {method!r}")
    h = 1e-2 / omega if step is None else float(step)
    if not h > 0:
        raise ValueError("finite-difference step must be positive")
    ix = np.ix_(block, block)

    def coeffs_at(chi: float) -> np.ndarray:
        L = tilted_generator(H, channels, {counted_bath: chi}).matrix[ix]
        return faddeev_leverrier([L])[0]

    a = coeffs_at(0.0)

    def diffs(hh: float):
        ap, am = coeffs_at(hh), coeffs_at(-hh)
        # d/d(i chi) = -i d/dchi
        return -1j * (ap - am) / (2 * hh), -(ap + am - 2 * a) / hh**2

    d1h, d2h = diffs(h)
    d1q, d2q = diffs(h / 2)
    for coarse, fine, name in ((d1h, d1q, "first"), (d2h, d2q, "second")):
        scale = np.max(np.abs(fine))
        for j in range(min(2, nb)):
            if abs(fine[j]) > 1e-12 * scale and abs(coarse[j] - fine[j]) > 0.1 * abs(fine[j]):
                raise FCSError(
                    f"{name} derivative of a_{j} not converging at step {h:g}; use a smaller step"
                )
    d1 = (4 * d1q - d1h) / 3
    d2 = (4 * d2q - d2h) / 3
    return DerivedCoefficients(
        a1=a[1], a2=a[2] if nb >= 2 else 0.0, a0p=d1[0], a0pp=d2[0], a1p=d1[1],
        method=method, block_dim=nb, step=h,
    )


def cumulants_from_coefficients(dc: DerivedCoefficients) -> tuple[complex, complex]:
    """Mean and variance (in the units of the counting weights) from derived coefficients."""
    if dc.a1 == 0 or not math.isfinite(abs(dc.a1)):
        raise FCSError("degenerate spectral gap (a1 = 0)")
    mean = -dc.a0p / dc.a1
    if dc.a0p == 0:
        # a0''/a0' * <M> reduces to -a0''/a1
        var = -dc.a0pp / dc.a1 - 2 * dc.a1p / dc.a1 * mean - 2 * dc.a2 / dc.a1 * mean**2
    else:
        var = (dc.a0pp / dc.a0p - 2 * dc.a1p / dc.a1) * mean - 2 * dc.a2 / dc.a1 * mean**2
    return mean, var


def _real(z: complex, what: str, scale: float = 0.0) -> float:
    if abs(z.imag) > IMAG_RTOL * max(abs(z.real), scale, 1e-300):
        raise FCSError(f"{what} has a non-negligible imaginary part: {z!r}")
    return float(z.real)


def flux_statistics_fcs(
    spec: RefrigeratorSpec,
    counted_bath: str = "cold",
    method: str = "analytic",
    step: float | None = None,
) -> FluxStatistics:
    """Photon-flux mean and variance of ``counted_bath`` by full counting statistics."""
    dc = coefficient_derivatives(spec, counted_bath, step=step, method=method)
    scale = max(abs(dc.a2), 1.0) if dc.block_dim > 1 else 1.0
    if abs(dc.a1) <= 1e-300 * scale:
        raise FCSError("degenerate spectral gap (a1 = 0)")
    mean, var = cumulants_from_coefficients(dc)
    omega = spec.bath_frequency(counted_bath)
    mean_flux = _real(complex(mean), "mean", abs(var) / omega) / omega
    variance_rate = _real(complex(var), "variance") / omega**2
    if abs(mean_flux) <= ZERO_MEAN_RTOL * abs(variance_rate):
        # Roundoff in a0' at detailed balance; the exact value is zero.
        mean_flux = 0.0
    return FluxStatistics(
        mean_flux=mean_flux,
        variance_rate=variance_rate,
        counted_bath=counted_bath,
        method="fcs_charpoly",
        omega=omega,
    )


_FLUX_SIGN = {"hot": -1.0, "cold": 1.0, "work": 1.0}


def flux_statistics_closed_form(spec: RefrigeratorSpec, counted_bath: str = "cold") -> FluxStatistics:
    """Closed-form photon-flux mean and variance for each model.

    ``m`` and ``p`` always carry full rate products (gamma0**2 included), with
    ``m`` positive inside the cooling window.
    """
    omega = spec.bath_frequency(counted_bath)
    sign = _FLUX_SIGN[counted_bath]
    r = rate_set(spec)
    if spec.variant is Variant.QRI:
        g0 = spec.gamma0
        nh, nc, nw = spec.hot.occupation, spec.cold.occupation, spec.work.occupation
        bias = nc * nw - nh * (nc + nw + 1)
        den = nc * (2 + 3 * (nh + nw)) + 3 * nh * (1 + nw) + 2 * (2 * nw + 1)
        mean = g0 * bias / den
        m = g0**2 * bias
        p = g0**2 * (nh * (2 * nc * nw + nc + nw + 1) + nc * nw)
        k = 2 * (nc + nh + nw) + 3
        if m == 0:
            inter = ClosedFormIntermediates(m, p, k, None)
            var = p / (g0 * den)
        else:
            alpha = p / m
            inter = ClosedFormIntermediates(m, p, k, alpha)
            var = alpha * mean * (1 - 2 * k / p * mean**2)
    else:
        g1, g2 = r["g1"], r["g2"]
        g3, g4 = (r["g3"], r["g4"]) if spec.variant is Variant.QRC else (r["g3p"], r["g4p"])
        total = g1 + g2 + g3 + g4
        m = g1 * g4 - g2 * g3
        p = g1 * g4 + g2 * g3
        mean = m / total
        if m == 0:
            inter = ClosedFormIntermediates(m, p, None, None)
            var = p / total
        else:
            alpha = p / m
            inter = ClosedFormIntermediates(m, p, None, alpha)
            var = alpha * mean * (1 - 2 / p * mean**2)
    return FluxStatistics(
        mean_flux=sign * mean,
        variance_rate=var,
        counted_bath=counted_bath,
        method="closed_form",
        omega=omega,
        intermediates=inter,
    )
