"""Hamiltonians, jump channels and vectorized Lindblad generators.

Density matrices are vectorized by stacking columns, so that
``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)`` and the population of level k
sits at index ``k * (d + 1)``.
"""

from __future__ import annotations

import cmath
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import RateSet, RefrigeratorSpec, Variant, rate_set

__all__ = [
    "JumpChannel",
    "GeneratorMatrix",
    "SteadyStateError",
    "vec",
    "unvec",
    "population_indices",
    "hamiltonian",
    "jump_channels",
    "generator",
    "tilted_generator",
    "steady_state",
    "dissipator",
    "dissipator_current",
    "channels_for_bath",
    "connected_block",
    "dark_indices",
]

STEADY_RESIDUAL_TOL = 1e-11


class SteadyStateError(RuntimeError):
    pass


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return np.asarray(v).reshape((d, d), order="F")


def population_indices(d: int) -> np.ndarray:
    return np.arange(d) * (d + 1)


def _ketbra(i: int, j: int, d: int) -> np.ndarray:
    op = np.zeros((d, d), dtype=complex)
    op[i, j] = 1.0
    return op


@dataclass(frozen=True, eq=False)
class JumpChannel:
    """One Lindblad jump term ``rate * (J rho J^+ - {J^+ J, rho}/2)``.

    ``weights`` maps a bath label to the energy that bath delivers to the
    working system in one jump (negative when the bath receives energy).
    """

    label: str
    jump: np.ndarray
    rate: float
    weights: Mapping[str, float] = field(default_factory=dict)

    @property
    def baths(self) -> tuple[str, ...]:
        return tuple(b for b, w in self.weights.items() if w != 0)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Dense ``d^2 x d^2`` generator and the counting fields it was built at."""

    matrix: np.ndarray
    chi: Mapping[str, float] = field(default_factory=dict)

    @property
    def dim2(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.dim2)))

    @property
    def is_tilted(self) -> bool:
        return any(v != 0 for v in self.chi.values())

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Return L(rho) as a matrix."""
        return unvec(self.matrix @ vec(rho))


def hamiltonian(spec: RefrigeratorSpec) -> np.ndarray:
    wh, wc = spec.hot.omega, spec.cold.omega
    levels = [0.0, wh - wc, wh]
    if spec.variant is Variant.QRCN:
        levels.append(spec.work1.omega)
    return np.diag(np.array(levels, dtype=complex))


def jump_channels(spec: RefrigeratorSpec, rates: RateSet | None = None) -> list[JumpChannel]:
    """Jump channels of ``spec`` with their counting weights.

    ``rates`` overrides the thermal rates from :func:`rate_set`, e.g. to use
    unequal decay constants.
    """
    r = rate_set(spec) if rates is None else rates
    d = spec.dim
    wh, wc, ww = spec.hot.omega, spec.cold.omega, spec.omega_w
    down01 = _ketbra(0, 1, d)
    up01 = down01.conj().T
    if spec.variant is Variant.QRI:
        b_h, b_c = _ketbra(0, 2, d), _ketbra(1, 2, d)
        return [
            JumpChannel("h_emit", b_h, r["h_emit"], {"hot": -wh}),
            JumpChannel("h_abs", b_h.conj().T, r["h_abs"], {"hot": wh}),
            JumpChannel("c_emit", b_c, r["c_emit"], {"cold": -wc}),
            JumpChannel("c_abs", b_c.conj().T, r["c_abs"], {"cold": wc}),
            JumpChannel("w_emit", down01, r["w_emit"], {"work": -ww}),
            JumpChannel("w_abs", up01, r["w_abs"], {"work": ww}),
        ]
    # |1> -> |0>: a cold photon is absorbed and a hot photon emitted.
    pair = [
        JumpChannel("g1", down01, r["g1"], {"hot": -wh, "cold": wc}),
        JumpChannel("g2", up01, r["g2"], {"hot": wh, "cold": -wc}),
    ]
    if spec.variant is Variant.QRC:
        return pair + [
            JumpChannel("g3", down01, r["g3"], {"work": -ww}),
            JumpChannel("g4", up01, r["g4"], {"work": ww}),
        ]
    return pair + [
        JumpChannel("g3p", down01, r["g3p"], {"work": -ww}),
        JumpChannel("g4p", up01, r["g4p"], {"work": ww}),
    ]


def _check_dims(H: np.ndarray, channels: Sequence[JumpChannel]) -> int:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got shape {H.shape}")
    d = H.shape[0]
    for ch in channels:
        if ch.jump.shape != (d, d):
            raise ValueError(
                f"dimension mismatch: channel {ch.label!r} has shape {ch.jump.shape}, expected {(d, d)}"
            )
    return d


def tilted_generator(
    H: np.ndarray, channels: Sequence[JumpChannel], chi: Mapping[str, float] | None = None
) -> GeneratorMatrix:
    """Generator with each sandwich term dressed by ``exp(i sum_b chi_b w_b)``."""
    chi = dict(chi or {})
    d = _check_dims(H, channels)
    known = {b for ch in channels for b in ch.weights}
    unknown = set(chi) - known
    if unknown:
        raise KeyError(f"unknown bath label(s) in chi: {sorted(unknown)}; known: {sorted(known)}")
    eye = np.eye(d)
    H = np.asarray(H, dtype=complex)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for ch in channels:
        J = np.asarray(ch.jump, dtype=complex)
        JdJ = J.conj().T @ J
        sandwich = np.kron(J.conj(), J)
        phase = sum(chi.get(b, 0.0) * w for b, w in ch.weights.items())
        if phase != 0:
            sandwich = cmath.exp(1j * phase) * sandwich
        L = L + ch.rate * (sandwich - 0.5 * np.kron(eye, JdJ) - 0.5 * np.kron(JdJ.T, eye))
    return GeneratorMatrix(L, chi)


def generator(H: np.ndarray, channels: Sequence[JumpChannel]) -> GeneratorMatrix:
    """Untilted generator of ``drho/dt = -i[H, rho] + sum_k D_k(rho)``."""
    return tilted_generator(H, channels, None)


def dark_indices(matrix: np.ndarray) -> np.ndarray:
    """Indices whose row and column are identically zero (decoupled, stationary)."""
    m = np.asarray(matrix)
    zero_rows = ~np.any(m != 0, axis=1)
    zero_cols = ~np.any(m != 0, axis=0)
    return np.flatnonzero(zero_rows & zero_cols)


def connected_block(matrix: np.ndarray, seeds: Iterable[int]) -> np.ndarray:
    """Sorted indices reachable from ``seeds`` through nonzero couplings.

    The generator is block diagonal over these components, so the block
    containing the steady state carries the whole counting statistics.
    """
    m = np.asarray(matrix)
    adj = (m != 0) | (m != 0).T
    seen = set(int(s) for s in seeds)
    queue = deque(seen)
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(adj[i]):
            if j not in seen:
                seen.add(int(j))
                queue.append(int(j))
    return np.array(sorted(seen), dtype=int)


def steady_state(G: GeneratorMatrix) -> np.ndarray:
    """Unique unit-trace null vector of an untilted generator.

    Levels that are never engaged (zero row and column, e.g. |2><2| in a QRC)
    are excluded and receive zero population. One population row of the
    remaining system is replaced by the trace constraint before a direct solve.
    """
    if G.is_tilted:
        raise ValueError("steady_state needs the untilted generator (chi = 0)")
    L = G.matrix
    d = G.dim
    dark = set(dark_indices(L).tolist())
    active = np.array([i for i in range(G.dim2) if i not in dark], dtype=int)
    pops = [int(p) for p in population_indices(d) if p not in dark]
    if not pops:
        raise SteadyStateError("non-unique steady state: every level is decoupled")
    A = L[np.ix_(active, active)].astype(complex)
    trace_row = np.isin(active, pops).astype(complex)
    replace = int(np.flatnonzero(active == pops[0])[0])
    A[replace] = trace_row
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= 1e-13 * s[0]:
        raise SteadyStateError("non-unique steady state (generator null space is not one-dimensional)")
    rhs = np.zeros(active.size, dtype=complex)
    rhs[replace] = 1.0
    x = np.zeros(G.dim2, dtype=complex)
    x[active] = np.linalg.solve(A, rhs)
    rho = unvec(x)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = np.max(np.abs(L @ vec(rho)))
    if residual > STEADY_RESIDUAL_TOL * max(1.0, np.max(np.abs(L))):
        raise SteadyStateError(f"steady-state residual {residual:.3e} too large")
    return rho


def dissipator(rho: np.ndarray, channels: Sequence[JumpChannel]) -> np.ndarray:
    out = np.zeros_like(np.asarray(rho, dtype=complex))
    for ch in channels:
        J = ch.jump
        JdJ = J.conj().T @ J
        out += ch.rate * (J @ rho @ J.conj().T - 0.5 * (JdJ @ rho + rho @ JdJ))
    return out


def channels_for_bath(channels: Sequence[JumpChannel], bath: str) -> list[JumpChannel]:
    """Channels that exchange energy with ``bath``."""
    return [ch for ch in channels if bath in ch.baths]


def dissipator_current(sigma: np.ndarray, channels: Sequence[JumpChannel], H: np.ndarray) -> float:
    """Energy current ``Tr(D_x(sigma) H)`` into the system from one bath.

    Every channel must couple to the same single bath; correlated channels
    (one jump, two baths) have no per-bath dissipator and are rejected.
    """
    labels = {ch.baths for ch in channels}
    if len(labels) != 1 or len(next(iter(labels))) != 1:
        raise ValueError(
            f"dissipator_current needs channels of exactly one bath, got {sorted(labels)}"
        )
    return float(np.trace(dissipator(sigma, channels) @ H).real)
