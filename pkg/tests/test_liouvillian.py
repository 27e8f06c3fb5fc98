import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrefrig.liouvillian import (
    GeneratorMatrix,
    JumpChannel,
    SteadyStateError,
    channels_for_bath,
    dissipator_current,
    generator,
    hamiltonian,
    jump_channels,
    population_indices,
    steady_state,
    tilted_generator,
    unvec,
    vec,
)
from qrefrig.model import RefrigeratorSpec, rate_set

from conftest import BUILDERS, qrc, qrcn, qri
from reference import QRC_POPULATIONS, QRI_MEAN, QRI_POPULATIONS


def _random_state(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def test_vectorization_convention():
    rng = np.random.default_rng(1)
    A, B, R = (rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(np.kron(B.T, A) @ vec(R), vec(A @ R @ B))
    assert np.array_equal(unvec(vec(R)), R)
    assert list(population_indices(3)) == [0, 4, 8]


class TestHamiltonian:
    def test_qrc(self):
        assert np.allclose(np.diag(hamiltonian(qrc())), [0, 9.1, 10])

    def test_qrcn(self):
        assert np.allclose(np.diag(hamiltonian(qrcn())), [0, 9.1, 10, 11.1])

    def test_cold_to_hot_limit(self):
        s = RefrigeratorSpec.qrc(1.0, 2.0, 0.09, 10.0, 10.0 - 1e-9, 0.01)
        assert abs(hamiltonian(s)[1, 1]) < 1e-8


class TestChannels:
    def test_counts(self):
        assert [len(jump_channels(b())) for b in (qri, qrc, qrcn)] == [6, 4, 4]

    def test_conjugate_pairs_have_opposite_weights(self, model):
        ch = jump_channels(BUILDERS[model]())
        for a, b in zip(ch[::2], ch[1::2]):
            assert np.allclose(a.jump.conj().T, b.jump)
            assert {k: -v for k, v in a.weights.items()} == b.weights

    def test_qrc_correlated_weights(self):
        g1 = jump_channels(qrc())[0]
        assert g1.weights == {"hot": -10.0, "cold": 0.9}
        assert g1.baths == ("hot", "cold")

    def test_qrcn_work_weights(self):
        ch = {c.label: c for c in jump_channels(qrcn())}
        assert ch["g3p"].weights["work"] == pytest.approx(-9.1, rel=1e-14)

    def test_empty_work_bath_absorbs_nothing(self):
        s = qrc()
        rates = dict(rate_set(s))
        rates["g4"] = 0.0
        from qrefrig.model import RateSet

        ch = {c.label: c for c in jump_channels(s, RateSet(s.variant, rates))}
        assert ch["g4"].rate == 0.0


class TestGenerator:
    def test_pure_hamiltonian(self):
        H = hamiltonian(qrc())
        L = generator(H, []).matrix
        rho = np.diag([0.2, 0.5, 0.3]).astype(complex)
        assert np.allclose(L @ vec(rho), 0)

    def test_population_block_matches_rate_matrix(self):
        s = qrc()
        r = rate_set(s)
        L = generator(hamiltonian(s), jump_channels(s)).matrix
        idx = population_indices(3)[:2]
        down, up = r["g1"] + r["g3"], r["g2"] + r["g4"]
        expected = np.array([[-up, down], [up, -down]])
        assert np.allclose(L[np.ix_(idx, idx)], expected, rtol=1e-14, atol=0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            generator(np.eye(4), jump_channels(qrc()))

    @given(st.floats(1.01, 10.0), st.floats(0.01, 0.99), st.sampled_from(["qri", "qrc", "qrcn"]))
    @settings(max_examples=30, deadline=None)
    def test_trace_preservation(self, bc, bw, model):
        kw = {"beta_w1": bw} if model == "qrcn" else {"beta_w": bw}
        s = BUILDERS[model](bc, **kw)
        G = generator(hamiltonian(s), jump_channels(s))
        rng = np.random.default_rng(0)
        for _ in range(3):
            rho = _random_state(rng, s.dim)
            assert abs(np.trace(G.apply(rho))) < 1e-12
        assert np.max(np.abs(vec(np.eye(s.dim)) @ G.matrix)) < 1e-12

    def test_hermiticity_preserved(self, model):
        s = BUILDERS[model]()
        G = generator(hamiltonian(s), jump_channels(s))
        rng = np.random.default_rng(1)
        for _ in range(100):
            out = G.apply(_random_state(rng, s.dim))
            assert np.max(np.abs(out - out.conj().T)) < 1e-15

    def test_trace_preservation_random_states(self, model):
        s = BUILDERS[model]()
        G = generator(hamiltonian(s), jump_channels(s))
        rng = np.random.default_rng(2)
        assert max(abs(np.trace(G.apply(_random_state(rng, s.dim)))) for _ in range(100)) < 1e-12


class TestTilted:
    def test_zero_chi_bitwise_equal(self, model):
        s = BUILDERS[model]()
        H, ch = hamiltonian(s), jump_channels(s)
        assert np.array_equal(tilted_generator(H, ch, {"cold": 0.0}).matrix, generator(H, ch).matrix)

    def test_unknown_label(self):
        s = qrc()
        with pytest.raises(KeyError, match="unknown bath"):
            tilted_generator(hamiltonian(s), jump_channels(s), {"warm": 0.1})

    def test_qri_cold_phases(self):
        s = qri()
        r = rate_set(s)
        chi = 0.3
        L = tilted_generator(hamiltonian(s), jump_channels(s), {"cold": chi}).matrix
        p = population_indices(3)
        # |1> -> |2> absorbs a cold photon, |2> -> |1> emits one.
        assert L[p[2], p[1]] == pytest.approx(r["c_abs"] * np.exp(1j * chi * 0.9))
        assert L[p[1], p[2]] == pytest.approx(r["c_emit"] * np.exp(-1j * chi * 0.9))
        assert L[p[0], p[2]] == pytest.approx(r["h_emit"])

    def test_tight_coupling_combination(self):
        # lambda depends on (omega_c chi_c - omega_h chi_h) and omega_w chi_w only
        s = qrc()
        H, ch = hamiltonian(s), jump_channels(s)

        def lam(chi):
            ev = np.linalg.eigvals(tilted_generator(H, ch, chi).matrix)
            return ev[np.argmin(np.abs(ev))]

        rng = np.random.default_rng(3)
        for _ in range(3):
            ch_h, ch_w, ch_c = rng.normal(scale=0.05, size=3)
            shift = ch_h * 10 / 0.9
            a = lam({"hot": ch_h, "cold": ch_c, "work": ch_w})
            b = lam({"cold": ch_c - shift, "work": ch_w})
            assert a == pytest.approx(b, abs=1e-14)


class TestSteadyState:
    def test_qrc_populations(self):
        s = qrc()
        rho = steady_state(generator(hamiltonian(s), jump_channels(s)))
        assert np.allclose(np.diag(rho).real, QRC_POPULATIONS, rtol=1e-12, atol=1e-15)

    def test_qri_matches_closed_form(self):
        s = qri()
        rho = steady_state(generator(hamiltonian(s), jump_channels(s)))
        assert np.allclose(np.diag(rho).real, QRI_POPULATIONS, rtol=1e-10, atol=0)

    def test_equilibrium_is_gibbs(self):
        b = 0.7
        s = RefrigeratorSpec.qri(b, b, b, 10.0, 0.9, 0.01)
        H = hamiltonian(s)
        rho = steady_state(generator(H, jump_channels(s)))
        gibbs = np.exp(-b * np.diag(H).real)
        assert np.allclose(np.diag(rho).real, gibbs / gibbs.sum(), rtol=1e-12)

    def test_state_properties(self, model):
        s = BUILDERS[model]()
        rho = steady_state(generator(hamiltonian(s), jump_channels(s)))
        assert np.allclose(rho, rho.conj().T, atol=1e-12)
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-10
        assert np.max(np.abs(rho - np.diag(np.diag(rho)))) < 1e-10

    def test_tilted_input_rejected(self):
        s = qrc()
        with pytest.raises(ValueError):
            steady_state(tilted_generator(hamiltonian(s), jump_channels(s), {"cold": 0.1}))

    def test_disconnected_levels_rejected(self):
        H = np.diag([0.0, 1.0, 2.0]).astype(complex)
        J = np.zeros((3, 3), dtype=complex)
        J[0, 1] = 1
        # level |2> is untouched by dissipation but |0>,|1> are: still unique once |2> is dark
        rho = steady_state(generator(H, [JumpChannel("a", J, 1.0)]))
        assert rho[0, 0].real == pytest.approx(1.0)
        # two decoupled decaying pairs: the weight between the pairs is free
        H4 = np.diag([0.0, 1.0, 2.5, 4.0]).astype(complex)
        A = np.zeros((4, 4), dtype=complex)
        B = np.zeros((4, 4), dtype=complex)
        A[0, 1] = B[2, 3] = 1
        with pytest.raises(SteadyStateError, match="non-unique"):
            steady_state(generator(H4, [JumpChannel("a", A, 1.0), JumpChannel("b", B, 1.0)]))


class TestDissipatorCurrent:
    def test_equilibrium_zero(self):
        s = RefrigeratorSpec.qri(0.5, 0.5, 0.5, 10.0, 0.9, 0.01)
        H, ch = hamiltonian(s), jump_channels(s)
        rho = steady_state(generator(H, ch))
        for bath in ("hot", "cold", "work"):
            assert abs(dissipator_current(rho, channels_for_bath(ch, bath), H)) < 1e-12

    def test_qri_first_law_and_flux(self):
        s = qri()
        H, ch = hamiltonian(s), jump_channels(s)
        rho = steady_state(generator(H, ch))
        J = {b: dissipator_current(rho, channels_for_bath(ch, b), H) for b in ("hot", "cold", "work")}
        assert abs(sum(J.values())) < 1e-12
        assert J["cold"] == pytest.approx(QRI_MEAN * 0.9, rel=1e-10)

    def test_rate_weight_sum_matches(self, model):
        s = BUILDERS[model]()
        H, ch = hamiltonian(s), jump_channels(s)
        rho = steady_state(generator(H, ch))
        work = channels_for_bath(ch, "work")
        expected = sum(
            c.rate * c.weights["work"] * np.real(np.trace(c.jump @ rho @ c.jump.conj().T)) for c in work
        )
        assert dissipator_current(rho, work, H) == pytest.approx(expected, rel=1e-12)

    def test_correlated_channels_rejected(self):
        s = qrc()
        H, ch = hamiltonian(s), jump_channels(s)
        rho = steady_state(generator(H, ch))
        with pytest.raises(ValueError):
            dissipator_current(rho, channels_for_bath(ch, "cold"), H)
        with pytest.raises(ValueError):
            dissipator_current(rho, ch, H)
