"""Dense ground-truth routines.

These are the reference implementations the sampling stack is judged
against, so they get hand-computable frozen values wherever a closed form
exists and structural checks (unitarity, normalization, symmetry)
elsewhere.
"""

import numpy as np
import pytest

from opvec.errors import CapExceededError
from opvec.oracle import (
    OracleConfig,
    exact_channel_dual,
    exact_heisenberg,
    exact_loe,
    exact_ose,
    exact_otoc,
    exact_pauli_amplitudes,
    exact_regulated,
    exact_wightman,
    pauli_probabilities,
    propagator,
)
from opvec.pauli import SIGMA, PauliString, PauliSum
from opvec.vectorize import PAULI, pauli_index, vectorize
from helpers import ginibre, ising_chain, random_hermitian_sum


def test_propagator_is_unitary_and_generates_h(gen):
    h = random_hermitian_sum(gen, 2, 4).to_dense()
    t = 0.37
    u = propagator(h, t)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)
    # d/dt at t=0 is -iH
    eps = 1e-6
    deriv = (propagator(h, eps) - np.eye(4)) / eps
    assert np.allclose(deriv, -1j * h, atol=1e-5)


def test_propagator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        propagator(np.array([[0, 1], [0, 0]]), 1.0)


def test_heisenberg_conjugates(gen):
    h = ising_chain(2)
    u = propagator(h.to_dense(), 0.8)
    op = ginibre(gen, 4)
    got = exact_heisenberg(op, u)
    assert np.allclose(got, u.conj().T @ op @ u)
    with pytest.raises(ValueError):
        exact_heisenberg(op, 2 * u)


class TestPauliAmplitudes:
    def test_matches_trace_formula(self, gen):
        op = ginibre(gen, 8)
        amps = exact_pauli_amplitudes(op)
        for label in ("III", "XIZ", "YYX", "ZZZ", "IYI"):
            p = PauliString.from_label(label)
            want = np.trace(p.to_dense() @ op) / 8
            assert amps[pauli_index(p)] == pytest.approx(want, abs=1e-12)

    def test_probabilities_match_vectorized_state(self, gen):
        op = ginibre(gen, 4)
        probs = pauli_probabilities(op)
        assert probs.sum() == pytest.approx(1.0)
        state = vectorize(op, PAULI)
        assert np.allclose(probs, np.abs(state.amplitudes) ** 2, atol=1e-12)


class TestOtoc:
    def test_anticommuting_word_gives_minus_one(self):
        z = PauliString.from_label("Z")
        assert exact_otoc(z, PauliString.from_label("X"), PauliString.from_label("X")) == pytest.approx(-1.0)
        assert exact_otoc(z, PauliString.from_label("Z"), PauliString.from_label("Z")) == pytest.approx(1.0)

    def test_identity_pair_is_normalization(self, gen):
        op = ginibre(gen, 4)
        op = op * 2 / np.linalg.norm(op)  # HS norm sqrt(2^n)
        eye = PauliString.identity(2)
        assert exact_otoc(op, eye, eye) == pytest.approx(1.0)

    def test_trace_formula(self, gen):
        op = ginibre(gen, 4)
        p = PauliString.from_label("XY")
        q = PauliString.from_label("ZI")
        want = np.trace(op.conj().T @ p.to_dense() @ op @ q.to_dense()).real / 4
        assert exact_otoc(op, p, q) == pytest.approx(want, abs=1e-12)


class TestOse:
    def test_equal_superposition_purity(self):
        op = PauliSum.from_text(f"{1 / np.sqrt(2)} 0 X\n{1 / np.sqrt(2)} 0 Z")
        purity, entropy = exact_ose(op, 2)
        assert purity == pytest.approx(0.5, abs=1e-12)
        assert entropy == pytest.approx(np.log(2), abs=1e-12)

    def test_point_mass_is_flat(self):
        purity, entropy = exact_ose(PauliString.from_label("XZY"), 2)
        assert (purity, entropy) == (1.0, 0.0)

    def test_order_one_is_shannon(self):
        op = PauliSum.from_text("0.6 0 X\n0.8 0 Z")
        _, entropy = exact_ose(op, 1)
        p = np.array([0.36, 0.64])
        assert entropy == pytest.approx(float(-(p * np.log(p)).sum()), abs=1e-12)

    def test_higher_order(self):
        op = PauliSum.from_text(f"{1 / np.sqrt(2)} 0 X\n{1 / np.sqrt(2)} 0 Z")
        purity, entropy = exact_ose(op, 3)
        assert purity == pytest.approx(0.25, abs=1e-12)
        assert entropy == pytest.approx(np.log(0.25) / (1 - 3), abs=1e-12)


class TestLoe:
    def test_bell_like_operator_is_maximally_mixed(self):
        op = PauliSum.from_text(f"{1 / np.sqrt(2)} 0 XX\n{1 / np.sqrt(2)} 0 YY")
        out = exact_loe(op, [0])
        assert out["trace"] == pytest.approx(0.5, abs=1e-12)
        assert out["linear"] == pytest.approx(0.5, abs=1e-12)
        assert out["entropy"] == pytest.approx(np.log(2), abs=1e-12)

    def test_product_operator_is_pure(self):
        out = exact_loe(PauliString.from_label("XZ"), [1])
        assert out["trace"] == pytest.approx(1.0, abs=1e-12)

    def test_partition_complement_symmetry(self, gen):
        op = ginibre(gen, 8)
        a = exact_loe(op, [0])
        b = exact_loe(op, [1, 2])
        assert a["trace"] == pytest.approx(b["trace"], abs=1e-10)

    @pytest.mark.parametrize("partition", [[], [0, 1], [5]])
    def test_bad_partitions(self, partition):
        with pytest.raises(ValueError):
            exact_loe(PauliString.from_label("XZ"), partition)


class TestRegulated:
    def test_beta_zero_reduces_to_otoc(self):
        h = ising_chain(2)
        o = PauliString.from_label("ZI")
        a = PauliString.from_label("XI")
        b = PauliString.from_label("XI")
        t = 0.7
        got = exact_regulated(o, a, b, h, t, 0.0, (0.5, 0.0, 0.5, 0.0))
        evolved = exact_heisenberg(o.to_dense(), propagator(h.to_dense(), t))
        assert got == pytest.approx(exact_otoc(evolved, a, b), abs=1e-12)

    def test_matches_direct_trace(self):
        h = PauliSum.from_text("1 0 ZZ")
        o = PauliString.from_label("XI")
        a = PauliString.from_label("ZI")
        t, beta = 0.7, 1.0
        got = exact_regulated(o, a, a, h, t, beta, (0.5, 0.0, 0.5, 0.0))
        hm = h.to_dense()
        w, v = np.linalg.eigh(hm)
        rho_half = (v * np.exp(-beta * w / 2)) @ v.conj().T
        z = np.exp(-beta * w).sum()
        om = exact_heisenberg(o.to_dense(), propagator(hm, t))
        am = a.to_dense()
        want = np.trace(rho_half @ om @ am @ rho_half @ om @ am).real / z
        assert got == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize("pattern", [(0.5, 0.5, 0.5, 0.5), (1.0, 0.0, 0.0, 0.0), (0.5, 0.0, 0.5)])
    def test_pattern_validation(self, pattern):
        with pytest.raises(ValueError):
            exact_regulated(
                PauliString.from_label("X"),
                PauliString.from_label("Z"),
                PauliString.from_label("Z"),
                PauliString.from_label("Z"),
                0.0,
                1.0,
                pattern,
            )

    def test_wightman_beta_zero_is_plain_trace(self):
        o1 = PauliString.from_label("XI")
        o2 = PauliSum.from_text("1 0 XI\n0.5 0 ZZ")
        h = ising_chain(2)
        got = exact_wightman(o1, o2, h, 0.0)
        want = np.trace(o1.to_dense() @ o2.to_dense()).real / 4
        assert got == pytest.approx(want, abs=1e-12)

    def test_wightman_anticommuting_probe(self):
        # X anticommutes with H = ZZ, so commuting it past one half-weight
        # flips that weight's sign: tr(...) = tr(I) = 4 and only the
        # partition function Z = 4 cosh(beta) survives.
        h = PauliSum.from_text("1 0 ZZ")
        x = PauliString.from_label("XI")
        beta = 1.3
        assert exact_wightman(x, x, h, beta) == pytest.approx(1 / np.cosh(beta), abs=1e-12)


class TestChannelDual:
    def test_bit_flip_on_z(self):
        p = 0.2
        kraus = [np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * SIGMA["X"]]
        got = exact_channel_dual(kraus, PauliString.from_label("Z"))
        assert np.allclose(got, (1 - 2 * p) * SIGMA["Z"], atol=1e-12)

    def test_incomplete_kraus_rejected(self):
        with pytest.raises(ValueError):
            exact_channel_dual([0.5 * np.eye(2)], PauliString.from_label("Z"))
        with pytest.raises(ValueError):
            exact_channel_dual([], PauliString.from_label("Z"))


class TestConfig:
    def test_cap_enforced(self):
        with pytest.raises(CapExceededError):
            exact_otoc(
                np.eye(2**8),
                PauliString.identity(8),
                PauliString.identity(8),
                OracleConfig(max_n=7),
            )

    def test_cap_ceiling(self):
        with pytest.raises(ValueError):
            OracleConfig(max_n=8)

    def test_env_override_lowers_cap(self, monkeypatch):
        monkeypatch.setenv("OPVEC_MAX_N", "2")
        assert OracleConfig.default().max_n == 2
