"""Vectorization map, its index codec, basis changes, and serialization.

The single-site images in both representations are asserted against frozen
vectors; everything else is round-trip or isometry checks against dense
linear algebra.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from opvec.errors import ParseError
from opvec.pauli import PauliString, PauliSum
from opvec.vectorize import (
    COMPUTATIONAL,
    PAULI,
    BasisTag,
    VectorizedState,
    bell_transform,
    devectorize,
    hs_inner,
    index_pauli,
    load_state,
    local_basis_change,
    pauli_index,
    pauli_index_codec,
    qudit_bell_transform,
    qudit_computational,
    qudit_pauli,
    save_state,
    transform_matrix,
    vectorize,
)
from helpers import ginibre

SQ = 1 / np.sqrt(2)

# Single-site images. Pauli rep: basis index packs (z, x); the Y image
# carries the -i of Y = -i Z X. Computational rep: row-stacked matrix.
IMAGES = {
    "I": {"pauli": [1, 0, 0, 0], "computational": [SQ, 0, 0, SQ]},
    "X": {"pauli": [0, 1, 0, 0], "computational": [0, SQ, SQ, 0]},
    "Z": {"pauli": [0, 0, 1, 0], "computational": [SQ, 0, 0, -SQ]},
    "Y": {"pauli": [0, 0, 0, -1j], "computational": [0, -1j * SQ, 1j * SQ, 0]},
}


@pytest.mark.parametrize("letter", "IXZY")
@pytest.mark.parametrize("basis", [PAULI, COMPUTATIONAL])
def test_single_site_images(letter, basis):
    state = vectorize(PauliString.from_label(letter), basis)
    assert np.allclose(state.amplitudes, IMAGES[letter][basis.kind], atol=1e-15)


@pytest.mark.parametrize("basis", [PAULI, COMPUTATIONAL])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_round_trip_random_operators(basis, n, gen):
    for _ in range(20):
        mat = ginibre(gen, 2**n)
        state = vectorize(mat, basis)
        back = devectorize(state)
        assert np.linalg.norm(back - mat / np.linalg.norm(mat)) <= 1e-12


def test_vectorize_pauli_sum_matches_dense_path(gen):
    from helpers import random_hermitian_sum

    s = random_hermitian_sum(gen, 3, 6)
    via_terms = vectorize(s, PAULI)
    via_dense = vectorize(s.to_dense(), PAULI)
    assert np.allclose(via_terms.amplitudes, via_dense.amplitudes, atol=1e-12)


def test_zero_operator_rejected():
    with pytest.raises(ValueError):
        vectorize(np.zeros((4, 4)), COMPUTATIONAL)


def test_isometry(gen):
    a = ginibre(gen, 8)
    b = ginibre(gen, 8)
    sa, sb = vectorize(a, PAULI), vectorize(b, PAULI)
    want = np.trace(a.conj().T @ b) / (np.linalg.norm(a) * np.linalg.norm(b))
    assert hs_inner(sa, sb) == pytest.approx(want, abs=1e-12)


def test_hs_inner_rejects_mixed_reps():
    a = vectorize(PauliString.from_label("X"), PAULI)
    b = vectorize(PauliString.from_label("X"), COMPUTATIONAL)
    with pytest.raises(ValueError):
        hs_inner(a, b)


class TestIndexCodec:
    @given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 4**n - 1))))
    def test_round_trip(self, args):
        n, idx = args
        assert pauli_index(index_pauli(idx, n)) == idx

    def test_site_zero_is_most_significant(self):
        n = 3
        assert index_pauli(0, n).label == "III"
        # site-0 letter changes in blocks of 4^(n-1)
        assert index_pauli(1 * 4**2, n).label == "XII"
        assert index_pauli(2 * 4**2, n).label == "ZII"
        assert index_pauli(3 * 4**2, n).label == "YII"
        assert index_pauli(3, n).label == "IIY"

    def test_codec_phase_counts_ys(self):
        idx, phase = pauli_index_codec(PauliString.from_label("YIY"))
        assert phase == pytest.approx((-1j) ** 2)
        assert index_pauli(idx, 3).label == "YIY"

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            index_pauli(64, 2)

    def test_amplitude_lands_at_codec_index(self, gen):
        from helpers import random_word

        p = random_word(gen, 4)
        state = vectorize(p, PAULI)
        idx, phase = pauli_index_codec(p)
        assert state.amplitudes[idx] == pytest.approx(phase)


class TestBasisChange:
    def test_transform_is_unitary(self):
        for n in (1, 2, 3):
            m = transform_matrix(n, "p_to_c")
            assert np.allclose(m @ m.conj().T, np.eye(4**n), atol=1e-12)

    def test_directions_invert(self, gen):
        state = vectorize(ginibre(gen, 8), PAULI)
        back = bell_transform(bell_transform(state, "p_to_c"), "c_to_p")
        assert np.allclose(back.amplitudes, state.amplitudes, atol=1e-12)

    def test_matches_dense_transform(self, gen):
        state = vectorize(ginibre(gen, 4), PAULI)
        moved = bell_transform(state, "p_to_c")
        want = transform_matrix(2, "p_to_c") @ state.amplitudes
        assert np.allclose(moved.amplitudes, want, atol=1e-12)

    def test_rejects_wrong_rep(self):
        state = vectorize(PauliString.from_label("Z"), PAULI)
        with pytest.raises(ValueError):
            bell_transform(state, "c_to_p")
        with pytest.raises(ValueError):
            bell_transform(state, "sideways")


class TestQudit:
    def test_prime_dimension_enforced(self):
        with pytest.raises(ValueError):
            qudit_pauli(4)
        with pytest.raises(ValueError):
            BasisTag("pauli", 3)

    def test_qutrit_round_trip(self, gen):
        mat = ginibre(gen, 9)
        state = vectorize(mat, qudit_pauli(3))
        assert state.basis.d == 3
        back = devectorize(state)
        assert np.linalg.norm(back - mat / np.linalg.norm(mat)) <= 1e-12

    def test_qutrit_transform_inverts(self, gen):
        state = vectorize(ginibre(gen, 3), qudit_computational(3))
        there = qudit_bell_transform(state, "c_to_p")
        back = qudit_bell_transform(there, "p_to_c")
        assert np.allclose(back.amplitudes, state.amplitudes, atol=1e-12)

    def test_d2_reduces_to_qubit_transform(self, gen):
        mat = ginibre(gen, 4)
        qubit = vectorize(mat, PAULI)
        state = vectorize(mat, COMPUTATIONAL)
        qudit = qudit_bell_transform(state, "c_to_p")
        assert np.allclose(qudit.amplitudes, qubit.amplitudes, atol=1e-12)


def test_local_basis_change_matches_global(gen):
    state = vectorize(ginibre(gen, 4), COMPUTATIONAL)
    u = np.linalg.qr(ginibre(gen, 16))[0]
    amps = local_basis_change(state, [(0, 1)], [u])
    want = np.kron(u, np.eye(1)) @ state.amplitudes
    assert np.allclose(amps, want, atol=1e-12)
    with pytest.raises(ValueError):
        local_basis_change(state, [(0,), (0,)], [np.eye(4), np.eye(4)])


class TestSerialization:
    def test_round_trip(self, tmp_path, gen):
        state = vectorize(ginibre(gen, 8), PAULI)
        path = tmp_path / "state.bin"
        save_state(state, path)
        loaded = load_state(path)
        assert (loaded.n, loaded.basis) == (state.n, state.basis)
        # payload is complex64, so the round trip is float32-accurate
        assert np.allclose(loaded.amplitudes, state.amplitudes, atol=1e-6)

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bogus.bin"
        path.write_bytes(b"NOPE" + bytes(9))
        with pytest.raises(ParseError):
            load_state(path)

    def test_rejects_truncated_payload(self, tmp_path, gen):
        state = vectorize(ginibre(gen, 4), COMPUTATIONAL)
        path = tmp_path / "cut.bin"
        save_state(state, path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ParseError):
            load_state(path)


def test_unit_norm_enforced():
    with pytest.raises(ValueError):
        VectorizedState(1, PAULI, np.array([1.0, 1.0, 0, 0]))
