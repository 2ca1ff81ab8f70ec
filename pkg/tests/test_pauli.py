"""Pauli string and sum algebra checked against dense 2^n matrices."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from opvec.errors import CapExceededError, ParseError
from opvec.pauli import (
    PauliString,
    PauliSum,
    geometric_features,
    pauli_product,
    phase_value,
)

labels = st.text(alphabet="IXYZ", min_size=1, max_size=4)


@given(labels)
def test_label_round_trip(label):
    assert PauliString.from_label(label).label == label


@given(labels)
def test_dense_matches_kron(label):
    p = PauliString.from_label(label)
    want = np.eye(1, dtype=complex)
    table = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.array([[1, 0], [0, -1]]),
    }
    for ch in label:
        want = np.kron(want, table[ch])
    assert np.allclose(p.to_dense(), want)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 4**n - 1), st.integers(0, 4**n - 1))))
def test_product_matches_dense(args):
    n, ka, kb = args
    a = PauliString(n, ka % 2**n, ka // 2**n)
    b = PauliString(n, kb % 2**n, kb // 2**n)
    k, r = pauli_product(a, b)
    assert np.allclose(a.to_dense() @ b.to_dense(), phase_value(k) * r.to_dense())


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 4**n - 1), st.integers(0, 4**n - 1))))
def test_commutes_matches_product_order(args):
    n, ka, kb = args
    a = PauliString(n, ka % 2**n, ka // 2**n)
    b = PauliString(n, kb % 2**n, kb // 2**n)
    kab, _ = pauli_product(a, b)
    kba, _ = pauli_product(b, a)
    assert a.commutes(b) == (kab == kba)


def test_product_is_involution_up_to_phase():
    p = PauliString.from_label("XYZY")
    k, r = pauli_product(p, p)
    assert r == PauliString.identity(4)
    assert k == 0


@pytest.mark.parametrize(
    "label,weight,boundary,ys",
    [("IIII", 0, 0, 0), ("XIII", 1, 1, 0), ("IIYZ", 2, 4, 1), ("YYYY", 4, 4, 4)],
)
def test_geometric_features(label, weight, boundary, ys):
    p = PauliString.from_label(label)
    assert (p.weight, p.right_boundary, p.y_count) == (weight, boundary, ys)
    assert geometric_features(p) == (weight, boundary)


def test_single_and_site():
    p = PauliString.single(5, 3, "Y")
    assert p.label == "IIIYI"
    assert p.site(3) == "Y"
    with pytest.raises(ValueError):
        PauliString.single(5, 5, "X")


def test_from_label_rejects_garbage():
    with pytest.raises(ParseError):
        PauliString.from_label("XQ")


def test_bits_outside_range_rejected():
    with pytest.raises(ValueError):
        PauliString(2, 4, 0)


def test_dense_cap():
    with pytest.raises(CapExceededError):
        PauliString.identity(8).to_dense()
    with pytest.raises(CapExceededError):
        PauliSum(8, {(0, 0): 1.0}).to_dense()


class TestPauliSum:
    def test_from_text_and_dense(self):
        s = PauliSum.from_text("1 0 ZI\n0.5 -0.25 XY\n# comment\n\n")
        want = PauliString.from_label("ZI").to_dense() + (0.5 - 0.25j) * PauliString.from_label(
            "XY"
        ).to_dense()
        assert np.allclose(s.to_dense(), want)

    def test_text_round_trip(self):
        s = PauliSum.from_text("0.125 0 XX\n-3 0.5 ZY\n1 0 II")
        again = PauliSum.from_text(s.to_text())
        assert again.terms == s.terms

    def test_add_merges_and_drops_zeros(self):
        s = PauliSum(2)
        p = PauliString.from_label("XZ")
        s.add(1.0, p)
        s.add(-1.0, p)
        assert len(s) == 0
        s.add(0.5j, p)
        assert s.terms == {(p.z, p.x): 0.5j}

    def test_hs_norm_matches_dense(self, gen):
        from helpers import random_hermitian_sum

        s = random_hermitian_sum(gen, 3, 5)
        assert s.hs_norm() == pytest.approx(np.linalg.norm(s.to_dense()))

    def test_is_hermitian(self):
        assert PauliSum.from_text("1 0 XY").is_hermitian()
        assert not PauliSum.from_text("1 1 XY").is_hermitian()

    def test_scale(self):
        s = PauliSum.from_text("2 0 ZZ").scale(0.5j)
        assert s.terms == {(3, 0): 1j}

    @pytest.mark.parametrize(
        "text", ["", "1 0", "x 0 ZI", "1 0 ZI\n1 0 Z", "1 0 QQ"]
    )
    def test_from_text_rejects(self, text):
        with pytest.raises(ParseError):
            PauliSum.from_text(text)

    def test_ordered_items_keeps_file_order(self):
        s = PauliSum.from_text("1 0 ZZ\n1 0 XX")
        assert [p.label for _, p in s.ordered_items()] == ["ZZ", "XX"]
        assert [p.label for _, p in s.items()] == ["XX", "ZZ"]
