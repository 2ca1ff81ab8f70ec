"""Shared builders for the test suite."""

import numpy as np

from opvec.pauli import PauliString, PauliSum


def ising_chain(n: int) -> PauliSum:
    """Open transverse-field Ising chain with field 1/2 and coupling 1/4."""
    out = PauliSum(n)
    for i in range(n):
        out.add(0.5, PauliString.single(n, i, "Z"))
    for i in range(n - 1):
        label = ["I"] * n
        label[i] = label[i + 1] = "X"
        out.add(0.25, PauliString.from_label("".join(label)))
    return out


def grid_ising(rows: int, cols: int, h_x: float, h_z: float, J: float) -> PauliSum:
    """Mixed-field Ising model on a rows x cols grid, sites row-major.

    Terms are listed fields-first so a first-order product matches the
    layer order of the device schedule."""
    n = rows * cols
    out = PauliSum(n)
    for s in range(n):
        if h_x:
            out.add(h_x, PauliString.single(n, s, "X"))
    for s in range(n):
        if h_z:
            out.add(h_z, PauliString.single(n, s, "Z"))
    for r in range(rows):
        for c in range(cols):
            s = r * cols + c
            if c + 1 < cols:
                out.add(-J, PauliString(n, (1 << s) | (1 << (s + 1)), 0))
            if r + 1 < rows:
                out.add(-J, PauliString(n, (1 << s) | (1 << (s + cols)), 0))
    return out


def ginibre(gen: np.random.Generator, dim: int) -> np.ndarray:
    return (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2)


def pauli_normalized(mat: np.ndarray) -> np.ndarray:
    """Scale so the HS norm matches a Pauli word's: ||O||_HS = sqrt(dim)."""
    return mat * np.sqrt(mat.shape[0]) / np.linalg.norm(mat)


def random_word(gen: np.random.Generator, n: int, nontrivial: bool = False) -> PauliString:
    while True:
        p = PauliString(n, int(gen.integers(2**n)), int(gen.integers(2**n)))
        if not nontrivial or p.weight:
            return p


def random_hermitian_sum(gen: np.random.Generator, n: int, terms: int) -> PauliSum:
    out = PauliSum(n)
    while len(out) < terms:
        out.add(float(gen.standard_normal()), random_word(gen, n))
    return out
