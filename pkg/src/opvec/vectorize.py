"""Operator-to-state vectorization and the basis changes between its
representations.

An n-site operator O with expansion O = sum_k c_k Q_k over an orthogonal
operator basis {Q_k} (tr(Q_j^dag Q_k) = N delta_jk) maps to the unit vector
whose k-th amplitude is c_k / sqrt(sum_i |c_i|^2). Two qubit bases are
supported, plus their qudit generalizations:

* computational: Q = |i><j| products per site (N = 1). The doubled register
  stores the (row, column) indices of each site as an adjacent qubit pair
  [site0_L, site0_R, site1_L, site1_R, ...], so this is row-stacking of the
  matrix with site-interleaved index bits.
* pauli: Q = Z^z X^x products per site (N = 2^n). The index packs each
  site's (z, x) as two bits in the same interleaved order. A standard Pauli
  word contributes its coefficient times (-i) per Y site, since
  Y = -i Z X.

The two representations are related by a local basis change acting on each
(L, R) qubit pair; composing/inverting those transforms is exact, so states
can be moved freely between representations.

Vectors are serialized to a small binary format: a 13-byte header
(magic "OPV1", basis tag byte, uint32 n, uint32 d, little-endian) followed by
the amplitudes as little-endian complex64.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ._linalg import amplitude_matrix, apply_matrix, from_amplitude_matrix
from .errors import ParseError
from .pauli import PauliString, PauliSum

_MAGIC = b"OPV1"
_TAG_CODES = {"computational": 0, "pauli": 1, "qudit_pauli": 2}
_TAG_NAMES = {v: k for k, v in _TAG_CODES.items()}

NORM_TOL = 1e-12


def _is_prime(d: int) -> bool:
    if d < 2:
        return False
    return all(d % q for q in range(2, int(d**0.5) + 1))


@dataclass(frozen=True)
class BasisTag:
    kind: str
    d: int = 2

    def __post_init__(self):
        if self.kind not in _TAG_CODES:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "pauli" and self.d != 2:
            raise ValueError("'pauli' is the qubit basis; use qudit_pauli for d > 2")
        if self.kind == "qudit_pauli" and not _is_prime(self.d):
            raise ValueError("qudit Pauli basis requires prime local dimension")
        if self.d < 2:
            raise ValueError("local dimension must be at least 2")


COMPUTATIONAL = BasisTag("computational", 2)
PAULI = BasisTag("pauli", 2)


def qudit_computational(d: int) -> BasisTag:
    return BasisTag("computational", d)


def qudit_pauli(d: int) -> BasisTag:
    return BasisTag("qudit_pauli", d)


@dataclass
class VectorizedState:
    """Unit vector on 2n qudits representing an n-site operator."""

    n: int
    basis: BasisTag
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        want = self.basis.d ** (2 * self.n)
        if self.amplitudes.shape[0] != want:
            raise ValueError(f"expected {want} amplitudes, got {self.amplitudes.shape[0]}")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"vectorized states are unit norm; got {norm!r}")

    @property
    def d(self) -> int:
        return self.basis.d

    def copy(self) -> "VectorizedState":
        return VectorizedState(self.n, self.basis, self.amplitudes.copy())


# ---------------------------------------------------------------------------
# Pauli index codec: site i's (z_i, x_i) occupy index bits (2i, 2i+1),
# site 0 most significant.

def pauli_index(p: PauliString) -> int:
    idx = 0
    for i in range(p.n):
        idx = (idx << 2) | (((p.z >> i) & 1) << 1) | ((p.x >> i) & 1)
    return idx


def index_pauli(idx: int, n: int) -> PauliString:
    if not 0 <= idx < 4**n:
        raise ValueError(f"index {idx} outside 4^{n}")
    z = x = 0
    for i in reversed(range(n)):
        x |= (idx & 1) << i
        z |= ((idx >> 1) & 1) << i
        idx >>= 2
    return PauliString(n, z, x)


def pauli_index_codec(p: PauliString) -> tuple[int, complex]:
    """Index and amplitude phase of the basis state representing ``p``:
    a standard Pauli word picks up (-i) per Y site relative to the Z^z X^x
    product the index encodes."""
    return pauli_index(p), (-1j) ** p.y_count


# ---------------------------------------------------------------------------
# Local basis-change transforms.

def _pair_transform_p_to_c(d: int) -> np.ndarray:
    """Unitary taking the Pauli-rep pair state to the computational rep:
    SUM_d (H_d x I) per site pair, which is CNOT (H x I) at d = 2."""
    w = np.exp(2j * np.pi / d)
    h = np.array([[w ** (j * k) for k in range(d)] for j in range(d)], dtype=complex) / np.sqrt(d)
    s = np.zeros((d * d, d * d), dtype=complex)
    for m in range(d):
        for t in range(d):
            s[d * m + (m + t) % d, d * m + t] = 1.0
    return s @ np.kron(h, np.eye(d))


def _apply_pairwise(amps: np.ndarray, n: int, mat: np.ndarray, d: int) -> np.ndarray:
    out = amps
    for site in range(n):
        out = apply_matrix(out, mat, (2 * site, 2 * site + 1), 2 * n, d)
    return out


def bell_transform(state: VectorizedState, direction: str) -> VectorizedState:
    """Change a qubit state between the computational and Pauli reps.

    direction: "c_to_p" or "p_to_c". Acts as one fixed two-qubit unitary per
    (L, R) site pair, so the composition of the two directions is exactly the
    identity.
    """
    if state.basis.d != 2:
        raise ValueError("bell_transform is the qubit transform; see qudit_bell_transform")
    if direction == "p_to_c":
        if state.basis.kind not in ("pauli", "qudit_pauli"):
            raise ValueError(f"state is already in {state.basis.kind!r}")
        mat, out_basis = _pair_transform_p_to_c(2), COMPUTATIONAL
    elif direction == "c_to_p":
        if state.basis.kind != "computational":
            raise ValueError(f"state is in {state.basis.kind!r}, not computational")
        mat, out_basis = _pair_transform_p_to_c(2).conj().T, PAULI
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return VectorizedState(state.n, out_basis, _apply_pairwise(state.amplitudes, state.n, mat, 2))


def qudit_bell_transform(state: VectorizedState, direction: str) -> VectorizedState:
    """General-d version of :func:`bell_transform` (identical to it at d=2,
    up to the basis tag used for the Pauli-side representation)."""
    d = state.basis.d
    if direction == "p_to_c":
        if state.basis.kind != "qudit_pauli":
            raise ValueError(f"state is in {state.basis.kind!r}, not qudit_pauli")
        mat, out_basis = _pair_transform_p_to_c(d), qudit_computational(d)
    elif direction == "c_to_p":
        if state.basis.kind != "computational":
            raise ValueError(f"state is in {state.basis.kind!r}, not computational")
        mat, out_basis = _pair_transform_p_to_c(d).conj().T, qudit_pauli(d)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return VectorizedState(state.n, out_basis, _apply_pairwise(state.amplitudes, state.n, mat, d))


def transform_matrix(n: int, direction: str, d: int = 2) -> np.ndarray:
    """Dense basis-change matrix on the full doubled register."""
    base = _pair_transform_p_to_c(d)
    if direction == "c_to_p":
        base = base.conj().T
    elif direction != "p_to_c":
        raise ValueError(f"unknown direction {direction!r}")
    out = np.eye(1, dtype=complex)
    for _ in range(n):
        out = np.kron(out, base)
    return out


# ---------------------------------------------------------------------------
# The map itself.

def _infer_sites(dim: int, d: int) -> int:
    n = 0
    acc = 1
    while acc < dim:
        acc *= d
        n += 1
    if acc != dim:
        raise ValueError(f"dimension {dim} is not a power of {d}")
    return n


def vectorize(op: PauliString | PauliSum | np.ndarray, basis: BasisTag) -> VectorizedState:
    """Map an operator to its unit-norm vectorized state in ``basis``.

    Accepts a Pauli word or sum (qubits only) or a dense square matrix of
    dimension d^n. The zero operator has no direction and is rejected.
    """
    d = basis.d
    if isinstance(op, PauliString):
        op = PauliSum.from_terms([(1.0, op)])
    if isinstance(op, PauliSum):
        if d != 2:
            raise ValueError("PauliSum input is qubit-only")
        if basis.kind in ("pauli", "qudit_pauli"):
            amps = np.zeros(4**op.n, dtype=complex)
            for c, p in op.items():
                amps[pauli_index(p)] = c * (-1j) ** p.y_count
            return _normalized(op.n, basis, amps)
        return vectorize(op.to_dense(), basis)
    mat = np.asarray(op, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("operator must be a square matrix")
    n = _infer_sites(mat.shape[0], d)
    amps = from_amplitude_matrix(mat, n, d)
    state = _normalized(n, BasisTag("computational", d), amps)
    if basis.kind == "computational":
        return state
    if basis.kind == "pauli":
        return bell_transform(state, "c_to_p")
    return qudit_bell_transform(state, "c_to_p")


def _normalized(n: int, basis: BasisTag, amps: np.ndarray) -> VectorizedState:
    norm = np.linalg.norm(amps)
    if norm < 1e-300:
        raise ValueError("cannot vectorize the zero operator")
    return VectorizedState(n, basis, amps / norm)


def devectorize(state: VectorizedState) -> np.ndarray:
    """Dense unit-HS-norm operator whose expansion amplitudes are the state."""
    if state.basis.kind == "computational":
        return amplitude_matrix(state.amplitudes, state.n, state.basis.d)
    if state.basis.kind == "pauli":
        return amplitude_matrix(bell_transform(state, "p_to_c").amplitudes, state.n, 2)
    return amplitude_matrix(
        qudit_bell_transform(state, "p_to_c").amplitudes, state.n, state.basis.d
    )


def local_basis_change(
    state: VectorizedState, partitions, unitaries
) -> np.ndarray:
    """Apply caller-supplied unitaries to the doubled-qubit blocks of site
    partitions, moving to a custom product operator basis. Returns raw
    amplitudes since the result is not one of the named representations.

    partitions: disjoint tuples of site indices; unitaries: matching list of
    d^(2k) x d^(2k) matrices, each acting on the (L, R) qubits of its sites.
    """
    d = state.basis.d
    amps = state.amplitudes
    seen: set[int] = set()
    for sites, mat in zip(partitions, unitaries, strict=True):
        if seen & set(sites):
            raise ValueError("partitions overlap")
        seen |= set(sites)
        targets = []
        for s in sites:
            targets += [2 * s, 2 * s + 1]
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (d ** len(targets), d ** len(targets)):
            raise ValueError("unitary dimension does not match partition")
        amps = apply_matrix(amps, mat, tuple(targets), 2 * state.n, d)
    return amps


def hs_inner(a: VectorizedState, b: VectorizedState) -> complex:
    """Hilbert-Schmidt inner product of the represented operators,
    normalized by both HS norms (an isometry of the map)."""
    if (a.n, a.basis) != (b.n, b.basis):
        raise ValueError("states live in different representations")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


# ---------------------------------------------------------------------------
# Binary serialization.

def save_state(state: VectorizedState, path) -> None:
    header = struct.pack("<4sBII", _MAGIC, _TAG_CODES[state.basis.kind], state.n, state.basis.d)
    payload = state.amplitudes.astype("<c8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_state(path) -> VectorizedState:
    with open(path, "rb") as fh:
        header = fh.read(13)
        if len(header) != 13:
            raise ParseError("truncated state file header")
        magic, tag, n, d = struct.unpack("<4sBII", header)
        if magic != _MAGIC:
            raise ParseError("not a vectorized-state file")
        if tag not in _TAG_NAMES:
            raise ParseError(f"unknown basis tag {tag}")
        payload = np.frombuffer(fh.read(), dtype="<c8")
    want = d ** (2 * n)
    if payload.shape[0] != want:
        raise ParseError(f"expected {want} amplitudes, found {payload.shape[0]}")
    amps = payload.astype(complex)
    # complex64 round-off can leave the norm slightly off; renormalize.
    amps = amps / np.linalg.norm(amps)
    return VectorizedState(n, BasisTag(_TAG_NAMES[tag], d), amps)
