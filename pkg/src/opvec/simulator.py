"""Dense statevector simulator for small qubit registers.

Statevector convention: qubit 0 is the most significant index bit, so
basis state |q0 q1 ... q_{k-1}> sits at index q0*2^{k-1} + ... + q_{k-1}.
Doubled registers interleave the two copies as [0_L, 0_R, 1_L, 1_R, ...];
site i of the represented operator owns qubits 2i (left copy) and 2i+1
(right copy).

Heisenberg evolution of a vectorized operator never transposes a circuit:
gate-by-gate, the left copy receives M^dag in reversed order and the right
copy receives conj(M^dag), which together implement U^dag (x) U^T.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from ._linalg import apply_block, apply_matrix
from .errors import CapExceededError, ParseError, ProjectionFailedError
from .pauli import DENSE_SITE_CAP, PauliString, PauliSum
from .vectorize import COMPUTATIONAL, BasisTag, VectorizedState, vectorize

DENSE_UNITARY_CAP = 12

_SQ = 1 / np.sqrt(2)
_I2 = np.eye(2, dtype=complex)
_PAULI_1Q = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_FIXED = {
    "id": _I2,
    "x": _PAULI_1Q["X"],
    "y": _PAULI_1Q["Y"],
    "z": _PAULI_1Q["Z"],
    "h": np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex),
    "s": np.diag([1, 1j]).astype(complex),
    "sdg": np.diag([1, -1j]).astype(complex),
    "t": np.diag([1, np.exp(1j * np.pi / 4)]),
    "tdg": np.diag([1, np.exp(-1j * np.pi / 4)]),
    "cx": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}
_ROTATION_AXES = {"rx": "X", "ry": "Y", "rz": "Z", "rxx": "XX", "ryy": "YY", "rzz": "ZZ"}
_SELF_INVERSE = {"id", "x", "y", "z", "h", "cx", "cz", "swap"}
_INVERSE_NAME = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}

GATE_NAMES = frozenset(_FIXED) | frozenset(_ROTATION_AXES) | {"pexp", "u"}


def _pauli_word_matrix(axes: str) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for a in axes:
        out = np.kron(out, _PAULI_1Q[a])
    return out


@dataclass(frozen=True)
class Gate:
    """One gate: a named standard gate, a rotation with an angle, a Pauli
    exponential exp(-i angle P/2) over an axis word, or an explicit small
    unitary (name "u")."""

    name: str
    targets: tuple[int, ...]
    angle: float | None = None
    axes: str | None = None
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.name not in GATE_NAMES:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets in {self.name}: {self.targets}")
        if self.name in _FIXED:
            want = 1 if _FIXED[self.name].shape[0] == 2 else 2
            if len(self.targets) != want:
                raise ValueError(f"{self.name} takes {want} target(s)")
            if self.angle is not None:
                raise ValueError(f"{self.name} takes no angle")
        elif self.name in _ROTATION_AXES:
            if len(self.targets) != len(_ROTATION_AXES[self.name]):
                raise ValueError(f"{self.name} arity mismatch")
            if self.angle is None:
                raise ValueError(f"{self.name} requires an angle")
        elif self.name == "pexp":
            if self.angle is None or not self.axes:
                raise ValueError("pexp requires an angle and an axis word")
            if len(self.axes) != len(self.targets):
                raise ValueError("pexp axis word length must match target count")
            if any(a not in "XYZ" for a in self.axes):
                raise ValueError(f"bad pexp axes {self.axes!r}")
        elif self.name == "u":
            if self.matrix is None:
                raise ValueError("u requires an explicit matrix")
            m = np.asarray(self.matrix, dtype=complex)
            if len(self.targets) > 2:
                raise ValueError("explicit unitaries are limited to 2 targets")
            if m.shape != (2 ** len(self.targets),) * 2:
                raise ValueError("matrix dimension does not match targets")
            if np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) > 1e-12:
                raise ValueError("matrix is not unitary")
            object.__setattr__(self, "matrix", m)

    def inverse(self) -> "Gate":
        if self.name in _SELF_INVERSE:
            return self
        if self.name in _INVERSE_NAME:
            return Gate(_INVERSE_NAME[self.name], self.targets)
        if self.name == "u":
            return Gate("u", self.targets, matrix=self.matrix.conj().T)
        return Gate(self.name, self.targets, -self.angle, self.axes)


def gate_matrix(g: Gate) -> np.ndarray:
    """Dense matrix of a gate on its own targets (pexp limited to the
    dense-kernel regime of <= 2 targets)."""
    if g.name in _FIXED:
        return _FIXED[g.name]
    if g.name in _ROTATION_AXES:
        p = _pauli_word_matrix(_ROTATION_AXES[g.name])
        return np.cos(g.angle / 2) * np.eye(p.shape[0]) - 1j * np.sin(g.angle / 2) * p
    if g.name == "u":
        return g.matrix
    if len(g.targets) > DENSE_SITE_CAP:
        raise CapExceededError(f"pexp dense matrix on {len(g.targets)} targets")
    p = _pauli_word_matrix(g.axes)
    return np.cos(g.angle / 2) * np.eye(p.shape[0]) - 1j * np.sin(g.angle / 2) * p


def _pexp_ladder(g: Gate) -> list[Gate]:
    """CX-ladder decomposition of exp(-i angle P/2) for wide supports."""
    pre: list[Gate] = []
    for t, a in zip(g.targets, g.axes):
        if a == "X":
            pre.append(Gate("h", (t,)))
        elif a == "Y":
            pre.append(Gate("sdg", (t,)))
            pre.append(Gate("h", (t,)))
    chain = [
        Gate("cx", (g.targets[i], g.targets[i + 1])) for i in range(len(g.targets) - 1)
    ]
    post = [gate.inverse() for gate in reversed(pre)]
    return pre + chain + [Gate("rz", (g.targets[-1],), g.angle)] + list(reversed(chain)) + post


@dataclass(frozen=True)
class Circuit:
    """Layered gate list; layers have pairwise-disjoint targets, so the
    layer count is the circuit depth."""

    k: int
    layers: tuple[tuple[Gate, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "layers", tuple(tuple(layer) for layer in self.layers)
        )
        for layer in self.layers:
            used: set[int] = set()
            for g in layer:
                if any(t < 0 or t >= self.k for t in g.targets):
                    raise ValueError(f"gate {g.name} targets outside 0..{self.k - 1}")
                if used & set(g.targets):
                    raise ValueError("overlapping targets within a layer")
                used |= set(g.targets)

    @staticmethod
    def from_gates(k: int, gates, pack: bool = True) -> "Circuit":
        """Greedy left packing: each gate joins the newest layer unless its
        targets collide there."""
        layers: list[list[Gate]] = []
        used: set[int] = set()
        for g in gates:
            if not pack or not layers or (used & set(g.targets)):
                layers.append([g])
                used = set(g.targets)
            else:
                layers[-1].append(g)
                used |= set(g.targets)
        return Circuit(k, tuple(tuple(layer) for layer in layers))

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self):
        for layer in self.layers:
            yield from layer

    def num_gates(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def inverse(self) -> "Circuit":
        layers = tuple(
            tuple(g.inverse() for g in layer) for layer in reversed(self.layers)
        )
        return Circuit(self.k, layers)

    def concat(self, other: "Circuit") -> "Circuit":
        if other.k != self.k:
            raise ValueError("qubit counts differ")
        return Circuit(self.k, self.layers + other.layers)

    def to_text(self) -> str:
        lines = [f"qubits {self.k}"]
        for layer in self.layers:
            for g in layer:
                if g.name == "u":
                    raise ValueError("explicit-matrix gates have no text form")
                parts = [g.name, *map(str, g.targets)]
                if g.angle is not None:
                    parts.append(repr(float(g.angle)))
                if g.axes is not None:
                    parts.append(g.axes)
                lines.append(" ".join(parts))
            lines.append("---")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "Circuit":
        k = None
        layers: list[list[Gate]] = [[]]
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line == "---":
                if layers[-1]:
                    layers.append([])
                continue
            tok = line.split()
            if tok[0] == "qubits":
                if k is not None:
                    raise ParseError(f"line {ln}: repeated qubits header")
                try:
                    k = int(tok[1])
                except (IndexError, ValueError):
                    raise ParseError(f"line {ln}: bad qubits header") from None
                continue
            if k is None:
                raise ParseError(f"line {ln}: missing qubits header")
            try:
                layers[-1].append(_parse_gate(tok))
            except (ValueError, IndexError) as exc:
                raise ParseError(f"line {ln}: {exc}") from None
        if k is None:
            raise ParseError("missing qubits header")
        if not layers[-1]:
            layers.pop()
        return Circuit(k, tuple(tuple(layer) for layer in layers))


def _parse_gate(tok: list[str]) -> Gate:
    name = tok[0]
    if name == "pexp":
        axes = tok[-1]
        angle = float(tok[-2])
        targets = tuple(int(t) for t in tok[1:-2])
        return Gate("pexp", targets, angle, axes)
    if name in _ROTATION_AXES:
        return Gate(name, tuple(int(t) for t in tok[1:-1]), float(tok[-1]))
    return Gate(name, tuple(int(t) for t in tok[1:]))


# ---------------------------------------------------------------------------
# States and application.

@dataclass
class QState:
    k: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.shape[0] != 2**self.k:
            raise ValueError(f"expected 2^{self.k} amplitudes")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm {norm!r} outside tolerance")

    @staticmethod
    def computational(k: int, index: int = 0) -> "QState":
        amps = np.zeros(2**k, dtype=complex)
        amps[index] = 1.0
        return QState(k, amps)

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()


def _apply_gate_array(amps: np.ndarray, g: Gate, k: int) -> np.ndarray:
    if g.name == "pexp" and len(g.targets) > 2:
        for sub in _pexp_ladder(g):
            amps = apply_matrix(amps, gate_matrix(sub), sub.targets, k)
        return amps
    return apply_matrix(amps, gate_matrix(g), g.targets, k)


def apply_circuit(state: QState, circuit: Circuit) -> QState:
    if circuit.k != state.k:
        raise ValueError(f"circuit on {circuit.k} qubits, state on {state.k}")
    amps = state.amplitudes
    for g in circuit.gates():
        amps = _apply_gate_array(amps, g, state.k)
    return QState(state.k, amps)


def dense_unitary(circuit: Circuit) -> np.ndarray:
    if circuit.k > DENSE_UNITARY_CAP:
        raise CapExceededError(f"dense unitary on {circuit.k} qubits")
    dim = 2**circuit.k
    cols = np.eye(dim, dtype=complex)
    for j in range(dim):
        col = cols[:, j].copy()
        for g in circuit.gates():
            col = _apply_gate_array(col, g, circuit.k)
        cols[:, j] = col
    return cols


# ---------------------------------------------------------------------------
# Seeded randomness.

class RngStream:
    """Reproducible random stream with named forks.

    Fork names hash through crc32, so stream identity depends only on the
    root seed and the path of names, never on interpreter state.
    """

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = path
        self._gen: np.random.Generator | None = None

    def fork(self, name: str) -> "RngStream":
        return RngStream(self.seed, self.path + (zlib.crc32(name.encode()),))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.path + (int(index),))

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
            self._gen = np.random.default_rng(ss)
        return self._gen

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path})"


def born_sample(state: QState, shots: int, rng: RngStream) -> dict[int, int]:
    """Computational-basis outcome counts from ``shots`` independent
    measurements, keyed by basis index in ascending order."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    counts = rng.generator.multinomial(shots, state.probabilities())
    return {int(i): int(c) for i, c in enumerate(counts) if c}


# ---------------------------------------------------------------------------
# Trotter circuits: plain propagator and the doubled-register version.

def _term_gate(p: PauliString, theta: float, qubit_of_site) -> Gate:
    targets = []
    axes = []
    for i in range(p.n):
        kind = p.site(i)
        if kind != "I":
            targets.append(qubit_of_site(i))
            axes.append(kind)
    return Gate("pexp", tuple(targets), theta, "".join(axes))


def _hermitian_real_terms(h: PauliSum) -> list[tuple[float, PauliString]]:
    terms = []
    for c, p in h.ordered_items():
        if abs(c.imag) > 1e-12:
            raise ValueError("Hamiltonian coefficients must be real")
        if c.real != 0.0 and p.weight > 0:
            terms.append((c.real, p))
    return terms


def trotter_circuit(h: PauliSum, t: float, steps: int) -> Circuit:
    """First-order Trotter circuit for exp(-iHt), one pexp per term per
    step, terms in the order they were listed."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if t == 0:
        return Circuit(h.n, ())
    dt = t / steps
    terms = _hermitian_real_terms(h)
    gates = []
    for _ in range(steps):
        for c, p in terms:
            gates.append(_term_gate(p, 2 * c * dt, lambda i: i))
    return Circuit.from_gates(h.n, gates)


def super_propagator_circuit(h: PauliSum, t: float, steps: int) -> Circuit:
    """Trotter circuit on the doubled register driving ||O>> toward
    ||U^dag O U>> for U = exp(-iHt).

    Each term contributes exp(+i c dt P) on the left-copy qubits and
    exp(-i c dt P^T) on the right copy, emitted back to back so the pair
    lands in one layer and the depth matches trotter_circuit(h, t, steps).
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if t == 0:
        return Circuit(2 * h.n, ())
    dt = t / steps
    terms = _hermitian_real_terms(h)
    gates = []
    for _ in range(steps):
        for c, p in terms:
            # P^T = (-1)^{#Y} P for Pauli words.
            tsign = -1.0 if p.y_count % 2 else 1.0
            gates.append(_term_gate(p, -2 * c * dt, lambda i: 2 * i))
            gates.append(_term_gate(p, 2 * c * dt * tsign, lambda i: 2 * i + 1))
    return Circuit.from_gates(2 * h.n, gates)


# ---------------------------------------------------------------------------
# Doubled-register evolution without transposed circuits.

def _doubled_gate_pair(g: Gate, dagger: bool) -> tuple[Gate, Gate]:
    """Left/right gate pair for one base gate: (M, conj(M)) forward or
    (M^dag, conj(M^dag)) for the reversed pass."""
    m = gate_matrix(g)
    if dagger:
        m = m.conj().T
    left = Gate("u", tuple(2 * t for t in g.targets), matrix=m)
    right = Gate("u", tuple(2 * t + 1 for t in g.targets), matrix=m.conj())
    return left, right


def _expand_for_doubling(circuit: Circuit):
    for g in circuit.gates():
        if g.name == "pexp" and len(g.targets) > 2:
            yield from _pexp_ladder(g)
        else:
            yield g


def heisenberg_doubled(state: VectorizedState, u: Circuit) -> VectorizedState:
    """Apply U^dag (x) U^T gatewise: ||O>>_C -> ||U^dag O U>>_C."""
    if state.basis != COMPUTATIONAL:
        raise ValueError("doubled evolution acts on the computational rep")
    if u.k != state.n:
        raise ValueError("circuit size does not match site count")
    amps = state.amplitudes
    for g in reversed(list(_expand_for_doubling(u))):
        for doubled in _doubled_gate_pair(g, dagger=True):
            amps = apply_matrix(amps, doubled.matrix, doubled.targets, 2 * state.n)
    return VectorizedState(state.n, COMPUTATIONAL, amps)


def schrodinger_doubled(state: VectorizedState, u: Circuit) -> VectorizedState:
    """Apply U (x) U^* gatewise: ||O>>_C -> ||U O U^dag>>_C."""
    if state.basis != COMPUTATIONAL:
        raise ValueError("doubled evolution acts on the computational rep")
    if u.k != state.n:
        raise ValueError("circuit size does not match site count")
    amps = state.amplitudes
    for g in _expand_for_doubling(u):
        for doubled in _doubled_gate_pair(g, dagger=False):
            amps = apply_matrix(amps, doubled.matrix, doubled.targets, 2 * state.n)
    return VectorizedState(state.n, COMPUTATIONAL, amps)


# ---------------------------------------------------------------------------
# State preparation.

def prepare_vectorized(op: PauliSum, basis: BasisTag) -> QState:
    """Direct amplitude initialization of the encoded operator."""
    if basis.d != 2:
        raise ValueError("qubit register required")
    vec = vectorize(op, basis)
    return QState(2 * vec.n, vec.amplitudes)


def _identity_pairs(n: int) -> np.ndarray:
    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    amps = np.array([1.0], dtype=complex)
    for _ in range(n):
        amps = np.kron(amps, bell)
    return amps


def prepare_choi(u: Circuit) -> QState:
    """||U>>_C: per-site Bell pairs with U applied to the left copies."""
    amps = _identity_pairs(u.k)
    for g in _expand_for_doubling(u):
        lifted = Gate(
            "u", tuple(2 * t for t in g.targets), matrix=gate_matrix(g)
        )
        amps = apply_matrix(amps, lifted.matrix, lifted.targets, 2 * u.k)
    return QState(2 * u.k, amps)


def heisenberg_left_only(op: PauliSum, u: Circuit) -> VectorizedState:
    """||U^dag O U>>_C built with gates on the left copies alone: U forward,
    then the operator (which must be unitary), then U reversed. Avoids any
    transposed gate at the cost of starting from the identity state."""
    n = u.k
    dense = op.to_dense()
    if np.max(np.abs(dense @ dense.conj().T - np.eye(2**n))) > 1e-10:
        raise ValueError("left-only preparation requires a unitary operator")
    amps = _identity_pairs(n)
    for g in _expand_for_doubling(u):
        amps = apply_matrix(amps, gate_matrix(g), tuple(2 * t for t in g.targets), 2 * n)
    targets = tuple(2 * i for i in range(n))
    amps = apply_matrix(amps, dense, targets, 2 * n)
    for g in _expand_for_doubling(u.inverse()):
        amps = apply_matrix(amps, gate_matrix(g), tuple(2 * t for t in g.targets), 2 * n)
    return VectorizedState(n, COMPUTATIONAL, amps)


def interferometric_state(
    op: PauliSum, op2: PauliSum, u: Circuit, u2: Circuit
) -> QState:
    """Ancilla-controlled encoding whose ancilla X expectation reads off
    Re tr(O2(t2) O(t))/2^n with O(t) = U^dag O U and O2(t2) = U2^dag O2 U2.

    Register layout: 2n doubled qubits then one ancilla (qubit 2n). The
    identity branch rides along unchanged because both evolution passes fix
    ||I>>_C, so no controlled time evolution is needed.
    """
    n = u.k
    dense_o = op.to_dense()
    dense_o2 = op2.to_dense()
    eye = np.eye(2**n)
    for name, m in (("first", dense_o), ("second", dense_o2)):
        if np.max(np.abs(m @ m.conj().T - eye)) > 1e-10:
            raise ValueError(f"{name} operator is not unitary")
    k = 2 * n + 1
    amps = np.kron(_identity_pairs(n), np.array([_SQ, _SQ], dtype=complex))

    def controlled(mat: np.ndarray) -> None:
        nonlocal amps
        dim = mat.shape[0]
        block = np.eye(2 * dim, dtype=complex)
        block[dim:, dim:] = mat
        targets = (2 * n,) + tuple(2 * i for i in range(n))
        amps = apply_matrix(amps, block, targets, k)

    controlled(dense_o)
    for g in reversed(list(_expand_for_doubling(u))):
        m = gate_matrix(g).conj().T
        amps = apply_matrix(amps, m, tuple(2 * t for t in g.targets), k)
        amps = apply_matrix(amps, m.conj(), tuple(2 * t + 1 for t in g.targets), k)
    for g in _expand_for_doubling(u2):
        m = gate_matrix(g)
        amps = apply_matrix(amps, m, tuple(2 * t for t in g.targets), k)
        amps = apply_matrix(amps, m.conj(), tuple(2 * t + 1 for t in g.targets), k)
    controlled(dense_o2)
    return QState(k, amps)


# ---------------------------------------------------------------------------
# Channel duals by postselection.

def channel_dual_postselect(
    dilation: Circuit,
    n_env: int,
    state: VectorizedState,
    sites: tuple[int, ...] | None = None,
) -> tuple[VectorizedState, float]:
    """Propagate ||O>>_C through the dual of the channel dilated by
    ``dilation`` and postselect every environment qubit (both copies) on 0.

    dilation acts on len(sites) system qubits followed by n_env fresh
    environment qubits; its qubit q < len(sites) is system site sites[q].
    Returns the renormalized ||E^dag(O)>>_C and the exact projection
    probability tr(E^dag(O)^2) / (tr(O^dag O) 2^{n_env}).
    """
    if state.basis != COMPUTATIONAL:
        raise ValueError("channel duals act on the computational rep")
    n = state.n
    if sites is None:
        sites = tuple(range(dilation.k - n_env))
    n_sys = dilation.k - n_env
    if len(sites) != n_sys:
        raise ValueError("site set does not match dilation width")
    if any(s < 0 or s >= n for s in sites):
        raise ValueError("site outside register")

    total = n + n_env
    amps = np.kron(state.amplitudes, _identity_pairs(n_env))

    def doubled_target(q: int, copy: int) -> int:
        site = sites[q] if q < n_sys else n + (q - n_sys)
        return 2 * site + copy

    for g in reversed(list(_expand_for_doubling(dilation))):
        m = gate_matrix(g).conj().T
        amps = apply_matrix(amps, m, tuple(doubled_target(t, 0) for t in g.targets), 2 * total)
        amps = apply_matrix(
            amps, m.conj(), tuple(doubled_target(t, 1) for t in g.targets), 2 * total
        )
    block = amps.reshape(4**n, 4**n_env)[:, 0]
    prob = float(np.linalg.norm(block) ** 2)
    if prob < 1e-12:
        raise ProjectionFailedError("environment projection lost all amplitude", prob)
    return VectorizedState(n, COMPUTATIONAL, block / np.sqrt(prob)), prob


# ---------------------------------------------------------------------------
# Imaginary-time regulator.

def imaginary_time_apply(
    state: VectorizedState, h: PauliSum, beta: float, side: str
) -> VectorizedState:
    """Multiply the encoded operator by exp(-beta H / 2) on the chosen side
    and renormalize."""
    if state.basis != COMPUTATIONAL:
        raise ValueError("imaginary-time regulator acts on the computational rep")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if beta == 0:
        return state.copy()
    dense = h.to_dense()
    if np.max(np.abs(dense - dense.conj().T)) > 1e-12:
        raise ValueError("Hamiltonian must be hermitian")
    w, v = np.linalg.eigh(dense)
    decay = (v * np.exp(-beta * w / 2)) @ v.conj().T
    if side == "left":
        amps = apply_block(state.amplitudes, state.n, decay, np.eye(2**state.n))
    else:
        amps = apply_block(state.amplitudes, state.n, np.eye(2**state.n), decay.T)
    norm = np.linalg.norm(amps)
    if norm < 1e-300:
        raise ValueError("regulated state vanished")
    return VectorizedState(state.n, COMPUTATIONAL, amps / norm)


def regulated_overlap(
    bra: VectorizedState, ket: VectorizedState, a: PauliSum, b: PauliSum
) -> complex:
    """<bra| (A (x) B^T) |ket> on the doubled register: the regulated
    correlator tr(X1^dag A X2 B) of the encoded operators X1, X2,
    normalized by their HS norms."""
    if bra.basis != COMPUTATIONAL or ket.basis != COMPUTATIONAL:
        raise ValueError("regulated overlaps act on the computational rep")
    moved = apply_block(ket.amplitudes, ket.n, a.to_dense(), b.to_dense().T)
    return complex(np.vdot(bra.amplitudes, moved))


# ---------------------------------------------------------------------------
# Random Clifford circuits for tests and oracle cross-checks.

_CLIFFORD_1Q_WORDS = (
    (), ("h",), ("s",), ("h", "s"), ("s", "h"), ("h", "s", "h"),
    ("s", "s"), ("s", "h", "s"), ("x",), ("z",), ("y",), ("s", "s", "h"),
)


def random_clifford_circuit(n: int, layers: int, rng: RngStream) -> Circuit:
    """Brickwork Clifford scrambler: random 1q Clifford words, then CX or CZ
    bricks with alternating offset."""
    gen = rng.generator
    gates: list[Gate] = []
    for layer in range(layers):
        for q in range(n):
            for name in _CLIFFORD_1Q_WORDS[gen.integers(len(_CLIFFORD_1Q_WORDS))]:
                gates.append(Gate(name, (q,)))
        start = layer % 2
        for q in range(start, n - 1, 2):
            name = "cx" if gen.integers(2) else "cz"
            gates.append(Gate(name, (q, q + 1)))
    return Circuit.from_gates(n, gates)
