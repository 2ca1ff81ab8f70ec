"""Superoperators on n-site operators and their matrix representations on
the doubled register.

An operator-sum superoperator A(O) = sum f L O R (Hermitian Pauli words L, R)
acts on computational-rep vectorized states as the matrix
sum f L (x) R^*, with the site-interleaved ordering making each term a
product of per-site 4x4 blocks. Diagonal superoperators are carried as a
real function lambda over Pauli strings plus, when one exists, a sparse
operator-sum coefficient vector f; the two are related by the commutation
sign transform lambda = K f, f = K lambda / 4^n with
K[i,k] = +1 iff strings i and k commute. K is materialized only for n <= 2;
everything else streams rows on demand.

Self-adjointness of an operator-sum superoperator is equivalent to its
merged (L, R) coefficients being real, which in turn is equivalent to a
Hermitian transfer matrix and real expectation values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._linalg import apply_block
from .errors import CapExceededError, NonCommutingSetError, ParseError
from .pauli import DENSE_SITE_CAP, SIGMA, PauliString, PauliSum
from .simulator import Circuit, Gate, gate_matrix
from .vectorize import (
    COMPUTATIONAL,
    PAULI,
    BasisTag,
    VectorizedState,
    bell_transform,
    index_pauli,
    pauli_index,
    transform_matrix,
)

NOT_COMMUTING = "NotCommuting"
ALL_SEPARABLE_COMMUTING = "AllSeparableCommuting"
COMMUTING_ENTANGLED = "CommutingEntangledEigenbasis"


# ---------------------------------------------------------------------------
# Operator-sum representation.

@dataclass(frozen=True)
class OperatorSumSuperop:
    """A(O) = sum_j f_j L_j O R_j over Hermitian Pauli words."""

    n: int
    terms: tuple[tuple[complex, PauliString, PauliString], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "terms",
            tuple((complex(f), l, r) for f, l, r in self.terms),
        )
        for _, l, r in self.terms:
            if l.n != self.n or r.n != self.n:
                raise ValueError("term site count mismatch")

    @staticmethod
    def single(f: complex, left: PauliString, right: PauliString) -> "OperatorSumSuperop":
        return OperatorSumSuperop(left.n, ((f, left, right),))

    @staticmethod
    def identity(n: int) -> "OperatorSumSuperop":
        eye = PauliString.identity(n)
        return OperatorSumSuperop(n, ((1.0, eye, eye),))

    def merged(self) -> dict[tuple[int, int, int, int], complex]:
        """Coefficients keyed by (left.z, left.x, right.z, right.x), summed
        over duplicate (L, R) pairs, exact zeros dropped."""
        out: dict[tuple[int, int, int, int], complex] = {}
        for f, l, r in self.terms:
            key = (l.z, l.x, r.z, r.x)
            out[key] = out.get(key, 0.0) + f
        return {k: v for k, v in out.items() if v != 0}

    @property
    def is_self_adjoint(self) -> bool:
        return all(abs(v.imag) < 1e-12 for v in self.merged().values())

    def adjoint(self) -> "OperatorSumSuperop":
        return OperatorSumSuperop(
            self.n, tuple((np.conj(f), l, r) for f, l, r in self.terms)
        )

    def apply_dense(self, op: np.ndarray) -> np.ndarray:
        out = np.zeros_like(op, dtype=complex)
        for f, l, r in self.terms:
            out += f * (l.to_dense() @ op @ r.to_dense())
        return out

    def apply_vectorized(self, amps: np.ndarray) -> np.ndarray:
        """Action on raw computational-rep amplitudes (norm not preserved)."""
        out = np.zeros_like(amps)
        for f, l, r in self.terms:
            out += f * apply_block(amps, self.n, l.to_dense(), r.to_dense().T)
        return out

    def to_text(self) -> str:
        lines = []
        for f, l, r in self.terms:
            lines.append(f"{f.real!r} {f.imag!r} {l.label} {r.label}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "OperatorSumSuperop":
        terms = []
        n = None
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(f"line {ln}: expected '<re> <im> <left> <right>'")
            try:
                f = complex(float(parts[0]), float(parts[1]))
                left = PauliString.from_label(parts[2])
                right = PauliString.from_label(parts[3])
            except ValueError as exc:
                raise ParseError(f"line {ln}: {exc}") from None
            if n is None:
                n = left.n
            if left.n != n or right.n != n:
                raise ParseError(f"line {ln}: inconsistent string length")
            terms.append((f, left, right))
        if not terms:
            raise ParseError("empty superoperator spec")
        return OperatorSumSuperop(n, tuple(terms))


# ---------------------------------------------------------------------------
# Diagonal superoperators.

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << DENSE_SITE_CAP)], dtype=np.int64)


@dataclass
class DiagonalSuperop:
    """Superoperator diagonal in the Pauli rep: a real eigenvalue function
    over Pauli strings. f_sparse, when present, is the operator-sum
    coefficient vector keyed by (z, x); observables like boundary indicators
    have no sparse f and carry only the closure."""

    n: int
    lam: Callable[[PauliString], float]
    f_sparse: dict[tuple[int, int], float] | None = None
    label: str = ""

    def lam_vector(self) -> np.ndarray:
        if self.n > DENSE_SITE_CAP:
            raise CapExceededError(f"dense eigenvalue table at n={self.n}")
        return np.array(
            [self.lam(index_pauli(i, self.n)) for i in range(4**self.n)], dtype=float
        )

    def to_operator_sum(self) -> OperatorSumSuperop:
        """Diagonal operator-sum form sum_k f_k P_k (.) P_k from the sparse
        coefficients, or from a dense transform when none are stored."""
        if self.f_sparse is not None:
            items = sorted(self.f_sparse.items())
            terms = tuple(
                (f, PauliString(self.n, z, x), PauliString(self.n, z, x))
                for (z, x), f in items
                if f != 0
            )
            return OperatorSumSuperop(self.n, terms)
        f = walsh_hadamard(self.lam_vector(), self.n, "lambda_to_f")
        terms = []
        for i, fv in enumerate(f):
            if abs(fv) > 1e-14:
                p = index_pauli(i, self.n)
                terms.append((fv, p, p))
        return OperatorSumSuperop(self.n, tuple(terms))


def lam_from_sparse_f(f_sparse: dict[tuple[int, int], float], n: int):
    items = sorted(f_sparse.items())

    def lam(p: PauliString) -> float:
        total = 0.0
        for (z, x), f in items:
            q = PauliString(n, z, x)
            total += f if p.commutes(q) else -f
        return total

    return lam


def walsh_hadamard(values: np.ndarray, n: int, direction: str) -> np.ndarray:
    """Commutation-sign transform between operator-sum coefficients f and
    diagonal entries lambda: lambda = K f and f = K lambda / 4^n.

    Rows are streamed; only walsh_matrix materializes K.
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] != 4**n:
        raise ValueError(f"expected 4^{n} entries")
    if direction not in ("f_to_lambda", "lambda_to_f"):
        raise ValueError(f"unknown direction {direction!r}")
    zs = np.empty(4**n, dtype=np.int64)
    xs = np.empty(4**n, dtype=np.int64)
    for i in range(4**n):
        p = index_pauli(i, n)
        zs[i], xs[i] = p.z, p.x
    out = np.empty_like(values)
    for i in range(4**n):
        anti = (_POPCOUNT[zs[i] & xs] + _POPCOUNT[xs[i] & zs]) & 1
        signs = 1.0 - 2.0 * anti
        out[i] = signs @ values
    if direction == "lambda_to_f":
        out /= 4**n
    return out


def walsh_matrix(n: int) -> np.ndarray:
    """Dense K, deliberately capped at n <= 2."""
    if n > 2:
        raise CapExceededError("dense commutation-sign matrix is capped at n=2")
    k = np.empty((4**n, 4**n))
    for i in range(4**n):
        pi = index_pauli(i, n)
        for j in range(4**n):
            k[i, j] = 1.0 if pi.commutes(index_pauli(j, n)) else -1.0
    return k


def size_superop(n: int) -> DiagonalSuperop:
    """Operator-size observable: eigenvalue = Pauli weight; sparse f has
    3n/4 on the identity and -1/4 on each weight-1 string."""
    f: dict[tuple[int, int], float] = {(0, 0): 3 * n / 4}
    for i in range(n):
        f[(1 << i, 0)] = -0.25
        f[(0, 1 << i)] = -0.25
        f[(1 << i, 1 << i)] = -0.25
    return DiagonalSuperop(n, lam=lambda p: float(p.weight), f_sparse=f, label="size")


def builtin_diagonal(spec: str, n: int) -> DiagonalSuperop:
    """Named diagonal observables: ``size``, ``weight_indicator@k``,
    ``rhs_boundary@x`` (1-based boundary position), ``diag_otoc@<label>``."""
    if spec == "size":
        return size_superop(n)
    name, _, arg = spec.partition("@")
    if name == "weight_indicator":
        k = int(arg)
        return DiagonalSuperop(
            n, lam=lambda p: 1.0 if p.weight == k else 0.0, label=spec
        )
    if name == "rhs_boundary":
        x = int(arg)
        return DiagonalSuperop(
            n, lam=lambda p: 1.0 if p.right_boundary == x else 0.0, label=spec
        )
    if name == "diag_otoc":
        q = PauliString.from_label(arg)
        if q.n != n:
            raise ValueError(f"{spec}: string length {q.n} != {n}")
        return DiagonalSuperop(
            n, lam=lambda p: 1.0 if p.commutes(q) else -1.0, label=spec
        )
    raise ValueError(f"unknown diagonal observable {spec!r}")


# ---------------------------------------------------------------------------
# Transfer matrices.

@dataclass
class TransferMatrix:
    basis: BasisTag
    n: int
    matrix: np.ndarray = field(repr=False)

    @property
    def is_hermitian(self) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) < 1e-12)


def _interleaved_term(left: PauliString, right: PauliString) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for i in range(left.n):
        block = np.kron(SIGMA[left.site(i)], SIGMA[right.site(i)].conj())
        out = np.kron(out, block)
    return out


def transfer_matrix(
    a: OperatorSumSuperop | DiagonalSuperop, basis: BasisTag, n: int | None = None
) -> TransferMatrix:
    """Dense matrix of the superoperator on vectorized states of ``basis``."""
    if n is None:
        n = a.n
    if n != a.n:
        raise ValueError("site count mismatch")
    if n > DENSE_SITE_CAP:
        raise CapExceededError(f"dense transfer matrix at n={n}")
    if basis.kind not in ("computational", "pauli") or basis.d != 2:
        raise ValueError("transfer matrices are built in the qubit C or P rep")
    if isinstance(a, DiagonalSuperop):
        m_p = np.diag(a.lam_vector()).astype(complex)
        if basis.kind == "pauli":
            return TransferMatrix(basis, n, m_p)
        r = transform_matrix(n, "c_to_p")
        return TransferMatrix(basis, n, r.conj().T @ m_p @ r)
    m_c = np.zeros((4**n, 4**n), dtype=complex)
    for f, left, right in a.terms:
        m_c += f * _interleaved_term(left, right)
    if basis.kind == "computational":
        return TransferMatrix(basis, n, m_c)
    r = transform_matrix(n, "c_to_p")
    return TransferMatrix(basis, n, r @ m_c @ r.conj().T)


def conjugation_transfer(u: np.ndarray) -> np.ndarray:
    """Transfer matrix, in the computational rep, of O -> U^dag O U:
    the interleaved form of U^dag (x) U^T."""
    u = np.asarray(u, dtype=complex)
    dim = u.shape[0]
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError("dimension is not a power of 2")
    return interleaved_kron(u.conj().T, u.T, n)


def interleaved_kron(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """kron(a, b) reordered from [L-block, R-block] to interleaved qubits."""
    block = np.kron(a, b)
    src = np.zeros(4**n, dtype=np.int64)
    for q in range(2 * n):
        site, copy = divmod(q, 2)
        block_pos = site if copy == 0 else n + site
        bit = ((np.arange(4**n) >> (2 * n - 1 - q)) & 1).astype(np.int64)
        src |= bit << (2 * n - 1 - block_pos)
    return block[np.ix_(src, src)]


def expectation(
    a: OperatorSumSuperop | DiagonalSuperop, state: VectorizedState, k: int = 1
) -> float:
    """k-th moment of the superobservable over the encoded operator."""
    if k < 1:
        raise ValueError("moment order must be >= 1")
    if isinstance(a, DiagonalSuperop):
        s = state if state.basis == PAULI else bell_transform(state, "c_to_p")
        if s.n != a.n:
            raise ValueError("site count mismatch")
        lam = a.lam_vector()
        return float(np.abs(s.amplitudes) ** 2 @ lam**k)
    if not a.is_self_adjoint:
        raise ValueError("expectation values require a self-adjoint superoperator")
    s = state if state.basis == COMPUTATIONAL else bell_transform(state, "p_to_c")
    if s.n != a.n:
        raise ValueError("site count mismatch")
    cur = s.amplitudes
    for _ in range(k):
        cur = a.apply_vectorized(cur)
    val = complex(np.vdot(s.amplitudes, cur))
    if abs(val.imag) > 1e-10:
        raise ValueError(f"imaginary residue {val.imag} exceeds tolerance")
    return float(val.real)


# ---------------------------------------------------------------------------
# Commutation structure of superoperator families.

@dataclass(frozen=True)
class CommutationClass:
    verdict: str
    witness: tuple[int, int] | None = None


def classify_commuting_set(
    pairs: list[tuple[PauliString, PauliString]]
) -> CommutationClass:
    """Classify {L_i (.) R_i} by the pairwise structure of the lifted
    operators L_i (x) R_i^*: joint commutation requires the left pair and
    right pair to commute or anticommute together; an anticommuting pair
    forces the common eigenbasis to entangle the two copies."""
    if not pairs:
        raise ValueError("empty set")
    anti_pair = None
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            pc = pairs[i][0].commutes(pairs[j][0])
            qc = pairs[i][1].commutes(pairs[j][1])
            if pc != qc:
                return CommutationClass(NOT_COMMUTING, (i, j))
            if not pc and anti_pair is None:
                anti_pair = (i, j)
    if anti_pair is not None:
        return CommutationClass(COMMUTING_ENTANGLED, anti_pair)
    return CommutationClass(ALL_SEPARABLE_COMMUTING, None)


def all_pairs_anticommute(
    pairs: list[tuple[PauliString, PauliString]]
) -> tuple[bool, tuple[int, int] | None]:
    """True when every distinct lifted pair anticommutes: exactly one of
    the left/right factor pairs anticommutes, for every (i, j)."""
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            if pairs[i][0].commutes(pairs[j][0]) == pairs[i][1].commutes(pairs[j][1]):
                return False, (i, j)
    return True, None


def lifted_pauli(left: PauliString, right: PauliString) -> tuple[int, PauliString]:
    """L (x) R^* as (sign, word) on the interleaved doubled register;
    conjugation flips the sign once per Y in R."""
    if left.n != right.n:
        raise ValueError("site count mismatch")
    z = x = 0
    for i in range(left.n):
        z |= ((left.z >> i) & 1) << (2 * i)
        x |= ((left.x >> i) & 1) << (2 * i)
        z |= ((right.z >> i) & 1) << (2 * i + 1)
        x |= ((right.x >> i) & 1) << (2 * i + 1)
    sign = -1 if right.y_count % 2 else 1
    return sign, PauliString(2 * left.n, z, x)


# ---------------------------------------------------------------------------
# Clifford conjugation of Pauli words.

_PHASES = (1, 1j, -1, -1j)


def _local_candidates(m: int):
    for idx in range(4**m):
        kinds = []
        rem = idx
        for _ in range(m):
            kinds.append("IXZY"[rem % 4])
            rem //= 4
        yield tuple(reversed(kinds))


def _with_sites(p: PauliString, targets: tuple[int, ...], kinds) -> PauliString:
    z, x = p.z, p.x
    for t, kind in zip(targets, kinds):
        z &= ~(1 << t)
        x &= ~(1 << t)
        if kind in ("Z", "Y"):
            z |= 1 << t
        if kind in ("X", "Y"):
            x |= 1 << t
    return PauliString(p.n, z, x)


def conjugate_pauli(gate: Gate, phase: complex, p: PauliString) -> tuple[complex, PauliString]:
    """phase * p -> C (phase * p) C^dag for a single Clifford gate, by dense
    conjugation of the local factor and exact re-identification."""
    m = len(gate.targets)
    fac = np.eye(1, dtype=complex)
    for t in gate.targets:
        fac = np.kron(fac, SIGMA[p.site(t)])
    g = gate_matrix(gate)
    out = g @ fac @ g.conj().T
    for kinds in _local_candidates(m):
        cand = np.eye(1, dtype=complex)
        for kind in kinds:
            cand = np.kron(cand, SIGMA[kind])
        coef = np.trace(cand.conj().T @ out) / 2**m
        if abs(coef) > 0.5:
            snapped = min(_PHASES, key=lambda ph: abs(ph - coef))
            if abs(snapped - coef) > 1e-9:
                raise ValueError(f"gate {gate.name} is not Clifford on Pauli words")
            return phase * snapped, _with_sites(p, gate.targets, kinds)
    raise ValueError(f"gate {gate.name} is not Clifford on Pauli words")


def conjugate_through(
    circuit: Circuit, phase: complex, p: PauliString
) -> tuple[complex, PauliString]:
    for g in circuit.gates():
        phase, p = conjugate_pauli(g, phase, p)
    return phase, p


# ---------------------------------------------------------------------------
# Common eigenbasis synthesis.

def _independent_subset(strings: list[PauliString]) -> list[PauliString]:
    """Maximal independent subset under GF(2) symplectic representation,
    scanning in input order."""
    k = strings[0].n
    basis: list[int] = []
    out = []
    for s in strings:
        vec = s.z | (s.x << k)
        cur = vec
        for b in basis:
            cur = min(cur, cur ^ b)
        if cur:
            basis.append(cur)
            basis.sort(reverse=True)
            out.append(s)
    return out


def _lowest_site(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _eliminate(strings: list[PauliString], qubit_of) -> list[Gate]:
    """Clifford gate sequence conjugating every string to Z-type. One pass
    per independent generator: S to clear a Y pivot, CX off the pivot to
    clear other X support, S again if the pivot regrew a Y, CZ to clear Z
    support, then H. Earlier generators survive because later pivots avoid
    their qubits and all later gates fix single-site Z's there."""
    gens = [(1 + 0j, s) for s in _independent_subset(strings)]
    gates: list[Gate] = []

    def emit(name: str, *targets: int) -> None:
        g = Gate(name, tuple(qubit_of(t) for t in targets))
        gates.append(g)
        local = Gate(name, targets)
        for idx, (ph, s) in enumerate(gens):
            gens[idx] = conjugate_pauli(local, ph, s)

    for gi in range(len(gens)):
        if gens[gi][1].x == 0:
            continue
        q = _lowest_site(gens[gi][1].x)
        if (gens[gi][1].z >> q) & 1:
            emit("s", q)
        rest = gens[gi][1].x & ~(1 << q)
        while rest:
            r = _lowest_site(rest)
            emit("cx", q, r)
            rest &= rest - 1
        if (gens[gi][1].z >> q) & 1:
            emit("s", q)
        zrest = gens[gi][1].z & ~(1 << q)
        while zrest:
            r = _lowest_site(zrest)
            emit("cz", q, r)
            zrest &= zrest - 1
        emit("h", q)
        assert gens[gi][1].x == 0
    return gates


def _is_mirrored(s: PauliString) -> bool:
    n = s.n // 2
    for i in range(n):
        if s.site(2 * i) != s.site(2 * i + 1):
            return False
    return True


def _restrict(s: PauliString, offset: int) -> PauliString:
    n = s.n // 2
    z = x = 0
    for i in range(n):
        z |= ((s.z >> (2 * i + offset)) & 1) << i
        x |= ((s.x >> (2 * i + offset)) & 1) << i
    return PauliString(n, z, x)


def common_eigenbasis_circuit(strings: list[PauliString]) -> Circuit:
    """Clifford circuit conjugating every string of a commuting family on a
    doubled register to Z-type.

    Mirrored families (every string identical on the two copies) get the
    per-site Bell layer; families whose copy restrictions commute separately
    get independent per-copy eliminations; anything else gets a full
    symplectic elimination.
    """
    if not strings:
        raise ValueError("empty set")
    k = strings[0].n
    if any(s.n != k for s in strings):
        raise ValueError("inconsistent string length")
    for i in range(len(strings)):
        for j in range(i + 1, len(strings)):
            if not strings[i].commutes(strings[j]):
                raise NonCommutingSetError(
                    f"strings {i} and {j} do not commute", witness=(i, j)
                )
    if k % 2 == 0:
        n = k // 2
        if all(_is_mirrored(s) for s in strings):
            gates = []
            for i in range(n):
                gates.append(Gate("cx", (2 * i, 2 * i + 1)))
                gates.append(Gate("h", (2 * i,)))
            return Circuit.from_gates(k, gates)
        lefts = [_restrict(s, 0) for s in strings]
        rights = [_restrict(s, 1) for s in strings]
        if _all_commuting(lefts) and _all_commuting(rights):
            gates = _eliminate(lefts, lambda t: 2 * t)
            gates += _eliminate(rights, lambda t: 2 * t + 1)
            return Circuit.from_gates(k, gates)
    return Circuit.from_gates(k, _eliminate(strings, lambda t: t))


def _all_commuting(strings: list[PauliString]) -> bool:
    return all(
        strings[i].commutes(strings[j])
        for i in range(len(strings))
        for j in range(i + 1, len(strings))
    )
