"""Sampling-based estimators over vectorized operators.

Every routine draws from exact Born distributions of simulated registers,
threads all randomness through a seeded RngStream, and reports value,
standard error, shot count, and seed together so runs are reproducible
bit-for-bit. Standard errors are sample standard deviations of the
per-shot (or per-repetition) values divided by sqrt(count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EntangledEigenbasisError,
    NonCommutingSetError,
    ParseError,
)
from .pauli import PauliString
from .simulator import (
    Circuit,
    Gate,
    QState,
    RngStream,
    apply_circuit,
    born_sample,
    dense_unitary,
)
from .superop import (
    ALL_SEPARABLE_COMMUTING,
    NOT_COMMUTING,
    DiagonalSuperop,
    OperatorSumSuperop,
    classify_commuting_set,
    common_eigenbasis_circuit,
    conjugate_through,
    lifted_pauli,
)
from .vectorize import (
    COMPUTATIONAL,
    PAULI,
    VectorizedState,
    bell_transform,
    index_pauli,
    pauli_index,
)


@dataclass(frozen=True)
class EmpiricalPauliDist:
    """Observed Pauli-index counts from Born sampling in the Pauli rep."""

    n: int
    counts: dict[int, int]
    shots: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")
        if any(c <= 0 for c in self.counts.values()):
            raise ValueError("counts must be positive")

    def frequencies(self) -> dict[int, float]:
        return {k: c / self.shots for k, c in self.counts.items()}

    def to_csv(self) -> str:
        lines = ["pauli_string,count"]
        for k in sorted(self.counts):
            lines.append(f"{index_pauli(k, self.n).label},{self.counts[k]}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_csv(text: str) -> "EmpiricalPauliDist":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "pauli_string,count":
            raise ParseError("expected 'pauli_string,count' header")
        counts: dict[int, int] = {}
        n = None
        for ln, line in enumerate(lines[1:], start=2):
            try:
                label, cnt = line.split(",")
                p = PauliString.from_label(label)
                c = int(cnt)
            except ValueError as exc:
                raise ParseError(f"line {ln}: {exc}") from None
            if n is None:
                n = p.n
            elif p.n != n:
                raise ParseError(f"line {ln}: inconsistent string length")
            counts[pauli_index(p)] = c
        if n is None:
            raise ParseError("empty distribution")
        return EmpiricalPauliDist(n, counts, sum(counts.values()))


@dataclass(frozen=True)
class EstimatorReport:
    value: float
    stderr: float
    shots: int
    seed: int
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")
        if self.shots <= 0:
            raise ValueError("shots must be positive")


@dataclass(frozen=True)
class ShotPlan:
    counts: tuple[int, ...]
    total: int

    def __post_init__(self):
        if sum(self.counts) != self.total:
            raise ValueError("plan does not sum to its total")


def _mean_stderr(values: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    """Mean and stderr of a sample given distinct values and their counts."""
    total = int(weights.sum())
    mean = float(values @ weights) / total
    if total < 2:
        return mean, 0.0
    var = float(weights @ (values - mean) ** 2) / (total - 1)
    return mean, math.sqrt(max(var, 0.0) / total)


def allocate_shots(weights, total: int) -> ShotPlan:
    """Proportional allocation with largest-remainder rounding; every
    nonzero-weight group gets at least one shot."""
    w = np.asarray(list(weights), dtype=float)
    if w.size == 0 or np.any(w < 0):
        raise ValueError("weights must be nonnegative and nonempty")
    if not np.any(w > 0):
        raise ValueError("at least one weight must be positive")
    nonzero = int((w > 0).sum())
    if total < nonzero:
        raise ValueError(f"need at least {nonzero} shots for nonzero groups")
    raw = total * w / w.sum()
    counts = np.floor(raw).astype(int)
    remainder = raw - counts
    short = total - counts.sum()
    for idx in sorted(range(w.size), key=lambda i: (-remainder[i], i))[:short]:
        counts[idx] += 1
    for idx in np.flatnonzero((w > 0) & (counts == 0)):
        donor = int(np.argmax(counts))
        counts[donor] -= 1
        counts[idx] += 1
    return ShotPlan(tuple(int(c) for c in counts), total)


# ---------------------------------------------------------------------------
# Pauli-distribution sampling and diagonal Monte Carlo.

def sample_pauli_dist(
    state: VectorizedState, shots: int, rng: RngStream
) -> EmpiricalPauliDist:
    """Born-sample the Pauli-rep register; outcomes are Pauli indices."""
    if state.basis != PAULI:
        raise ValueError("sampling the operator distribution requires the Pauli rep")
    reg = QState(2 * state.n, state.amplitudes)
    counts = born_sample(reg, shots, rng)
    return EmpiricalPauliDist(state.n, counts, shots)


def mc_diagonal(
    dist: EmpiricalPauliDist,
    diag: DiagonalSuperop,
    power: int = 1,
    seed: int = 0,
) -> EstimatorReport:
    """Monte Carlo mean of the diagonal eigenvalue (raised to ``power``,
    for higher moments) over an empirical Pauli distribution."""
    if diag.n != dist.n:
        raise ValueError("site count mismatch")
    if power < 1:
        raise ValueError("power must be a positive integer")
    keys = sorted(dist.counts)
    lam = np.array([diag.lam(index_pauli(k, dist.n)) for k in keys], dtype=float)
    if not np.all(np.isfinite(lam)):
        raise ValueError("eigenvalue function is unbounded on the sampled support")
    weights = np.array([dist.counts[k] for k in keys], dtype=float)
    mean, stderr = _mean_stderr(lam**power, weights)
    return EstimatorReport(
        mean,
        stderr,
        dist.shots,
        seed,
        metadata={"observable": diag.label or "diagonal", "power": str(power)},
    )


# ---------------------------------------------------------------------------
# Grouped eigenbasis estimators on the doubled register.

def _eigen_signs(outcomes: np.ndarray, phase: complex, word: PauliString) -> np.ndarray:
    """Eigenvalues of a Z-type word at computational outcomes."""
    if word.x != 0:
        raise ValueError("word is not Z-type")
    if abs(phase.imag) > 1e-12 or abs(abs(phase.real) - 1) > 1e-12:
        raise ValueError("non-real phase on a hermitian word")
    masked = outcomes & _site_bitmask(word)
    parity = np.zeros_like(outcomes)
    for _ in range(masked.dtype.itemsize * 8):
        if not masked.any():
            break
        parity ^= masked & 1
        masked >>= 1
    return phase.real * (1.0 - 2.0 * parity.astype(float))


def _site_bitmask(word: PauliString) -> int:
    """z-mask re-expressed over register bit positions (site i is qubit i,
    qubit k-1 is the least significant index bit)."""
    mask = 0
    for i in range(word.n):
        if (word.z >> i) & 1:
            mask |= 1 << (word.n - 1 - i)
    return mask


def estimate_otoc_group(
    state: VectorizedState,
    pairs: list[tuple[PauliString, PauliString]],
    shots: int,
    rng: RngStream,
) -> list[EstimatorReport]:
    """Estimate every <L_i (x) R_i^*> from one sample set measured in the
    family's common eigenbasis."""
    verdict = classify_commuting_set(pairs)
    if verdict.verdict == NOT_COMMUTING:
        raise NonCommutingSetError(
            "pairs do not lift to a commuting family", witness=verdict.witness
        )
    s = state if state.basis == COMPUTATIONAL else bell_transform(state, "p_to_c")
    lifted = [lifted_pauli(l, r) for l, r in pairs]
    circ = common_eigenbasis_circuit([w for _, w in lifted])
    reg = QState(2 * s.n, s.amplitudes)
    reg = apply_circuit(reg, circ)
    counts = born_sample(reg, shots, rng)
    outcomes = np.array(sorted(counts), dtype=np.int64)
    weights = np.array([counts[int(o)] for o in outcomes], dtype=float)
    reports = []
    for (left, right), (sign, word) in zip(pairs, lifted):
        phase, zword = conjugate_through(circ, sign, word)
        eig = _eigen_signs(outcomes.copy(), phase, zword)
        mean, stderr = _mean_stderr(eig, weights)
        reports.append(
            EstimatorReport(
                mean,
                stderr,
                shots,
                rng.seed,
                metadata={"left": left.label, "right": right.label},
            )
        )
    return reports


def estimate_superop_grouped(
    state: VectorizedState,
    a: OperatorSumSuperop,
    grouping: list[list[int]],
    plan: ShotPlan,
    rng: RngStream,
) -> EstimatorReport:
    """Weighted sum of per-group eigenbasis estimates of an operator-sum
    superoperator expectation. Ungrouped terms must be identity-on-both-sides
    and are added exactly; group errors combine in quadrature."""
    if not a.is_self_adjoint:
        raise ValueError("grouped estimation requires a self-adjoint superoperator")
    if len(plan.counts) != len(grouping):
        raise ValueError("shot plan length does not match grouping")
    seen: set[int] = set()
    for group in grouping:
        for idx in group:
            if idx < 0 or idx >= len(a.terms):
                raise ValueError(f"term index {idx} out of range")
            if idx in seen:
                raise ValueError(f"term index {idx} grouped twice")
            seen.add(idx)
    exact = 0.0
    for idx, (f, left, right) in enumerate(a.terms):
        if idx in seen:
            continue
        if left.weight or right.weight:
            raise ValueError(f"non-identity term {idx} left out of the grouping")
        exact += f.real
    s = state if state.basis == COMPUTATIONAL else bell_transform(state, "p_to_c")
    value = exact
    var = 0.0
    total = 0
    for gi, group in enumerate(grouping):
        if not group:
            continue
        gshots = plan.counts[gi]
        if gshots < 1:
            raise ValueError(f"group {gi} got no shots")
        pairs = [(a.terms[idx][1], a.terms[idx][2]) for idx in group]
        coefs = []
        for idx in group:
            f = a.terms[idx][0]
            if abs(f.imag) > 1e-12:
                raise ValueError("grouped terms need real coefficients")
            coefs.append(f.real)
        verdict = classify_commuting_set(pairs)
        if verdict.verdict == NOT_COMMUTING:
            raise NonCommutingSetError(
                f"group {gi} is not a commuting family", witness=verdict.witness
            )
        lifted = [lifted_pauli(l, r) for l, r in pairs]
        circ = common_eigenbasis_circuit([w for _, w in lifted])
        reg = apply_circuit(QState(2 * s.n, s.amplitudes), circ)
        counts = born_sample(reg, gshots, rng.fork(f"group{gi}"))
        outcomes = np.array(sorted(counts), dtype=np.int64)
        weights = np.array([counts[int(o)] for o in outcomes], dtype=float)
        per_shot = np.zeros(outcomes.shape, dtype=float)
        for coef, (sign, word) in zip(coefs, lifted):
            phase, zword = conjugate_through(circ, sign, word)
            per_shot += coef * _eigen_signs(outcomes.copy(), phase, zword)
        mean, stderr = _mean_stderr(per_shot, weights)
        value += mean
        var += stderr**2
        total += gshots
    if total == 0:
        raise ValueError("grouping contains no sampled terms")
    return EstimatorReport(
        value,
        math.sqrt(var),
        total,
        rng.seed,
        metadata={"groups": str(len(grouping))},
    )


# ---------------------------------------------------------------------------
# Operator stabilizer entropy.

@dataclass(frozen=True)
class OseEstimate:
    purity: EstimatorReport
    entropy: float


def ose_shot_counts(alpha: int, epsilon: float, delta: float) -> tuple[int, int]:
    """(outer sample count M, inner budget N) for additive error epsilon
    with failure probability delta."""
    m = math.ceil(2 * math.log(4 / delta) / epsilon**2)
    n = math.ceil(2 * (alpha - 1) * math.log(4 / delta) / epsilon**2)
    return m, n


def estimate_ose(
    state: VectorizedState,
    alpha: int,
    epsilon: float,
    delta: float,
    rng: RngStream,
) -> OseEstimate:
    """Stabilizer purity of order alpha and the matching entropy.

    Outer loop draws M Pauli-rep samples k_i; each inner repetition is an
    unbiased estimate of p_k^(alpha-1) from alpha-1 independent outcome
    indicators, drawn here as a single Bernoulli with the product success
    probability (identical in distribution). Inner budget splits uniformly,
    m_i = ceil(N/M).
    """
    if alpha < 2:
        raise ValueError("purity order must be an integer >= 2")
    if state.basis != PAULI:
        raise ValueError("stabilizer entropy samples the Pauli rep")
    m, n = ose_shot_counts(alpha, epsilon, delta)
    m_inner = math.ceil(n / m)
    p = np.abs(state.amplitudes) ** 2
    p = p / p.sum()
    outer_rng = rng.fork("outer").generator
    inner_rng = rng.fork("inner").generator
    ks = outer_rng.choice(p.size, size=m, p=p)
    zbars = np.empty(m, dtype=float)
    for i, k in enumerate(ks):
        success = p[k] ** (alpha - 1)
        zbars[i] = inner_rng.binomial(m_inner, success) / m_inner
    mean = float(zbars.mean())
    stderr = float(zbars.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    entropy = math.log(mean) / (1 - alpha) if mean > 0 else math.inf
    report = EstimatorReport(
        mean,
        stderr,
        m * (1 + m_inner * (alpha - 1)),
        rng.seed,
        metadata={
            "alpha": str(alpha),
            "epsilon": repr(epsilon),
            "delta": repr(delta),
            "outer": str(m),
            "inner_per_sample": str(m_inner),
        },
    )
    return OseEstimate(report, entropy)


# ---------------------------------------------------------------------------
# Linearized operator entanglement via the destructive SWAP test.

def estimate_loe2(
    state_a: VectorizedState,
    state_b: VectorizedState,
    partition,
    shots: int,
    rng: RngStream,
) -> EstimatorReport:
    """1 - tr(rho_A^2) from Bell measurements across two copies.

    Each shot measures, for every register qubit of the partition's (left,
    right) pairs, the corresponding copy-1/copy-2 qubit pair in the Bell
    basis; the swap eigenvalue is the product of singlet signs.
    """
    if state_a.n != state_b.n or state_a.basis != state_b.basis:
        raise ValueError("copies must share site count and rep")
    n = state_a.n
    sites = sorted(set(partition))
    if not sites or len(sites) == n:
        raise ValueError("partition must be a nonempty proper subset of sites")
    if sites[0] < 0 or sites[-1] >= n:
        raise ValueError("partition site out of range")
    a = state_a if state_a.basis == COMPUTATIONAL else bell_transform(state_a, "p_to_c")
    b = state_b if state_b.basis == COMPUTATIONAL else bell_transform(state_b, "p_to_c")
    k = 2 * n
    joint = QState(2 * k, np.kron(a.amplitudes, b.amplitudes))
    qubits = [q for s in sites for q in (2 * s, 2 * s + 1)]
    gates = []
    for q in qubits:
        gates.append(Gate("cx", (q, k + q)))
        gates.append(Gate("h", (q,)))
    joint = apply_circuit(joint, Circuit.from_gates(2 * k, gates))
    counts = born_sample(joint, shots, rng)
    outcomes = np.array(sorted(counts), dtype=np.int64)
    weights = np.array([counts[int(o)] for o in outcomes], dtype=float)
    signs = np.ones(outcomes.shape, dtype=float)
    for q in qubits:
        bit_a = (outcomes >> (2 * k - 1 - q)) & 1
        bit_b = (outcomes >> (2 * k - 1 - (k + q))) & 1
        signs *= 1.0 - 2.0 * (bit_a & bit_b).astype(float)
    purity, stderr = _mean_stderr(signs, weights)
    return EstimatorReport(
        1.0 - purity,
        stderr,
        shots,
        rng.seed,
        metadata={"partition": ",".join(str(s) for s in sites), "purity": repr(purity)},
    )


# ---------------------------------------------------------------------------
# Interferometric two-point correlator.

def estimate_corr_interferometric(
    state: QState, shots: int, rng: RngStream
) -> EstimatorReport:
    """Empirical <X> on the ancilla (the register's last qubit)."""
    if state.k % 2 != 1:
        raise ValueError("expected a doubled register plus one ancilla")
    anc = state.k - 1
    meas = apply_circuit(state, Circuit.from_gates(state.k, [Gate("h", (anc,))]))
    counts = born_sample(meas, shots, rng)
    outcomes = np.array(sorted(counts), dtype=np.int64)
    weights = np.array([counts[int(o)] for o in outcomes], dtype=float)
    signs = 1.0 - 2.0 * (outcomes & 1).astype(float)
    mean, stderr = _mean_stderr(signs, weights)
    return EstimatorReport(mean, stderr, shots, rng.seed, metadata={"basis": "x"})


# ---------------------------------------------------------------------------
# n-qubit randomized sampler and its OTOC estimator.

def nqubit_sample(
    v: Circuit,
    u_phi: Circuit,
    u_psi: Circuit,
    shots: int,
    rng: RngStream,
) -> np.ndarray:
    """Pairs (i, j) sampled with probability |<j| U_psi^dag V U_phi |i>|^2
    over uniform i; returned as an int array of shape (shots, 2)."""
    n = v.k
    if u_phi.k != n or u_psi.k != n:
        raise ValueError("circuits act on different qubit counts")
    w = dense_unitary(u_phi.concat(v).concat(u_psi.inverse()))
    probs = np.abs(w) ** 2
    cdfs = np.cumsum(probs, axis=0)
    cdfs /= cdfs[-1]
    gen = rng.generator
    i_arr = gen.integers(0, 2**n, size=shots)
    u_arr = gen.random(shots)
    j_arr = np.empty(shots, dtype=np.int64)
    for idx in range(shots):
        j_arr[idx] = np.searchsorted(cdfs[:, i_arr[idx]], u_arr[idx], side="right")
    return np.stack([i_arr.astype(np.int64), j_arr], axis=1)


def nqubit_otoc(
    op: PauliString,
    u: Circuit,
    pairs: list[tuple[PauliString, PauliString]],
    shots: int,
    rng: RngStream,
) -> list[EstimatorReport]:
    """Correlators of a conjugated Pauli against separable commuting pairs,
    from single-register sampling. Left words must commute pairwise and so
    must right words; families that only commute after lifting are rejected."""
    n = op.n
    if u.k != n:
        raise ValueError("circuit acts on a different qubit count")
    verdict = classify_commuting_set(pairs)
    if verdict.verdict == NOT_COMMUTING:
        raise NonCommutingSetError(
            "pairs do not lift to a commuting family", witness=verdict.witness
        )
    if verdict.verdict != ALL_SEPARABLE_COMMUTING:
        raise EntangledEigenbasisError(
            "family requires an eigenbasis entangling the two copies",
            witness=verdict.witness,
        )
    op_gates = [
        Gate(op.site(i).lower(), (i,)) for i in range(n) if op.site(i) != "I"
    ]
    v = u.concat(Circuit.from_gates(n, op_gates)).concat(u.inverse())
    diag_left = common_eigenbasis_circuit([l for l, _ in pairs])
    diag_right = common_eigenbasis_circuit([r for _, r in pairs])
    samples = nqubit_sample(v, diag_right.inverse(), diag_left.inverse(), shots, rng)
    uniq, cnt = np.unique(samples, axis=0, return_counts=True)
    i_vals = uniq[:, 0]
    j_vals = uniq[:, 1]
    weights = cnt.astype(float)
    reports = []
    for left, right in pairs:
        phl, wl = conjugate_through(diag_left, 1.0, left)
        phr, wr = conjugate_through(diag_right, 1.0, right)
        eig = _eigen_signs(j_vals.copy(), phl, wl) * _eigen_signs(i_vals.copy(), phr, wr)
        mean, stderr = _mean_stderr(eig, weights)
        reports.append(
            EstimatorReport(
                mean,
                stderr,
                shots,
                rng.seed,
                metadata={"left": left.label, "right": right.label},
            )
        )
    return reports
