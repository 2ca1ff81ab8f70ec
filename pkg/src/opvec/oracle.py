"""Exact dense ground truth for every sampled quantity, at small site
counts.

Everything here is brute-force linear algebra on 2^n x 2^n matrices:
conjugation by explicit propagators, trace formulas, reduced density
matrices, thermal weights from hermitian eigendecompositions. None of the
vectorized-register or circuit kernels are used, so agreement with the
estimator stack is a genuine cross-check rather than a tautology.

Entropies use the natural logarithm throughout.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError
from .pauli import SIGMA, PauliString, PauliSum

_ENV_CAP = "OPVEC_MAX_N"


@dataclass(frozen=True)
class OracleConfig:
    max_n: int = 7
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.max_n > 7:
            raise ValueError("oracle is capped at 7 sites")

    @staticmethod
    def default() -> "OracleConfig":
        cap = 7
        env = os.environ.get(_ENV_CAP)
        if env is not None:
            cap = min(cap, int(env))
        return OracleConfig(max_n=cap)


def _dense(op, n: int | None = None) -> np.ndarray:
    if isinstance(op, (PauliString, PauliSum)):
        return op.to_dense()
    mat = np.asarray(op, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("operator must be square")
    return mat


def _sites(mat: np.ndarray) -> int:
    n = int(round(np.log2(mat.shape[0])))
    if 2**n != mat.shape[0]:
        raise ValueError("dimension is not a power of 2")
    return n


def _check_cap(n: int, config: OracleConfig) -> None:
    if n > config.max_n:
        raise CapExceededError(f"n={n} exceeds oracle cap {config.max_n}")


def propagator(h, t: float) -> np.ndarray:
    """e^{-iHt} by hermitian eigendecomposition."""
    hm = _dense(h)
    if np.max(np.abs(hm - hm.conj().T)) > 1e-12:
        raise ValueError("Hamiltonian must be hermitian")
    evals, vecs = np.linalg.eigh(hm)
    return (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T


def _thermal(h: np.ndarray, a: float) -> np.ndarray:
    """e^{-aH}, unnormalized."""
    evals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-a * evals)) @ vecs.conj().T


def exact_heisenberg(op, u, config: OracleConfig | None = None) -> np.ndarray:
    config = config or OracleConfig.default()
    om = _dense(op)
    um = _dense(u)
    if om.shape != um.shape:
        raise ValueError("operator and propagator dims differ")
    _check_cap(_sites(om), config)
    if np.max(np.abs(um @ um.conj().T - np.eye(um.shape[0]))) > config.tolerance:
        raise ValueError("propagator is not unitary within tolerance")
    return um.conj().T @ om @ um


_STACK = np.stack([SIGMA[c] for c in "IXZY"])


def exact_pauli_amplitudes(op, config: OracleConfig | None = None) -> np.ndarray:
    """All 4^n amplitudes tr(Q_k O)/2^n, indexed base-4 with digits
    I,X,Z,Y and site 0 most significant. Computed by site-by-site tensor
    contraction rather than any vectorized-register code."""
    config = config or OracleConfig.default()
    om = _dense(op)
    n = _sites(om)
    _check_cap(n, config)
    cur = om.reshape((2,) * (2 * n))
    for k in range(n):
        # row axis of the next site sits at k, its column axis at n
        cur = np.tensordot(_STACK, cur, axes=([1, 2], [n, k]))
    cur = np.transpose(cur, axes=tuple(reversed(range(n))))
    return cur.reshape(-1) / 2**n


def pauli_probabilities(op, config: OracleConfig | None = None) -> np.ndarray:
    c = exact_pauli_amplitudes(op, config)
    p = np.abs(c) ** 2
    total = p.sum()
    if total <= 0:
        raise ValueError("zero operator has no distribution")
    return p / total


def exact_otoc(op, p, q, config: OracleConfig | None = None) -> float:
    """tr(O^dag P^dag O Q)/2^n for the already-evolved operator O."""
    config = config or OracleConfig.default()
    om = _dense(op)
    n = _sites(om)
    _check_cap(n, config)
    pm = _dense(p, n)
    qm = _dense(q, n)
    val = np.trace(om.conj().T @ pm.conj().T @ om @ qm) / 2**n
    if abs(val.imag) > config.tolerance:
        raise ValueError(f"imaginary residue {val.imag} exceeds tolerance")
    return float(val.real)


def exact_ose(op, alpha: int, config: OracleConfig | None = None) -> tuple[float, float]:
    """(purity of order alpha, entropy) of the Pauli distribution; alpha=1
    gives (1, Shannon entropy)."""
    if alpha < 1:
        raise ValueError("entropy order must be a positive integer")
    p = pauli_probabilities(op, config)
    p = p[p > 0]
    if alpha == 1:
        return 1.0, float(-(p * np.log(p)).sum())
    purity = float((p**alpha).sum())
    return purity, float(np.log(purity) / (1 - alpha))


def exact_loe(
    op, partition, alpha: int = 2, config: OracleConfig | None = None
) -> dict[str, float]:
    """Entanglement of the vectorized operator across a site bipartition.

    The reduced state keeps, for every site in the partition, both qubits
    of its (left, right) pair. Returns the trace power tr(rho_A^alpha),
    the Renyi entropy log(tr)/(1-alpha), and the linearized value 1 - tr.
    """
    if alpha < 2:
        raise ValueError("entanglement order must be an integer >= 2")
    config = config or OracleConfig.default()
    om = _dense(op)
    n = _sites(om)
    _check_cap(n, config)
    sites = sorted(set(partition))
    if not sites or len(sites) == n:
        raise ValueError("partition must be a nonempty proper subset of sites")
    if sites[0] < 0 or sites[-1] >= n:
        raise ValueError("partition site out of range")
    norm = np.sqrt(np.trace(om.conj().T @ om).real)
    if norm == 0:
        raise ValueError("zero operator")
    # interleaved doubled wavefunction: axis 2i = row bit i, 2i+1 = col bit i
    psi = om.reshape((2,) * (2 * n)) / norm
    order = [ax for i in range(n) for ax in (i, n + i)]
    psi = np.transpose(psi, axes=order)
    keep = [ax for s in sites for ax in (2 * s, 2 * s + 1)]
    rest = [ax for ax in range(2 * n) if ax not in keep]
    mat = np.transpose(psi, axes=keep + rest).reshape(4 ** len(sites), -1)
    rho = mat @ mat.conj().T
    evals = np.linalg.eigvalsh(rho)
    evals = np.clip(evals, 0.0, None)
    trace_power = float((evals**alpha).sum())
    return {
        "trace": trace_power,
        "entropy": float(np.log(trace_power) / (1 - alpha)),
        "linear": 1.0 - trace_power,
    }


def _validate_pattern(pattern) -> tuple[float, float, float, float]:
    vals = tuple(float(v) for v in pattern)
    if len(vals) != 4:
        raise ValueError("pattern must list four thermal exponents")
    if sorted(vals) != [0.0, 0.0, 0.5, 0.5]:
        raise ValueError("exactly two exponents must be 1/2 and the rest 0")
    return vals


def exact_regulated(
    op, a, b, h, t: float, beta: float, pattern, config: OracleConfig | None = None
) -> float:
    """Regulated out-of-time-order correlator
    tr(rho^a1 O(t) rho^a2 A rho^a3 O(t) rho^a4 B)/Z with rho = e^{-beta H}
    unnormalized and Z = tr(e^{-beta H}). beta=0 reduces to the plain
    correlator."""
    config = config or OracleConfig.default()
    hm = _dense(h)
    n = _sites(hm)
    _check_cap(n, config)
    a1, a2, a3, a4 = _validate_pattern(pattern)
    om = exact_heisenberg(_dense(op, n), propagator(hm, t), config)
    am = _dense(a, n)
    bm = _dense(b, n)
    z = np.trace(_thermal(hm, beta)).real
    weights = [_thermal(hm, ai * beta) for ai in (a1, a2, a3, a4)]
    val = np.trace(weights[0] @ om @ weights[1] @ am @ weights[2] @ om @ weights[3] @ bm) / z
    if abs(val.imag) > config.tolerance:
        raise ValueError(f"imaginary residue {val.imag} exceeds tolerance")
    return float(val.real)


def exact_wightman(op1, op2, h, beta: float, config: OracleConfig | None = None) -> float:
    """Thermally split two-point function tr(rho^{1/2} O1 rho^{1/2} O2)/Z."""
    config = config or OracleConfig.default()
    hm = _dense(h)
    n = _sites(hm)
    _check_cap(n, config)
    half = _thermal(hm, beta / 2)
    z = np.trace(_thermal(hm, beta)).real
    val = np.trace(half @ _dense(op1, n) @ half @ _dense(op2, n)) / z
    if abs(val.imag) > config.tolerance:
        raise ValueError(f"imaginary residue {val.imag} exceeds tolerance")
    return float(val.real)


def exact_channel_dual(kraus, op, config: OracleConfig | None = None) -> np.ndarray:
    """Adjoint channel sum E_k^dag O E_k after checking Kraus completeness."""
    config = config or OracleConfig.default()
    mats = [np.asarray(e, dtype=complex) for e in kraus]
    if not mats:
        raise ValueError("empty Kraus list")
    dim = mats[0].shape[0]
    _check_cap(_sites(mats[0]), config)
    total = sum(e.conj().T @ e for e in mats)
    if np.max(np.abs(total - np.eye(dim))) > config.tolerance:
        raise ValueError("Kraus operators do not satisfy completeness")
    om = _dense(op)
    if om.shape[0] != dim:
        raise ValueError("operator and Kraus dims differ")
    return sum(e.conj().T @ om @ e for e in mats)
