"""Batch experiment runner.

Each subcommand reads one JSON config, runs a single seeded experiment, and
writes its artifacts (`report.json`, plus `dist.csv`, `state.bin`, or
`schedule.json` where the task produces them) into the output directory.
All randomness flows from the config seed through named stream forks, and
reports are serialized with sorted keys, so identical config and seed give
byte-identical outputs.

Exit codes: 0 success, 1 runtime failure, 2 config or parse error,
3 cap violation, 4 group spec without a usable common eigenbasis.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import estimators as est
from . import lattice2d
from . import oracle
from .errors import (
    CapExceededError,
    EntangledEigenbasisError,
    NonCommutingSetError,
    ParseError,
    ProjectionFailedError,
)
from .pauli import DENSE_SITE_CAP, PauliString, PauliSum
from .simulator import (
    Circuit,
    Gate,
    QState,
    RngStream,
    apply_circuit,
    channel_dual_postselect,
    dense_unitary,
    heisenberg_doubled,
    interferometric_state,
    prepare_vectorized,
    super_propagator_circuit,
    trotter_circuit,
)
from .superop import (
    DiagonalSuperop,
    OperatorSumSuperop,
    builtin_diagonal,
    expectation,
)
from .vectorize import (
    COMPUTATIONAL,
    PAULI,
    VectorizedState,
    bell_transform,
    index_pauli,
    save_state,
    vectorize,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_CAP = 3
EXIT_NONCOMMUTING = 4

TASKS = (
    "evolve",
    "sample",
    "otoc",
    "superop",
    "ose",
    "loe",
    "corr",
    "choi2pc",
    "nqubit",
    "compile2d",
)

_DEFAULTS = {
    "seed": 0,
    "shots": 4096,
    "with_oracle": False,
    "out": ".",
    "t": 0.0,
    "steps": 64,
    "basis": "pauli",
    "alpha": 2,
    "epsilon": 0.1,
    "delta": 0.05,
    "power": 1,
    "dt": 0.05,
    "h_x": 0.0,
    "h_z": 0.0,
    "J": 0.0,
    "p": 0.0,
    "site": 0,
}


# ---------------------------------------------------------------------------
# Config loading and validation.

def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def _load_pauli_sum(spec, base: Path, errors: list[str], field: str) -> PauliSum | None:
    """Accepts a bare Pauli label, {"text": ...}, or {"file": ...}."""
    try:
        if isinstance(spec, str):
            return PauliSum.from_terms([(1.0, PauliString.from_label(spec))])
        if isinstance(spec, dict) and isinstance(spec.get("text"), str):
            return PauliSum.from_text(spec["text"])
        if isinstance(spec, dict) and isinstance(spec.get("file"), str):
            return PauliSum.from_text(_resolve(base, spec["file"]).read_text())
    except (ParseError, ValueError, OSError) as exc:
        errors.append(f"{field}: {exc}")
        return None
    errors.append(f"{field}: expected a Pauli label, {{'text': ...}}, or {{'file': ...}}")
    return None


def _load_circuit(spec, base: Path, errors: list[str]) -> Circuit | None:
    """Circuit JSON: {"qubits": k, "gates": [{"name", "targets", "angle"?, "axes"?}]}."""
    try:
        if isinstance(spec, dict) and isinstance(spec.get("file"), str):
            doc = json.loads(_resolve(base, spec["file"]).read_text())
        elif isinstance(spec, dict) and "gates" in spec:
            doc = spec
        else:
            errors.append("circuit: expected {'file': ...} or an inline gate list")
            return None
        gates = [
            Gate(g["name"], tuple(g["targets"]), g.get("angle"), g.get("axes"))
            for g in doc["gates"]
        ]
        return Circuit.from_gates(int(doc["qubits"]), gates)
    except (KeyError, TypeError, ValueError, OSError, json.JSONDecodeError) as exc:
        errors.append(f"circuit: {exc}")
        return None


def _pairs(spec, n: int, errors: list[str]) -> list[tuple[PauliString, PauliString]]:
    out = []
    if not isinstance(spec, list) or not spec:
        errors.append("pairs: expected a nonempty list of [left, right] labels")
        return out
    for i, entry in enumerate(spec):
        try:
            left, right = entry
            lp = PauliString.from_label(left)
            rp = PauliString.from_label(right)
        except (ParseError, TypeError, ValueError) as exc:
            errors.append(f"pairs[{i}]: {exc}")
            continue
        if lp.n != n or rp.n != n:
            errors.append(f"pairs[{i}]: length must match the {n}-site operator")
            continue
        out.append((lp, rp))
    return out


def validate_config(path) -> tuple[dict | None, list[str]]:
    """Load, default-fill, and fully check one experiment config.

    Errors are aggregated; the returned config is None whenever any were
    found. File references are resolved relative to the config file."""
    errors: list[str] = []
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return None, [f"config: {exc}"]
    if not isinstance(raw, dict):
        return None, ["config: top level must be a JSON object"]

    cfg = dict(raw)
    cfg["_dir"] = path.parent
    task = cfg.get("task")
    if task not in TASKS:
        errors.append(f"task: expected one of {', '.join(TASKS)}; got {task!r}")
        return None, errors

    for key, default in _DEFAULTS.items():
        cfg.setdefault(key, default)

    for key, kind in (("seed", int), ("shots", int), ("steps", int),
                      ("alpha", int), ("power", int)):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            errors.append(f"{key}: expected an integer")
            cfg[key] = kind(_DEFAULTS[key])
    for key in ("t", "epsilon", "delta", "dt", "h_x", "h_z", "J", "p"):
        if not isinstance(cfg[key], (int, float)) or isinstance(cfg[key], bool):
            errors.append(f"{key}: expected a number")
            cfg[key] = float(_DEFAULTS[key])
    if cfg["shots"] < 1:
        errors.append("shots: must be >= 1")
    if cfg["steps"] < 1:
        errors.append("steps: must be >= 1")
    if not isinstance(cfg["with_oracle"], bool):
        errors.append("with_oracle: expected a boolean")
        cfg["with_oracle"] = False
    if cfg["basis"] not in ("pauli", "computational"):
        errors.append("basis: expected 'pauli' or 'computational'")
        cfg["basis"] = "pauli"

    op = None
    if task != "compile2d":
        if "operator" not in raw:
            errors.append("operator: required")
        else:
            op = _load_pauli_sum(cfg["operator"], cfg["_dir"], errors, "operator")
            cfg["_operator"] = op

    if "hamiltonian" in raw and "circuit" in raw:
        errors.append("hamiltonian and circuit are mutually exclusive")
    if "hamiltonian" in raw:
        cfg["_hamiltonian"] = _load_pauli_sum(
            cfg["hamiltonian"], cfg["_dir"], errors, "hamiltonian"
        )
    if "circuit" in raw:
        cfg["_circuit"] = _load_circuit(cfg["circuit"], cfg["_dir"], errors)

    if op is not None:
        for built in ("_hamiltonian", "_circuit"):
            other = cfg.get(built)
            if other is not None:
                width = other.n if built == "_hamiltonian" else other.k
                if width != op.n:
                    errors.append(f"{built[1:]}: acts on {width} sites, operator on {op.n}")

    if task in ("otoc", "nqubit"):
        if "pairs" not in raw:
            errors.append("pairs: required")
        elif op is not None:
            cfg["_pairs"] = _pairs(cfg["pairs"], op.n, errors)

    if task == "superop":
        spec = raw.get("superop")
        if not isinstance(spec, (str, dict)):
            errors.append("superop: required (builtin name, {'text': ...}, or {'file': ...})")
        elif op is not None:
            try:
                if isinstance(spec, str):
                    cfg["_superop"] = builtin_diagonal(spec, op.n)
                elif isinstance(spec.get("text"), str):
                    cfg["_superop"] = OperatorSumSuperop.from_text(spec["text"])
                elif isinstance(spec.get("file"), str):
                    cfg["_superop"] = OperatorSumSuperop.from_text(
                        _resolve(cfg["_dir"], spec["file"]).read_text()
                    )
                else:
                    errors.append("superop: expected builtin name, {'text': ...}, or {'file': ...}")
            except (ParseError, ValueError, OSError) as exc:
                errors.append(f"superop: {exc}")
        grouping = raw.get("grouping")
        if grouping is not None:
            if not (isinstance(grouping, list)
                    and all(isinstance(g, list)
                            and all(isinstance(i, int) for i in g) for g in grouping)):
                errors.append("grouping: expected a list of integer lists")

    if task == "ose":
        if cfg["alpha"] < 2:
            errors.append("alpha: purity order must be an integer >= 2")
        if not cfg["epsilon"] > 0:
            errors.append("epsilon: must be positive")
        if not 0 < cfg["delta"] < 1:
            errors.append("delta: must lie in (0, 1)")

    if task == "loe":
        partition = raw.get("partition")
        if not (isinstance(partition, list) and partition
                and all(isinstance(s, int) for s in partition)):
            errors.append("partition: expected a nonempty list of site indices")
        elif op is not None:
            sites = sorted(set(partition))
            if sites[0] < 0 or sites[-1] >= op.n:
                errors.append(f"partition: sites must lie in 0..{op.n - 1}")
            elif len(sites) == op.n:
                errors.append("partition: must be a proper subset of the sites")

    if task == "corr" and "operator_b" in raw:
        cfg["_operator_b"] = _load_pauli_sum(
            cfg["operator_b"], cfg["_dir"], errors, "operator_b"
        )

    if task == "nqubit" and op is not None:
        items = list(op.ordered_items())
        if len(items) != 1 or abs(items[0][0] - 1.0) > 1e-12:
            errors.append("operator: nqubit estimation requires a single unit-coefficient Pauli")

    if task == "compile2d":
        lattice = raw.get("lattice")
        if not (isinstance(lattice, dict)
                and isinstance(lattice.get("rows"), int)
                and isinstance(lattice.get("cols"), int)):
            errors.append("lattice: expected {'rows': int, 'cols': int}")
        elif lattice["rows"] < 1 or lattice["cols"] < 1:
            errors.append("lattice: dimensions must be positive")

    return (None, errors) if errors else (cfg, errors)


# ---------------------------------------------------------------------------
# Shared task plumbing.

def _require_cap(n: int) -> None:
    if n > DENSE_SITE_CAP:
        raise CapExceededError(f"{n} sites exceed the dense cap of {DENSE_SITE_CAP}")


def _evolved(cfg: dict, op: PauliSum) -> VectorizedState:
    """Encoded operator after the configured evolution, computational rep."""
    _require_cap(op.n)
    state = vectorize(op, COMPUTATIONAL)
    circuit = cfg.get("_circuit")
    h = cfg.get("_hamiltonian")
    if circuit is not None:
        return heisenberg_doubled(state, circuit)
    if h is not None and cfg["t"] != 0.0:
        reg = QState(2 * op.n, state.amplitudes)
        reg = apply_circuit(reg, super_propagator_circuit(h, cfg["t"], cfg["steps"]))
        return VectorizedState(op.n, COMPUTATIONAL, reg.amplitudes)
    return state


def _oracle_evolved(cfg: dict, op: PauliSum) -> np.ndarray:
    """Exactly evolved dense operator, normalized to unit amplitude vector."""
    limit = oracle.OracleConfig.default().max_n
    if op.n > limit:
        raise CapExceededError(f"oracle comparison capped at {limit} sites")
    dense = op.to_dense()
    circuit = cfg.get("_circuit")
    h = cfg.get("_hamiltonian")
    if circuit is not None:
        u = dense_unitary(circuit)
        dense = u.conj().T @ dense @ u
    elif h is not None and cfg["t"] != 0.0:
        u = oracle.propagator(h, cfg["t"])
        dense = u.conj().T @ dense @ u
    norm = np.linalg.norm(dense)
    return dense * math.sqrt(2**op.n) / norm


def _report_entry(rep: est.EstimatorReport, **extra) -> dict:
    entry = {
        "value": float(rep.value),
        "stderr": float(rep.stderr),
        "shots": int(rep.shots),
    }
    entry.update({k: _jsonable(v) for k, v in rep.metadata.items()})
    entry.update(extra)
    return entry


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, PauliString):
        return value.label
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_report(out: Path, doc: dict) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    (out / "report.json").write_text(text)


def _base_doc(cfg: dict, value: float, stderr: float, shots: int, params: dict) -> dict:
    return {
        "task": cfg["task"],
        "seed": cfg["seed"],
        "value": float(value),
        "stderr": float(stderr),
        "shots": int(shots),
        "params": {k: _jsonable(v) for k, v in params.items()},
    }


def _delta_block(value: float, stderr: float, exact: float) -> dict:
    block = {"value": float(exact), "abs_delta": abs(float(value) - float(exact))}
    if stderr > 0:
        block["delta_over_stderr"] = block["abs_delta"] / float(stderr)
    return block


# ---------------------------------------------------------------------------
# Task handlers. Each writes its artifacts and returns nothing.

def _task_evolve(cfg: dict, out: Path, rng: RngStream) -> None:
    op = cfg["_operator"]
    state = _evolved(cfg, op)
    if cfg["basis"] == "pauli":
        state = bell_transform(state, "c_to_p")
    save_state(state, out / "state.bin")
    initial = vectorize(op, state.basis)
    value = float(np.vdot(initial.amplitudes, state.amplitudes).real)
    doc = _base_doc(cfg, value, 0.0, 1, {
        "n": op.n, "t": cfg["t"], "steps": cfg["steps"], "basis": cfg["basis"],
        "label": "autocorrelation",
    })
    if cfg["with_oracle"]:
        exact_state = vectorize(_oracle_evolved(cfg, op), state.basis)
        exact = float(np.vdot(initial.amplitudes, exact_state.amplitudes).real)
        doc["oracle"] = _delta_block(value, 0.0, exact)
    _write_report(out, doc)


def _task_sample(cfg: dict, out: Path, rng: RngStream) -> None:
    op = cfg["_operator"]
    state = bell_transform(_evolved(cfg, op), "c_to_p")
    dist = est.sample_pauli_dist(state, cfg["shots"], rng.fork("sample"))
    (out / "dist.csv").write_text(dist.to_csv())
    mode = max(sorted(dist.counts), key=lambda k: dist.counts[k])
    p_hat = dist.counts[mode] / dist.shots
    stderr = math.sqrt(max(p_hat * (1 - p_hat), 0.0) / dist.shots)
    doc = _base_doc(cfg, p_hat, stderr, dist.shots, {
        "n": op.n, "t": cfg["t"], "steps": cfg["steps"],
        "mode": index_pauli(mode, op.n).label,
        "distinct": len(dist.counts),
        "label": "mode_frequency",
    })
    if cfg["with_oracle"]:
        exact = oracle.pauli_probabilities(_oracle_evolved(cfg, op))
        empirical = np.zeros_like(exact)
        for k, c in dist.counts.items():
            empirical[k] = c / dist.shots
        doc["oracle"] = {"tv_distance": float(0.5 * np.abs(empirical - exact).sum())}
    _write_report(out, doc)


def _task_otoc(cfg: dict, out: Path, rng: RngStream) -> None:
    op = cfg["_operator"]
    pairs = cfg["_pairs"]
    state = _evolved(cfg, op)
    reports = est.estimate_otoc_group(state, pairs, cfg["shots"], rng.fork("otoc"))
    exact_dense = _oracle_evolved(cfg, op) if cfg["with_oracle"] else None
    entries = []
    for (left, right), rep in zip(pairs, reports):
        entry = _report_entry(rep)
        if exact_dense is not None:
            exact = oracle.exact_otoc(exact_dense, left, right)
            entry["oracle"] = _delta_block(rep.value, rep.stderr, exact)
        entries.append(entry)
    doc = _base_doc(cfg, reports[0].value, reports[0].stderr, reports[0].shots, {
        "n": op.n, "t": cfg["t"], "steps": cfg["steps"], "label": "otoc",
    })
    doc["reports"] = entries
    _write_report(out, doc)


def _task_superop(cfg: dict, out: Path, rng: RngStream) -> None:
    op = cfg["_operator"]
    a = cfg["_superop"]
    state = _evolved(cfg, op)
    params = {"n": op.n, "t": cfg["t"], "steps": cfg["steps"], "label": "superop"}
    if isinstance(a, DiagonalSuperop):
        dist = est.sample_pauli_dist(
            bell_transform(state, "c_to_p"), cfg["shots"], rng.fork("superop")
        )
        (out / "dist.csv").write_text(dist.to_csv())
        rep = est.mc_diagonal(dist, a, power=cfg["power"], seed=cfg["seed"])
        params["power"] = cfg["power"]
    else:
        grouping = cfg.get("grouping")
        if grouping is None:
            grouping = [
                [i] for i, (_, left, right) in enumerate(a.terms)
                if left.weight or right.weight
            ]
        weights = [
            sum(abs(a.terms[i][0]) for i in group) if group else 0.0
            for group in grouping
        ]
        plan = est.allocate_shots(weights, cfg["shots"])
        rep = est.estimate_superop_grouped(state, a, grouping, plan, rng.fork("superop"))
        params["groups"] = len(grouping)
    doc = _base_doc(cfg, rep.value, rep.stderr, rep.shots, params)
    if cfg["with_oracle"]:
        exact_state = vectorize(
            _oracle_evolved(cfg, op),
            PAULI if isinstance(a, DiagonalSuperop) else COMPUTATIONAL,
        )
        exact = expectation(a, exact_state, k=cfg["power"])
        doc["oracle"] = _delta_block(rep.value, rep.stderr, exact)
    _write_report(out, doc)


def _task_ose(cfg: dict, out: Path, rng: RngStream) -> None:
    op = cfg["_operator"]
    state = bell_transform(_evolved(cfg, op), "c_to_p")
    result = est.estimate_ose(
        state, cfg["alpha"], cfg["epsilon"], cfg["delta"], rng.fork("ose")
    )
    rep = result.purity
    doc = _base_doc(cfg, rep.value, rep.stderr, rep.shots, {
        "n": op.n, "t": cfg["t"], "steps": cfg["steps"],
        "alpha": cfg["alpha"], "epsilon": cfg["epsilon"], "delta": cfg["delta"],
        "entropy": result.entropy if math.isfinite(result.entropy) else None,
        "label": "stabilizer_purity",
    })
    if cfg["with_oracle"]:
        purity, _entropy = oracle.exact_ose(_oracle_evolved(cfg, op), cfg["alpha"])
        doc["oracle"] = _delta_block(rep.value, rep.stderr, purity)
    _write_report(out, doc)


def _task_loe(cfg: dict, out: Path, rng: RngStream) -> None:
    op = cfg["_operator"]
    partition = sorted(set(cfg["partition"]))
    state = _evolved(cfg, op)
    rep = est.estimate_loe2(state, state, partition, cfg["shots"], rng.fork("loe"))
    doc = _base_doc(cfg, rep.value, rep.stderr, rep.shots, {
        "n": op.n, "t": cfg["t"], "steps": cfg["steps"],
        "partition": partition, "label": "linear_operator_entanglement",
    })
    if cfg["with_oracle"]:
        exact = oracle.exact_loe(_oracle_evolved(cfg, op), partition)
        doc["oracle"] = _delta_block(rep.value, rep.stderr, exact["linear"])
    _write_report(out, doc)


def _task_corr(cfg: dict, out: Path, rng: RngStream) -> None:
    op = cfg["_operator"]
    op_b = cfg.get("_operator_b", op)
    h = cfg.get("_hamiltonian")
    circuit = cfg.get("_circuit")
    if circuit is not None:
        u = u2 = circuit
    elif h is not None and cfg["t"] != 0.0:
        u = u2 = trotter_circuit(h, cfg["t"], cfg["steps"])
    else:
        u = u2 = Circuit(op.n)
    _require_cap(op.n)
    state = interferometric_state(op, op_b, u, u2)
    rep = est.estimate_corr_interferometric(state, cfg["shots"], rng.fork("corr"))
    doc = _base_doc(cfg, rep.value, rep.stderr, rep.shots, {
        "n": op.n, "t": cfg["t"], "steps": cfg["steps"], "label": "two_point",
    })
    if cfg["with_oracle"]:
        # Unitary operators keep unit HS norm, so the scaled dense forms
        # returned here are the evolved operators themselves.
        d1 = _oracle_evolved(cfg, op)
        d2 = _oracle_evolved(cfg, op_b)
        exact = float(np.trace(d2 @ d1).real) / 2**op.n
        doc["oracle"] = _delta_block(rep.value, rep.stderr, exact)
    _write_report(out, doc)


def _bitflip_dilation(p: float) -> Circuit:
    # |psi>|0> -> sqrt(1-p)|psi>|0> + sqrt(p) X|psi>|1>
    theta = 2.0 * math.asin(math.sqrt(p))
    return Circuit.from_gates(2, [Gate("ry", (1,), theta), Gate("cx", (1, 0))])


def _task_choi2pc(cfg: dict, out: Path, rng: RngStream) -> None:
    op = cfg["_operator"]
    _require_cap(op.n)
    site = cfg["site"]
    if not 0 <= site < op.n:
        raise ValueError(f"site {site} outside 0..{op.n - 1}")
    dilation = _bitflip_dilation(cfg["p"])
    state = vectorize(op, COMPUTATIONAL)
    dual, prob = channel_dual_postselect(dilation, 1, state, sites=(site,))
    save_state(dual, out / "state.bin")
    doc = _base_doc(cfg, prob, 0.0, 1, {
        "n": op.n, "p": cfg["p"], "site": site, "label": "postselect_probability",
    })
    if cfg["with_oracle"]:
        p = cfg["p"]
        kraus = [
            math.sqrt(1 - p) * np.eye(2, dtype=complex),
            math.sqrt(p) * np.array([[0, 1], [1, 0]], dtype=complex),
        ]
        full = [_embed_site(k, site, op.n) for k in kraus]
        dual_dense = oracle.exact_channel_dual(full, op.to_dense())
        exact_prob = float(
            np.linalg.norm(dual_dense) ** 2 / (np.linalg.norm(op.to_dense()) ** 2 * 2)
        )
        block = _delta_block(prob, 0.0, exact_prob)
        norm = np.linalg.norm(dual_dense)
        if norm > 1e-12:
            fid = abs(np.vdot(vectorize(dual_dense, COMPUTATIONAL).amplitudes, dual.amplitudes))
            block["state_fidelity"] = float(fid)
        doc["oracle"] = block
    _write_report(out, doc)


def _embed_site(local: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for i in range(n):
        out = np.kron(out, local if i == site else np.eye(2, dtype=complex))
    return out


def _task_nqubit(cfg: dict, out: Path, rng: RngStream) -> None:
    op = cfg["_operator"]
    word = next(iter(op.ordered_items()))[1]
    pairs = cfg["_pairs"]
    _require_cap(op.n)
    h = cfg.get("_hamiltonian")
    circuit = cfg.get("_circuit")
    if circuit is not None:
        u = circuit
    elif h is not None and cfg["t"] != 0.0:
        u = trotter_circuit(h, cfg["t"], cfg["steps"])
    else:
        u = Circuit(op.n)
    reports = est.nqubit_otoc(word, u, pairs, cfg["shots"], rng.fork("nqubit"))
    exact_dense = _oracle_evolved(cfg, op) if cfg["with_oracle"] else None
    entries = []
    for (left, right), rep in zip(pairs, reports):
        entry = _report_entry(rep)
        if exact_dense is not None:
            exact = oracle.exact_otoc(exact_dense, left, right)
            entry["oracle"] = _delta_block(rep.value, rep.stderr, exact)
        entries.append(entry)
    doc = _base_doc(cfg, reports[0].value, reports[0].stderr, reports[0].shots, {
        "n": op.n, "t": cfg["t"], "steps": cfg["steps"], "label": "nqubit_otoc",
    })
    doc["reports"] = entries
    _write_report(out, doc)


def _task_compile2d(cfg: dict, out: Path, rng: RngStream) -> None:
    rows, cols = cfg["lattice"]["rows"], cfg["lattice"]["cols"]
    layout = lattice2d.embed(rows, cols)
    schedule = lattice2d.trotter_step_schedule(
        cfg["h_x"], cfg["h_z"], cfg["J"], cfg["dt"], layout
    )
    (out / "schedule.json").write_text(schedule.to_json() + "\n")
    report = lattice2d.validate(schedule, layout)
    doc = _base_doc(cfg, report.entangling_depth, 0.0, 1, {
        "rows": rows, "cols": cols, "depth": report.depth,
        "gate_counts": report.gate_counts,
        "edges_covered": report.edges_covered,
        "violations": list(report.violations),
        "label": "entangling_depth",
    })
    if cfg["with_oracle"]:
        n = rows * cols
        _require_cap(n)
        h = PauliSum(n)
        for i in range(n):
            if cfg["h_x"]:
                h.add(cfg["h_x"], PauliString.single(n, i, "X"))
            if cfg["h_z"]:
                h.add(cfg["h_z"], PauliString.single(n, i, "Z"))
        for a, b in sorted(lattice2d._lattice_edges(rows, cols)):
            if cfg["J"]:
                h.add(-cfg["J"], PauliString(n, (1 << a) | (1 << b), 0))
        op = PauliSum.from_terms([(1.0, PauliString.single(n, 0, "Z"))])
        start = prepare_vectorized(op, COMPUTATIONAL)
        one = apply_circuit(start, lattice2d.schedule_to_circuit(schedule, layout))
        ref = apply_circuit(start, super_propagator_circuit(h, cfg["dt"], 1))
        diff = float(np.linalg.norm(one.amplitudes - ref.amplitudes))
        doc["oracle"] = {"value": 0.0, "abs_delta": diff}
    _write_report(out, doc)


_HANDLERS = {
    "evolve": _task_evolve,
    "sample": _task_sample,
    "otoc": _task_otoc,
    "superop": _task_superop,
    "ose": _task_ose,
    "loe": _task_loe,
    "corr": _task_corr,
    "choi2pc": _task_choi2pc,
    "nqubit": _task_nqubit,
    "compile2d": _task_compile2d,
}


def run(config: dict, out_dir=None, with_oracle: bool | None = None,
        seed: int | None = None) -> int:
    """Execute one validated config. Returns the process exit code."""
    cfg = dict(config)
    if seed is not None:
        cfg["seed"] = seed
    if with_oracle is not None:
        cfg["with_oracle"] = with_oracle
    out = Path(out_dir) if out_dir is not None else Path(cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    rng = RngStream(cfg["seed"]).fork(cfg["task"])
    try:
        _HANDLERS[cfg["task"]](cfg, out, rng)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (NonCommutingSetError, EntangledEigenbasisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCOMMUTING
    except (ProjectionFailedError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="opvec",
        description="Seeded Heisenberg-picture experiments with file-based artifacts.",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run the {task} task")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--with-oracle", action="store_true", default=None,
                       help="append exact reference values to the report")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)

    cfg, errors = validate_config(args.config)
    if errors:
        for line in errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_PARSE
    if cfg["task"] != args.task:
        print(f"config error: config names task {cfg['task']!r}, not {args.task!r}",
              file=sys.stderr)
        return EXIT_PARSE
    return run(cfg, out_dir=args.out, with_oracle=args.with_oracle, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
