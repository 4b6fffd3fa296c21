"""Report builders shared by the CLI: target resolution, JSON payloads, budgets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .decomposition import (
    ZERO_TOL,
    BranchSpec,
    CoefficientMultiset,
    check_commuting_involutory,
    coefficient_multiset,
    local_sum_hamiltonian,
    log_branch,
    make_multiset,
    pauli_decompose,
    pauli_string,
    pauli_weight,
    weight_profile,
    wht_decompose,
)
from .energetics import EnergyReport, energy_report
from .errors import GateEnergyError
from .gates import (
    Circuit,
    GateSpec,
    circuit_unitary,
    load_circuit,
    parse_gate_token,
    standard_gate,
)
from .linalg import kron, n_qubits_of

SCHEMA_VERSION = 1


@dataclass
class Target:
    """A gate, tensor product of gates, or circuit named on the command line."""

    label: str
    unitary: np.ndarray
    circuit: Circuit | None = None
    factors: tuple[np.ndarray, ...] = ()


def _split_top_level(text: str, seps: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in seps:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p.strip() for p in parts]


def _single_gate(token: str, controls: int) -> np.ndarray:
    try:
        name, params = parse_gate_token(token)
    except ValueError as exc:
        raise GateEnergyError(str(exc)) from None
    if name in ("CNX", "CNH"):
        nq = controls + 1
    elif name == "CNTOFF":
        nq = controls + 3
    elif name in ("CX", "CZ", "SWAP"):
        nq = 2
    elif name == "CUSTOM":
        raise GateEnergyError("CUSTOM gates are only available inside circuit files")
    else:
        nq = 1
    return standard_gate(GateSpec(name, tuple(range(nq)), params))


def resolve_target(text: str, controls: int = 0) -> Target:
    """``X``, ``RZ(pi/2)``, ``CNX`` (with ``controls``), ``X*X`` or a circuit file path."""
    path = Path(text)
    if path.suffix in (".qc", ".txt", ".circ") or (path.exists() and path.is_file()):
        circuit = load_circuit(path)
        return Target(text, circuit_unitary(circuit), circuit)
    tokens = _split_top_level(text, "*⊗")
    factors = tuple(_single_gate(t, controls) for t in tokens)
    label = text if controls == 0 else f"{text}[controls={controls}]"
    return Target(label, kron(*factors), None, factors if len(factors) > 1 else ())


def parse_branch(text: str | None, dim: int) -> BranchSpec | None:
    if text is None or text == "" or text == "principal":
        return None
    try:
        offsets = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise GateEnergyError(f"branch must be comma-separated integers, got {text!r}") from None
    return BranchSpec(offsets)


def decomposition_report(
    target: Target, branch: BranchSpec | None = None, basis: str = "wht", zero_tol: float = ZERO_TOL
) -> dict:
    u = target.unitary
    k = log_branch(u, branch)
    n = n_qubits_of(u.shape[0])
    if basis == "wht":
        d = wht_decompose(u, branch)
        terms = [
            {"label": lbl, "coefficient": float(c)}
            for lbl, c in zip(d.labels, d.coefficients)
            if abs(c) > zero_tol
        ]
        multiset = coefficient_multiset(d, zero_tol)
        commuting = True
    elif basis == "pauli":
        pairs = pauli_decompose(k, zero_tol)
        terms = [{"label": lbl, "coefficient": c} for lbl, c in pairs]
        multiset = make_multiset([c for _, c in pairs], zero_tol)
        rep = check_commuting_involutory([pauli_string(lbl) for lbl, _ in pairs])
        commuting = rep.commuting and rep.involutory
    else:
        raise GateEnergyError(f"unknown basis {basis!r}")
    ent = weight_profile(k, zero_tol)
    return {
        "schema": SCHEMA_VERSION,
        "gate": target.label,
        "branch": "principal" if branch is None or branch.is_principal else str(branch),
        "basis": basis,
        "n_qubits": n,
        "terms": terms,
        "multiset": list(multiset.values),
        "commuting": commuting,
        "entangling": bool(ent.entangling) if n >= 2 else False,
        "max_weight": ent.max_weight,
    }


def target_multiset(
    target: Target,
    branch: BranchSpec | None = None,
    basis: str = "wht",
    zero_tol: float = ZERO_TOL,
    include_identity: bool = True,
) -> CoefficientMultiset:
    if basis == "wht":
        return coefficient_multiset(wht_decompose(target.unitary, branch), zero_tol, include_identity)
    pairs = pauli_decompose(log_branch(target.unitary, branch), zero_tol)
    return make_multiset(
        [c for lbl, c in pairs if include_identity or pauli_weight(lbl) > 0], zero_tol
    )


def local_sum_multiset(factors, zero_tol: float = ZERO_TOL) -> CoefficientMultiset:
    """Pauli multiset of the sum of principal logs of single-qubit factors."""
    n = len(factors)
    k = local_sum_hamiltonian([(q, log_branch(f)) for q, f in enumerate(factors)], n)
    return make_multiset([c for _, c in pauli_decompose(k, zero_tol)], zero_tol)


def energy_payload(report: EnergyReport, scenario: str = "both", basis: str = "wht") -> dict:
    payload = {"schema": SCHEMA_VERSION, "scenario": scenario, "basis": basis}
    payload.update(report.to_dict())
    return payload


@dataclass
class BudgetReport:
    per_gate: list[EnergyReport]
    total_independent: float
    total_shared: float
    epsilon_total: float
    split_rule: str = "equal"

    def to_dict(self) -> dict:
        fin = lambda x: None if math.isinf(x) else x
        return {
            "schema": SCHEMA_VERSION,
            "epsilon_total": self.epsilon_total,
            "split_rule": self.split_rule,
            "n_gates": len(self.per_gate),
            "per_gate": [r.to_dict() for r in self.per_gate],
            "total_independent": fin(self.total_independent),
            "total_shared": fin(self.total_shared),
            "infinite": any(r.infinite for r in self.per_gate),
        }


def circuit_budget(
    circuit: Circuit,
    epsilon_total: float,
    omega0: float = 1.0,
    hbar: float = 1.0,
    allow_infinite: bool = False,
    zero_tol: float = ZERO_TOL,
) -> BudgetReport:
    """Per-gate bounds with the error budget split equally, ``eps_g = eps_total / G``.

    Gate errors add at most linearly, so equal shares keep the circuit within
    ``eps_total``.
    """
    n_gates = len(circuit.gates)
    eps_g = epsilon_total / n_gates if n_gates else epsilon_total
    reports = []
    for g in circuit.gates:
        m = coefficient_multiset(wht_decompose(standard_gate(g)), zero_tol)
        reports.append(
            energy_report(m, omega0, eps_g, hbar, allow_infinite, gate=g.describe().strip())
        )
    return BudgetReport(
        per_gate=reports,
        total_independent=math.fsum(r.independent_bound for r in reports),
        total_shared=math.fsum(r.shared_bound for r in reports),
        epsilon_total=epsilon_total,
    )


def load_schema(name: str) -> dict:
    text = resources.files("gatenergy").joinpath("schemas", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(payload: dict, name: str) -> None:
    jsonschema.validate(payload, load_schema(name))


def dumps(payload: dict) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"
