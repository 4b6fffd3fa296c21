"""Standard gates, controlled constructions and the circuit text format.

Circuit files are UTF-8 text::

    # comment
    qubits 3
    H 0
    RZ(pi/2) 1
    CNX 0 1 2            # controls first, target last
    CUSTOM gate.json 0 2

Angles are radians and may use ``pi`` (``pi/2``, ``-3*pi/4``).
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadParamCount,
    CircuitSyntaxError,
    DuplicateQubit,
    GateEnergyError,
    IndexOutOfRange,
    NotUnitary,
    TooLarge,
    UnknownGate,
)
from .linalg import STRUCTURE_TOL, embed, is_unitary, load_matrix, n_qubits_of

MAX_QUBITS = 10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
T = np.diag([1, np.exp(1j * math.pi / 4)]).astype(complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

_FIXED_1Q = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H, "S": S, "T": T}
_ROTATIONS = {"RX": X, "RY": Y, "RZ": Z}
GATE_NAMES = (
    "I", "X", "Y", "Z", "H", "S", "T", "RX", "RY", "RZ",
    "CX", "CZ", "SWAP", "CNX", "CNH", "CNTOFF", "CUSTOM",
)


def rotation(axis: str, theta: float) -> np.ndarray:
    """``R_A(theta) = exp(-i theta A / 2)`` for a Pauli axis."""
    a = _ROTATIONS["R" + axis.upper()] if len(axis) == 1 else _ROTATIONS[axis.upper()]
    return math.cos(theta / 2) * I2 - 1j * math.sin(theta / 2) * a


def controlled(u, n_controls: int) -> np.ndarray:
    """Apply ``u`` only when all ``n_controls`` leading qubits are ``|1>``."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, STRUCTURE_TOL):
        raise NotUnitary("controlled() needs a unitary target operator")
    if n_controls < 0:
        raise GateEnergyError("n_controls must be non-negative")
    d = u.shape[0]
    full = np.eye(d * 2**n_controls, dtype=complex)
    full[-d:, -d:] = u
    return full


def toffoli() -> np.ndarray:
    return controlled(X, 2)


@dataclass(frozen=True)
class GateSpec:
    """One gate application. For controlled gates, ``qubits`` lists controls then target."""

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    custom_matrix: np.ndarray | None = field(default=None, compare=False, repr=False)
    custom_path: str | None = None

    def __post_init__(self):
        name = self.name.upper()
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if name not in GATE_NAMES:
            raise UnknownGate(f"unknown gate {self.name!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise DuplicateQubit(f"{name}: repeated qubit in {list(self.qubits)}")
        if any(q < 0 for q in self.qubits):
            raise IndexOutOfRange(f"{name}: negative qubit index")
        n_params = 1 if name in _ROTATIONS else 0
        if len(self.params) != n_params:
            raise BadParamCount(f"{name} takes {n_params} parameter(s), got {len(self.params)}")
        arity = _arity(name, self.custom_matrix)
        nq = len(self.qubits)
        if arity is not None and nq != arity:
            raise BadParamCount(f"{name} acts on {arity} qubit(s), got {nq}")
        if name in ("CNX", "CNH") and nq < 1:
            raise BadParamCount(f"{name} needs at least a target qubit")
        if name == "CNTOFF" and nq < 3:
            raise BadParamCount("CNTOFF needs at least 3 qubits")
        if name == "CUSTOM":
            if self.custom_matrix is None:
                raise GateEnergyError("CUSTOM gate needs a matrix")
            if not is_unitary(self.custom_matrix, STRUCTURE_TOL):
                raise NotUnitary("CUSTOM gate matrix is not unitary")

    @property
    def n_controls(self) -> int:
        if self.name in ("CNX", "CNH"):
            return len(self.qubits) - 1
        if self.name == "CNTOFF":
            return len(self.qubits) - 3
        return 0

    def describe(self) -> str:
        label = self.name
        if self.params:
            label += "(" + ",".join(repr(p) for p in self.params) + ")"
        return label + " " + " ".join(map(str, self.qubits))


def _arity(name: str, custom: np.ndarray | None) -> int | None:
    if name in _FIXED_1Q or name in _ROTATIONS:
        return 1
    if name in ("CX", "CZ", "SWAP"):
        return 2
    if name == "CUSTOM" and custom is not None:
        return n_qubits_of(np.asarray(custom).shape[0])
    return None


def standard_gate(spec: GateSpec) -> np.ndarray:
    """Matrix of a gate on its own qubits (in the order listed)."""
    name = spec.name
    if name in _FIXED_1Q:
        return _FIXED_1Q[name].copy()
    if name in _ROTATIONS:
        return rotation(name, spec.params[0])
    if name == "CX":
        return controlled(X, 1)
    if name == "CZ":
        return controlled(Z, 1)
    if name == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    if name == "CNX":
        return controlled(X, len(spec.qubits) - 1)
    if name == "CNH":
        return controlled(H, len(spec.qubits) - 1)
    if name == "CNTOFF":
        return controlled(toffoli(), len(spec.qubits) - 3)
    if name == "CUSTOM":
        return np.asarray(spec.custom_matrix, dtype=complex)
    raise UnknownGate(name)


def gate(name: str, *params: float, controls: int = 0) -> np.ndarray:
    """Convenience constructor: ``gate("RZ", pi/2)``, ``gate("CNX", controls=3)``."""
    name = name.upper()
    if name in ("CNX", "CNH"):
        nq = controls + 1
    elif name == "CNTOFF":
        nq = controls + 3
    elif name in ("CX", "CZ", "SWAP"):
        nq = 2
    else:
        nq = 1
    return standard_gate(GateSpec(name, tuple(range(nq)), params))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[GateSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise GateEnergyError("a circuit needs at least one qubit")
        for g in self.gates:
            bad = [q for q in g.qubits if q >= self.n_qubits]
            if bad:
                raise IndexOutOfRange(f"{g.name}: qubit {bad[0]} >= n_qubits={self.n_qubits}")


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_angle(text: str) -> float:
    """Evaluate a numeric angle expression; ``pi`` is the only name allowed."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id.lower() == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported angle expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"bad angle {text!r}: {exc}") from None


_LINE = re.compile(r"^(?P<name>[A-Za-z]+)(?:\((?P<params>[^)]*)\))?(?:\s+(?P<args>.*))?$")


def parse_gate_token(token: str) -> tuple[str, tuple[float, ...]]:
    """Split ``RZ(pi/2)`` into ``("RZ", (pi/2,))``."""
    m = _LINE.match(token.strip())
    if not m or m.group("args"):
        raise ValueError(f"bad gate token {token!r}")
    params = ()
    if m.group("params") is not None:
        params = tuple(parse_angle(p) for p in m.group("params").split(","))
    return m.group("name").upper(), params


def parse_circuit(text: str, base_dir: str | Path | None = None) -> Circuit:
    """Parse circuit text; ``base_dir`` resolves relative CUSTOM matrix paths."""
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    n_qubits = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n_qubits is None:
            parts = line.split()
            if len(parts) != 2 or parts[0].lower() != "qubits":
                raise CircuitSyntaxError("first statement must be 'qubits <N>'", lineno)
            try:
                n_qubits = int(parts[1])
            except ValueError:
                raise CircuitSyntaxError(f"bad qubit count {parts[1]!r}", lineno) from None
            if n_qubits < 1:
                raise CircuitSyntaxError("qubit count must be positive", lineno)
            continue
        m = _LINE.match(line)
        if not m:
            raise CircuitSyntaxError(f"cannot parse {line!r}", lineno)
        name = m.group("name").upper()
        args = (m.group("args") or "").split()
        try:
            params = ()
            if m.group("params") is not None:
                params = tuple(parse_angle(p) for p in m.group("params").split(","))
        except ValueError as exc:
            raise CircuitSyntaxError(str(exc), lineno) from None
        custom = custom_path = None
        if name == "CUSTOM":
            if not args:
                raise CircuitSyntaxError("CUSTOM needs a matrix file", lineno)
            custom_path = args.pop(0)
            p = Path(custom_path)
            try:
                custom = load_matrix(p if p.is_absolute() else base / p)
            except (OSError, GateEnergyError) as exc:
                raise CircuitSyntaxError(f"CUSTOM matrix: {exc}", lineno) from None
        try:
            qubits = tuple(int(a) for a in args)
        except ValueError:
            raise CircuitSyntaxError(f"qubit indices must be integers: {args}", lineno) from None
        if not qubits:
            raise CircuitSyntaxError(f"{name} has no qubits", lineno)
        out_of_range = [q for q in qubits if q < 0 or q >= n_qubits]
        if out_of_range:
            raise IndexOutOfRange(f"line {lineno}: qubit {out_of_range[0]} out of range for {n_qubits} qubits")
        try:
            gates.append(GateSpec(name, qubits, params, custom, custom_path))
        except (DuplicateQubit, IndexOutOfRange) as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
        except GateEnergyError as exc:
            raise CircuitSyntaxError(str(exc), lineno) from None
    if n_qubits is None:
        raise CircuitSyntaxError("missing 'qubits <N>' header", 1)
    return Circuit(n_qubits, tuple(gates))


def format_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.n_qubits}"]
    for g in c.gates:
        head = g.name
        if g.params:
            head += "(" + ",".join(repr(p) for p in g.params) + ")"
        if g.name == "CUSTOM":
            head += f" {g.custom_path}"
        lines.append(head + " " + " ".join(str(q) for q in g.qubits))
    return "\n".join(lines) + "\n"


def load_circuit(path) -> Circuit:
    p = Path(path)
    return parse_circuit(p.read_text(encoding="utf-8"), base_dir=p.parent)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Whole-circuit unitary; the first listed gate acts first."""
    if c.n_qubits > MAX_QUBITS:
        raise TooLarge(f"{c.n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}")
    u = np.eye(2**c.n_qubits, dtype=complex)
    for g in c.gates:
        u = embed(standard_gate(g), g.qubits, c.n_qubits) @ u
    return u
