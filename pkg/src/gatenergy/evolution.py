"""Driven evolution under a commuting decomposition.

Because the terms commute, the time-ordered exponential collapses to
``exp(i s(t) sum lam_i V_i)`` where ``s(t)`` is the fraction of the drive
integral accumulated by time ``t``. The simulator refuses non-commuting
inputs rather than Trotterizing.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .decomposition import (
    CommutingDecomposition,
    check_commuting_involutory,
    local_sum_hamiltonian,
    log_branch,
    pauli_decomposition,
)
from .energetics import FieldMode
from .errors import (
    BadAlpha,
    DegenerateDrive,
    DimMismatch,
    GateEnergyError,
    NotCommuting,
)
from .gates import X
from .linalg import (
    as_matrix,
    dagger,
    kron,
    n_qubits_of,
    reduced_state,
    schmidt_coefficients,
    validate_density,
)


@dataclass(frozen=True)
class DriveEnvelope:
    """Drive ``f(t) = sum_k 2 g_k Re(alpha_k exp(-i omega_k t))`` over ``[0, tau]``."""

    modes: tuple[FieldMode, ...]
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.tau > 0:
            raise GateEnergyError("tau must be positive")
        if abs(self._integral(self.tau)) < 1e-12:
            raise DegenerateDrive("drive integral over [0, tau] vanishes")

    def _integral(self, t):
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for m in self.modes:
            total = total + 2 * m.g * np.real(m.alpha * (1 - np.exp(-1j * m.omega * t)) / (1j * m.omega))
        return total

    def fraction(self, t):
        """Accumulated fraction ``s(t)``; ``s(0) = 0`` and ``s(tau) = 1``."""
        return self._integral(t) / self._integral(self.tau)

    def time_at_fraction(self, s: float) -> float:
        """First time in ``[0, tau]`` where the accumulated fraction reaches ``s``."""
        grid = np.linspace(0.0, self.tau, 2001)
        vals = self.fraction(grid) - s
        idx = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
        if vals[0] == 0:
            return 0.0
        if not len(idx):
            raise GateEnergyError(f"fraction {s} is not reached on [0, tau]")
        a, b = grid[idx[0]], grid[idx[0] + 1]
        return float(scipy.optimize.brentq(lambda t: float(self.fraction(t)) - s, a, b, xtol=1e-15))


def renyi_from_probabilities(p, alpha: float) -> float:
    if alpha <= 0 or alpha == 1:
        raise BadAlpha(f"Renyi order must be positive and != 1, got {alpha}")
    p = np.asarray(p, dtype=float)
    p = np.where(p < 0, 0.0, p)
    return float(math.log(np.sum(p**alpha)) / (1 - alpha))


def renyi_entropy(rho, alpha: float = 0.5) -> float:
    """``ln Tr(rho^alpha) / (1 - alpha)`` from the eigenvalues of ``rho``.

    Eigenvalues slightly below zero (down to ``-1e-10``) are clamped to zero.
    """
    if alpha <= 0 or alpha == 1:
        raise BadAlpha(f"Renyi order must be positive and != 1, got {alpha}")
    r = validate_density(rho)
    p = np.linalg.eigvalsh(0.5 * (r + dagger(r)))
    return renyi_from_probabilities(p, alpha)


def renyi_entropy_pure(psi, keep: Sequence[int], alpha: float = 0.5) -> float:
    """Renyi entropy of the reduced state of a pure state, from Schmidt coefficients.

    Squaring singular values keeps tiny populations at ~1e-32 rather than the
    ~1e-17 noise of an eigensolver, which matters for ``alpha < 1``.
    """
    sv = schmidt_coefficients(psi, keep)
    return renyi_from_probabilities(sv**2, alpha)


_PAULI_XYZ = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def bloch_vector(rho) -> tuple[float, float, float]:
    r = as_matrix(rho)
    if r.shape != (2, 2):
        raise DimMismatch("bloch_vector needs a single-qubit density operator")
    x, y, z = (float(np.real(np.trace(r @ p))) for p in _PAULI_XYZ)
    return x, y, z


@dataclass
class EvolutionTrace:
    times: np.ndarray
    fractions: np.ndarray
    states: np.ndarray
    entropies: dict[tuple[int, ...], np.ndarray]
    bloch: np.ndarray
    alpha: float = 0.5
    label: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def n_qubits(self) -> int:
        return self.bloch.shape[1]

    def renyi_half(self) -> np.ndarray:
        return next(iter(self.entropies.values()))

    def rows(self) -> list[dict]:
        out = []
        for i, t in enumerate(self.times):
            row = {"t": float(t), "s": float(self.fractions[i])}
            for j, a in enumerate(self.states[i]):
                row[f"re_{j}"] = float(a.real)
                row[f"im_{j}"] = float(a.imag)
            row["renyi_half"] = float(self.renyi_half()[i])
            for q in range(self.n_qubits):
                for c, name in enumerate("xyz"):
                    row[f"bloch_q{q}_{name}"] = float(self.bloch[i, q, c])
            out.append(row)
        return out

    def to_csv(self, path) -> None:
        rows = self.rows()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)

    def to_json(self, path) -> None:
        payload = {"schema": 1, "label": self.label, "meta": self.meta, "rows": self.rows()}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)


def evolve(
    d: CommutingDecomposition,
    env: DriveEnvelope,
    times,
    psi0,
    bipartitions: Sequence[Sequence[int]] = ((0,),),
    alpha: float = 0.5,
) -> EvolutionTrace:
    """States ``exp(i s(t) K) psi0`` along ``times`` with entropies and Bloch vectors."""
    if d.z_masks is None:
        report = check_commuting_involutory(d.operators)
        if not report.commuting:
            raise NotCommuting("evolution needs commuting decomposition terms")
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise GateEnergyError("initial state must be normalized")
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or times.min() < 0 or times.max() > env.tau * (1 + 1e-12):
        raise GateEnergyError("times must be sorted within [0, tau]")
    k = d.generator()
    if k.shape[0] != len(psi0):
        raise DimMismatch("state and decomposition dimensions differ")
    n = n_qubits_of(len(psi0))
    vals, vecs = np.linalg.eigh(k)
    coeffs0 = dagger(vecs) @ psi0
    s = np.asarray(env.fraction(times), dtype=float)
    states = (vecs @ (np.exp(1j * np.outer(vals, s)) * coeffs0[:, None])).T

    parts = [tuple(sorted(b)) for b in bipartitions] if n > 1 else []
    entropies = {b: np.array([renyi_entropy_pure(v, b, alpha) for v in states]) for b in parts}
    if not entropies:
        entropies = {(0,): np.zeros(len(times))}
    bloch = np.array([[bloch_vector(reduced_state(v, [q])) for q in range(n)] for v in states])
    return EvolutionTrace(times, s, states, entropies, bloch, alpha)


def xx_generators() -> dict[str, np.ndarray]:
    """Two generators of ``X (x) X``: the principal log, and the sum of local X logs."""
    xx = kron(X, X)
    k_x = log_branch(X)
    return {
        "entangling": log_branch(xx),
        "localsum": local_sum_hamiltonian([(0, k_x), (1, k_x)], 2),
    }


def figure1_run(
    hamiltonian: str = "entangling",
    tau: float = 1.0,
    n_steps: int = 200,
    amplitude: float = 1.0,
    g: float = 1.0,
    extra_times: Sequence[float] = (),
) -> EvolutionTrace:
    """Drive ``|00>`` to ``X (x) X |00>`` with one mode of angular frequency ``1/tau``.

    ``n_steps`` intervals give ``n_steps + 1`` samples including both ends.
    The mode amplitude is real and positive.
    """
    gens = xx_generators()
    if hamiltonian not in gens:
        raise GateEnergyError(f"unknown variant {hamiltonian!r}; choose from {sorted(gens)}")
    if n_steps < 1:
        raise GateEnergyError("n_steps must be at least 1")
    d = pauli_decomposition(gens[hamiltonian])
    env = DriveEnvelope((FieldMode(1.0 / tau, complex(amplitude), g),), tau)
    times = np.union1d(np.linspace(0.0, tau, n_steps + 1), np.asarray(extra_times, dtype=float))
    psi0 = np.zeros(4, dtype=complex)
    psi0[0] = 1.0
    trace = evolve(d, env, times, psi0)
    trace.label = hamiltonian
    trace.meta = {"tau": tau, "omega": 1.0 / tau, "n_steps": n_steps, "variant": hamiltonian}
    return trace
