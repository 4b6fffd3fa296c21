"""Matrix logarithms on arbitrary branches and commuting involutory decompositions.

A gate ``U`` is written as ``exp(i sum_i lam_i V_i)`` where the ``V_i`` are
Hermitian, square to the identity, and commute pairwise. Two constructions
are provided:

``wht_decompose``
    Diagonalize ``U = W diag(exp(i phi)) W^dagger`` and expand the phase
    vector ``phi`` over Z-strings with a Walsh-Hadamard transform. The
    operators are ``W Z_s W^dagger``; they always commute.
``pauli_decompose``
    Expand a Hermitian generator over multi-qubit Pauli strings. The terms
    commute only for some generators; :func:`check_commuting_involutory`
    says which.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    BadIndex,
    BranchLengthMismatch,
    DimMismatch,
    NotCommutingInvolutory,
    NotHermitian,
    TooFewQubits,
)
from .gates import PAULI
from .linalg import (
    STRUCTURE_TOL,
    SpectralForm,
    as_matrix,
    dagger,
    embed,
    exp_i_generator,
    is_hermitian,
    n_qubits_of,
    spectral_decompose_unitary,
)

ZERO_TOL = 1e-9


@dataclass(frozen=True)
class BranchSpec:
    """Integer ``2*pi`` offsets added to each eigenphase (canonical eigenbasis order)."""

    offsets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(int(k) for k in self.offsets))

    @classmethod
    def principal(cls, dim: int) -> BranchSpec:
        return cls((0,) * dim)

    @property
    def is_principal(self) -> bool:
        return not any(self.offsets)

    def __str__(self) -> str:
        return ",".join(str(k) for k in self.offsets)


def _branch_offsets(branch: BranchSpec | Sequence[int] | None, dim: int) -> np.ndarray:
    if branch is None:
        return np.zeros(dim)
    offsets = branch.offsets if isinstance(branch, BranchSpec) else tuple(branch)
    if len(offsets) != dim:
        raise BranchLengthMismatch(f"branch has {len(offsets)} offsets, gate has dimension {dim}")
    return np.asarray(offsets, dtype=float)


def branch_phases(u, branch=None) -> tuple[np.ndarray, SpectralForm]:
    """Shifted eigenphases ``theta_j + 2 pi k_j`` and the spectral form they refer to."""
    sf = spectral_decompose_unitary(u)
    k = _branch_offsets(branch, len(sf.eigenphases))
    return sf.eigenphases + 2 * np.pi * k, sf


def log_branch(u, branch=None) -> np.ndarray:
    """Hermitian ``K`` with ``exp(iK) = u`` on the chosen branch."""
    phi, sf = branch_phases(u, branch)
    w = sf.eigenvectors
    k = (w * phi) @ dagger(w)
    return 0.5 * (k + dagger(k))


def fwht(a) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis (natural order).

    Entry ``s`` of the result is ``sum_j (-1)^popcount(s & j) a[..., j]``.
    """
    out = np.array(a, dtype=float, copy=True)
    n = out.shape[-1]
    n_qubits_of(n)
    lead = out.shape[:-1]
    h = 1
    while h < n:
        v = out.reshape(*lead, n // (2 * h), 2, h)
        x, y = v[..., 0, :].copy(), v[..., 1, :].copy()
        v[..., 0, :] = x + y
        v[..., 1, :] = x - y
        h *= 2
    return out


def z_string_label(mask: int, n_qubits: int) -> str:
    """Bit set for qubit ``q`` (MSB = qubit 0) places a ``Z`` at position ``q``."""
    return "".join("Z" if (mask >> (n_qubits - 1 - q)) & 1 else "I" for q in range(n_qubits))


def z_string_signs(mask: int, dim: int) -> np.ndarray:
    """Diagonal of the Z-string ``mask``: ``(-1)^popcount(mask & j)``."""
    j = np.arange(dim)
    bits = np.bitwise_and(j, mask)
    parity = np.zeros(dim, dtype=int)
    while np.any(bits):
        parity ^= bits & 1
        bits >>= 1
    return 1.0 - 2.0 * parity


class _ConjugatedZStrings(Sequence):
    """Lazy sequence of ``W Z_s W^dagger``; materializing all 2^N at N = 10 costs 16 GB."""

    def __init__(self, w: np.ndarray, masks: Sequence[int]):
        self._w = w
        self._masks = tuple(masks)

    def __len__(self):
        return len(self._masks)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        w = self._w
        signs = z_string_signs(self._masks[i], w.shape[0])
        v = (w * signs) @ dagger(w)
        return 0.5 * (v + dagger(v))


@dataclass(frozen=True)
class CommutingDecomposition:
    """``U = exp(i sum_i coefficients[i] * operators[i])`` with commuting involutions.

    ``basis_transform`` and ``z_masks`` are set by :func:`wht_decompose`; they
    allow the generator, joint eigenvalues and perturbed gates to be formed
    without materializing every operator.
    """

    coefficients: np.ndarray
    labels: tuple[str, ...]
    operators: Sequence[np.ndarray] = field(repr=False)
    basis_transform: np.ndarray | None = field(default=None, repr=False)
    z_masks: tuple[int, ...] | None = None
    identity_index: int | None = None
    basis: str = "wht"

    def __len__(self) -> int:
        return len(self.coefficients)

    @property
    def dim(self) -> int:
        if self.basis_transform is not None:
            return self.basis_transform.shape[0]
        return self.operators[0].shape[0]

    @cached_property
    def _signs(self) -> np.ndarray:
        if self.z_masks is not None:
            return np.stack([z_string_signs(m, self.dim) for m in self.z_masks])
        return _joint_signs_generic(list(self.operators))

    def joint_signs(self) -> np.ndarray:
        """``(n_terms, dim)`` array of +-1 eigenvalues of each term on each joint eigenvector."""
        return self._signs

    def generator(self, shift=None) -> np.ndarray:
        """``sum_i (lam_i + shift_i) V_i``."""
        c = np.asarray(self.coefficients, dtype=float)
        if shift is not None:
            c = c + np.asarray(shift, dtype=float)
        if self.basis_transform is not None:
            w = self.basis_transform
            phases = self.joint_signs().T @ c
            k = (w * phases) @ dagger(w)
        else:
            k = sum((ci * v for ci, v in zip(c, self.operators)), np.zeros((self.dim, self.dim), dtype=complex))
        return 0.5 * (k + dagger(k))

    def unitary(self, shift=None) -> np.ndarray:
        """``exp(i sum (lam_i + shift_i) V_i)``; exact for commuting terms."""
        if self.basis_transform is not None:
            c = np.asarray(self.coefficients, dtype=float)
            if shift is not None:
                c = c + np.asarray(shift, dtype=float)
            w = self.basis_transform
            return (w * np.exp(1j * (self.joint_signs().T @ c))) @ dagger(w)
        return exp_i_generator(self.generator(shift))


def _joint_signs_generic(ops: list[np.ndarray]) -> np.ndarray:
    # a generic real combination separates every joint sign pattern
    rng = np.random.Generator(np.random.Philox(20240917))
    weights = rng.uniform(1.0, 2.0, size=len(ops)) * np.sqrt(np.arange(2, len(ops) + 2))
    mix = sum(wi * v for wi, v in zip(weights, ops))
    _, vecs = np.linalg.eigh(0.5 * (mix + dagger(mix)))
    signs = np.stack([np.real(np.sum(np.conj(vecs) * (v @ vecs), axis=0)) for v in ops])
    return np.where(signs >= 0, 1.0, -1.0)


def wht_decompose(u, branch=None) -> CommutingDecomposition:
    """Commuting involutory decomposition of ``u`` via its eigenphases.

    Coefficients are the Walsh-Hadamard transform of the branch-shifted
    eigenphase vector divided by the dimension; operator ``s`` is the
    Z-string ``s`` conjugated into the canonical eigenbasis.
    """
    phi, sf = branch_phases(u, branch)
    dim = len(phi)
    n = n_qubits_of(dim)
    coeffs = fwht(phi) / dim
    w = sf.eigenvectors
    masks = tuple(range(dim))
    literal = np.allclose(w, np.eye(dim), atol=1e-12, rtol=0)
    if literal:
        w = np.eye(dim, dtype=complex)
        labels = tuple(z_string_label(m, n) for m in masks)
    else:
        labels = tuple(f"W[{z_string_label(m, n)}]" for m in masks)
    return CommutingDecomposition(
        coefficients=coeffs,
        labels=labels,
        operators=_ConjugatedZStrings(w, masks),
        basis_transform=w,
        z_masks=masks,
        identity_index=0,
        basis="wht",
    )


def pauli_string(label: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, PAULI[ch])
    return out


# T[a, 2r + c] = P_a[c, r], so contracting with M[r, c] gives tr(P_a M)
_PAULI_TRACE = np.array([[PAULI[a][c, r] for r in (0, 1) for c in (0, 1)] for a in "IXYZ"])


def pauli_coefficients(k) -> np.ndarray:
    """All ``4**N`` coefficients ``tr(P k) / 2**N`` as an ``(4,)*N`` array (axis order IXYZ)."""
    m = as_matrix(k)
    n = n_qubits_of(m.shape[0])
    if n == 0:
        return m.real.reshape(())
    t = m.reshape([2] * (2 * n))
    interleave = [ax for q in range(n) for ax in (q, n + q)]
    t = t.transpose(interleave).reshape([4] * n)
    for ax in range(n):
        t = np.moveaxis(np.tensordot(_PAULI_TRACE, t, axes=([1], [ax])), 0, ax)
    return t / 2**n


def pauli_decompose(k, zero_tol: float = ZERO_TOL) -> list[tuple[str, float]]:
    """Nonzero Pauli-string coefficients of a Hermitian operator, lexicographic (IXYZ) order."""
    m = as_matrix(k)
    if not is_hermitian(m, STRUCTURE_TOL):
        raise NotHermitian("pauli_decompose needs a Hermitian operator")
    n = n_qubits_of(m.shape[0])
    coeffs = pauli_coefficients(m).real
    out = []
    for idx in zip(*np.nonzero(np.abs(coeffs) > zero_tol)):
        label = "".join("IXYZ"[i] for i in idx)
        out.append((label, float(coeffs[idx])))
    if n == 0 and abs(float(coeffs)) > zero_tol:
        out.append(("", float(coeffs)))
    return out


def pauli_weight(label: str) -> int:
    return sum(ch != "I" for ch in label)


@dataclass(frozen=True)
class CommutationReport:
    commuting: bool
    involutory: bool
    max_violation: float


def check_commuting_involutory(ops: Iterable, tol: float = STRUCTURE_TOL) -> CommutationReport:
    """Pairwise commutators and squares, checked entrywise. Cost is O(m^2 d^3)."""
    ops = [as_matrix(v) for v in ops]
    if not ops:
        return CommutationReport(True, True, 0.0)
    d = ops[0].shape[0]
    if any(v.shape[0] != d for v in ops):
        raise DimMismatch("operators have different dimensions")
    stack = np.stack(ops)
    eye = np.eye(d)
    inv_viol = float(np.max(np.abs(stack @ stack - eye)))
    comm_viol = 0.0
    for i in range(len(ops)):
        prod = stack[i] @ stack[i + 1 :]
        prod_rev = stack[i + 1 :] @ stack[i]
        if len(prod):
            comm_viol = max(comm_viol, float(np.max(np.abs(prod - prod_rev))))
    return CommutationReport(comm_viol <= tol, inv_viol <= tol, max(comm_viol, inv_viol))


def pauli_decomposition(k, zero_tol: float = ZERO_TOL) -> CommutingDecomposition:
    """Pauli expansion of ``k`` packaged as a decomposition; its terms must commute."""
    terms = pauli_decompose(k, zero_tol)
    if not terms:
        n = n_qubits_of(as_matrix(k).shape[0])
        terms = [("I" * n, 0.0)]
    labels = tuple(t[0] for t in terms)
    ops = [pauli_string(lbl) for lbl in labels]
    report = check_commuting_involutory(ops)
    if not (report.commuting and report.involutory):
        raise NotCommutingInvolutory(
            f"Pauli terms of this generator do not commute (violation {report.max_violation:.3g})"
        )
    ident = next((i for i, lbl in enumerate(labels) if pauli_weight(lbl) == 0), None)
    return CommutingDecomposition(
        coefficients=np.array([t[1] for t in terms]),
        labels=labels,
        operators=ops,
        identity_index=ident,
        basis="pauli",
    )


def local_sum_hamiltonian(gate_logs: Sequence[tuple[int, np.ndarray]], n_qubits: int) -> np.ndarray:
    """``sum_j I x ... x K_j x ... x I`` for single-qubit generators ``K_j`` on qubit ``j``."""
    dim = 2**n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for q, k in gate_logs:
        k = as_matrix(k)
        if not is_hermitian(k):
            raise NotHermitian(f"local generator on qubit {q} is not Hermitian")
        if q < 0 or q >= n_qubits:
            raise BadIndex(f"qubit {q} out of range for {n_qubits} qubits")
        out += embed(k, [q], n_qubits)
    return out


@dataclass(frozen=True)
class CoefficientMultiset:
    """Nonzero coefficients of a decomposition, sorted descending by signed value."""

    values: tuple[float, ...]
    zero_tol: float = ZERO_TOL

    @property
    def magnitudes(self) -> tuple[float, ...]:
        return tuple(sorted((abs(v) for v in self.values), reverse=True))

    @property
    def sum_sq(self) -> float:
        return math.fsum(v * v for v in self.values)

    @property
    def max_sq(self) -> float:
        return max((v * v for v in self.values), default=0.0)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def make_multiset(values, zero_tol: float = ZERO_TOL) -> CoefficientMultiset:
    kept = sorted((float(v) for v in values if abs(v) > zero_tol), reverse=True)
    return CoefficientMultiset(tuple(kept), zero_tol)


def coefficient_multiset(
    d: CommutingDecomposition, zero_tol: float = ZERO_TOL, include_identity: bool = True
) -> CoefficientMultiset:
    values = [
        c for i, c in enumerate(d.coefficients) if include_identity or i != d.identity_index
    ]
    return make_multiset(values, zero_tol)


@dataclass(frozen=True)
class EntangleabilityReport:
    entangling: bool
    max_weight: int
    weight_profile: dict[int, int]


def weight_profile(k, zero_tol: float = ZERO_TOL) -> EntangleabilityReport:
    terms = pauli_decompose(k, zero_tol)
    profile = Counter(pauli_weight(lbl) for lbl, _ in terms)
    max_w = max(profile, default=0)
    return EntangleabilityReport(max_w >= 2, max_w, dict(sorted(profile.items())))


def entangleability(k, zero_tol: float = ZERO_TOL) -> EntangleabilityReport:
    """A generator can entangle iff it has a nonzero Pauli term of weight >= 2."""
    m = as_matrix(k)
    if not is_hermitian(m):
        raise NotHermitian("entangleability needs a Hermitian generator")
    if n_qubits_of(m.shape[0]) < 2:
        raise TooFewQubits("entangleability needs at least two qubits")
    return weight_profile(m, zero_tol)


def enumerate_branches(dim: int, bound: int) -> Iterable[tuple[int, ...]]:
    """All offset vectors in ``[-bound, bound]^dim`` in lexicographic order."""
    return itertools.product(range(-bound, bound + 1), repeat=dim)
