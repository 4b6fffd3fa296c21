"""Dense complex linear algebra for operators on a few qubits.

Conventions used throughout the package:

* Operators are square ``complex128`` numpy arrays of dimension ``2**N``.
* Qubit 0 is the most significant bit of the computational index, which is
  the ordering produced by ``np.kron(first, second)``.
* Eigenphases live in ``(-pi, pi]``; an eigenvalue of ``-1`` has phase ``+pi``.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph

from .errors import (
    BadIndex,
    BadMatrixFile,
    DimMismatch,
    NotDensityOperator,
    NotHermitian,
    NotUnitary,
)

STRUCTURE_TOL = 1e-10
EQUALITY_TOL = 1e-12
# eigenvalues closer than this on the unit circle are treated as one eigenspace
DEGENERACY_TOL = 1e-8
# overlaps within this window count as ties in the canonical eigenbasis rule
_TIE_TOL = 1e-9


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def n_qubits_of(dim: int) -> int:
    """Number of qubits for a power-of-two dimension."""
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise DimMismatch(f"dimension {dim} is not a power of two")
    return n


def kron(*factors) -> np.ndarray:
    """Kronecker product; the first factor acts on the most significant qubit."""
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(a))


def is_unitary(a, tol: float = STRUCTURE_TOL) -> bool:
    m = as_matrix(a)
    resid = m @ dagger(m) - np.eye(m.shape[0])
    return bool(np.max(np.abs(resid), initial=0.0) <= tol)


def is_hermitian(a, tol: float = STRUCTURE_TOL) -> bool:
    m = as_matrix(a)
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def operator_norm(a) -> float:
    """Largest singular value."""
    m = np.asarray(a, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


@dataclass(frozen=True)
class SpectralForm:
    """Eigenphases and a unitary eigenbasis, ``u = W diag(exp(i theta)) W^dagger``."""

    eigenphases: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        w = self.eigenvectors
        return (w * np.exp(1j * self.eigenphases)) @ dagger(w)


def wrap_phase(theta):
    """Map angles into ``(-pi, pi]``."""
    t = np.angle(np.exp(1j * np.asarray(theta, dtype=float)))
    return np.where(t <= -np.pi + 1e-12, t + 2 * np.pi, t)


def _cluster_eigenvalues(evals: np.ndarray, tol: float) -> list[np.ndarray]:
    """Single-linkage clusters on the unit circle, ordered by phase."""
    close = np.abs(evals[:, None] - evals[None, :]) < tol
    n_comp, labels = scipy.sparse.csgraph.connected_components(
        scipy.sparse.csr_matrix(close), directed=False
    )
    clusters = [np.flatnonzero(labels == c) for c in range(n_comp)]
    clusters.sort(key=lambda idx: float(wrap_phase(np.angle(np.mean(evals[idx])))))
    return clusters


def canonical_eigenbasis(spaces: Sequence[np.ndarray], dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Pick one column per computational index from a list of eigenspaces.

    Greedy assignment: repeatedly take the (eigenspace, basis index ``j``)
    pair with the largest projection of ``|j>`` onto what remains of the
    eigenspace. Ties go to the smallest ``j``, then to the earliest
    eigenspace. The chosen vector is the normalized projection, so
    ``<j|w_j>`` is real and positive.

    Returns ``(W, owner)`` where column ``j`` of ``W`` is anchored at ``|j>``
    and ``owner[j]`` is the index of the eigenspace it came from.
    """
    spaces = [np.asarray(q, dtype=complex) for q in spaces]
    # norms[s, j] = |P_s|j>| for the part of eigenspace s not yet claimed
    weight = np.stack([np.sum(np.abs(q) ** 2, axis=1) for q in spaces])
    norms = np.sqrt(np.clip(weight, 0.0, None))
    row_best = norms.max(axis=1)
    # claimed vectors of each eigenspace, stored as rows
    chosen = [np.zeros((q.shape[1], dim), dtype=complex) for q in spaces]
    count = [0] * len(spaces)
    w = np.zeros((dim, dim), dtype=complex)
    owner = np.full(dim, -1, dtype=int)
    for _ in range(dim):
        best = row_best.max()
        rows = np.flatnonzero(row_best >= best - _TIE_TOL)
        hits = np.argwhere(norms[rows].T >= best - _TIE_TOL)
        # argwhere on the transpose scans smallest j first, then earliest space
        j, s = int(hits[0][0]), int(rows[hits[0][1]])
        q = spaces[s]
        v = q @ np.conj(q[j])
        k = count[s]
        if k:
            # classical Gram-Schmidt with one re-orthogonalization pass
            r = chosen[s][:k]
            v -= r.T @ np.conj(r @ np.conj(v))
            v -= r.T @ np.conj(r @ np.conj(v))
        v /= np.linalg.norm(v)
        w[:, j] = v
        owner[j] = s
        chosen[s][k] = v
        count[s] = k + 1
        weight[s] -= np.abs(v) ** 2
        stale = np.flatnonzero(norms[:, j] >= row_best - _TIE_TOL)
        norms[:, j] = -1.0
        norms[s] = np.where(norms[s] < 0, -1.0, np.sqrt(np.clip(weight[s], 0.0, None)))
        if count[s] == q.shape[1]:
            norms[s] = -1.0
        for r_idx in set(stale.tolist()) | {s}:
            row_best[r_idx] = norms[r_idx].max()
    return w, owner


def spectral_decompose_unitary(u, tol: float = STRUCTURE_TOL) -> SpectralForm:
    """Eigenphases in ``(-pi, pi]`` and a canonical unitary eigenbasis.

    Degenerate eigenspaces are oriented by the greedy computational-basis
    rule of :func:`canonical_eigenbasis`; for a diagonal unitary the basis
    is exactly the identity.
    """
    m = as_matrix(u)
    if not is_unitary(m, tol):
        raise NotUnitary("matrix is not unitary")
    dim = m.shape[0]
    off = m - np.diag(np.diag(m))
    if np.max(np.abs(off), initial=0.0) == 0.0:
        return SpectralForm(wrap_phase(np.angle(np.diag(m))), np.eye(dim, dtype=complex))

    t, z = scipy.linalg.schur(m, output="complex")
    evals = np.diag(t)
    clusters = _cluster_eigenvalues(evals, DEGENERACY_TOL)
    spaces = []
    for idx in clusters:
        q, _ = np.linalg.qr(z[:, idx])
        spaces.append(q)
    w, _ = canonical_eigenbasis(spaces, dim)
    # re-orthonormalize without disturbing the anchoring (polar factor)
    uu, _, vh = np.linalg.svd(w)
    w = uu @ vh
    phases = wrap_phase(np.angle(np.sum(np.conj(w) * (m @ w), axis=0)))
    return SpectralForm(phases, w)


def exp_i_generator(k, tol: float = STRUCTURE_TOL) -> np.ndarray:
    """``exp(i k)`` for Hermitian ``k``."""
    m = as_matrix(k)
    if not is_hermitian(m, tol):
        raise NotHermitian("generator is not Hermitian")
    h = 0.5 * (m + dagger(m))
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * vals)) @ dagger(vecs)


def embed(op, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Embed an operator acting on ``qubits`` (in that order) into ``n_qubits``."""
    op = as_matrix(op)
    k = len(qubits)
    if op.shape[0] != 2**k:
        raise DimMismatch(f"operator of dim {op.shape[0]} does not act on {k} qubits")
    if len(set(qubits)) != k or any(q < 0 or q >= n_qubits for q in qubits):
        raise BadIndex(f"bad qubit indices {list(qubits)} for {n_qubits} qubits")
    rest = [q for q in range(n_qubits) if q not in qubits]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    order = list(qubits) + rest
    # axis a of the tensor currently holds qubit order[a]; move it home
    perm = np.argsort(order)
    t = full.reshape([2] * (2 * n_qubits))
    t = t.transpose(list(perm) + [n_qubits + p for p in perm])
    return t.reshape(2**n_qubits, 2**n_qubits)


def partial_trace(rho, keep: Iterable[int]) -> np.ndarray:
    """Reduced density operator on ``keep`` (kept in ascending qubit order)."""
    r = as_matrix(rho)
    n = n_qubits_of(r.shape[0])
    keep = sorted(set(keep))
    if not keep or any(q < 0 or q >= n for q in keep):
        raise BadIndex(f"keep={keep} invalid for {n} qubits")
    drop = [q for q in range(n) if q not in keep]
    t = r.reshape([2] * (2 * n))
    t = t.transpose(keep + drop + [n + q for q in keep] + [n + q for q in drop])
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def reduced_state(psi, keep: Iterable[int]) -> np.ndarray:
    """Reduced density operator of a pure state without forming ``|psi><psi|``."""
    v = np.asarray(psi, dtype=complex)
    n = n_qubits_of(len(v))
    keep = sorted(set(keep))
    if not keep or any(q < 0 or q >= n for q in keep):
        raise BadIndex(f"keep={keep} invalid for {n} qubits")
    drop = [q for q in range(n) if q not in keep]
    a = v.reshape([2] * n).transpose(keep + drop).reshape(2 ** len(keep), -1)
    return a @ dagger(a)


def schmidt_coefficients(psi, keep: Iterable[int]) -> np.ndarray:
    v = np.asarray(psi, dtype=complex)
    n = n_qubits_of(len(v))
    keep = sorted(set(keep))
    drop = [q for q in range(n) if q not in keep]
    a = v.reshape([2] * n).transpose(keep + drop).reshape(2 ** len(keep), -1)
    return np.linalg.svd(a, compute_uv=False)


def validate_density(rho, tol: float = STRUCTURE_TOL) -> np.ndarray:
    r = as_matrix(rho)
    if not is_hermitian(r, tol):
        raise NotDensityOperator("density operator is not Hermitian")
    if abs(np.trace(r) - 1) > tol:
        raise NotDensityOperator(f"trace {np.trace(r).real:.3g} != 1")
    if np.linalg.eigvalsh(0.5 * (r + dagger(r))).min() < -tol:
        raise NotDensityOperator("density operator has a negative eigenvalue")
    return r


def density(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex)
    return np.outer(v, np.conj(v))


def matrix_to_json(m) -> list:
    m = as_matrix(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    """Parse an array-of-rows of ``[re, im]`` pairs; requires power-of-two size."""
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadMatrixFile(f"matrix entries must be [re, im] pairs: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise BadMatrixFile(f"expected rows of [re, im] pairs, got shape {arr.shape}")
    if arr.shape[0] != arr.shape[1]:
        raise BadMatrixFile(f"matrix is not square: {arr.shape[:2]}")
    try:
        n_qubits_of(arr.shape[0])
    except DimMismatch as exc:
        raise BadMatrixFile(str(exc)) from None
    return arr[..., 0] + 1j * arr[..., 1]


def load_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BadMatrixFile(f"{path}: {exc}") from None
    return matrix_from_json(data)


def save_matrix(path, m) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(m)), encoding="utf-8")
