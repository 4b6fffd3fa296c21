"""Imperfect gates, the operator-norm gate error, and checks of its bounds.

For a decomposition ``U = exp(i sum lam_i V_i)`` a drive that realizes
``lam_i + eps_i`` instead produces ``U' = exp(i sum (lam_i + eps_i) V_i)``.
The gate error is ``||I - U' U^dagger||`` (largest singular value). With
commuting involutions it equals ``max_j 2 |sin(x_j / 2)|`` where ``x_j`` runs
over ``sum_i s_ij eps_i`` for the joint +-1 eigenvalues ``s_ij``; in
particular it never exceeds ``sum |eps_i|``. For any state it also dominates
``|1 - <psi|U'U^dagger|psi>| >= |1 - sqrt(L)|`` with ``L`` the Loschmidt echo.

Monte Carlo sampling uses numpy's Philox counter-based generator. Each term
(and the Haar state batch) gets its own stream spawned from
``SeedSequence(seed)``, so results are reproducible across platforms and do
not depend on evaluation order.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .decomposition import CommutingDecomposition, check_commuting_involutory
from .energetics import (
    CouplingScenario,
    FieldConfig,
    drive_integral,
    lambda_mean,
    lambda_variance,
)
from .errors import DimMismatch, GateEnergyError, NotCommutingInvolutory
from .linalg import as_matrix, dagger, operator_norm

VIOLATION_TOL = 1e-12


@dataclass(frozen=True)
class PerturbationSample:
    """Coefficient errors, one per decomposition term."""

    eps_vec: tuple[float, ...]
    source: str = "manual"
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "eps_vec", tuple(float(e) for e in self.eps_vec))


def _eps(d: CommutingDecomposition, s) -> np.ndarray:
    eps = np.asarray(s.eps_vec if isinstance(s, PerturbationSample) else s, dtype=float)
    if eps.shape != (len(d),):
        raise DimMismatch(f"{eps.size} errors for a decomposition with {len(d)} terms")
    return eps


def perturbed_gate(d: CommutingDecomposition, s) -> np.ndarray:
    """``exp(i sum (lam_i + eps_i) V_i)``."""
    return d.unitary(_eps(d, s))


def gate_error(u, u_prime) -> float:
    """``||I - U' U^dagger||`` in operator norm."""
    u, u_prime = as_matrix(u), as_matrix(u_prime)
    if u.shape != u_prime.shape:
        raise DimMismatch(f"shapes {u.shape} and {u_prime.shape} differ")
    return operator_norm(np.eye(u.shape[0]) - u_prime @ dagger(u))


def _require_commuting(d: CommutingDecomposition) -> None:
    if d.z_masks is not None:
        return
    report = check_commuting_involutory(d.operators)
    if not (report.commuting and report.involutory):
        raise NotCommutingInvolutory(f"decomposition terms violate commutation (max {report.max_violation:.3g})")


def gate_error_closed_form(eps_vec, d: CommutingDecomposition) -> float:
    """Error of the perturbed gate from the joint eigenvalues of the terms."""
    _require_commuting(d)
    eps = _eps(d, eps_vec)
    x = d.joint_signs().T @ eps
    return float(np.max(2 * np.abs(np.sin(x / 2)), initial=0.0))


@dataclass(frozen=True)
class SublinearityCheck:
    lhs: float
    rhs: float
    holds: bool


def sublinearity_check(eps_vec, d: CommutingDecomposition) -> SublinearityCheck:
    """Compare the operator-norm error against ``sum |eps_i|``."""
    eps = _eps(d, eps_vec)
    u = d.unitary()
    lhs = gate_error(u, d.unitary(eps))
    rhs = math.fsum(abs(e) for e in eps)
    return SublinearityCheck(lhs, rhs, lhs <= rhs + VIOLATION_TOL)


def _normalized_states(states) -> np.ndarray:
    psi = np.asarray(states, dtype=complex)
    if psi.ndim == 1:
        psi = psi[:, None]
    norms = np.linalg.norm(psi, axis=0)
    if np.any(np.abs(norms - 1) > 1e-10):
        raise GateEnergyError("states must be normalized")
    return psi


def echo_amplitudes(u, u_prime, states) -> np.ndarray:
    """``<psi|U' U^dagger|psi>`` for each column of ``states``."""
    u, u_prime = as_matrix(u), as_matrix(u_prime)
    psi = _normalized_states(states)
    if psi.shape[0] != u.shape[0] or u.shape != u_prime.shape:
        raise DimMismatch("state and operator dimensions differ")
    m = u_prime @ dagger(u)
    return np.sum(np.conj(psi) * (m @ psi), axis=0)


def loschmidt_echo(u, u_prime, psi) -> float:
    """``|<psi|U' U^dagger|psi>|^2``."""
    return float(abs(echo_amplitudes(u, u_prime, psi)[0]) ** 2)


@dataclass
class ErrorReport:
    epsilon: float
    sublinear_bound: float | None = None
    closed_form: float | None = None
    loschmidt_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    violations: int = 0


def _loschmidt_violations(epsilon: float, amps: np.ndarray) -> int:
    first = np.abs(1 - amps)
    second = np.abs(1 - np.abs(amps))
    bad = (first > epsilon + VIOLATION_TOL) | (second > first + VIOLATION_TOL)
    return int(np.count_nonzero(bad))


def loschmidt_bound_check(u, u_prime, states) -> ErrorReport:
    """Check ``eps >= |1 - <psi|U'U^dagger|psi>| >= |1 - sqrt(L)|`` for each state."""
    eps = gate_error(u, u_prime)
    amps = echo_amplitudes(u, u_prime, states)
    return ErrorReport(
        epsilon=eps,
        loschmidt_values=np.abs(amps) ** 2,
        violations=_loschmidt_violations(eps, amps),
    )


def haar_states(dim: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random pure states as columns."""
    z = rng.standard_normal((dim, n)) + 1j * rng.standard_normal((dim, n))
    return z / np.linalg.norm(z, axis=0)


def make_rngs(seed: int, n_streams: int) -> list[np.random.Generator]:
    """Independent Philox streams spawned from one seed."""
    children = np.random.SeedSequence(seed).spawn(n_streams)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


@dataclass
class MonteCarloReport:
    gate: str
    n_samples: int
    seed: int
    scenario: str
    errors: np.ndarray = field(repr=False)
    closed_form_errors: np.ndarray = field(repr=False)
    sum_abs_eps: np.ndarray = field(repr=False)
    lambda_errors: np.ndarray = field(repr=False)
    lambda_std_expected: float
    sublinear_violations: int
    closed_form_mismatches: int
    loschmidt_violations: int
    n_states: int

    @property
    def mean_error(self) -> float:
        return math.fsum(self.errors) / len(self.errors)

    @property
    def std_error(self) -> float:
        m = self.mean_error
        return math.sqrt(math.fsum((e - m) ** 2 for e in self.errors) / len(self.errors))

    @property
    def lambda_std_sample(self) -> float:
        x = self.lambda_errors.ravel()
        m = math.fsum(x) / len(x)
        return math.sqrt(math.fsum((v - m) ** 2 for v in x) / (len(x) - 1)) if len(x) > 1 else 0.0

    def to_dict(self) -> dict:
        return {
            "gate": self.gate,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "scenario": self.scenario,
            "mean_error": self.mean_error,
            "std_error": self.std_error,
            "sublinear_violations": self.sublinear_violations,
            "loschmidt_violations": self.loschmidt_violations,
            "closed_form_mismatches": self.closed_form_mismatches,
            "lambda_std_expected": self.lambda_std_expected,
            "lambda_std_sample": self.lambda_std_sample,
            "n_states": self.n_states,
        }


def sample_coefficient_errors(
    field_config: FieldConfig, n_terms: int, n_samples: int, seed: int, weights: Sequence[float] | None = None
) -> np.ndarray:
    """Draw realized-minus-mean coefficient errors, shape ``(n_samples, n_terms)``.

    Each mode contributes ``-2 g Re[da I]`` where ``da`` is the coherent-state
    quadrature noise (real and imaginary parts ``N(0, 1/4)``) and ``I`` the
    drive integral, so each term has variance ``sum_k g_k^2 |I_k|^2``.
    Independent scenario: every term owns a copy of the modes, one Philox
    stream per term. Shared scenario: one draw per mode feeds every term,
    scaled by the term's coupling weight (default 1).
    """
    modes = field_config.modes
    integrals = np.array([drive_integral(m.omega, field_config.tau) for m in modes])
    gs = np.array([m.g for m in modes], dtype=float)
    w = np.ones(n_terms) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n_terms,):
        raise DimMismatch("one coupling weight per term required")

    def draw(rng: np.random.Generator) -> np.ndarray:
        quad = rng.standard_normal((n_samples, len(modes), 2)) / 2
        da = quad[..., 0] + 1j * quad[..., 1]
        return -2 * np.real(da * integrals) @ gs

    if field_config.scenario is CouplingScenario.SHARED:
        (rng,) = make_rngs(seed, 1)
        common = draw(rng)
        return common[:, None] * w[None, :]
    rngs = make_rngs(seed, n_terms)
    return np.stack([draw(r) * wi for r, wi in zip(rngs, w)], axis=1)


def mc_verify(
    d: CommutingDecomposition,
    field_config: FieldConfig,
    n_samples: int,
    seed: int,
    n_states: int = 1000,
    batch_size: int = 1000,
    gate: str = "",
    eps_samples: np.ndarray | None = None,
) -> MonteCarloReport:
    """Sample coefficient errors and check every error bound on each sample.

    Each batch of ``batch_size`` samples is tested against a fresh set of
    ``n_states`` Haar-random states. ``eps_samples`` overrides the field model
    with explicit errors of shape ``(n_samples, n_terms)``.
    """
    if n_samples < 1:
        raise GateEnergyError("n_samples must be at least 1")
    _require_commuting(d)
    n_terms = len(d)
    if eps_samples is None:
        eps = sample_coefficient_errors(field_config, n_terms, n_samples, seed)
    else:
        eps = np.asarray(eps_samples, dtype=float)
        if eps.shape != (n_samples, n_terms):
            raise DimMismatch(f"eps_samples must have shape {(n_samples, n_terms)}")
    state_rng = make_rngs(seed, n_terms + 1)[-1]
    u = d.unitary()
    signs_t = d.joint_signs().T
    w = d.basis_transform
    dim = u.shape[0]

    errors = np.empty(n_samples)
    closed = np.empty(n_samples)
    sum_abs = np.empty(n_samples)
    sub_bad = closed_bad = los_bad = 0
    states = None
    for k in range(n_samples):
        if n_states and k % batch_size == 0:
            states = haar_states(dim, n_states, state_rng)
        e = eps[k]
        u_prime = d.unitary(e)
        errors[k] = gate_error(u, u_prime)
        if w is not None:
            x = signs_t @ e
            closed[k] = float(np.max(2 * np.abs(np.sin(x / 2))))
        else:
            closed[k] = gate_error_closed_form(e, d)
        sum_abs[k] = math.fsum(abs(v) for v in e)
        if errors[k] > sum_abs[k] + VIOLATION_TOL:
            sub_bad += 1
        if abs(closed[k] - errors[k]) > 1e-10:
            closed_bad += 1
        if n_states:
            amps = echo_amplitudes(u, u_prime, states)
            los_bad += _loschmidt_violations(errors[k], amps)

    return MonteCarloReport(
        gate=gate,
        n_samples=n_samples,
        seed=seed,
        scenario=field_config.scenario.value,
        errors=errors,
        closed_form_errors=closed,
        sum_abs_eps=sum_abs,
        lambda_errors=eps,
        lambda_std_expected=math.sqrt(lambda_variance(field_config)),
        sublinear_violations=sub_bad,
        closed_form_mismatches=closed_bad,
        loschmidt_violations=los_bad,
        n_states=n_states,
    )


def realized_coefficients(field_config: FieldConfig, n_samples: int, seed: int) -> np.ndarray:
    """Samples of the realized coefficient (mean plus quantum noise) for one term."""
    noise = sample_coefficient_errors(field_config, 1, n_samples, seed)[:, 0]
    return lambda_mean(field_config) + noise
