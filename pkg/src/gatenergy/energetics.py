"""Field-energy lower bounds for implementing a gate at a given error.

A coherent drive with modes ``(omega_k, alpha_k, g_k)`` acting for a time
``tau`` realizes a decomposition coefficient with mean

    lambda = -sum_k 2 g_k Re[alpha_k I_k],   I_k = (1 - exp(-i omega_k tau)) / (i omega_k)

and quantum fluctuations of variance ``sum_k |int_0^tau g_k exp(-i omega_k t) dt|^2``.
The typical coefficient error ``eps_i`` is taken to be the standard deviation.
Cauchy-Schwarz then gives ``E >= hbar omega_0 lambda^2 / (4 eps^2)`` per term,
summed over terms for independent fields and maximized over terms when all
terms share the same modes.

Energies are in units of ``hbar * omega`` with ``hbar = 1`` unless set.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.constants
import scipy.integrate

from .decomposition import (
    ZERO_TOL,
    BranchSpec,
    CoefficientMultiset,
    branch_phases,
    fwht,
    make_multiset,
)
from .errors import DegenerateDrive, DimMismatch, GateEnergyError, TooLarge, ZeroError

HBAR_SI = scipy.constants.hbar
# exhaustive branch search: at most 5**8 candidates
MAX_EXHAUSTIVE_DIM = 8
MAX_EXHAUSTIVE_BOUND = 2


class CouplingScenario(str, Enum):
    INDEPENDENT = "independent"
    SHARED = "shared"


class Objective(str, Enum):
    SHARED_MAX = "shared"
    INDEPENDENT_SUM = "independent"


@dataclass(frozen=True)
class FieldMode:
    omega: float
    alpha: complex = 0j
    g: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise GateEnergyError(f"mode frequency must be positive, got {self.omega}")
        object.__setattr__(self, "alpha", complex(self.alpha))


@dataclass(frozen=True)
class FieldConfig:
    modes: tuple[FieldMode, ...]
    tau: float
    hbar: float = 1.0
    scenario: CouplingScenario = CouplingScenario.INDEPENDENT

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "scenario", CouplingScenario(self.scenario))
        if not self.tau > 0:
            raise GateEnergyError(f"gate duration must be positive, got {self.tau}")
        if not self.hbar > 0:
            raise GateEnergyError(f"hbar must be positive, got {self.hbar}")

    @property
    def omega0(self) -> float:
        return min(m.omega for m in self.modes)

    def to_dict(self) -> dict:
        return {
            "modes": [
                {"omega": m.omega, "alpha": [m.alpha.real, m.alpha.imag], "g": m.g} for m in self.modes
            ],
            "tau": self.tau,
            "hbar": self.hbar,
            "scenario": self.scenario.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> FieldConfig:
        try:
            modes = []
            for m in data["modes"]:
                a = m.get("alpha", 0.0)
                alpha = complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a)
                modes.append(FieldMode(float(m["omega"]), alpha, float(m.get("g", 1.0))))
            return cls(
                tuple(modes),
                float(data["tau"]),
                float(data.get("hbar", 1.0)),
                CouplingScenario(data.get("scenario", "independent")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise GateEnergyError(f"bad field description: {exc}") from None


def drive_integral(omega: float, tau: float) -> complex:
    """``int_0^tau exp(-i omega t) dt``."""
    return (1 - np.exp(-1j * omega * tau)) / (1j * omega)


def _check_bound_args(omega0: float, eps: float, hbar: float) -> None:
    if not omega0 > 0:
        raise GateEnergyError(f"omega0 must be positive, got {omega0}")
    if not hbar > 0:
        raise GateEnergyError(f"hbar must be positive, got {hbar}")
    if eps < 0 or math.isnan(eps):
        raise GateEnergyError(f"gate error must be non-negative, got {eps}")


def per_term_bound(
    lambda_i: float, omega0: float, eps_i: float, hbar: float = 1.0, allow_infinite: bool = False
) -> float:
    """``hbar omega0 lambda_i^2 / (4 eps_i^2)``.

    At ``eps_i = 0`` a nonzero coefficient needs unbounded energy: this raises
    :class:`ZeroError` unless ``allow_infinite`` is set, in which case it
    returns ``inf``.
    """
    _check_bound_args(omega0, eps_i, hbar)
    if lambda_i == 0:
        return 0.0
    if eps_i == 0:
        if allow_infinite:
            return math.inf
        raise ZeroError("zero gate error requires infinite field energy")
    return hbar * omega0 * lambda_i**2 / (4 * eps_i**2)


def _values(m) -> list[float]:
    return list(m.values) if isinstance(m, CoefficientMultiset) else [float(v) for v in m]


def independent_bound(m, omega0: float, eps: float, hbar: float = 1.0, allow_infinite: bool = False) -> float:
    """Terms driven by disjoint modes: ``(hbar omega0 / 4 eps^2) sum lambda_i^2``."""
    return math.fsum(per_term_bound(v, omega0, eps, hbar, allow_infinite) for v in _values(m))


def independent_bound_per_term(
    lambdas: Sequence[float], omega0s: Sequence[float], eps: Sequence[float], hbar: float = 1.0
) -> float:
    """``(hbar / 4) sum_i omega_i lambda_i^2 / eps_i^2`` with per-term frequencies and errors."""
    if not len(lambdas) == len(omega0s) == len(eps):
        raise DimMismatch("lambdas, omega0s and eps must have equal length")
    return math.fsum(per_term_bound(lam, w, e, hbar) for lam, w, e in zip(lambdas, omega0s, eps))


def shared_bound(m, omega0: float, eps: float, hbar: float = 1.0, allow_infinite: bool = False) -> float:
    """All terms driven by the same modes: ``(hbar omega0 / 4 eps^2) max lambda_i^2``."""
    values = _values(m)
    if not values:
        _check_bound_args(omega0, eps, hbar)
        return 0.0
    biggest = max(values, key=abs)
    return per_term_bound(biggest, omega0, eps, hbar, allow_infinite)


def _couplings(config: FieldConfig, couplings) -> list:
    if couplings is None:
        return [m.g for m in config.modes]
    couplings = list(couplings)
    if len(couplings) != len(config.modes):
        raise DimMismatch(f"{len(couplings)} couplings for {len(config.modes)} modes")
    return couplings


def lambda_mean(config: FieldConfig, couplings: Sequence[float] | None = None) -> float:
    """Coherent expectation of the realized coefficient for constant couplings."""
    gs = _couplings(config, couplings)
    total = 0.0
    for mode, g in zip(config.modes, gs):
        total += 2 * g * (mode.alpha * drive_integral(mode.omega, config.tau)).real
    return -total


def lambda_variance(config: FieldConfig, couplings=None) -> float:
    """Quantum variance of the realized coefficient.

    Constant couplings use ``4 g^2 sin^2(omega tau / 2) / omega^2`` per mode.
    A coupling given as a callable ``g(t)`` is integrated numerically.
    """
    gs = _couplings(config, couplings)
    total = 0.0
    for mode, g in zip(config.modes, gs):
        if callable(g):
            total += abs(_quad_amplitude(g, mode.omega, config.tau)) ** 2
        else:
            total += 4 * g**2 * math.sin(mode.omega * config.tau / 2) ** 2 / mode.omega**2
    return total


def _quad_amplitude(g: Callable[[float], float], omega: float, tau: float, rtol: float = 1e-10) -> complex:
    # int_0^tau g(t) exp(-i omega t) dt via QUADPACK's oscillatory weights
    kw = dict(epsabs=1e-15, epsrel=rtol, limit=500)
    re, _ = scipy.integrate.quad(g, 0.0, tau, weight="cos", wvar=omega, **kw)
    im, _ = scipy.integrate.quad(g, 0.0, tau, weight="sin", wvar=omega, **kw)
    return complex(re, -im)


def lambda_variance_quadrature(config: FieldConfig, couplings=None, rtol: float = 1e-10) -> float:
    """Adaptive-quadrature evaluation of the variance for any coupling profile."""
    gs = _couplings(config, couplings)
    total = 0.0
    for mode, g in zip(config.modes, gs):
        fn = g if callable(g) else (lambda t, c=float(g): c)
        total += abs(_quad_amplitude(fn, mode.omega, config.tau, rtol)) ** 2
    return total


def coefficient_error(config: FieldConfig, couplings=None) -> float:
    """Typical coefficient error: the standard deviation of the realized coefficient."""
    return math.sqrt(lambda_variance(config, couplings))


def field_energy(config: FieldConfig) -> float:
    """Mean coherent-field energy ``hbar sum_k omega_k |alpha_k|^2``."""
    return config.hbar * math.fsum(m.omega * abs(m.alpha) ** 2 for m in config.modes)


def synthesize_single_mode(lambda_target: float, omega: float, g: float, tau: float) -> FieldMode:
    """Smallest-amplitude single mode whose mean coefficient equals ``lambda_target``.

    The amplitude phase is anti-aligned with the drive integral:
    ``alpha = -lambda I* / (2 g |I|^2)``.
    """
    integral = drive_integral(omega, tau)
    if abs(integral) < 1e-12 or g == 0:
        raise DegenerateDrive(f"mode omega={omega}, g={g} cannot drive over tau={tau}")
    alpha = -lambda_target * np.conj(integral) / (2 * g * abs(integral) ** 2)
    return FieldMode(omega, complex(alpha), g)


@dataclass(frozen=True)
class EnergyReport:
    omega0: float
    epsilon: float
    per_term_bounds: tuple[float, ...]
    independent_bound: float
    shared_bound: float
    multiset_used: CoefficientMultiset
    hbar: float = 1.0
    infinite: bool = False
    gate: str = ""
    branch: str = "principal"

    def to_dict(self) -> dict:
        return {
            "gate": self.gate,
            "multiset": list(self.multiset_used.values),
            "omega0": self.omega0,
            "epsilon": self.epsilon,
            "hbar": self.hbar,
            "per_term": [_finite(x) for x in self.per_term_bounds],
            "independent": _finite(self.independent_bound),
            "shared": _finite(self.shared_bound),
            "branch": self.branch,
            "infinite": self.infinite,
        }


def _finite(x: float):
    # JSON has no infinity; the report's "infinite" flag carries it
    return None if math.isinf(x) else x


def energy_report(
    multiset: CoefficientMultiset,
    omega0: float,
    epsilon: float,
    hbar: float = 1.0,
    allow_infinite: bool = False,
    gate: str = "",
    branch: str = "principal",
) -> EnergyReport:
    per_term = tuple(per_term_bound(v, omega0, epsilon, hbar, allow_infinite) for v in multiset.values)
    ind = independent_bound(multiset, omega0, epsilon, hbar, allow_infinite)
    sh = shared_bound(multiset, omega0, epsilon, hbar, allow_infinite)
    return EnergyReport(
        omega0=omega0,
        epsilon=epsilon,
        per_term_bounds=per_term,
        independent_bound=ind,
        shared_bound=sh,
        multiset_used=multiset,
        hbar=hbar,
        infinite=math.isinf(ind),
        gate=gate,
        branch=branch,
    )


@dataclass(frozen=True)
class BranchOptimum:
    branch: BranchSpec
    multiset: CoefficientMultiset
    objective_value: float
    principal_value: float
    evaluations: int = 0
    strategy: str = "exhaustive"
    objective: Objective = Objective.SHARED_MAX

    @property
    def improvement(self) -> float:
        """Ratio principal / optimum (1.0 when the principal branch is already optimal)."""
        if self.objective_value == 0:
            return 1.0 if self.principal_value == 0 else math.inf
        return self.principal_value / self.objective_value


def _objective_values(
    phases: np.ndarray, offsets: np.ndarray, objective: Objective, include_identity: bool, zero_tol: float
) -> np.ndarray:
    dim = phases.shape[-1]
    coeffs = fwht(phases[None, :] + 2 * np.pi * offsets) / dim
    coeffs = np.where(np.abs(coeffs) > zero_tol, coeffs, 0.0)
    if not include_identity:
        coeffs[:, 0] = 0.0
    sq = coeffs**2
    if objective is Objective.SHARED_MAX:
        return sq.max(axis=1)
    return sq.sum(axis=1)


def _pick(values: np.ndarray) -> int:
    best = values.min()
    # first (lexicographically smallest) candidate among floating-point ties
    return int(np.flatnonzero(values <= best + 1e-12 * max(1.0, best))[0])


def optimize_branch(
    u,
    objective: Objective | str = Objective.SHARED_MAX,
    offset_bound: int = 2,
    strategy: str = "exhaustive",
    include_identity: bool = True,
    zero_tol: float = ZERO_TOL,
) -> BranchOptimum:
    """Search branch offsets for the smallest energy objective of the WHT multiset.

    ``exhaustive`` scans ``[-B, B]^dim`` (``dim <= 8``, ``B <= 2``); the
    principal branch is kept unless another branch is strictly cheaper, and
    remaining ties go to the lexicographically smallest offsets. ``local``
    does steepest descent from the principal branch over single-offset moves
    of +-1.
    """
    objective = Objective(objective)
    phases, _ = branch_phases(u)
    dim = len(phases)
    principal = np.zeros((1, dim))
    p_val = float(_objective_values(phases, principal, objective, include_identity, zero_tol)[0])

    if strategy == "exhaustive":
        if dim > MAX_EXHAUSTIVE_DIM or offset_bound > MAX_EXHAUSTIVE_BOUND:
            raise TooLarge(
                f"exhaustive search limited to dim <= {MAX_EXHAUSTIVE_DIM}, bound <= {MAX_EXHAUSTIVE_BOUND}"
            )
        best_val, best_off, count = math.inf, None, 0
        it = itertools.product(range(-offset_bound, offset_bound + 1), repeat=dim)
        while True:
            chunk = np.array(list(itertools.islice(it, 65536)), dtype=float)
            if chunk.size == 0:
                break
            vals = _objective_values(phases, chunk, objective, include_identity, zero_tol)
            i = _pick(vals)
            count += len(chunk)
            # strictly better only, so earlier chunks win ties
            if best_off is None or vals[i] < best_val - 1e-12 * max(1.0, best_val):
                best_val, best_off = float(vals[i]), chunk[i].astype(int)
    elif strategy == "local":
        best_off = np.zeros(dim, dtype=int)
        best_val, count = p_val, 1
        while True:
            moves = []
            for j in range(dim):
                for step in (-1, 1):
                    cand = best_off.copy()
                    cand[j] += step
                    if abs(cand[j]) <= offset_bound:
                        moves.append(cand)
            if not moves:
                break
            moves.sort(key=tuple)
            arr = np.array(moves, dtype=float)
            vals = _objective_values(phases, arr, objective, include_identity, zero_tol)
            count += len(moves)
            i = _pick(vals)
            if vals[i] < best_val - 1e-12 * max(1.0, best_val):
                best_val, best_off = float(vals[i]), np.array(moves[i])
            else:
                break
    else:
        raise GateEnergyError(f"unknown search strategy {strategy!r}")
    if not best_val < p_val - 1e-12 * max(1.0, p_val):
        best_val, best_off = p_val, np.zeros(dim, dtype=int)

    branch = BranchSpec(tuple(int(k) for k in best_off))
    coeffs = fwht(phases + 2 * np.pi * np.asarray(branch.offsets)) / dim
    if not include_identity:
        coeffs = coeffs[1:]
    return BranchOptimum(
        branch=branch,
        multiset=make_multiset(coeffs, zero_tol),
        objective_value=best_val,
        principal_value=p_val,
        evaluations=count,
        strategy=strategy,
        objective=objective,
    )


def multiset_objective(m: CoefficientMultiset, objective: Objective | str) -> float:
    objective = Objective(objective)
    return m.max_sq if objective is Objective.SHARED_MAX else m.sum_sq
