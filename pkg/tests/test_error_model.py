"""Tests for imperfect gates, gate-error bounds and the Monte Carlo harness."""

import math

import numpy as np
import pytest
import scipy.linalg
from conftest import random_state, random_unitary
from hypothesis import given
from hypothesis import strategies as st

from gatenergy.decomposition import (
    CommutingDecomposition,
    log_branch,
    pauli_decomposition,
    wht_decompose,
)
from gatenergy.energetics import (
    CouplingScenario,
    FieldConfig,
    FieldMode,
    lambda_variance,
)
from gatenergy.error_model import (
    PerturbationSample,
    echo_amplitudes,
    gate_error,
    gate_error_closed_form,
    haar_states,
    loschmidt_bound_check,
    loschmidt_echo,
    make_rngs,
    mc_verify,
    perturbed_gate,
    realized_coefficients,
    sample_coefficient_errors,
    sublinearity_check,
)
from gatenergy.errors import DimMismatch, GateEnergyError, NotCommutingInvolutory
from gatenergy.gates import I2, X, Z, gate
from gatenergy.linalg import kron, operator_norm

seeds = st.integers(min_value=0, max_value=2**32 - 1)
FIELD = FieldConfig((FieldMode(math.pi, 0j, 1.0),), 1.0)


def brute_force_error(u, u_prime):
    """Oracle: square root of the top eigenvalue of A^dagger A with A = I - U'U^dagger."""
    a = np.eye(u.shape[0]) - u_prime @ u.conj().T
    return math.sqrt(max(np.linalg.eigvalsh(a.conj().T @ a)[-1], 0.0))


class TestPerturbedGate:
    def test_zero_error_reproduces(self, rng):
        u = random_unitary(4, rng)
        d = wht_decompose(u)
        assert operator_norm(perturbed_gate(d, np.zeros(4)) - u) < 1e-10

    def test_x_over_rotation(self):
        d = wht_decompose(X)
        eps = 0.07
        got = perturbed_gate(d, PerturbationSample((0.0, eps)))
        expected = scipy.linalg.expm(1j * (np.pi / 2 * np.eye(2) + (-np.pi / 2 + eps) * X))
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_cx_small_errors(self):
        d = wht_decompose(gate("CX"))
        up = perturbed_gate(d, [0.01] * 4)
        assert operator_norm(up @ up.conj().T - np.eye(4)) < 1e-10
        assert gate_error(gate("CX"), up) > 0

    def test_length_checked(self):
        with pytest.raises(DimMismatch):
            perturbed_gate(wht_decompose(X), [0.1])


class TestGateError:
    def test_same(self, rng):
        u = random_unitary(4, rng)
        assert gate_error(u, u) < 1e-14

    def test_global_phase(self, rng):
        u = random_unitary(2, rng)
        assert gate_error(u, np.exp(0.1j) * u) == pytest.approx(2 * math.sin(0.05), rel=1e-12)

    def test_identity_vs_x(self):
        assert gate_error(I2, X) == pytest.approx(2)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            gate_error(I2, np.eye(4))

    @given(seeds)
    def test_matches_oracle(self, seed):
        rng = np.random.default_rng(seed)
        u, v = random_unitary(4, rng), random_unitary(4, rng)
        assert gate_error(u, v) == pytest.approx(brute_force_error(u, v), abs=1e-12)


class TestClosedForm:
    def test_single_term(self):
        d = pauli_decomposition(0.4 * Z)
        assert gate_error_closed_form([0.1], d) == pytest.approx(2 * math.sin(0.05), rel=1e-14)

    def test_zero(self):
        assert gate_error_closed_form([0, 0], wht_decompose(X)) == 0

    def test_aligned_pair(self):
        d = pauli_decomposition(0.3 * kron(Z, I2) + 0.2 * kron(I2, Z))
        got = gate_error_closed_form([0.1, 0.1], d)
        assert got == pytest.approx(2 * abs(math.sin(0.1)), rel=1e-14)
        assert got <= 0.2

    def test_refuses_non_commuting(self):
        d = CommutingDecomposition(np.array([0.1, 0.2]), ("X", "Z"), [X, Z], basis="pauli")
        with pytest.raises(NotCommutingInvolutory):
            gate_error_closed_form([0.1, 0.1], d)

    @given(seeds, st.integers(1, 3))
    def test_equals_norm_for_wht(self, seed, n):
        rng = np.random.default_rng(seed)
        u = random_unitary(2**n, rng)
        d = wht_decompose(u)
        eps = rng.uniform(-0.3, 0.3, size=len(d))
        assert gate_error_closed_form(eps, d) == pytest.approx(gate_error(u, perturbed_gate(d, eps)), abs=1e-10)

    @given(seeds)
    def test_equals_norm_for_commuting_pauli(self, seed):
        rng = np.random.default_rng(seed)
        d = pauli_decomposition(log_branch(kron(X, X)))
        eps = rng.uniform(-0.3, 0.3, size=len(d))
        u = kron(X, X)
        assert gate_error_closed_form(eps, d) == pytest.approx(gate_error(u, perturbed_gate(d, eps)), abs=1e-10)


class TestSublinearity:
    def test_single(self):
        c = sublinearity_check([0.1], pauli_decomposition(0.5 * X))
        assert c.holds and c.lhs == pytest.approx(0.0999583, abs=1e-7) and c.rhs == pytest.approx(0.1)

    def test_zero(self):
        c = sublinearity_check([0.0, 0.0], wht_decompose(X))
        assert c.holds and c.lhs < 1e-15 and c.rhs == 0

    def test_cx(self):
        c = sublinearity_check([0.05] * 4, wht_decompose(gate("CX")))
        assert c.holds and c.lhs <= 0.2

    @given(seeds, st.integers(1, 3))
    def test_random(self, seed, n):
        rng = np.random.default_rng(seed)
        d = wht_decompose(random_unitary(2**n, rng))
        assert sublinearity_check(rng.uniform(-1, 1, size=len(d)), d).holds


class TestLoschmidt:
    def test_same_gate(self, rng):
        u = random_unitary(4, rng)
        assert loschmidt_echo(u, u, random_state(4, rng)) == pytest.approx(1)

    def test_orthogonal(self):
        assert loschmidt_echo(I2, X, np.array([1, 0])) == pytest.approx(0)

    def test_eigenstate(self):
        assert loschmidt_echo(I2, X, np.array([1, 1]) / math.sqrt(2)) == pytest.approx(1)

    def test_unnormalized_rejected(self):
        with pytest.raises(GateEnergyError):
            loschmidt_echo(I2, X, np.array([1, 1]))

    def test_bound_trivial(self, rng):
        u = random_unitary(4, rng)
        rep = loschmidt_bound_check(u, u, haar_states(4, 50, rng))
        assert rep.epsilon < 1e-14 and rep.violations == 0

    def test_bound_tight_on_eigenstate(self):
        d = pauli_decomposition(0.4 * Z)
        up = perturbed_gate(d, [0.2])
        psi = np.array([1.0, 0.0])
        amp = echo_amplitudes(d.unitary(), up, psi)[0]
        assert abs(1 - amp) == pytest.approx(gate_error(d.unitary(), up), rel=1e-12)

    def test_cx_haar(self, rng):
        d = wht_decompose(gate("CX"))
        up = perturbed_gate(d, rng.uniform(-0.3, 0.3, size=4))
        rep = loschmidt_bound_check(gate("CX"), up, haar_states(4, 1000, rng))
        assert rep.violations == 0
        assert np.all(rep.loschmidt_values <= 1 + 1e-12)


class TestSampling:
    def test_rng_streams_reproducible(self):
        a = [r.standard_normal(3) for r in make_rngs(7, 2)]
        b = [r.standard_normal(3) for r in make_rngs(7, 2)]
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert not np.array_equal(a[0], a[1])

    def test_independent_terms_uncorrelated(self):
        e = sample_coefficient_errors(FIELD, 3, 20000, seed=5)
        c = np.corrcoef(e.T)
        assert np.all(np.abs(c[np.triu_indices(3, 1)]) < 0.03)
        np.testing.assert_allclose(e.std(axis=0), math.sqrt(lambda_variance(FIELD)), rtol=0.03)

    def test_shared_terms_correlated(self):
        shared = FieldConfig(FIELD.modes, FIELD.tau, scenario=CouplingScenario.SHARED)
        e = sample_coefficient_errors(shared, 3, 100, seed=5, weights=[1.0, 2.0, -1.0])
        np.testing.assert_allclose(e[:, 1], 2 * e[:, 0])
        np.testing.assert_allclose(e[:, 2], -e[:, 0])

    def test_realized_mean(self):
        cfg = FieldConfig((FieldMode(math.pi, 1j * math.pi / 4, 1.0),), 1.0)
        lam = realized_coefficients(cfg, 20000, seed=3)
        assert lam.mean() == pytest.approx(-1, abs=0.02)

    def test_haar_normalized(self, rng):
        np.testing.assert_allclose(np.linalg.norm(haar_states(8, 10, rng), axis=0), 1)


class TestMonteCarlo:
    def test_zero_variance_field(self):
        quiet = FieldConfig((FieldMode(2 * math.pi, 0j, 1.0),), 1.0)
        rep = mc_verify(wht_decompose(X), quiet, 50, seed=1, n_states=10)
        assert rep.mean_error < 1e-12 and rep.sublinear_violations == 0

    def test_lambda_std_matches_variance(self):
        rep = mc_verify(wht_decompose(X), FIELD, 10000, seed=1, n_states=0)
        assert rep.lambda_std_sample == pytest.approx(math.sqrt(4 / math.pi**2), rel=0.03)
        assert rep.lambda_std_expected == pytest.approx(2 / math.pi)

    def test_cx_no_violations(self):
        rep = mc_verify(wht_decompose(gate("CX")), FIELD, 10000, seed=2, n_states=20)
        assert rep.sublinear_violations == 0
        assert rep.loschmidt_violations == 0
        assert rep.closed_form_mismatches == 0

    def test_reproducible(self):
        d = wht_decompose(gate("CX"))
        a = mc_verify(d, FIELD, 200, seed=9, n_states=5).to_dict()
        b = mc_verify(d, FIELD, 200, seed=9, n_states=5).to_dict()
        c = mc_verify(d, FIELD, 200, seed=10, n_states=5).to_dict()
        assert a == b and a != c

    def test_shared_scenario(self):
        shared = FieldConfig(FIELD.modes, FIELD.tau, scenario=CouplingScenario.SHARED)
        rep = mc_verify(wht_decompose(gate("CX")), shared, 500, seed=4, n_states=10)
        assert rep.scenario == "shared" and rep.sublinear_violations == 0

    def test_explicit_samples(self):
        eps = np.full((3, 2), 0.1)
        rep = mc_verify(wht_decompose(X), FIELD, 3, seed=0, n_states=0, eps_samples=eps)
        assert np.all(rep.sum_abs_eps == pytest.approx(0.2))
        with pytest.raises(DimMismatch):
            mc_verify(wht_decompose(X), FIELD, 3, seed=0, eps_samples=np.zeros((3, 3)))

    def test_requires_samples(self):
        with pytest.raises(GateEnergyError):
            mc_verify(wht_decompose(X), FIELD, 0, seed=0)

    def test_report_keys(self):
        d = mc_verify(wht_decompose(X), FIELD, 5, seed=0, n_states=2, gate="X").to_dict()
        assert {"gate", "n_samples", "seed", "scenario", "mean_error", "std_error", "sublinear_violations", "loschmidt_violations"} <= set(d)
