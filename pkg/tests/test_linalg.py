"""Tests for the dense operator layer."""

import json
import math

import numpy as np
import pytest
import scipy.linalg
from conftest import degenerate_unitary, random_state, random_unitary
from hypothesis import given
from hypothesis import strategies as st

from gatenergy.errors import (
    BadIndex,
    BadMatrixFile,
    DimMismatch,
    NotHermitian,
    NotUnitary,
)
from gatenergy.gates import I2, H, X, Y, Z, rotation
from gatenergy.linalg import (
    as_matrix,
    canonical_eigenbasis,
    density,
    embed,
    exp_i_generator,
    is_hermitian,
    is_unitary,
    kron,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    n_qubits_of,
    operator_norm,
    partial_trace,
    reduced_state,
    save_matrix,
    schmidt_coefficients,
    spectral_decompose_unitary,
    validate_density,
    wrap_phase,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(I2, I2), np.eye(4))

    def test_xx_antidiagonal(self):
        assert np.array_equal(kron(X, X), np.fliplr(np.eye(4)))

    def test_zz_diagonal(self):
        assert np.array_equal(kron(Z, Z), np.diag([1, -1, -1, 1]))

    def test_first_factor_is_most_significant(self):
        # X on qubit 0 flips the high bit: |00> -> |10> = index 2
        v = kron(X, I2)[:, 0]
        assert v[2] == 1

    def test_empty_product_is_scalar_one(self):
        assert kron().shape == (1, 1)

    @given(seeds)
    def test_associativity(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
        np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-14, rtol=0)

    def test_rejects_non_square(self):
        with pytest.raises(DimMismatch):
            kron(np.ones((2, 3)))


class TestStructureChecks:
    def test_identity_unitary(self):
        assert is_unitary(I2, 1e-12)

    def test_diag_not_unitary(self):
        assert not is_unitary(np.diag([1, 2]), 1e-12)

    def test_hadamard_unitary(self):
        assert is_unitary(np.array([[1, 1], [1, -1]]) / math.sqrt(2), 1e-12)

    def test_hermitian(self):
        assert is_hermitian(Y)
        assert not is_hermitian(1j * Y)

    def test_n_qubits(self):
        assert n_qubits_of(1) == 0
        assert n_qubits_of(8) == 3
        with pytest.raises(DimMismatch):
            n_qubits_of(6)

    def test_as_matrix_rejects_vector(self):
        with pytest.raises(DimMismatch):
            as_matrix(np.ones(4))


class TestWrapPhase:
    def test_minus_pi_maps_to_plus_pi(self):
        assert wrap_phase(-np.pi) == pytest.approx(np.pi)
        assert wrap_phase(np.pi) == pytest.approx(np.pi)

    def test_range(self):
        t = wrap_phase(np.linspace(-20, 20, 1001))
        assert np.all(t > -np.pi) and np.all(t <= np.pi)


class TestSpectralDecomposition:
    def test_x_phases_and_vectors(self):
        sf = spectral_decompose_unitary(X)
        np.testing.assert_allclose(sorted(sf.eigenphases), [0, np.pi], atol=1e-12)
        plus = np.array([1, 1]) / math.sqrt(2)
        minus = np.array([1, -1]) / math.sqrt(2)
        for theta, w in zip(sf.eigenphases, sf.eigenvectors.T):
            target = plus if abs(theta) < 1e-9 else minus
            assert abs(abs(np.vdot(target, w)) - 1) < 1e-12

    def test_minus_one_eigenvalue_is_plus_pi(self):
        sf = spectral_decompose_unitary(-I2)
        np.testing.assert_allclose(sf.eigenphases, [np.pi, np.pi], atol=0)

    def test_identity(self):
        sf = spectral_decompose_unitary(I2)
        np.testing.assert_array_equal(sf.eigenphases, [0, 0])
        np.testing.assert_array_equal(sf.eigenvectors, np.eye(2))

    def test_rz_half_pi(self):
        sf = spectral_decompose_unitary(rotation("Z", np.pi / 2))
        np.testing.assert_allclose(sf.eigenphases, [-np.pi / 4, np.pi / 4], atol=1e-15)

    def test_not_unitary(self):
        with pytest.raises(NotUnitary):
            spectral_decompose_unitary(np.diag([1, 2]))

    def test_diagonal_input_has_identity_basis(self):
        u = np.diag(np.exp(1j * np.array([0.3, 0.3, -2.0, 0.3])))
        assert np.array_equal(spectral_decompose_unitary(u).eigenvectors, np.eye(4))

    @given(seeds, st.integers(min_value=1, max_value=4))
    def test_reconstruction_random(self, seed, n):
        rng = np.random.default_rng(seed)
        u = random_unitary(2**n, rng)
        sf = spectral_decompose_unitary(u)
        w = sf.eigenvectors
        assert operator_norm(w @ w.conj().T - np.eye(2**n)) < 1e-12
        assert np.all(sf.eigenphases > -np.pi) and np.all(sf.eigenphases <= np.pi)
        # exp of the principal generator reproduces the input
        k = (w * sf.eigenphases) @ w.conj().T
        assert operator_norm(exp_i_generator(0.5 * (k + k.conj().T)) - u) < 1e-10

    @given(seeds, st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=3))
    def test_reconstruction_degenerate(self, seed, n, n_distinct):
        rng = np.random.default_rng(seed)
        u = degenerate_unitary(2**n, rng, n_distinct)
        sf = spectral_decompose_unitary(u)
        assert operator_norm(sf.reconstruct() - u) < 1e-10

    def test_degenerate_basis_is_deterministic(self, rng):
        u = degenerate_unitary(8, rng, 2)
        a = spectral_decompose_unitary(u).eigenvectors
        b = spectral_decompose_unitary(u.copy()).eigenvectors
        assert np.array_equal(a, b)

    def test_degenerate_columns_anchor_to_computational_basis(self):
        # CX: eigenvalue 1 on a 3-dim space containing |00>, |01>, |+>|1>-ish
        cx = np.eye(4, dtype=complex)
        cx[2:, 2:] = X
        w = spectral_decompose_unitary(cx).eigenvectors
        # untouched computational states stay exactly themselves
        assert abs(w[0, 0] - 1) < 1e-12 and abs(w[1, 1] - 1) < 1e-12
        diag = np.diag(w)
        assert np.all(np.abs(diag.imag) < 1e-12) and np.all(diag.real > 0)


class TestCanonicalEigenbasis:
    def test_full_space_gives_identity(self):
        w, owner = canonical_eigenbasis([np.eye(4, dtype=complex)], 4)
        np.testing.assert_allclose(w, np.eye(4), atol=1e-15)
        assert list(owner) == [0, 0, 0, 0]

    def test_columns_span_given_spaces(self, rng):
        q = random_unitary(4, rng)
        spaces = [q[:, :1], q[:, 1:3], q[:, 3:]]
        w, owner = canonical_eigenbasis(spaces, 4)
        for j in range(4):
            proj = spaces[owner[j]] @ spaces[owner[j]].conj().T
            np.testing.assert_allclose(proj @ w[:, j], w[:, j], atol=1e-12)
        assert sorted(np.bincount(owner)) == [1, 1, 2]


class TestExpIGenerator:
    def test_zero(self):
        np.testing.assert_array_equal(exp_i_generator(np.zeros((2, 2))), I2)

    def test_x_from_projector_form(self):
        np.testing.assert_allclose(exp_i_generator(np.pi / 2 * (I2 - X)), X, atol=1e-12)

    def test_rz(self):
        np.testing.assert_allclose(exp_i_generator(-np.pi / 4 * Z), rotation("Z", np.pi / 2), atol=1e-14)

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            exp_i_generator(1j * X)

    @given(seeds)
    def test_matches_scipy_expm(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        k = a + a.conj().T
        np.testing.assert_allclose(exp_i_generator(k), scipy.linalg.expm(1j * k), atol=1e-11)


class TestOperatorNorm:
    def test_identity(self):
        assert operator_norm(I2) == pytest.approx(1)

    def test_diag(self):
        assert operator_norm(np.diag([1, -2])) == pytest.approx(2)

    def test_scalar_phase(self):
        assert operator_norm((1 - np.exp(0.1j)) * I2) == pytest.approx(2 * math.sin(0.05), rel=1e-12)
        assert operator_norm((1 - np.exp(0.1j)) * I2) == pytest.approx(0.0999583, abs=1e-7)

    def test_empty(self):
        assert operator_norm(np.zeros((0, 0))) == 0.0

    @given(seeds)
    def test_submultiplicative_and_triangle(self, seed):
        rng = np.random.default_rng(seed)
        a, b = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(2))
        na, nb = operator_norm(a), operator_norm(b)
        assert operator_norm(a @ b) <= na * nb + 1e-12
        assert operator_norm(a + b) <= na + nb + 1e-12

    @given(seeds)
    def test_matches_largest_singular_value(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        # oracle: square root of the top eigenvalue of a^dagger a
        top = np.linalg.eigvalsh(a.conj().T @ a)[-1]
        assert operator_norm(a) == pytest.approx(math.sqrt(top), rel=1e-12)


class TestPartialTrace:
    def test_product_state(self):
        rho = density(np.array([1, 0, 0, 0]))
        np.testing.assert_allclose(partial_trace(rho, {0}), np.diag([1, 0]))

    def test_bell_state(self):
        bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
        np.testing.assert_allclose(partial_trace(density(bell), {0}), I2 / 2, atol=1e-15)

    def test_keep_second_qubit(self):
        rho = kron(np.diag([1, 0]), np.diag([0, 1]))
        np.testing.assert_allclose(partial_trace(rho, {1}), np.diag([0, 1]))

    def test_bad_index(self):
        with pytest.raises(BadIndex):
            partial_trace(np.eye(4) / 4, {2})
        with pytest.raises(BadIndex):
            partial_trace(np.eye(4) / 4, set())

    @given(seeds, st.sets(st.integers(0, 2), min_size=1, max_size=3))
    def test_valid_density_result(self, seed, keep):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        r = partial_trace(rho, keep)
        assert abs(np.trace(r) - 1) < 1e-12
        assert np.linalg.eigvalsh(r).min() >= -1e-10

    @given(seeds)
    def test_matches_kron_oracle(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = kron(a, b)
        np.testing.assert_allclose(partial_trace(rho, {0}), a * np.trace(b), atol=1e-12)
        np.testing.assert_allclose(partial_trace(rho, {1, 2}), b * np.trace(a), atol=1e-12)

    @given(seeds, st.sets(st.integers(0, 2), min_size=1, max_size=2))
    def test_pure_state_shortcut_agrees(self, seed, keep):
        psi = random_state(8, np.random.default_rng(seed))
        np.testing.assert_allclose(reduced_state(psi, keep), partial_trace(density(psi), keep), atol=1e-13)
        sv = schmidt_coefficients(psi, keep)
        assert sum(sv**2) == pytest.approx(1, abs=1e-12)


class TestEmbed:
    def test_matches_kron_in_order(self, rng):
        a = random_unitary(2, rng)
        np.testing.assert_allclose(embed(a, [1], 3), kron(I2, a, I2))

    def test_reversed_qubits_swap_roles(self):
        cx = np.eye(4, dtype=complex)
        cx[2:, 2:] = X
        swapped = embed(cx, [1, 0], 2)
        # control on qubit 1, target on qubit 0: |01> -> |11>
        assert swapped[3, 1] == 1

    def test_bad_indices(self):
        with pytest.raises(BadIndex):
            embed(X, [3], 2)
        with pytest.raises(DimMismatch):
            embed(X, [0, 1], 2)


class TestDensityValidation:
    def test_accepts_mixed(self):
        validate_density(I2 / 2)

    @pytest.mark.parametrize("rho", [np.diag([0.5, 0.6]), np.diag([1.5, -0.5]), np.array([[0.5, 1], [0, 0.5]])])
    def test_rejects(self, rho):
        from gatenergy.errors import NotDensityOperator

        with pytest.raises(NotDensityOperator):
            validate_density(rho)


class TestMatrixFiles:
    def test_round_trip(self, tmp_path, rng):
        u = random_unitary(4, rng)
        path = tmp_path / "u.json"
        save_matrix(path, u)
        np.testing.assert_array_equal(load_matrix(path), u)

    def test_format_is_rows_of_pairs(self):
        data = matrix_to_json(np.array([[1, 1j], [0, -1]]))
        assert data == [[[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [-1.0, 0.0]]]

    @pytest.mark.parametrize(
        "data",
        [
            [[[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]], [[0, 0], [0, 0], [1, 0]]],
            [[[1, 0], [0, 0]]],
            [[1, 0], [0, 1]],
            "nonsense",
        ],
    )
    def test_rejects_bad_shapes(self, data):
        with pytest.raises(BadMatrixFile):
            matrix_from_json(data)

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(BadMatrixFile):
            load_matrix(p)

    def test_json_is_plain(self, tmp_path):
        p = tmp_path / "h.json"
        save_matrix(p, H)
        assert len(json.loads(p.read_text())) == 2
