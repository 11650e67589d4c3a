import numpy as np
import pytest

from pqt import rng
from pqt.hilbert import (
    DensityOperator,
    HADAMARD,
    PAULI_X,
    PAULI_Z,
    StateVector,
    UnitaryOperator,
    basis_state,
    bell_state,
    evolve,
    fidelity,
    maximally_mixed,
    partial_trace,
    pauli_matrix,
    plus_state,
    random_density,
    random_pure_state,
    spectral_decompose,
    tensor,
)


def brute_force_partial_trace(matrix, dims, keep):
    """Elementwise index-contraction oracle for the partial trace."""
    n = len(dims)
    out = np.zeros((dims[keep], dims[keep]), dtype=complex)
    indices = list(np.ndindex(*dims))
    for row in indices:
        for col in indices:
            if all(row[k] == col[k] for k in range(n) if k != keep):
                r = int(np.ravel_multi_index(row, dims))
                c = int(np.ravel_multi_index(col, dims))
                out[row[keep], col[keep]] += matrix[r, c]
    return out


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="not normalized"):
            StateVector([1.0, 1.0])

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError, match="does not factor"):
            StateVector([1.0, 0.0], shape=(3,))

    def test_normalized_classmethod(self):
        state = StateVector.normalized([1.0, 1.0])
        assert state.ray_equal(plus_state())

    def test_amplitudes_are_read_only(self):
        state = basis_state(2, 0)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.0

    def test_ray_equality_ignores_global_phase(self):
        state = plus_state()
        rotated = StateVector(np.exp(0.37j) * state.amplitudes)
        assert state.ray_equal(rotated)
        assert not state.ray_equal(basis_state(2, 0))


class TestDensityOperator:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            DensityOperator(np.array([[0.5, 0.1], [0.3, 0.5]]))

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityOperator(np.eye(2))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValueError, match="negative eigenvalue"):
            DensityOperator(np.diag([1.5, -0.5]))

    def test_purity(self):
        assert maximally_mixed(2).purity() == pytest.approx(0.5)
        assert basis_state(2, 0).to_density().purity() == pytest.approx(1.0)


class TestUnitary:
    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="not unitary"):
            UnitaryOperator(np.array([[1.0, 0.0], [1.0, 1.0]]))

    def test_hadamard_is_unitary(self):
        UnitaryOperator(HADAMARD)


class TestTensor:
    def test_basis_kronecker(self):
        result = tensor(basis_state(2, 0), basis_state(2, 1))
        np.testing.assert_allclose(result.amplitudes, [0, 1, 0, 0])
        assert result.shape == (2, 2)

    def test_identity_matrices(self):
        np.testing.assert_allclose(tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_plus_plus_uniform(self):
        result = tensor(plus_state(), plus_state())
        np.testing.assert_allclose(result.amplitudes, [0.5] * 4)

    def test_density_shapes_concatenate(self):
        result = tensor(maximally_mixed(2), maximally_mixed(3))
        assert result.shape == (2, 3)
        np.testing.assert_allclose(result.matrix, np.eye(6) / 6)

    def test_mixed_kinds_rejected(self):
        with pytest.raises(TypeError):
            tensor(basis_state(2, 0), maximally_mixed(2))


class TestSpectralDecompose:
    def test_pauli_z(self):
        dec = spectral_decompose(PAULI_Z)
        assert dec.eigenvalues == (-1.0, 1.0)
        np.testing.assert_allclose(dec.projectors[0], basis_state(2, 1).projector(), atol=1e-12)
        np.testing.assert_allclose(dec.projectors[1], basis_state(2, 0).projector(), atol=1e-12)

    def test_identity_merges_to_one_outcome(self):
        dec = spectral_decompose(np.eye(2, dtype=complex))
        assert dec.eigenvalues == (1.0,)
        np.testing.assert_allclose(dec.projectors[0], np.eye(2), atol=1e-12)

    def test_near_degenerate_merge(self):
        # Two eigenvalues 1e-12 apart merge under a 1e-9 tolerance; the
        # merged projector must be idempotent with rank 2 (direct check).
        dec = spectral_decompose(np.diag([2.0, 2.0 + 1e-12, 5.0]).astype(complex), degeneracy_tol=1e-9)
        assert len(dec.eigenvalues) == 2
        assert dec.eigenvalues[0] == pytest.approx(2.0, abs=1e-11)
        assert dec.eigenvalues[1] == pytest.approx(5.0)
        merged = dec.projectors[0]
        np.testing.assert_allclose(merged @ merged, merged, atol=1e-10)
        assert np.trace(merged).real == pytest.approx(2.0, abs=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="not Hermitian"):
            spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_projector_algebra_on_random_matrices(self):
        # Completeness, orthogonality and reconstruction for random inputs.
        for seed in range(10):
            g = rng.stream(seed, "spectral")
            dim = int(g.integers(2, 9))
            matrix = np.asarray(g.normal(size=(dim, dim)) + 1j * g.normal(size=(dim, dim)))
            matrix = (matrix + matrix.conj().T) / 2
            dec = spectral_decompose(matrix)
            total = sum(dec.projectors)
            np.testing.assert_allclose(total, np.eye(dim), atol=1e-10)
            for i, p in enumerate(dec.projectors):
                np.testing.assert_allclose(p @ p, p, atol=1e-10)
                for q in dec.projectors[i + 1 :]:
                    np.testing.assert_allclose(p @ q, 0, atol=1e-10)
            np.testing.assert_allclose(dec.reconstruct(), matrix, atol=1e-9)


class TestPartialTrace:
    def test_bell_state_is_maximally_mixed(self):
        reduced = partial_trace(bell_state("phi+"), keep=0)
        np.testing.assert_allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)

    def test_product_state_recovers_factor(self):
        state = tensor(basis_state(2, 0), plus_state())
        reduced = partial_trace(state, keep=0)
        np.testing.assert_allclose(reduced.matrix, basis_state(2, 0).projector(), atol=1e-12)

    def test_mixture_against_contraction_oracle(self):
        zero_zero = tensor(basis_state(2, 0), basis_state(2, 0))
        one_plus = tensor(basis_state(2, 1), plus_state())
        rho = DensityOperator(0.5 * zero_zero.projector() + 0.5 * one_plus.projector(), (2, 2))
        reduced = partial_trace(rho, keep=1)
        expected = 0.5 * basis_state(2, 0).projector() + 0.5 * plus_state().projector()
        np.testing.assert_allclose(reduced.matrix, expected, atol=1e-12)
        oracle = brute_force_partial_trace(rho.matrix, (2, 2), keep=1)
        np.testing.assert_allclose(reduced.matrix, oracle, atol=1e-12)

    def test_random_states_match_oracle(self):
        for seed in range(6):
            g = rng.stream(seed, "ptrace")
            dims = (2, 3) if seed % 2 else (3, 2)
            rho = random_density(dims[0] * dims[1], g).with_shape(dims)
            for keep in (0, 1):
                reduced = partial_trace(rho, keep)
                oracle = brute_force_partial_trace(rho.matrix, dims, keep)
                np.testing.assert_allclose(reduced.matrix, oracle, atol=1e-12)

    def test_expectation_compatibility(self):
        # Tr[(X tensor I) rho] = Tr[X Tr_B rho] for random rho and X.
        g = rng.stream(3, "ptrace/compat")
        rho = random_density(4, g).with_shape((2, 2))
        reduced = partial_trace(rho, keep=0)
        for _ in range(5):
            x = g.normal(size=(2, 2)) + 1j * g.normal(size=(2, 2))
            x = (x + x.conj().T) / 2
            lhs = np.trace(np.kron(x, np.eye(2)) @ rho.matrix)
            rhs = np.trace(x @ reduced.matrix)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_tensor_then_trace_recovers_factors(self):
        g = rng.stream(5, "ptrace/roundtrip")
        a = random_density(2, g)
        b = random_density(3, g)
        product = tensor(a, b)
        np.testing.assert_allclose(partial_trace(product, 0).matrix, a.matrix, atol=1e-12)
        np.testing.assert_allclose(partial_trace(product, 1).matrix, b.matrix, atol=1e-12)

    def test_invalid_subsystem_index(self):
        with pytest.raises(ValueError, match="out of range"):
            partial_trace(bell_state("phi+"), keep=2)
        with pytest.raises(ValueError, match="two subsystems"):
            partial_trace(maximally_mixed(2), keep=0)


class TestFidelity:
    def test_identical_states(self):
        assert fidelity(basis_state(2, 0), basis_state(2, 0)) == pytest.approx(1.0)

    def test_orthogonal_states(self):
        assert fidelity(basis_state(2, 0), basis_state(2, 1)) == pytest.approx(0.0, abs=1e-12)

    def test_half_overlap(self):
        assert fidelity(basis_state(2, 0), plus_state()) == pytest.approx(0.5)

    def test_pure_mixed_agrees_with_pure_pure(self):
        psi = random_pure_state(3, rng.stream(1, "fid"))
        phi = random_pure_state(3, rng.stream(2, "fid"))
        assert fidelity(psi, phi.to_density()) == pytest.approx(fidelity(psi, phi), abs=1e-12)

    def test_mixed_mixed_symmetric_and_bounded(self):
        g = rng.stream(4, "fid/mixed")
        for _ in range(5):
            a = random_density(3, g)
            b = random_density(3, g)
            f_ab = fidelity(a, b)
            f_ba = fidelity(b, a)
            assert f_ab == pytest.approx(f_ba, abs=1e-10)
            assert 0.0 <= f_ab <= 1.0
        assert fidelity(a, a) == pytest.approx(1.0, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            fidelity(basis_state(2, 0), basis_state(3, 0))


class TestEvolve:
    def test_hadamard_on_zero(self):
        result = evolve(basis_state(2, 0), UnitaryOperator(HADAMARD))
        assert result.ray_equal(plus_state())

    def test_identity_on_density(self):
        rho = maximally_mixed(2)
        result = evolve(rho, UnitaryOperator(np.eye(2)))
        np.testing.assert_allclose(result.matrix, rho.matrix)

    def test_z_flips_plus_to_minus(self):
        result = evolve(plus_state(), UnitaryOperator(PAULI_Z))
        minus = StateVector(np.array([1.0, -1.0]) / np.sqrt(2))
        assert result.ray_equal(minus)

    def test_invariants_preserved_on_random_input(self):
        g = rng.stream(8, "evolve")
        for _ in range(5):
            mat = g.normal(size=(4, 4)) + 1j * g.normal(size=(4, 4))
            q, _ = np.linalg.qr(mat)
            unitary = UnitaryOperator(q)
            psi = random_pure_state(4, g)
            assert abs(np.linalg.norm(evolve(psi, unitary).amplitudes) - 1) < 1e-12
            rho = random_density(4, g)
            out = evolve(rho, unitary)
            assert abs(np.trace(out.matrix).real - 1) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            evolve(basis_state(2, 0), UnitaryOperator(np.eye(4)))


def test_pauli_matrix_strings():
    np.testing.assert_allclose(pauli_matrix("ZX"), np.kron(PAULI_Z, PAULI_X))
    with pytest.raises(ValueError, match="invalid Pauli label"):
        pauli_matrix("Q")


def test_bell_states_are_orthonormal():
    names = ["phi+", "phi-", "psi+", "psi-"]
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            overlap = abs(np.vdot(bell_state(a).amplitudes, bell_state(b).amplitudes)) ** 2
            assert overlap == pytest.approx(1.0 if i == j else 0.0, abs=1e-12)
