import numpy as np
import pytest
from numpy.testing import assert_allclose

from momentshift.operators import (
    I2,
    Operator,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    devectorize,
    effective_rank,
    hermitian_eig,
    identity,
    partial_trace,
    partial_transpose,
    random_density_matrix,
    tensor_product,
    vectorize,
)
from momentshift.moments import moment_observable


class TestTensorProduct:
    def test_identity_case(self):
        out = tensor_product(identity(2), identity(2))
        assert_allclose(out.entries, np.eye(4))
        assert out.subsystem_dims == (2, 2)

    def test_pauli_xx_antidiagonal(self):
        out = tensor_product(Operator(PAULI_X), Operator(PAULI_X))
        assert_allclose(out.entries, np.fliplr(np.eye(4)))

    def test_purity_multiplies(self):
        # direct matrix-multiplication oracle on a purity-0.7 state
        rho = Operator(np.diag([(1 + np.sqrt(0.4)) / 2, (1 - np.sqrt(0.4)) / 2]))
        assert_allclose(np.trace(rho.entries @ rho.entries).real, 0.7)
        out = tensor_product(rho, rho)
        assert_allclose(out.trace().real, 1.0)
        assert_allclose(np.trace(out.entries @ out.entries).real, 0.49)

    def test_index_law(self, rho_pair):
        a, b = rho_pair
        out = tensor_product(a, b)
        for (i, j, k, l) in [(0, 1, 0, 0), (1, 0, 1, 1), (1, 1, 0, 1)]:
            assert out.entries[i * 2 + k, j * 2 + l] == a.entries[i, j] * b.entries[k, l]


class TestPartialTrace:
    def test_product_state(self):
        zz = np.zeros((4, 4), dtype=complex)
        zz[0, 0] = 1.0
        out = partial_trace(Operator(zz, (2, 2)), [0])
        assert_allclose(out.entries, [[1, 0], [0, 0]])

    def test_bell_marginal(self):
        phi = np.zeros(4)
        phi[0] = phi[3] = 1 / np.sqrt(2)
        out = partial_trace(Operator(np.outer(phi, phi), (2, 2)), [1])
        assert_allclose(out.entries, np.eye(2) / 2)

    def test_index_sum_oracle(self):
        rho = random_density_matrix(4, 5, subsystem_dims=(2, 2))
        manual = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for a in range(2):
                for b in range(2):
                    manual[a, b] += rho.entries[a * 2 + i, b * 2 + i]
        assert_allclose(partial_trace(rho, [0]).entries, manual, atol=1e-14)

    def test_full_trace(self):
        rho = random_density_matrix(8, 3, subsystem_dims=(2, 2, 2))
        out = partial_trace(rho, [])
        assert abs(out.entries[0, 0] - rho.trace()) < 1e-12

    def test_invalid_subsystem(self):
        with pytest.raises(ValueError):
            partial_trace(random_density_matrix(4, 0, subsystem_dims=(2, 2)), [2])

    def test_keep_order(self):
        rho = random_density_matrix(8, 9, subsystem_dims=(2, 2, 2))
        swapped = partial_trace(rho, [2, 0])
        direct = partial_trace(rho, [0, 2])
        assert_allclose(swapped.entries.reshape(2, 2, 2, 2),
                        direct.entries.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2),
                        atol=1e-14)


class TestVectorization:
    def test_ketbra_position(self):
        v = vectorize(Operator([[0, 1], [0, 0]]))
        expect = np.zeros(4)
        expect[1 * 2 + 0] = 1.0
        assert_allclose(v.entries, expect)

    def test_identity(self):
        assert_allclose(vectorize(identity(2)).entries, [1, 0, 0, 1])

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        assert_allclose(devectorize(vectorize(Operator(m))).entries, m)

    def test_linearity(self, rho_pair):
        a, b = rho_pair
        lhs = vectorize(Operator(2.0 * a.entries + (1 - 3j) * b.entries)).entries
        rhs = 2.0 * vectorize(a).entries + (1 - 3j) * vectorize(b).entries
        assert_allclose(lhs, rhs)

    def test_bad_length(self):
        from momentshift.operators import VectorizedOperator
        with pytest.raises(ValueError):
            VectorizedOperator(np.zeros(5))


class TestHermitianEig:
    def test_pauli_z(self):
        w, _ = hermitian_eig(Operator(PAULI_Z))
        assert_allclose(w, [-1, 1])

    def test_swap(self):
        from momentshift.moments import cyclic_permutation
        w, v = hermitian_eig(cyclic_permutation(2, 2))
        assert_allclose(w, [-1, 1, 1, 1])
        assert_allclose(v @ v.conj().T, np.eye(4), atol=1e-10)

    def test_h3_spectrum(self):
        # spectral values cos(2 pi m / 3) of the symmetrized 3-cycle
        w, _ = hermitian_eig(moment_observable(3, 2).matrix)
        assert set(np.round(w, 10)) == {-0.5, 1.0}

    def test_reconstruction(self):
        a = random_density_matrix(6, 8)
        w, v = hermitian_eig(a)
        assert_allclose((v * w) @ v.conj().T, a.entries, atol=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            hermitian_eig(Operator([[0, 1], [0, 0]]))


class TestEffectiveRank:
    def test_swap_full(self):
        h2 = moment_observable(2, 2).matrix
        assert effective_rank(h2, [0]) == 4
        assert effective_rank(h2, [1]) == 4

    def test_product_operator(self):
        assert effective_rank(identity((2, 2)), [0]) == 1

    def test_schmidt_oracle(self):
        rng = np.random.default_rng(17)
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        o = Operator(m + m.conj().T, (2, 2))
        # Schmidt coefficients of the vectorized operator across (row,col) cut
        t = o.entries.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
        sv = np.linalg.svd(t, compute_uv=False)
        expected = int(np.sum(sv > 1e-9 * sv[0]))
        assert effective_rank(o, [0]) == expected

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_moment_observable_full_rank(self, k):
        h = moment_observable(k, 2).matrix
        for copy in range(k):
            assert effective_rank(h, [copy]) == 4


class TestPartialTranspose:
    def test_involution(self):
        rho = random_density_matrix(4, 2, subsystem_dims=(2, 2))
        out = partial_transpose(partial_transpose(rho, [1]), [1])
        assert_allclose(out.entries, rho.entries)

    def test_both_equals_full(self):
        rho = random_density_matrix(4, 6, subsystem_dims=(2, 2))
        assert_allclose(partial_transpose(rho, [0, 1]).entries, rho.entries.T)


def test_operator_validation():
    with pytest.raises(ValueError):
        Operator(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        Operator(np.eye(4), (2, 3))


def test_hermiticity_predicate():
    assert Operator(PAULI_Y).is_hermitian()
    assert not Operator([[0, 1], [0, 0]]).is_hermitian()
