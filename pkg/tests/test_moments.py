import numpy as np
import pytest
from numpy.testing import assert_allclose

from momentshift.moments import (
    cyclic_permutation,
    moment_observable,
    necklace_set,
    permutation_eigenprojectors,
)
from momentshift.operators import (
    I2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    random_density_matrix,
    tensor_product,
)
from conftest import true_moment


def _copies(rho, k):
    out = rho
    for _ in range(k - 1):
        out = tensor_product(out, rho)
    return out


class TestCyclicPermutation:
    def test_swap(self):
        s = cyclic_permutation(2, 2)
        assert_allclose(s.entries,
                        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])

    def test_shift_action(self):
        s = cyclic_permutation(3, 2)
        v = np.zeros(8)
        v[0b011] = 1.0
        out = s.entries @ v
        assert out[0b110] == 1.0 and np.sum(np.abs(out)) == 1.0

    @pytest.mark.parametrize("k,d", [(2, 2), (3, 2), (4, 2), (3, 3)])
    def test_unitary(self, k, d):
        s = cyclic_permutation(k, d).entries
        assert_allclose(s @ s.conj().T, np.eye(d ** k), atol=1e-14)

    def test_dagger_inverse_shift(self):
        s = cyclic_permutation(3, 2)
        v = np.zeros(8)
        v[0b110] = 1.0
        out = s.entries.conj().T @ v
        assert out[0b011] == 1.0

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            cyclic_permutation(13, 2)


class TestMomentObservable:
    def test_h2_pauli_form(self):
        expect = (np.kron(I2, I2) + np.kron(PAULI_X, PAULI_X)
                  + np.kron(PAULI_Y, PAULI_Y) + np.kron(PAULI_Z, PAULI_Z)) / 2
        assert_allclose(moment_observable(2, 2).matrix.entries, expect)

    def test_maximally_mixed_purity(self):
        from momentshift.operators import Operator
        h = moment_observable(2, 2).matrix
        rho = Operator(np.eye(2) / 2)
        val = np.trace(h.entries @ _copies(rho, 2).entries).real
        assert_allclose(val, 0.5)

    def test_pure_state_all_orders(self):
        from momentshift.operators import random_pure_state
        rho = random_pure_state(2, 5)
        for k in (2, 3, 5):
            h = moment_observable(k, 2).matrix
            assert_allclose(np.trace(h.entries @ _copies(rho, k).entries).real, 1.0,
                            atol=1e-10)

    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_trace_identity_many_states(self, k):
        h = moment_observable(k, 2).matrix
        s = cyclic_permutation(k, 2).entries
        for seed in range(100):
            rho = random_density_matrix(2, seed)
            joint = _copies(rho, k).entries
            truth = true_moment(rho, k)
            assert abs(np.trace(s @ joint).real - truth) < 1e-10
            assert abs(np.trace(s.conj().T @ joint).real - truth) < 1e-10
            assert abs(np.trace(h.entries @ joint).real - truth) < 1e-10

    def test_eigenvalue_bound(self):
        for k in (2, 3, 4, 5):
            w = np.linalg.eigvalsh(moment_observable(k, 2).matrix.entries)
            assert w.min() >= -1 - 1e-12 and w.max() <= 1 + 1e-12

    def test_raw_kind(self):
        raw = moment_observable(3, 2, kind="raw")
        assert raw.kind == "raw"
        assert_allclose(raw.matrix.entries, cyclic_permutation(3, 2).entries)
        with pytest.raises(ValueError):
            moment_observable(3, 2, kind="weird")


class TestNecklaces:
    def test_k3_d2_canonical(self):
        assert necklace_set(3, 2) == [(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)]

    def test_k2_cardinality(self):
        assert len(necklace_set(2, 2)) == (2 ** 2 - 2) // 2 + 2

    @pytest.mark.parametrize("k,d", [(2, 2), (3, 2), (5, 2), (3, 3)])
    def test_prime_order_cardinality(self, k, d):
        assert len(necklace_set(k, d)) == (d ** k - d) // k + d

    def test_rotations_cover_everything(self):
        from itertools import product
        reps = necklace_set(3, 2)
        covered = set()
        for x in reps:
            for l in range(3):
                covered.add(x[l:] + x[:l])
        assert covered == set(product(range(2), repeat=3))


class TestSpectrum:
    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_reconstruction(self, k):
        spec = permutation_eigenprojectors(k, 2)
        om = np.exp(2j * np.pi / k)
        s = sum(om ** (-m) * spec.projectors[m].entries for m in range(k))
        assert np.max(np.abs(s - cyclic_permutation(k, 2).entries)) < 1e-12

    def test_projector_orthogonality(self):
        spec = permutation_eigenprojectors(4, 2)
        for m in range(4):
            for mp in range(4):
                prod = spec.projectors[m].entries @ spec.projectors[mp].entries
                ref = spec.projectors[m].entries if m == mp else np.zeros((16, 16))
                assert np.max(np.abs(prod - ref)) < 1e-10

    def test_rank_counts(self):
        assert permutation_eigenprojectors(2, 2).projector_ranks() == (3, 1)
        assert permutation_eigenprojectors(3, 2).projector_ranks() == (4, 2, 2)

    def test_total_dimension(self):
        for k, d in ((3, 2), (4, 2), (5, 2), (3, 3)):
            spec = permutation_eigenprojectors(k, d)
            assert sum(spec.projector_ranks()) == d ** k

    def test_fixed_points_only_in_m0(self):
        spec = permutation_eigenprojectors(3, 2)
        constant = [(0, 0, 0), (1, 1, 1)]
        for x in constant:
            assert (0, x) in spec.eigenstates
            assert (1, x) not in spec.eigenstates

    def test_eigenstates_orthonormal(self):
        spec = permutation_eigenprojectors(4, 2)
        vecs = list(spec.eigenstates.values())
        g = np.array([[v.conj() @ w for w in vecs] for v in vecs])
        assert np.max(np.abs(g - np.eye(len(vecs)))) < 1e-10
