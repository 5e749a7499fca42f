import numpy as np
import pytest
from numpy.testing import assert_allclose

from momentshift.channels import (
    Channel,
    adjoint_apply,
    amplitude_damping,
    apply,
    channel_from_json,
    channel_matrix,
    channel_to_json,
    choi_of,
    compose,
    depolarizing,
    identity_channel,
    is_invertible,
    link_product,
    tensor_power,
)
from momentshift.operators import (
    Operator,
    PAULI_Z,
    identity,
    matrix_rank,
    partial_trace,
    random_density_matrix,
    tensor_product,
    vectorize,
)


class TestDepolarizing:
    def test_eps_zero_identity(self):
        rho = random_density_matrix(2, 0)
        assert_allclose(apply(depolarizing(0.0, 2), rho).entries, rho.entries, atol=1e-14)

    def test_formula_on_ground_state(self):
        out = apply(depolarizing(0.1, 2), Operator([[1, 0], [0, 0]]))
        assert_allclose(out.entries, np.diag([0.95, 0.05]), atol=1e-14)

    def test_fully_mixing(self):
        for seed in range(3):
            rho = random_density_matrix(2, seed)
            out = apply(depolarizing(1.0, 2), rho)
            assert_allclose(out.entries, np.eye(2) / 2, atol=1e-14)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            depolarizing(1.5, 2)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_qudit_action_and_cptp(self, d):
        eps = 0.3
        c = depolarizing(eps, d)
        assert c.is_cptp()
        rho = random_density_matrix(d, d)
        out = apply(c, rho)
        assert_allclose(out.entries, (1 - eps) * rho.entries + eps * np.eye(d) / d,
                        atol=1e-12)


class TestAmplitudeDamping:
    def test_excited_state(self):
        out = apply(amplitude_damping(0.2), Operator([[0, 0], [0, 1]]))
        assert_allclose(out.entries, np.diag([0.2, 0.8]), atol=1e-14)

    def test_eps_zero(self):
        rho = random_density_matrix(2, 1)
        assert_allclose(apply(amplitude_damping(0.0), rho).entries, rho.entries)

    def test_general_state_matrix(self):
        eps = 0.35
        rho = random_density_matrix(2, 7)
        r = rho.entries
        expect = np.array([
            [r[0, 0] + eps * r[1, 1], np.sqrt(1 - eps) * r[0, 1]],
            [np.sqrt(1 - eps) * r[1, 0], (1 - eps) * r[1, 1]],
        ])
        assert_allclose(apply(amplitude_damping(eps), rho).entries, expect, atol=1e-14)

    def test_cptp(self):
        assert amplitude_damping(0.6).is_cptp()


class TestChoi:
    def test_identity_channel(self):
        j = choi_of(identity_channel(2))
        assert matrix_rank(j.entries) == 1
        assert_allclose(j.trace().real, 2.0)

    def test_full_depolarizing(self):
        j = choi_of(depolarizing(1.0, 2))
        assert_allclose(j.entries, np.kron(np.eye(2), np.eye(2) / 2), atol=1e-14)

    def test_choi_apply_consistent(self):
        c = amplitude_damping(0.25)
        via_choi = Channel(2, 2, choi=c.choi)
        for seed in range(4):
            rho = random_density_matrix(2, seed)
            assert_allclose(apply(via_choi, rho).entries, apply(c, rho).entries,
                            atol=1e-12)
            obs = random_density_matrix(2, seed + 50)
            assert_allclose(adjoint_apply(via_choi, obs).entries,
                            adjoint_apply(c, obs).entries, atol=1e-12)

    def test_builtin_channels_cptp(self):
        for c in (depolarizing(0.3, 2), amplitude_damping(0.4), identity_channel(3)):
            j = c.choi
            assert j.min_eigenvalue() >= -1e-9
            marg = partial_trace(j.with_dims((c.in_dim, c.out_dim)), [0])
            assert_allclose(marg.entries, np.eye(c.in_dim), atol=1e-9)


class TestAdjointDuality:
    def test_duality_random_pairs(self):
        c = amplitude_damping(0.3)
        for seed in range(5):
            rho = random_density_matrix(2, seed)
            obs = random_density_matrix(2, 100 + seed)
            lhs = np.trace(obs.entries @ apply(c, rho).entries)
            rhs = np.trace(adjoint_apply(c, obs).entries @ rho.entries)
            assert abs(lhs - rhs) < 1e-10

    def test_adjoint_unital(self):
        for c in (depolarizing(0.7, 2), amplitude_damping(0.2)):
            assert_allclose(adjoint_apply(c, identity(2)).entries, np.eye(2),
                            atol=1e-12)
        nk = tensor_power(depolarizing(0.3, 2), 3)
        assert_allclose(adjoint_apply(nk, identity((2, 2, 2))).entries, np.eye(8),
                        atol=1e-12)

    def test_depolarizing_contracts_traceless(self):
        out = adjoint_apply(depolarizing(0.3, 2), Operator(PAULI_Z))
        assert_allclose(out.entries, 0.7 * PAULI_Z, atol=1e-12)


class TestTensorPower:
    def test_k1_same(self):
        c = amplitude_damping(0.1)
        assert tensor_power(c, 1) is c

    def test_k_below_one(self):
        with pytest.raises(ValueError):
            tensor_power(identity_channel(2), 0)

    def test_product_action(self, rho_pair):
        a, b = rho_pair
        de = depolarizing(0.2, 2)
        joint = apply(tensor_power(de, 2), tensor_product(a, b))
        expect = np.kron(apply(de, a).entries, apply(de, b).entries)
        assert_allclose(joint.entries, expect, atol=1e-12)

    def test_four_term_expansion(self):
        # (1-e)^2 rho x rho + e(1-e)/2 I x rho + (1-e)e/2 rho x I + e^2/4 I x I
        eps = 0.3
        rho = random_density_matrix(2, 4)
        joint = apply(tensor_power(depolarizing(eps, 2), 2),
                      tensor_product(rho, rho))
        r, eye = rho.entries, np.eye(2)
        expect = ((1 - eps) ** 2 * np.kron(r, r)
                  + eps * (1 - eps) / 2 * np.kron(eye, r)
                  + (1 - eps) * eps / 2 * np.kron(r, eye)
                  + eps ** 2 / 4 * np.kron(eye, eye))
        assert_allclose(joint.entries, expect, atol=1e-12)

    def test_cptp_k3(self):
        assert tensor_power(amplitude_damping(0.25), 3).is_cptp()


class TestChannelMatrix:
    def test_identity(self):
        m = channel_matrix(identity_channel(2)).entries
        assert_allclose(m, np.eye(4))

    def test_vec_action(self):
        rng = np.random.default_rng(3)
        c = amplitude_damping(0.45)
        m = channel_matrix(c).entries
        x = Operator(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        assert_allclose(m @ vectorize(x).entries, vectorize(apply(c, x)).entries,
                        atol=1e-12)

    def test_full_depolarizing_rank_one(self):
        assert matrix_rank(channel_matrix(depolarizing(1.0, 2)).entries) == 1

    def test_de_half_spectrum(self):
        w = np.linalg.eigvals(channel_matrix(depolarizing(0.5, 2)).entries)
        assert_allclose(sorted(w.real), [0.5, 0.5, 0.5, 1.0], atol=1e-12)
        assert_allclose(w.imag, 0, atol=1e-12)


class TestInvertibility:
    def test_identity_invertible(self):
        assert is_invertible(identity_channel(2))

    def test_full_depolarizing_not(self):
        assert not is_invertible(depolarizing(1.0, 2))

    @pytest.mark.parametrize("eps", [0.0, 0.3, 0.5, 0.9, 0.999])
    def test_partial_depolarizing(self, eps):
        assert is_invertible(depolarizing(eps, 2))


def _random_cptp(d: int, seed: int, n_kraus: int = 3) -> Channel:
    """Random channel from a Haar-ish isometry (QR of a Ginibre block)."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_kraus * d, d)) + 1j * rng.standard_normal((n_kraus * d, d))
    v, _ = np.linalg.qr(g)
    kraus = [v[i * d:(i + 1) * d, :] for i in range(n_kraus)]
    return Channel(d, d, kraus=kraus, label=f"random{seed}")


def test_link_product_matches_kraus_composition():
    first = amplitude_damping(0.3)
    second = depolarizing(0.25, 2)
    j = link_product(first.choi, second.choi, (2, 2, 2))
    assert_allclose(j.entries, choi_of(compose(second, first)).entries, atol=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_link_product_random_channels(seed):
    first = _random_cptp(2, seed)
    second = _random_cptp(2, seed + 10)
    assert first.is_cptp() and second.is_cptp()
    j = link_product(first.choi, second.choi, (2, 2, 2))
    assert_allclose(j.entries, choi_of(compose(second, first)).entries, atol=1e-10)


def test_json_round_trip(tmp_path):
    from momentshift.channels import load_channel, save_channel
    c = amplitude_damping(0.15)
    path = tmp_path / "chan.json"
    save_channel(c, path)
    c2 = load_channel(path)
    assert c2.label == c.label
    assert_allclose(c2.choi.entries, c.choi.entries, atol=1e-15)
    doc = channel_to_json(c)
    assert set(doc) == {"label", "in_dim", "out_dim", "kraus"}
    assert_allclose(channel_from_json(doc).choi.entries, c.choi.entries)
