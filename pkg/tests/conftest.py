import numpy as np
import pytest

from momentshift import Operator, random_density_matrix, tensor_power, tensor_product


def noisy_copies(rho: Operator, noise, k: int) -> Operator:
    """k noisy copies N(rho)^(x k) as one joint state."""
    joint = rho
    for _ in range(k - 1):
        joint = tensor_product(joint, rho)
    return tensor_power(noise, k).apply(joint)


def true_moment(rho: Operator, k: int) -> float:
    return float(np.trace(np.linalg.matrix_power(rho.entries, k)).real)


@pytest.fixture
def rho_pair():
    return random_density_matrix(2, 11), random_density_matrix(2, 12)
