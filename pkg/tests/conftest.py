import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def angle_sorted(values, d):
    """Sort unimodular complex values by angle, branch cut away from roots."""
    return np.sort(np.mod(np.angle(values) + 0.3 / d, 2 * np.pi))


def random_unitary(dim, rng):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))
