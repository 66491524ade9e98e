import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def spherical_gaussians(rng, n=4):
    """Random smooth non-negative radiance field L(d), analytic everywhere."""
    centers = rng.normal(size=(n, 3))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    amps = rng.uniform(0.2, 3.0, size=n)
    sharps = rng.uniform(1.0, 12.0, size=n)

    def field(dirs):
        dots = np.asarray(dirs) @ centers.T  # (..., n)
        return 0.05 + (amps * np.exp(sharps * (dots - 1.0))).sum(axis=-1)

    return field
