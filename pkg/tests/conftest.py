"""Shared fixtures: seeded RNG and random-instance factories.

Random states are kept away from the spectrum floor so that tolerance
checks probe the algebra, not the clamping policy.
"""

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


def random_density(rng, dim: int, kind: str = "quantum", floor: float = 1e-3):
    """Full-rank density matrix with eigenvalues bounded below by floor."""
    p = rng.dirichlet(np.ones(dim))
    p = (1.0 - dim * floor) * p + floor
    if kind == "classical":
        from gibbsfit.state_space import DensityOperator
        return DensityOperator.classical(p)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(a)
    from gibbsfit.state_space import DensityOperator
    return DensityOperator.quantum((q * p) @ q.conj().T)


def random_hermitian(rng, dim: int, scale: float = 1.0):
    from gibbsfit.state_space import HermitianOperator
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianOperator.from_matrix(scale * (a + a.conj().T) / 2)


def random_diagonal(rng, dim: int, scale: float = 1.0):
    from gibbsfit.state_space import HermitianOperator
    return HermitianOperator.from_diagonal(scale * rng.normal(size=dim))
