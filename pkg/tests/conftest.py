import numpy as np
import pytest

from qkacz import LinearSystem


@pytest.fixture
def hand_system():
    """Orthogonal-rows 2x2 system solvable in one cyclic sweep."""
    A = np.array([[0.6, 0.8], [0.8, -0.6]])
    b = np.array([0.5, 0.1])
    return LinearSystem(A, b)


def random_contraction(rng, d, top=0.9):
    """Random d x d matrix rescaled to operator norm ``top``."""
    M = rng.standard_normal((d, d))
    return M * (top / np.linalg.norm(M, 2))


def random_system(rng, n, m, solution_norm=0.45):
    """Consistent normalized system with a drawn solution of given norm."""
    A = rng.standard_normal((n, m))
    A /= np.linalg.norm(A, 2)
    x = rng.standard_normal(m)
    x *= solution_norm / np.linalg.norm(x)
    return LinearSystem(A, A @ x), x
