import math

import numpy as np
import pytest

from hinflab import Operator


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def random_normal_sectorial(n: int, rng: np.random.Generator,
                            angle: float = 0.35 * math.pi,
                            radius=(0.3, 3.0)) -> Operator:
    """Normal matrix with spectrum inside a sector of half-angle ``angle``."""
    v = random_unitary(n, rng)
    r = np.exp(rng.uniform(math.log(radius[0]), math.log(radius[1]), n))
    th = rng.uniform(-angle, angle, n)
    lam = r * np.exp(1j * th)
    return Operator(v @ np.diag(lam) @ v.conj().T)


def random_pd_diagonal(n: int, rng: np.random.Generator,
                       radius=(0.2, 8.0)) -> Operator:
    return Operator(np.diag(np.exp(
        rng.uniform(math.log(radius[0]), math.log(radius[1]), n))))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
