import functools

import numpy as np
import pytest

from chernlab import catalog
from chernlab.chern import point_tensors
from chernlab.dsl import finite_difference_jet, metric_jet


@functools.lru_cache(maxsize=None)
def entry(name):
    return catalog.load_builtin(name)


@functools.lru_cache(maxsize=None)
def _tensors(name, key, fd_step):
    z = np.array(key)
    spec = entry(name).spec
    jet = finite_difference_jet(spec, z, h=fd_step) if fd_step else metric_jet(spec, z)
    return point_tensors(jet)


def tensors_at(name, z, fd_step=None):
    """Cached point tensors for a builtin at ``z``."""
    return _tensors(name, tuple(complex(c) for c in z), fd_step)


def samples(name, count, seed=42):
    return catalog.sample_points(entry(name), count, seed)


def random_unitary(rng, n=3):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_torsion(rng, scale=1.0):
    """Random torsion in n = 3, antisymmetric in its lower pair."""
    T = scale * (rng.normal(size=(3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3)))
    return T - T.transpose(0, 2, 1)


def random_balanced_torsion(rng, scale=1.0):
    """Random antisymmetric torsion with eta_i = sum_r T^r_{ri} = 0.

    eta_1 = T^2_{21} + T^3_{31}, eta_2 = T^1_{12} + T^3_{32}, eta_3 = T^1_{13} + T^2_{23};
    the second term of each is solved for, and none of them feeds another.
    """
    T = random_torsion(rng, scale)
    for (r, s, i), (p, q, m) in (((2, 2, 0), (1, 1, 0)), ((2, 2, 1), (0, 0, 1)), ((1, 1, 2), (0, 0, 2))):
        T[r, s, i] = -T[p, q, m]
        T[r, i, s] = T[p, q, m]
    return T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for tag in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[tag])
