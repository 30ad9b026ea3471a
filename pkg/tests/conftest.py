"""Dense-matrix oracle shared by the tests.

Everything here is built from explicit (N+1)x(N+1) operator matrices and
scipy's expm, independently of the O(N) tridiagonal code paths.
"""
import math

import numpy as np
import pytest
from hypothesis import settings
from scipy.linalg import expm

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def spin_matrices(n_atoms):
    j = n_atoms / 2
    m = np.arange(n_atoms + 1) - j
    jp = np.zeros((n_atoms + 1, n_atoms + 1))
    for k in range(n_atoms):
        jp[k + 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    jz = np.diag(m)
    return jx, jy, jz


def dense_rotation(n_atoms, axis, angle):
    jx, jy, jz = spin_matrices(n_atoms)
    gen = axis[0] * jx + axis[1] * jy + axis[2] * jz
    return expm(-1j * angle * gen)


def dense_expectation(op, amps):
    return np.vdot(amps, op @ amps)


def dense_mz(n_atoms, phi):
    by = dense_rotation(n_atoms, (0, 1, 0), math.pi / 2)
    ph = dense_rotation(n_atoms, (0, 0, 1), phi)
    return by @ ph @ by


def random_amplitudes(rng, n_atoms):
    v = rng.normal(size=n_atoms + 1) + 1j * rng.normal(size=n_atoms + 1)
    return v / np.linalg.norm(v)


def random_axis(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
