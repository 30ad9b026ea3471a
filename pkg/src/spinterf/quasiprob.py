"""Spherical Wigner and Husimi distributions on a (polar, azimuth) grid.

Both kernels are normalized to unit integral with measure
``sin(theta) dtheta dphi``. Grids are cell-centred in both angles, stored
row-major (polar index first), and integrated with Fejer's first rule in
``cos(theta)`` and the periodic rectangle rule in ``phi``; this is exact for
the band-limited functions produced here whenever ``n_polar > N`` and
``n_azimuth > 2N``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import sph_harm_y

from .angmom import multipole_coefficients
from .errors import InvalidArgument
from .spin import CollectiveSpinState, make_css

KERNELS = ("Wigner", "Husimi")
NORMALIZATION = "unit integral over sin(theta) dtheta dphi"
MAX_WIGNER_ATOMS = 100


def polar_nodes(n_polar: int) -> np.ndarray:
    return (np.arange(n_polar) + 0.5) * math.pi / n_polar


def azimuth_nodes(n_azimuth: int) -> np.ndarray:
    return (np.arange(n_azimuth) + 0.5) * 2 * math.pi / n_azimuth


def fejer_weights(n_polar: int) -> np.ndarray:
    """Fejer-I weights: ``sum w_k f(cos theta_k)`` approximates ``int_{-1}^{1} f(x) dx``."""
    theta = polar_nodes(n_polar)
    j = np.arange(1, n_polar // 2 + 1)
    series = np.cos(2 * np.outer(theta, j)) / (4 * j**2 - 1)
    return (2 / n_polar) * (1 - 2 * series.sum(axis=1))


@dataclass(frozen=True)
class SphereGrid:
    n_atoms: int
    kernel: str
    values: np.ndarray  # (n_polar, n_azimuth)

    @property
    def n_polar(self) -> int:
        return self.values.shape[0]

    @property
    def n_azimuth(self) -> int:
        return self.values.shape[1]

    @property
    def theta(self) -> np.ndarray:
        return polar_nodes(self.n_polar)

    @property
    def phi(self) -> np.ndarray:
        return azimuth_nodes(self.n_azimuth)

    def integrate(self, weight=None) -> float:
        """``int W(theta, phi) g(theta, phi) dOmega`` for an optional weight grid g."""
        vals = self.values if weight is None else self.values * weight
        return float(fejer_weights(self.n_polar) @ vals.sum(axis=1)) * 2 * math.pi / self.n_azimuth

    def metadata(self) -> dict:
        return {
            "n_atoms": self.n_atoms,
            "kernel": self.kernel,
            "n_polar": self.n_polar,
            "n_azimuth": self.n_azimuth,
            "normalization": NORMALIZATION,
        }

    def write_csv(self, path) -> None:
        meta = self.metadata()
        with open(path, "w", newline="") as fh:
            fh.write("# " + ", ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["theta", "phi", "value"])
            for i, th in enumerate(self.theta):
                for j, ph in enumerate(self.phi):
                    w.writerow([f"{th:.12g}", f"{ph:.12g}", f"{self.values[i, j]:.12g}"])


def _check_dims(n_polar, n_azimuth):
    for name, n in (("n_polar", n_polar), ("n_azimuth", n_azimuth)):
        if isinstance(n, bool) or int(n) != n or n < 8:
            raise InvalidArgument(f"{name} must be an integer >= 8, got {n!r}")


@lru_cache(maxsize=8)
def _multipoles(two_j: int) -> np.ndarray:
    table = multipole_coefficients(two_j)
    table.setflags(write=False)
    return table


def multipole_moments(state: CollectiveSpinState) -> np.ndarray:
    """``rho[K, Q + N] = Tr(T_KQ^dag rho)`` for the state's density matrix."""
    n = state.n_atoms
    if n > MAX_WIGNER_ATOMS:
        raise InvalidArgument(
            f"Wigner evaluation supports N <= {MAX_WIGNER_ATOMS}; use the Husimi kernel"
        )
    cg = _multipoles(n)
    c = state.amplitudes
    rho = np.zeros((n + 1, 2 * n + 1), dtype=complex)
    for q in range(-n, n + 1):
        lo, hi = max(0, -q), min(n, n - q)  # basis indices k' with k' + q in range
        if lo > hi:
            continue
        pair = c[lo + q : hi + q + 1] * np.conj(c[lo : hi + 1])
        rho[:, q + n] = cg[:, q + n, lo : hi + 1] @ pair
    k = np.arange(n + 1)
    return rho * np.sqrt((2 * k + 1) / (n + 1))[:, None]


def _polar_harmonics(n: int, theta: np.ndarray) -> np.ndarray:
    """``Y_KQ(theta, 0)`` as an array (K, Q + N, len(theta))."""
    k = np.arange(n + 1)[:, None, None]
    q = np.arange(-n, n + 1)[None, :, None]
    th = np.asarray(theta, dtype=float)[None, None, :]
    y = sph_harm_y(k, q, th, 0.0)
    return np.where(np.abs(q) <= k, y, 0.0)


def wigner_values(state: CollectiveSpinState, theta, phi) -> np.ndarray:
    """Spherical Wigner function at arbitrary points (arrays of equal shape)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n = state.n_atoms
    rho = multipole_moments(state)
    ylm = _polar_harmonics(n, theta.ravel())
    amp = np.einsum("kq,kqp->qp", rho, ylm)
    q = np.arange(-n, n + 1)[:, None]
    w = np.real(np.sum(amp * np.exp(1j * q * phi.ravel()[None, :]), axis=0))
    return math.sqrt((n + 1) / (4 * math.pi)) * w.reshape(theta.shape)


def wigner_grid(state: CollectiveSpinState, n_polar: int, n_azimuth: int) -> SphereGrid:
    """Wigner function from the multipole expansion ``sum rho_KQ Y_KQ``."""
    _check_dims(n_polar, n_azimuth)
    n = state.n_atoms
    rho = multipole_moments(state)
    ylm = _polar_harmonics(n, polar_nodes(n_polar))
    amp = np.einsum("kq,kqp->pq", rho, ylm)  # (n_polar, Q)
    phase = np.exp(1j * np.outer(np.arange(-n, n + 1), azimuth_nodes(n_azimuth)))
    vals = math.sqrt((n + 1) / (4 * math.pi)) * np.real(amp @ phase)
    return SphereGrid(n, "Wigner", vals)


def husimi_values(state: CollectiveSpinState, theta, phi) -> np.ndarray:
    """``(N+1)/(4 pi) |<theta, phi|psi>|^2`` at arbitrary points."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    flat = [
        abs(np.vdot(make_css(state.n_atoms, t, p).amplitudes, state.amplitudes)) ** 2
        for t, p in zip(theta.ravel(), phi.ravel())
    ]
    return (state.n_atoms + 1) / (4 * math.pi) * np.array(flat).reshape(theta.shape)


def husimi_grid(state: CollectiveSpinState, n_polar: int, n_azimuth: int) -> SphereGrid:
    """Husimi Q function; cheap enough for any N the state constructors allow."""
    _check_dims(n_polar, n_azimuth)
    n = state.n_atoms
    # <theta, phi| = sum_m mag_m(theta) e^{+i m phi} <m| for the make_css convention
    mags = np.array([make_css(n, t, 0.0).amplitudes.real for t in polar_nodes(n_polar)])
    phase = np.exp(1j * np.outer(state.m, azimuth_nodes(n_azimuth)))
    amp = (mags * state.amplitudes[None, :]) @ phase
    return SphereGrid(n, "Husimi", (n + 1) / (4 * math.pi) * np.abs(amp) ** 2)


def azimuthal_second_moment(grid: SphereGrid, center: float = 0.0) -> float:
    """``int W (phi - center)^2 dOmega`` with phi wrapped into (-pi, pi] about center."""
    dphi = (grid.phi - center + math.pi) % (2 * math.pi) - math.pi
    return grid.integrate(np.broadcast_to(dphi**2, grid.values.shape))
