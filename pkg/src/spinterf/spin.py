"""Symmetric N-atom pure states in the Dicke basis.

Basis index ``k = 0..N`` labels the Jz eigenvalue ``m = k - N/2``; the
lowest state ``|J, -J>`` sits at index 0. Internally ``2m`` is kept as an
integer wherever an exact key is needed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .errors import DimensionMismatch, InvalidArgument

NORM_TOL = 1e-12


def m_values(n_atoms: int) -> np.ndarray:
    """Jz eigenvalues ``-N/2 .. N/2`` in basis order."""
    return np.arange(n_atoms + 1) - n_atoms / 2


def raising_elements(n_atoms: int) -> np.ndarray:
    """``<m+1|J+|m> = sqrt(J(J+1) - m(m+1))`` for the N lowest m."""
    j = n_atoms / 2
    m = m_values(n_atoms)[:-1]
    return np.sqrt((j - m) * (j + m + 1))


@dataclass(frozen=True)
class CollectiveSpinState:
    """Pure state of N two-level atoms in the symmetric (J = N/2) subspace.

    Parameters
    ----------
    n_atoms : int
        Number of atoms N >= 1.
    amplitudes : array_like of complex, shape (N+1,)
        Dicke amplitudes ordered from m = -N/2 to m = +N/2.
    """

    n_atoms: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.n_atoms
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise InvalidArgument(f"n_atoms must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_atoms", int(n))
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (self.n_atoms + 1,):
            raise InvalidArgument(
                f"expected {self.n_atoms + 1} amplitudes, got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps)):
            raise InvalidArgument("amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgument(f"state not normalized: sum |c_m|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, n_atoms: int, amplitudes) -> "CollectiveSpinState":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = math.sqrt(float(np.vdot(amps, amps).real))
        if not norm > 0 or not math.isfinite(norm):
            raise InvalidArgument("cannot normalize a zero or non-finite vector")
        return cls(n_atoms, amps / norm)

    @property
    def spin(self) -> float:
        return self.n_atoms / 2

    @property
    def m(self) -> np.ndarray:
        return m_values(self.n_atoms)

    @property
    def populations(self) -> np.ndarray:
        """Jz distribution ``|c_m|^2``."""
        return np.abs(self.amplitudes) ** 2

    def to_record(self) -> dict:
        return {
            "n_atoms": self.n_atoms,
            "amplitudes": [[float(c.real), float(c.imag)] for c in self.amplitudes],
        }

    @classmethod
    def from_record(cls, record: dict) -> "CollectiveSpinState":
        if set(record) != {"n_atoms", "amplitudes"}:
            raise InvalidArgument(
                f"state record needs exactly n_atoms and amplitudes, got {sorted(record)}"
            )
        pairs = np.asarray(record["amplitudes"], dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise InvalidArgument("amplitudes must be a list of [re, im] pairs")
        return cls(record["n_atoms"], pairs[:, 0] + 1j * pairs[:, 1])


def save_state(state: CollectiveSpinState, path) -> None:
    Path(path).write_text(json.dumps(state.to_record()) + "\n")


def load_state(path) -> CollectiveSpinState:
    return CollectiveSpinState.from_record(json.loads(Path(path).read_text()))


def _check_n(n_atoms) -> int:
    if isinstance(n_atoms, bool) or int(n_atoms) != n_atoms or n_atoms < 1:
        raise InvalidArgument(f"n_atoms must be a positive integer, got {n_atoms!r}")
    return int(n_atoms)


def make_css(n_atoms: int, polar: float, azimuth: float) -> CollectiveSpinState:
    """Coherent spin state with mean spin along (polar, azimuth).

    Convention: ``|polar, azimuth> = exp(-i azimuth Jz) exp(-i polar Jy) |J, +J>``,
    so that

        c_m = sqrt(C(N, J+m)) cos(polar/2)^(J+m) sin(polar/2)^(J-m) exp(-i m azimuth).

    For N = 1 this gives ``c_{+1/2} = cos(polar/2) e^{-i azimuth/2}`` and
    ``c_{-1/2} = sin(polar/2) e^{+i azimuth/2}``; ``polar = pi`` is the lowest
    Dicke state with amplitude exactly 1. Magnitudes go through log-factorials,
    so N up to ~1e4 is safe.
    """
    n = _check_n(n_atoms)
    if not (math.isfinite(polar) and math.isfinite(azimuth)):
        raise InvalidArgument("angles must be finite")
    up = np.arange(n + 1)  # J + m
    down = n - up
    c, s = math.cos(polar / 2), math.sin(polar / 2)
    # cos(pi/2) is not exactly zero in floating point; snap so the poles are exact
    if abs(c) < 1e-15:
        c = 0.0
    if abs(s) < 1e-15:
        s = 0.0
    log_binom = gammaln(n + 1) - gammaln(up + 1) - gammaln(down + 1)
    # 0**0 = 1: a vanishing base only contributes where its exponent is nonzero
    log_mag = 0.5 * log_binom
    if c == 0.0:
        log_mag = np.where(up == 0, log_mag, -np.inf)
    else:
        log_mag = log_mag + up * math.log(abs(c))
    if s == 0.0:
        log_mag = np.where(down == 0, log_mag, -np.inf)
    else:
        log_mag = log_mag + down * math.log(abs(s))
    mag = np.exp(log_mag)
    sign = np.where((c < 0) & (up % 2 == 1), -1.0, 1.0) * np.where(
        (s < 0) & (down % 2 == 1), -1.0, 1.0
    )
    m = m_values(n)
    amps = sign * mag * np.exp(-1j * m * azimuth)
    return CollectiveSpinState.from_unnormalized(n, amps)


def make_dicke(n_atoms: int, m: float) -> CollectiveSpinState:
    """Jz eigenstate ``|J = N/2, m>``; ``m = 0`` is the twin-Fock state."""
    n = _check_n(n_atoms)
    two_m = 2 * m
    if not math.isfinite(two_m) or two_m != round(two_m):
        raise InvalidArgument(f"m must be integer or half-integer, got {m!r}")
    two_m = int(round(two_m))
    if abs(two_m) > n or (two_m + n) % 2:
        raise InvalidArgument(f"m = {m} not in {{-N/2, ..., N/2}} for N = {n}")
    amps = np.zeros(n + 1, dtype=complex)
    amps[(two_m + n) // 2] = 1.0
    return CollectiveSpinState(n, amps)


def twin_fock(n_atoms: int) -> CollectiveSpinState:
    if _check_n(n_atoms) % 2:
        raise InvalidArgument("twin-Fock state needs an even atom number")
    return make_dicke(n_atoms, 0)


def overlap(a: CollectiveSpinState, b: CollectiveSpinState) -> complex:
    """Inner product ``<a|b>``."""
    if a.n_atoms != b.n_atoms:
        raise DimensionMismatch(f"n_atoms differ: {a.n_atoms} vs {b.n_atoms}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


@dataclass(frozen=True)
class SpinMoments:
    """First and second moments of the collective spin (hbar = 1).

    ``covariance`` uses the symmetrized product ``<(JiJj + JjJi)/2> - <Ji><Jj>``;
    ``jz_powers[p-1] = <Jz^p>`` for p = 1..4.
    """

    mean: np.ndarray
    covariance: np.ndarray
    jz_powers: np.ndarray
    spin_length: float

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.covariance).copy()


def moments(state: CollectiveSpinState) -> SpinMoments:
    """Exact moments from the tridiagonal action of the ladder operators."""
    c = state.amplitudes
    n = state.n_atoms
    j = n / 2
    m = m_values(n)
    a = raising_elements(n)
    p = np.abs(c) ** 2

    jp = np.sum(np.conj(c[1:]) * a * c[:-1])  # <J+>
    jz = float(np.dot(p, m))
    jz2 = float(np.dot(p, m**2))
    jp2 = np.sum(np.conj(c[2:]) * a[1:] * a[:-1] * c[:-2]) if n >= 2 else 0.0
    # <J+ Jz + Jz J+>
    jpz = np.sum(np.conj(c[1:]) * a * (m[:-1] + m[1:]) * c[:-1])

    mean = np.array([jp.real, jp.imag, jz])
    casimir = j * (j + 1)
    sym = np.empty((3, 3))
    sym[0, 0] = 0.5 * jp2.real + 0.5 * (casimir - jz2)
    sym[1, 1] = -0.5 * jp2.real + 0.5 * (casimir - jz2)
    sym[2, 2] = jz2
    sym[0, 1] = sym[1, 0] = 0.5 * jp2.imag
    sym[0, 2] = sym[2, 0] = 0.5 * jpz.real
    sym[1, 2] = sym[2, 1] = 0.5 * jpz.imag
    cov = sym - np.outer(mean, mean)
    # cancellation can leave -1e-14 on the diagonal of minimum-uncertainty states
    np.fill_diagonal(cov, np.maximum(np.diag(cov), 0.0))
    powers = np.array([np.dot(p, m**k) for k in range(1, 5)])
    return SpinMoments(
        mean=mean,
        covariance=cov,
        jz_powers=powers,
        spin_length=float(np.linalg.norm(mean)),
    )


def variance_along(mom: SpinMoments, axis) -> float:
    """``Var(n . J)`` for a unit vector n."""
    v = np.asarray(axis, dtype=float)
    return float(v @ mom.covariance @ v)


def spin_component_matvec(n_atoms: int, axis):
    """Return ``v -> (n . J) v`` as a closure over the tridiagonal elements."""
    nx, ny, nz = (float(x) for x in axis)
    m = m_values(n_atoms)
    a = raising_elements(n_atoms)
    diag = nz * m
    lower = 0.5 * a * complex(nx, -ny)  # <m+1| n.J |m>
    upper = np.conj(lower)

    def matvec(v):
        out = diag * v
        out[1:] += lower * v[:-1]
        out[:-1] += upper * v[1:]
        return out

    return matvec


def axis_powers(state: CollectiveSpinState, axis) -> np.ndarray:
    """``<(n . J)^p>`` for p = 1..4 without rotating the state."""
    mv = spin_component_matvec(state.n_atoms, axis)
    c = state.amplitudes
    v1 = mv(c.astype(complex))
    v2 = mv(v1)
    return np.array([
        np.vdot(c, v1).real,
        np.vdot(v1, v1).real,
        np.vdot(v1, v2).real,
        np.vdot(v2, v2).real,
    ])


def axis_statistics(state: CollectiveSpinState, axis):
    """Means and variances of ``n.J`` and ``(n.J)^2``.

    Variances are norms of centred vectors, ``||(A - <A>) psi||^2``, which
    stays accurate when the variance is many orders below ``<A>^2``.

    Returns ``(mean1, var1, mean2, var2)``.
    """
    mv = spin_component_matvec(state.n_atoms, axis)
    c = state.amplitudes.astype(complex)
    v1 = mv(c)
    mean1 = np.vdot(c, v1).real
    d1 = v1 - mean1 * c
    v2 = mv(v1)
    mean2 = np.vdot(v1, v1).real
    d2 = v2 - mean2 * c
    return mean1, np.vdot(d1, d1).real, mean2, np.vdot(d2, d2).real
