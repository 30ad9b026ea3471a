"""Quantum-noise-limited performance of clocks, accelerometers and gyroscopes.

All sensitivities are per shot unless noted; :func:`per_root_hz` converts a
per-shot figure to a spectral density for a given cycle time. Dick-effect
aliasing of local-oscillator noise is not modelled.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

from .errors import InvalidArgument, OutOfRange

# CODATA 2018
HBAR = 1.054571817e-34  # J s
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
RB87_MASS = 86.909180531 * ATOMIC_MASS_UNIT  # kg
CS133_CLOCK_FREQUENCY = 9_192_631_770.0  # Hz, exact by SI definition


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise InvalidArgument(f"{name} must be finite and > 0, got {value!r}")


def _atom_number(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value or value < 1:
        raise InvalidArgument(f"n_atoms must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class ClockConfig:
    omega0: float  # rad/s
    T: float  # s, Ramsey time
    T_C: float  # s, cycle time
    tau: float  # s, averaging time
    n_atoms: int
    xi: float

    def __post_init__(self):
        for name in ("omega0", "T", "T_C", "tau", "xi"):
            _positive(name, getattr(self, name))
        _atom_number(self.n_atoms)
        if self.T > self.T_C:
            raise InvalidArgument(f"interrogation time T = {self.T} exceeds cycle time T_C = {self.T_C}")


@dataclass(frozen=True)
class AccelerometerConfig:
    k_parallel: float  # 1/m
    T: float  # s
    n_atoms: int
    xi: float

    def __post_init__(self):
        for name in ("k_parallel", "T", "xi"):
            _positive(name, getattr(self, name))
        _atom_number(self.n_atoms)


@dataclass(frozen=True)
class GyroConfig:
    atom_mass: float  # kg
    area_parallel: float  # m^2
    n_atoms: int
    xi: float
    hbar: float = HBAR

    def __post_init__(self):
        for name in ("atom_mass", "area_parallel"):
            _positive(name, getattr(self, name))
        _atom_number(self.n_atoms)
        # xi = 0 is tolerated (flagged at evaluation) so scans can pass through it
        if not (math.isfinite(self.xi) and self.xi >= 0):
            raise InvalidArgument(f"xi must be >= 0, got {self.xi!r}")
        if self.hbar != HBAR:
            raise InvalidArgument("hbar is a fixed constant")


def clock_stability(cfg: ClockConfig) -> float:
    """Fractional frequency stability ``(1/(omega0 T)) sqrt(T_C/tau) xi/sqrt(N)``."""
    return (1 / (cfg.omega0 * cfg.T)) * math.sqrt(cfg.T_C / cfg.tau) * cfg.xi / math.sqrt(cfg.n_atoms)


def clock_stability_unity_duty(omega0, T, tau, n_atoms, xi) -> float:
    """Closed form for T = T_C: ``xi / (omega0 sqrt(T tau) sqrt(N))``."""
    return xi / (omega0 * math.sqrt(T * tau) * math.sqrt(n_atoms))


def accel_phase(k_parallel: float, a: float, T: float) -> float:
    """Mach-Zehnder phase ``k a T^2`` for uniform acceleration ``a``."""
    if T < 0:
        raise InvalidArgument("T must be >= 0")
    return k_parallel * a * T**2


def sagnac_phase(atom_mass: float, omega: float, area: float) -> float:
    """Sagnac phase ``2 m Omega A / hbar``."""
    return 2 * atom_mass * omega * area / HBAR


def accel_sensitivity(cfg: AccelerometerConfig) -> float:
    """Per-shot acceleration sensitivity in m/s^2."""
    return cfg.xi / (math.sqrt(cfg.n_atoms) * cfg.k_parallel * cfg.T**2)


def gyro_sensitivity(cfg: GyroConfig) -> float:
    """Per-shot rotation-rate sensitivity in rad/s."""
    if cfg.xi == 0:
        warnings.warn("gyro_sensitivity: xi = 0 is unphysical; returning 0", RuntimeWarning, stacklevel=2)
    return cfg.xi * cfg.hbar / (math.sqrt(cfg.n_atoms) * 2 * cfg.atom_mass * cfg.area_parallel)


def per_root_hz(per_shot: float, cycle_time: float) -> float:
    """Per-shot sensitivity to a spectral density: divide by ``sqrt(1/T_C)``."""
    _positive("cycle_time", cycle_time)
    return per_shot / math.sqrt(1 / cycle_time)


def _squeezing_range(xi):
    if not xi > 0:
        raise InvalidArgument(f"xi must be > 0, got {xi!r}")
    if xi > 1:
        raise OutOfRange(f"xi = {xi} > 1 gives no resource benefit")


def resource_equivalents(xi: float) -> dict:
    """Averaging-time and atom-number factors (both ``xi^2``) to match a shot-noise-limited device."""
    _squeezing_range(xi)
    return {"averaging_time_factor": xi**2, "atom_number_factor": xi**2}


def size_tradeoff(xi: float) -> float:
    """Free-fall length factor at fixed acceleration sensitivity.

    Fixed ``xi / (sqrt(N) k T^2)`` means ``T^2`` scales with xi; a drop
    length ``L ~ g T^2 / 2`` then scales the same way. Fountain geometries are
    not covered.
    """
    _squeezing_range(xi)
    return xi


def config_record(cfg) -> dict:
    return asdict(cfg)
