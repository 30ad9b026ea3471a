"""Phase sensitivity, squeezing parameters and Fisher-information bounds."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import (
    MZ_GENERATOR_AXIS,
    OBSERVABLES,
    X_AXIS,
    Y_AXIS,
    Rotation,
    _unit_axis,
    mz_readout_axis,
    rotate,
)
from .errors import InvalidArgument, UndefinedOrientation, UndefinedSensitivity
from .spin import (
    CollectiveSpinState,
    axis_statistics,
    moments,
    spin_component_matvec,
    variance_along,
)

DERIVATIVE_STEP = 1e-5
SLOPE_FLOOR = 1e-14
UNDEFINED_XI_FLOOR = 1e-12


@dataclass(frozen=True)
class SensitivityReport:
    """Phase sensitivity with its reference scales.

    ``gain_db_variance = -20 log10(xi)`` and ``gain_db_amplitude = -10 log10(xi)``
    are both kept because published figures use either.
    """

    n_atoms: int
    delta_phi: float
    xi: Optional[float]
    snl: float
    heisenberg: float
    gain_db_variance: Optional[float]
    gain_db_amplitude: Optional[float]
    qfi: Optional[float] = None

    @classmethod
    def from_delta_phi(cls, delta_phi, n_atoms, qfi=None):
        xi = xi_from_signal(delta_phi, n_atoms)
        return cls(
            n_atoms=n_atoms,
            delta_phi=float(delta_phi),
            xi=xi,
            snl=1 / math.sqrt(n_atoms),
            heisenberg=1 / n_atoms,
            gain_db_variance=gain_db(xi, "variance"),
            gain_db_amplitude=gain_db(xi, "amplitude"),
            qfi=qfi,
        )

    def to_record(self) -> dict:
        return asdict(self)


def xi_from_signal(delta_phi: float, n_atoms: int) -> float:
    """Sensitivity relative to the shot-noise limit, ``sqrt(N) * delta_phi``."""
    if not delta_phi > 0:
        raise InvalidArgument(f"delta_phi must be > 0, got {delta_phi!r}")
    return math.sqrt(n_atoms) * delta_phi


def gain_db(xi: float, convention: str = "variance") -> float:
    if not xi > 0:
        raise InvalidArgument(f"xi must be > 0, got {xi!r}")
    if convention == "variance":
        return -20 * math.log10(xi)
    if convention == "amplitude":
        return -10 * math.log10(xi)
    raise InvalidArgument(f"unknown dB convention {convention!r}")


def wineland_xi(state: CollectiveSpinState) -> Optional[float]:
    """``sqrt(N) sqrt(Var Jz) / |<Jx>|`` in the current frame; None when <Jx> ~ 0."""
    mo = moments(state)
    jx = abs(mo.mean[0])
    if jx < UNDEFINED_XI_FLOOR:
        return None
    return math.sqrt(state.n_atoms * mo.covariance[2, 2]) / jx


def qfi(state: CollectiveSpinState, axis) -> float:
    """Pure-state quantum Fisher information ``4 Var(n.J)`` for rotations about n."""
    n = _unit_axis(axis)
    return 4 * variance_along(moments(state), n)


def _rotation_onto_x(v: np.ndarray) -> Rotation:
    v = v / np.linalg.norm(v)
    cross = np.cross(v, X_AXIS)
    s = np.linalg.norm(cross)
    c = float(v[0])
    if s < 1e-15:
        return Rotation((0.0, 0.0, 1.0), 0.0 if c > 0 else math.pi)
    return Rotation(tuple(cross / s), math.atan2(s, c))


def optimally_orient(state: CollectiveSpinState):
    """Rotate the mean spin onto +x, then put the smallest transverse variance along z.

    Returns the rotated state and the two Rotation elements applied (in order).
    """
    mo = moments(state)
    if mo.spin_length < UNDEFINED_XI_FLOOR:
        raise UndefinedOrientation("mean spin vanishes; no squeezing axis defined")
    first = _rotation_onto_x(mo.mean)
    s = rotate(state, first.axis, first.angle)
    cov = moments(s).covariance
    # major axis of the y-z covariance ellipse sits at this angle from y towards z
    alpha = 0.5 * math.atan2(2 * cov[1, 2], cov[1, 1] - cov[2, 2])
    second = Rotation(X_AXIS, -alpha)
    return rotate(s, second.axis, second.angle), (first, second)


def to_interferometer_input(oriented: CollectiveSpinState) -> CollectiveSpinState:
    """Map a state squeezed along z with mean spin +x onto the Mach-Zehnder input port.

    The result has mean spin along -z and its squeezed quadrature along y, so
    that after the first beamsplitter the reduced variance lies along the
    phase-shift direction.
    """
    s = rotate(oriented, X_AXIS, math.pi / 2)
    return rotate(s, Y_AXIS, math.pi / 2)


def _check_observable(observable):
    if observable not in OBSERVABLES:
        raise InvalidArgument(f"observable must be one of {OBSERVABLES}, got {observable!r}")


def fringe(state: CollectiveSpinState, phi: float, observable: str = "Jz", sigma_det: float = 0.0):
    """Exact mean and variance of the readout after ``mach_zehnder(state, phi)``.

    The output Jz moments are evaluated in the Heisenberg picture as moments of
    ``n(phi).J`` on the input state; Gaussian detection noise of width
    ``sigma_det`` is folded in analytically (before squaring for JzSquared).
    """
    _check_observable(observable)
    mean1, var1, mean2, var2 = axis_statistics(state, mz_readout_axis(phi))
    s2 = sigma_det**2
    if observable == "Jz":
        return mean1, var1 + s2
    mean = mean2 + s2
    var = var2 + 4 * s2 * mean2 + 2 * s2**2
    return mean, var


def _signal_difference(state, phi, observable, h):
    """``<S>(phi + h) - <S>(phi - h)`` without subtracting two large numbers.

    The readout axis is linear in ``(sin, cos)``, so the difference of the two
    axes is ``2 sin(h) (0, cos phi, sin phi)`` in closed form. For Jz the
    signal difference is ``<(a - b).J>``; for Jz^2 it is
    ``Re <(a - b).J psi, (a + b).J psi>``. This is the same central difference,
    free of the cancellation that swamps it at small phi.
    """
    c = state.amplitudes.astype(complex)
    diff = 2 * math.sin(h) * np.array([0.0, math.cos(phi), math.sin(phi)])
    dv = spin_component_matvec(state.n_atoms, diff)(c)
    if observable == "Jz":
        return np.vdot(c, dv).real
    total = mz_readout_axis(phi + h) + mz_readout_axis(phi - h)
    sv = spin_component_matvec(state.n_atoms, total)(c)
    return np.vdot(dv, sv).real


def _slope(state, phi, observable, h):
    def central(step):
        return _signal_difference(state, phi, observable, step) / (2 * step)

    # one Richardson level cancels the h^2 term
    return (4 * central(h / 2) - central(h)) / 3


def phase_sensitivity(
    prepared_state: CollectiveSpinState,
    phi0: float,
    observable: str = "Jz",
    sigma_det: float = 0.0,
    step: float = DERIVATIVE_STEP,
) -> SensitivityReport:
    """Error-propagation sensitivity ``sqrt(Var S) / |d<S>/dphi|`` at ``phi0``.

    ``prepared_state`` is the Mach-Zehnder input; the readout S is Jz or Jz^2
    of the output state. The slope is a Richardson-extrapolated central
    difference.
    """
    if not math.isfinite(phi0):
        raise InvalidArgument("phi0 must be finite")
    if not sigma_det >= 0:
        raise InvalidArgument("sigma_det must be >= 0")
    _, var = fringe(prepared_state, phi0, observable, sigma_det)
    slope = _slope(prepared_state, phi0, observable, step)
    power = 1 if observable == "Jz" else 2
    scale = max(1.0, (prepared_state.n_atoms / 2) ** power)
    if abs(slope) < SLOPE_FLOOR * scale:
        raise UndefinedSensitivity(
            f"phase_sensitivity: signal slope {slope:.3e} vanishes at phi = {phi0}"
        )
    dphi = math.sqrt(var) / abs(slope)
    return SensitivityReport.from_delta_phi(
        dphi, prepared_state.n_atoms, qfi=qfi(prepared_state, MZ_GENERATOR_AXIS)
    )


def best_operating_point(
    state: CollectiveSpinState,
    observable: str = "Jz",
    sigma_det: float = 0.0,
    bounds=(1e-3, math.pi - 1e-3),
    grid: int = 64,
    spacing: str = "linear",
):
    """Bias phase minimizing ``phase_sensitivity`` over ``bounds``.

    A coarse grid (``spacing`` "linear" or "log") picks the basin, a bounded
    scalar search refines it. Log spacing suits Fock-like inputs at large N,
    whose optimum sits at phases of order 1/N or below. Returns
    ``(phi, report)``; raises UndefinedSensitivity if the slope vanishes
    everywhere on the grid.
    """
    if spacing not in ("linear", "log"):
        raise InvalidArgument(f"spacing must be 'linear' or 'log', got {spacing!r}")
    if not 0 < bounds[0] < bounds[1] or spacing == "linear" and bounds[0] < 0:
        raise InvalidArgument(f"bounds must satisfy 0 < lo < hi, got {bounds!r}")

    def dphi(phi):
        try:
            return phase_sensitivity(state, phi, observable, sigma_det).delta_phi
        except UndefinedSensitivity:
            return math.inf

    if spacing == "log":
        phis = np.geomspace(bounds[0], bounds[1], grid)
    else:
        phis = np.linspace(bounds[0], bounds[1], grid)
    vals = np.array([dphi(p) for p in phis])
    if not np.isfinite(vals).any():
        raise UndefinedSensitivity("best_operating_point: slope vanishes on the whole grid")
    i = int(np.argmin(vals))
    lo, hi = phis[max(i - 1, 0)], phis[min(i + 1, grid - 1)]
    res = minimize_scalar(dphi, bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
    phi = float(res.x) if res.fun <= vals[i] else float(phis[i])
    return phi, phase_sensitivity(state, phi, observable, sigma_det)
