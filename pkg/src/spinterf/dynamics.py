"""Pulses, phase accumulation, one-axis twisting, QND conditioning and readout.

Rotations follow the active convention ``exp(-i angle n.J)``: the mean spin
vector is rotated right-handedly by ``angle`` about ``n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import jv

from .errors import DegenerateOutcome, InvalidArgument, SequenceError
from .spin import CollectiveSpinState, m_values, spin_component_matvec

AXIS_TOL = 1e-9

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)

# Beamsplitter convention for the Mach-Zehnder sequence: a +pi/2 rotation
# about y, used for both pulses. With |J, -J> in, <Jz>_out = (N/2) cos(phi).
BEAMSPLITTER_AXIS = Y_AXIS
BEAMSPLITTER_ANGLE = math.pi / 2

SHOT_CHUNK = 8192


def _unit_axis(axis) -> np.ndarray:
    v = np.asarray(axis, dtype=float).reshape(-1)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise InvalidArgument(f"axis must be a finite 3-vector, got {axis!r}")
    if abs(np.linalg.norm(v) - 1.0) > AXIS_TOL:
        raise InvalidArgument(f"axis must have unit norm, |axis| = {np.linalg.norm(v)!r}")
    return v


def rotate(state: CollectiveSpinState, axis, angle: float) -> CollectiveSpinState:
    """Apply ``exp(-i angle n.J)``.

    ``n.J`` is tridiagonal in the Dicke basis, so the propagator is expanded in
    Chebyshev polynomials of ``n.J / J`` with Bessel-function weights. Memory is
    O(N); the cost is O(N * |angle| * J) after reducing the angle into
    [-pi, pi] with ``exp(-2 pi i n.J) = (-1)^N``.
    """
    n = _unit_axis(axis)
    if not math.isfinite(angle):
        raise InvalidArgument("rotation angle must be finite")
    c = state.amplitudes
    n_atoms = state.n_atoms
    turns = round(angle / (2 * math.pi))
    theta = angle - 2 * math.pi * turns
    sign = -1.0 if (turns * n_atoms) % 2 else 1.0

    if abs(n[0]) < 1e-15 and abs(n[1]) < 1e-15:
        out = c * np.exp(-1j * theta * n[2] * m_values(n_atoms))
        return CollectiveSpinState(n_atoms, sign * out)
    if theta == 0.0:
        return CollectiveSpinState(n_atoms, sign * c)

    j = n_atoms / 2
    mv = spin_component_matvec(n_atoms, n)
    a = abs(theta) * j
    n_terms = int(a + 12.0 * a ** (1 / 3) + 32)
    orders = np.arange(n_terms + 1)
    cycle = np.array([1, -1j, -1, 1j]) if theta > 0 else np.array([1, 1j, -1, -1j])
    phase = cycle[orders % 4]
    coeff = 2.0 * phase * jv(orders, a)
    coeff[0] *= 0.5

    t_prev = c.astype(complex)
    t_cur = mv(t_prev) / j
    out = coeff[0] * t_prev + coeff[1] * t_cur
    for k in range(2, n_terms + 1):
        t_next = (2.0 / j) * mv(t_cur) - t_prev
        out += coeff[k] * t_next
        t_prev, t_cur = t_cur, t_next
    # the propagator is unitary; strip the O(n_terms * eps) summation drift
    out /= np.linalg.norm(out)
    return CollectiveSpinState(n_atoms, sign * out)


def accumulate_phase(state: CollectiveSpinState, phi: float) -> CollectiveSpinState:
    """Free evolution: ``c_m -> exp(-i phi m) c_m`` (rotation about z)."""
    return CollectiveSpinState(state.n_atoms, state.amplitudes * np.exp(-1j * phi * state.m))


def one_axis_twist(state: CollectiveSpinState, mu: float) -> CollectiveSpinState:
    """One-axis twisting ``exp(-i mu Jz^2)`` with ``mu = chi t``."""
    return CollectiveSpinState(state.n_atoms, state.amplitudes * np.exp(-1j * mu * state.m**2))


def qnd_measure(
    state: CollectiveSpinState,
    sigma: float,
    forced_outcome: Optional[float] = None,
    rng=None,
):
    """Gaussian QND measurement of Jz with resolution ``sigma`` (atoms).

    The outcome ``r`` is drawn from the predictive density
    ``p(r) = sum_m |c_m|^2 N(r; m, sigma^2)`` unless ``forced_outcome`` is
    given. The post-measurement state is
    ``c_m exp(-(m - r)^2 / (4 sigma^2))``, renormalized.

    Returns
    -------
    (CollectiveSpinState, float)
    """
    if not sigma > 0 or not math.isfinite(sigma):
        raise InvalidArgument(f"QND resolution sigma must be > 0, got {sigma!r}")
    m = state.m
    pops = state.populations
    if forced_outcome is None:
        gen = np.random.default_rng(rng)
        k = gen.choice(m.size, p=pops / pops.sum())
        r = float(m[k] + sigma * gen.standard_normal())
    else:
        r = float(forced_outcome)
        if not math.isfinite(r):
            raise InvalidArgument("forced outcome must be finite")
    kernel = np.exp(-((m - r) ** 2) / (4 * sigma**2))
    post = state.amplitudes * kernel
    weight = float(np.vdot(post, post).real)
    if not weight > np.finfo(float).tiny:
        raise DegenerateOutcome(
            f"outcome r = {r} has vanishing likelihood at sigma = {sigma}"
        )
    return CollectiveSpinState(state.n_atoms, post / math.sqrt(weight)), r


def mach_zehnder(state: CollectiveSpinState, phi: float) -> CollectiveSpinState:
    """Beamsplitter, phase ``phi``, beamsplitter (see ``BEAMSPLITTER_AXIS``)."""
    s = rotate(state, BEAMSPLITTER_AXIS, BEAMSPLITTER_ANGLE)
    s = accumulate_phase(s, phi)
    return rotate(s, BEAMSPLITTER_AXIS, BEAMSPLITTER_ANGLE)


def mz_readout_axis(phi: float) -> np.ndarray:
    """Axis ``n`` with ``U^dag Jz U = n.J`` for the Mach-Zehnder unitary ``U``.

    Output Jz statistics of ``mach_zehnder(s, phi)`` equal the statistics of
    ``n.J`` measured on ``s`` itself.
    """
    return np.array([0.0, math.sin(phi), -math.cos(phi)])


# generator of the phase shift (Jz) pulled back through the first beamsplitter:
# R^dag Jz R = -Jx for R = exp(-i pi/2 Jy)
MZ_GENERATOR_AXIS = (-1.0, 0.0, 0.0)


# -- sequence elements -------------------------------------------------------


@dataclass(frozen=True)
class Rotation:
    axis: tuple
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "axis", tuple(float(x) for x in _unit_axis(self.axis)))
        if not math.isfinite(self.angle):
            raise InvalidArgument("rotation angle must be finite")


@dataclass(frozen=True)
class PhaseAccumulation:
    phi: float


@dataclass(frozen=True)
class OneAxisTwist:
    mu: float


@dataclass(frozen=True)
class QNDMeasurement:
    sigma: float
    outcome: Optional[float] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidArgument(f"QND sigma must be > 0, got {self.sigma!r}")


@dataclass(frozen=True)
class ReadoutNoise:
    sigma_det: float

    def __post_init__(self):
        if not self.sigma_det >= 0:
            raise InvalidArgument(f"sigma_det must be >= 0, got {self.sigma_det!r}")


SequenceElement = Union[Rotation, PhaseAccumulation, OneAxisTwist, QNDMeasurement, ReadoutNoise]

ELEMENT_TYPES = {
    cls.__name__: cls
    for cls in (Rotation, PhaseAccumulation, OneAxisTwist, QNDMeasurement, ReadoutNoise)
}
_REQUIRED = {
    "Rotation": {"axis", "angle"},
    "PhaseAccumulation": {"phi"},
    "OneAxisTwist": {"mu"},
    "QNDMeasurement": {"sigma"},
    "ReadoutNoise": {"sigma_det"},
}
_OPTIONAL = {"QNDMeasurement": {"outcome"}}


def element_to_record(el) -> dict:
    rec = {"type": type(el).__name__}
    for name in el.__dataclass_fields__:
        val = getattr(el, name)
        if val is None:  # unset optional field
            continue
        rec[name] = list(val) if isinstance(val, tuple) else val
    return rec


def element_from_record(rec: dict):
    """Build a sequence element from ``{"type": ..., <fields>}``; unknown keys are errors."""
    kind = rec.get("type")
    if kind not in ELEMENT_TYPES:
        raise InvalidArgument(f"unknown sequence element type {kind!r}")
    keys = set(rec) - {"type"}
    missing = _REQUIRED[kind] - keys
    unknown = keys - _REQUIRED[kind] - _OPTIONAL.get(kind, set())
    if missing or unknown:
        raise InvalidArgument(
            f"{kind}: missing fields {sorted(missing)}, unknown fields {sorted(unknown)}"
        )
    return ELEMENT_TYPES[kind](**{k: rec[k] for k in keys})


def validate_sequence(elements: Sequence) -> None:
    for i, el in enumerate(elements):
        if isinstance(el, ReadoutNoise) and i != len(elements) - 1:
            raise SequenceError(i, InvalidArgument("ReadoutNoise must be the final element"))


def readout_noise(elements: Sequence) -> float:
    """Detection noise declared by a trailing ReadoutNoise element (0 if none)."""
    if elements and isinstance(elements[-1], ReadoutNoise):
        return elements[-1].sigma_det
    return 0.0


def element_rng(seed: Optional[int], index: int) -> np.random.Generator:
    """Independent substream for sequence element ``index``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def apply_sequence(state: CollectiveSpinState, elements: Sequence, seed: Optional[int] = None):
    """Apply elements left to right.

    Returns the final state and the list of QND outcomes in order. A trailing
    ReadoutNoise element is not applied to the state; read it back with
    :func:`readout_noise`.
    """
    validate_sequence(elements)
    outcomes = []
    for i, el in enumerate(elements):
        try:
            if isinstance(el, Rotation):
                state = rotate(state, el.axis, el.angle)
            elif isinstance(el, PhaseAccumulation):
                state = accumulate_phase(state, el.phi)
            elif isinstance(el, OneAxisTwist):
                state = one_axis_twist(state, el.mu)
            elif isinstance(el, QNDMeasurement):
                state, r = qnd_measure(state, el.sigma, el.outcome, element_rng(seed, i))
                outcomes.append(r)
            elif isinstance(el, ReadoutNoise):
                pass
            else:
                raise InvalidArgument(f"not a sequence element: {el!r}")
        except SequenceError:
            raise
        except Exception as exc:
            raise SequenceError(i, exc) from exc
    return state, outcomes


# -- readout -----------------------------------------------------------------

OBSERVABLES = ("Jz", "JzSquared")


@dataclass(frozen=True)
class MeasurementModel:
    observable: str = "Jz"
    sigma_det: float = 0.0
    shots: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise InvalidArgument(f"observable must be one of {OBSERVABLES}")
        if not self.sigma_det >= 0:
            raise InvalidArgument("sigma_det must be >= 0")
        if isinstance(self.shots, bool) or int(self.shots) != self.shots or self.shots < 1:
            raise InvalidArgument("shots must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")


def sample_measurement(state: CollectiveSpinState, model: MeasurementModel) -> np.ndarray:
    """Draw ``model.shots`` noisy readouts.

    Shots are generated in fixed-size chunks, each from its own substream of
    ``model.seed``, so the output does not depend on how chunks are scheduled.
    Detection noise is added to the sampled Jz eigenvalue before squaring.
    """
    m = state.m
    cdf = np.cumsum(state.populations)
    cdf /= cdf[-1]
    out = np.empty(model.shots)
    root = np.random.SeedSequence(int(model.seed))
    for chunk, start in enumerate(range(0, model.shots, SHOT_CHUNK)):
        stop = min(start + SHOT_CHUNK, model.shots)
        gen = np.random.default_rng(np.random.SeedSequence(root.entropy, spawn_key=(chunk,)))
        u = gen.random(stop - start)
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), m.size - 1)
        vals = m[idx]
        if model.sigma_det > 0:
            vals = vals + model.sigma_det * gen.standard_normal(stop - start)
        out[start:stop] = vals
    if model.observable == "JzSquared":
        out = out**2
    return out
