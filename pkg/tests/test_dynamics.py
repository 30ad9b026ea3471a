import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dense_mz, dense_rotation, random_amplitudes, random_axis, spin_matrices
from spinterf import dynamics as D
from spinterf.errors import DegenerateOutcome, InvalidArgument, SequenceError
from spinterf.spin import CollectiveSpinState, make_css, make_dicke, moments, overlap


def random_state(seed, n):
    return CollectiveSpinState(n, random_amplitudes(np.random.default_rng(seed), n))


seeds = st.integers(0, 2**32 - 1)


@given(st.integers(1, 20), seeds, st.floats(-20, 20))
def test_rotate_matches_expm(n, seed, angle):
    rng = np.random.default_rng(seed)
    s = CollectiveSpinState(n, random_amplitudes(rng, n))
    axis = random_axis(rng)
    got = D.rotate(s, axis, angle).amplitudes
    want = dense_rotation(n, axis, angle) @ s.amplitudes
    assert np.max(np.abs(got - want)) < 1e-10


def test_rotate_examples():
    s = D.rotate(make_dicke(4, -2), D.Y_AXIS, math.pi / 2)
    # the -z pole rotated by +pi/2 about y points along -x
    assert abs(overlap(s, make_css(4, math.pi / 2, math.pi))) == pytest.approx(1, abs=1e-10)
    for theta in (0.3, 1.1):
        out = D.rotate(make_css(6, math.pi, 0), D.Y_AXIS, theta)
        assert moments(out).mean[2] == pytest.approx(-3 * math.cos(theta), abs=1e-12)


@given(st.integers(1, 15), seeds)
def test_full_turn_gives_parity_sign(n, seed):
    rng = np.random.default_rng(seed)
    s = CollectiveSpinState(n, random_amplitudes(rng, n))
    out = D.rotate(s, random_axis(rng), 2 * math.pi)
    np.testing.assert_allclose(out.amplitudes, (-1) ** n * s.amplitudes, atol=1e-12)


def test_rotate_rejects_bad_axis():
    s = make_dicke(2, 0)
    for axis in ((1, 1, 0), (0, 0, 0), (1, 0), (math.nan, 0, 1)):
        with pytest.raises(InvalidArgument):
            D.rotate(s, axis, 0.1)
    D.rotate(s, (1 + 5e-10, 0, 0), 0.1)  # within the unit-norm tolerance


@pytest.mark.parametrize("n", [1000, 8000])
def test_rotate_large_n_preserves_norm(n):
    out = D.rotate(make_css(n, 0.4, 0.2), random_axis(np.random.default_rng(n)), 2.3)
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-12


@given(st.integers(1, 12), seeds, st.floats(-7, 7))
def test_phase_equals_z_rotation(n, seed, phi):
    s = random_state(seed, n)
    a = D.accumulate_phase(s, phi)
    np.testing.assert_allclose(a.amplitudes, D.rotate(s, D.Z_AXIS, phi).amplitudes, atol=1e-12)
    np.testing.assert_allclose(np.abs(a.amplitudes), np.abs(s.amplitudes), atol=1e-15)
    np.testing.assert_array_equal(D.accumulate_phase(s, 0.0).amplitudes, s.amplitudes)


@given(st.integers(1, 40), seeds, st.floats(-5, 5))
def test_twist_keeps_jz_distribution(n, seed, mu):
    s = random_state(seed, n)
    t = D.one_axis_twist(s, mu)
    assert np.max(np.abs(t.populations - s.populations)) <= 1e-15
    np.testing.assert_array_equal(D.one_axis_twist(s, 0.0).amplitudes, s.amplitudes)
    _, _, jz = spin_matrices(n)
    want = np.diag(np.exp(-1j * mu * np.diag(jz) ** 2)) @ s.amplitudes
    np.testing.assert_allclose(t.amplitudes, want, atol=1e-13)


@given(st.integers(1, 12), seeds, st.floats(-3, 3), st.floats(-math.pi, math.pi))
def test_unitaries_commute_with_global_phase(n, seed, angle, g):
    s = random_state(seed, n)
    ph = np.exp(1j * g)
    sg = CollectiveSpinState(n, ph * s.amplitudes)
    axis = random_axis(np.random.default_rng(seed))
    for op in (
        lambda x: D.rotate(x, axis, angle),
        lambda x: D.accumulate_phase(x, angle),
        lambda x: D.one_axis_twist(x, angle),
        lambda x: D.mach_zehnder(x, angle),
    ):
        np.testing.assert_allclose(op(sg).amplitudes, ph * op(s).amplitudes, atol=1e-12)


# -- QND ------------------------------------------------------------------------


def test_qnd_forced_outcome_kernel():
    s = make_css(6, math.pi / 2, 0)
    post, r = D.qnd_measure(s, 1.5, forced_outcome=0.7)
    assert r == 0.7
    raw = s.amplitudes * np.exp(-((s.m - 0.7) ** 2) / (4 * 1.5**2))
    np.testing.assert_allclose(post.amplitudes, raw / np.linalg.norm(raw), atol=1e-15)
    # conditional mean is pulled towards the record
    assert 0 < moments(post).mean[2] < 0.7


@given(st.integers(2, 30), seeds, st.floats(-20, 20))
def test_weak_qnd_is_identity(n, seed, r):
    s = random_state(seed, n)
    post, _ = D.qnd_measure(s, 1e9, forced_outcome=r)
    np.testing.assert_allclose(post.amplitudes, s.amplitudes, atol=1e-9)


def test_qnd_errors():
    s = make_css(10, 1.0, 0)
    for bad in (0.0, -1.0, math.nan):
        with pytest.raises(InvalidArgument):
            D.qnd_measure(s, bad)
    with pytest.raises(DegenerateOutcome):
        D.qnd_measure(make_dicke(10, 5), 0.01, forced_outcome=-5)


def test_qnd_outcome_statistics():
    # predictive density: mean <Jz>, variance Var(Jz) + sigma^2
    s = make_css(40, 1.2, 0.3)
    mo = moments(s)
    sigma, trials = 1.5, 20_000
    rs = np.array([D.qnd_measure(s, sigma, rng=D.element_rng(99, i))[1] for i in range(trials)])
    var = mo.covariance[2, 2] + sigma**2
    assert abs(rs.mean() - mo.mean[2]) < 4 * math.sqrt(var / trials)
    # standard error of the sample variance for a near-Gaussian density
    assert abs(rs.var(ddof=1) - var) < 4 * var * math.sqrt(2 / (trials - 1))


def test_qnd_is_reproducible():
    s = make_css(20, 1.0, 0.0)
    a = D.qnd_measure(s, 2.0, rng=123)
    b = D.qnd_measure(s, 2.0, rng=123)
    assert a[1] == b[1]


# -- Mach-Zehnder ---------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 4, 10, 100])
def test_fringe_contract(n):
    for phi in np.linspace(0, 2 * math.pi, 32):
        mo = moments(D.mach_zehnder(make_dicke(n, -n / 2), phi))
        assert mo.mean[2] == pytest.approx(n / 2 * math.cos(phi), abs=1e-9)
        assert mo.covariance[2, 2] == pytest.approx(n / 4 * math.sin(phi) ** 2, abs=1e-9)


def test_mz_examples():
    mo = moments(D.mach_zehnder(make_dicke(4, -2), math.pi / 2))
    assert mo.mean[2] == pytest.approx(0, abs=1e-12)
    assert mo.covariance[2, 2] == pytest.approx(1, abs=1e-12)
    assert moments(D.mach_zehnder(make_dicke(4, -2), 0.0)).mean[2] == pytest.approx(2, abs=1e-12)
    for phi in np.linspace(0, 2 * math.pi, 9):
        assert moments(D.mach_zehnder(make_dicke(4, 0), phi)).mean[2] == pytest.approx(0, abs=1e-12)


@given(st.integers(1, 10), seeds, st.floats(-4, 4))
def test_mz_matches_dense_and_readout_axis(n, seed, phi):
    s = random_state(seed, n)
    out = D.mach_zehnder(s, phi)
    np.testing.assert_allclose(out.amplitudes, dense_mz(n, phi) @ s.amplitudes, atol=1e-10)
    jx, jy, jz = spin_matrices(n)
    nv = D.mz_readout_axis(phi)
    heis = nv[0] * jx + nv[1] * jy + nv[2] * jz
    u = dense_mz(n, phi)
    np.testing.assert_allclose(u.conj().T @ jz @ u, heis, atol=1e-10)
    # the phase generator seen from the input port
    by = dense_rotation(n, D.Y_AXIS, math.pi / 2)
    gx = D.MZ_GENERATOR_AXIS
    np.testing.assert_allclose(by.conj().T @ jz @ by, gx[0] * jx + gx[1] * jy + gx[2] * jz, atol=1e-10)


# -- sequences ------------------------------------------------------------------


def test_empty_sequence_is_identity():
    s = make_css(5, 0.3, 0.2)
    out, records = D.apply_sequence(s, [])
    assert out is s and records == []


def test_sequence_matches_mach_zehnder():
    s = make_css(12, 2.0, 0.5)
    seq = [
        D.Rotation(D.BEAMSPLITTER_AXIS, D.BEAMSPLITTER_ANGLE),
        D.PhaseAccumulation(0.9),
        D.Rotation(D.BEAMSPLITTER_AXIS, D.BEAMSPLITTER_ANGLE),
    ]
    out, _ = D.apply_sequence(s, seq)
    assert abs(overlap(out, D.mach_zehnder(s, 0.9))) == pytest.approx(1, abs=1e-12)


def test_two_qnd_elements_give_two_records():
    seq = [D.QNDMeasurement(2.0), D.OneAxisTwist(0.01), D.QNDMeasurement(3.0, outcome=1.0)]
    _, records = D.apply_sequence(make_css(30, math.pi / 2, 0), seq, seed=5)
    assert len(records) == 2 and records[1] == 1.0
    _, again = D.apply_sequence(make_css(30, math.pi / 2, 0), seq, seed=5)
    assert again == records


def test_sequence_associativity():
    s = make_css(20, 1.0, 0.1)
    a = [D.Rotation((0, 1, 0), 0.4), D.OneAxisTwist(0.05)]
    b = [D.PhaseAccumulation(0.3), D.Rotation((1, 0, 0), -1.2)]
    whole, _ = D.apply_sequence(s, a + b)
    mid, _ = D.apply_sequence(s, a)
    split, _ = D.apply_sequence(mid, b)
    np.testing.assert_array_equal(whole.amplitudes, split.amplitudes)


def test_sequence_errors_carry_index():
    s = make_dicke(10, 5)
    with pytest.raises(SequenceError) as err:
        D.apply_sequence(s, [D.PhaseAccumulation(0.1), D.QNDMeasurement(0.01, outcome=-5)])
    assert err.value.index == 1
    assert isinstance(err.value.__cause__, DegenerateOutcome)
    with pytest.raises(SequenceError) as err:
        D.apply_sequence(s, [D.ReadoutNoise(1.0), D.PhaseAccumulation(0.1)])
    assert err.value.index == 0


def test_readout_noise_is_recorded_not_applied():
    s = make_css(8, 1.0, 0.0)
    out, _ = D.apply_sequence(s, [D.ReadoutNoise(3.0)])
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)
    assert D.readout_noise([D.PhaseAccumulation(0.1), D.ReadoutNoise(3.0)]) == 3.0
    assert D.readout_noise([]) == 0.0


def test_element_invariants():
    for build in (
        lambda: D.Rotation((1, 1, 1), 0.1),
        lambda: D.QNDMeasurement(0.0),
        lambda: D.ReadoutNoise(-0.1),
    ):
        with pytest.raises(InvalidArgument):
            build()


element_strategy = st.one_of(
    st.builds(lambda v, a: D.Rotation(tuple(v / np.linalg.norm(v)), a),
              st.lists(st.floats(0.1, 1), min_size=3, max_size=3).map(np.array), st.floats(-7, 7)),
    st.builds(D.PhaseAccumulation, st.floats(-7, 7)),
    st.builds(D.OneAxisTwist, st.floats(-1, 1)),
    st.builds(D.QNDMeasurement, st.floats(0.1, 10), st.one_of(st.none(), st.floats(-5, 5))),
    st.builds(D.ReadoutNoise, st.floats(0, 10)),
)


@given(element_strategy)
def test_element_record_round_trip(el):
    rec = D.element_to_record(el)
    assert D.element_from_record(rec) == el


def test_element_record_rejects_unknown_keys():
    with pytest.raises(InvalidArgument):
        D.element_from_record({"type": "PhaseAccumulation", "phi": 0.1, "phj": 0.2})
    with pytest.raises(InvalidArgument):
        D.element_from_record({"type": "Squeeze", "mu": 0.1})
    with pytest.raises(InvalidArgument):
        D.element_from_record({"type": "Rotation", "angle": 0.1})


# -- sampling -------------------------------------------------------------------


def test_sampling_eigenstate():
    out = D.sample_measurement(make_dicke(6, 1), D.MeasurementModel("Jz", 0.0, 500, 3))
    assert np.all(out == 1)
    sq = D.sample_measurement(make_dicke(6, -2), D.MeasurementModel("JzSquared", 0.0, 50, 3))
    assert np.all(sq == 4)


def test_sampling_statistics():
    model = D.MeasurementModel("Jz", 0.0, 100_000, 42)
    out = D.sample_measurement(make_css(100, math.pi / 2, 0), model)
    assert abs(out.mean()) < 3 * 5 / math.sqrt(1e5)
    assert out.var() == pytest.approx(25, rel=0.02)


def test_sampling_noise_before_squaring():
    model = D.MeasurementModel("JzSquared", 2.0, 200_000, 8)
    out = D.sample_measurement(make_dicke(10, 3), model)
    # E[(3 + e)^2] = 9 + sigma^2
    assert out.mean() == pytest.approx(13, abs=4 * math.sqrt((4 * 9 * 4 + 2 * 16) / 2e5))
    assert np.any(out < 9)


def test_sampling_determinism_and_prefix_stability():
    s = make_css(50, 1.0, 0.0)
    a = D.sample_measurement(s, D.MeasurementModel("Jz", 1.0, 20_000, 77))
    b = D.sample_measurement(s, D.MeasurementModel("Jz", 1.0, 20_000, 77))
    np.testing.assert_array_equal(a, b)
    # whole chunks are shared between runs of different length
    c = D.sample_measurement(s, D.MeasurementModel("Jz", 1.0, D.SHOT_CHUNK, 77))
    np.testing.assert_array_equal(a[: D.SHOT_CHUNK], c)
    d = D.sample_measurement(s, D.MeasurementModel("Jz", 1.0, 20_000, 78))
    assert not np.array_equal(a, d)


@pytest.mark.parametrize(
    "kwargs",
    [dict(observable="Jx"), dict(sigma_det=-1), dict(shots=0), dict(shots=1.5), dict(seed=-1), dict(seed=2**64)],
)
def test_measurement_model_validation(kwargs):
    with pytest.raises(InvalidArgument):
        D.MeasurementModel(**kwargs)


def test_mach_zehnder_large_n_stays_normalized():
    # two long Chebyshev series in a row used to drift past the 1e-12 norm tolerance
    out = D.mach_zehnder(make_dicke(8000, 0), 0.01)
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-13
    assert moments(out).mean[2] == pytest.approx(0, abs=1e-8)
