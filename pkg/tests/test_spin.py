import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dense_expectation, random_amplitudes, spin_matrices
from spinterf.errors import DimensionMismatch, InvalidArgument
from spinterf.spin import (
    CollectiveSpinState,
    axis_powers,
    axis_statistics,
    load_state,
    make_css,
    make_dicke,
    moments,
    overlap,
    save_state,
    twin_fock,
    variance_along,
)

angles = st.floats(-10, 10, allow_nan=False)
sizes = st.integers(1, 40)


def test_south_pole_css_is_lowest_dicke_state():
    s = make_css(4, math.pi, 0.0)
    np.testing.assert_array_equal(np.abs(s.amplitudes), [1, 0, 0, 0, 0])
    assert abs(overlap(s, make_dicke(4, -2))) == pytest.approx(1, abs=1e-15)


@given(st.floats(0, math.pi), st.floats(-math.pi, math.pi))
def test_single_atom_css_convention(theta, phi):
    # c_{-1/2} = sin(theta/2) e^{+i phi/2}, c_{+1/2} = cos(theta/2) e^{-i phi/2}
    s = make_css(1, theta, phi)
    expected = [math.sin(theta / 2) * np.exp(0.5j * phi), math.cos(theta / 2) * np.exp(-0.5j * phi)]
    np.testing.assert_allclose(s.amplitudes, expected, atol=1e-15)


def test_equatorial_css_moments():
    mo = moments(make_css(10, math.pi / 2, 0.0))
    np.testing.assert_allclose(mo.mean, [5, 0, 0], atol=1e-12)
    assert mo.covariance[2, 2] == pytest.approx(2.5, abs=1e-12)


def test_dicke_moments():
    mo = moments(make_dicke(4, 0))
    np.testing.assert_allclose(mo.mean, 0, atol=1e-15)
    np.testing.assert_allclose(np.diag(mo.covariance), [3, 3, 0], atol=1e-12)
    assert moments(make_dicke(2, 1)).mean[2] == 1
    np.testing.assert_allclose(moments(make_css(4, math.pi, 0)).mean, [0, 0, -2], atol=1e-15)


def test_sum_rule_example():
    mo = moments(make_css(20, 1.0, 0.3))
    assert mo.variances.sum() + mo.spin_length**2 == pytest.approx(110, abs=1e-9)


def test_overlap_examples():
    s = make_css(10, math.pi / 2, 0.0)
    assert overlap(s, s) == pytest.approx(1, abs=1e-14)
    assert overlap(make_dicke(4, 0), make_dicke(4, 1)) == 0
    assert abs(overlap(s, make_dicke(10, 0))) ** 2 == pytest.approx(math.comb(10, 5) / 2**10, abs=1e-14)
    assert 0.24609375 == math.comb(10, 5) / 2**10
    with pytest.raises(DimensionMismatch):
        overlap(make_dicke(4, 0), make_dicke(6, 0))


@given(sizes, angles, angles)
def test_css_normalized_and_properties(n, theta, phi):
    s = make_css(n, theta, phi)
    assert abs(np.vdot(s.amplitudes, s.amplitudes).real - 1) < 1e-12
    mo = moments(s)
    assert mo.spin_length == pytest.approx(n / 2, abs=1e-9)
    # variance transverse to the mean spin is N/4
    d = mo.mean / mo.spin_length
    t1 = np.cross(d, [0.3, -0.5, 0.81])
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(d, t1)
    for t in (t1, t2, (t1 + t2) / math.sqrt(2)):
        assert variance_along(mo, t) == pytest.approx(n / 4, abs=1e-9)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_moments_match_dense_oracle(n, seed):
    amps = random_amplitudes(np.random.default_rng(seed), n)
    s = CollectiveSpinState(n, amps)
    mo = moments(s)
    ops = spin_matrices(n)
    mean = np.array([dense_expectation(o, amps).real for o in ops])
    np.testing.assert_allclose(mo.mean, mean, atol=1e-10)
    for a in range(3):
        for b in range(3):
            sym = (ops[a] @ ops[b] + ops[b] @ ops[a]) / 2
            cov = dense_expectation(sym, amps).real - mean[a] * mean[b]
            assert mo.covariance[a, b] == pytest.approx(cov, abs=1e-10)
    jz = ops[2]
    for p in range(1, 5):
        expect = dense_expectation(np.linalg.matrix_power(jz, p), amps).real
        assert mo.jz_powers[p - 1] == pytest.approx(expect, abs=1e-10 * max(1, (n / 2) ** p))
    assert mo.spin_length <= n / 2 + 1e-9
    assert np.all(np.diag(mo.covariance) >= 0)
    j = n / 2
    assert mo.variances.sum() + mo.spin_length**2 == pytest.approx(j * (j + 1), abs=1e-9)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_axis_statistics_match_dense_oracle(n, seed):
    rng = np.random.default_rng(seed)
    amps = random_amplitudes(rng, n)
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    s = CollectiveSpinState(n, amps)
    jx, jy, jz = spin_matrices(n)
    a = axis[0] * jx + axis[1] * jy + axis[2] * jz
    powers = [dense_expectation(np.linalg.matrix_power(a, p), amps).real for p in range(1, 5)]
    np.testing.assert_allclose(axis_powers(s, axis), powers, atol=1e-9)
    m1, v1, m2, v2 = axis_statistics(s, axis)
    assert m1 == pytest.approx(powers[0], abs=1e-10)
    assert v1 == pytest.approx(powers[1] - powers[0] ** 2, abs=1e-9)
    assert m2 == pytest.approx(powers[1], abs=1e-10)
    assert v2 == pytest.approx(powers[3] - powers[1] ** 2, abs=1e-8)


@given(n=st.integers(1, 30), seed=st.integers(0, 2**32 - 1))
def test_record_round_trip(tmp_path_factory, n, seed):
    s = CollectiveSpinState(n, random_amplitudes(np.random.default_rng(seed), n))
    rec = s.to_record()
    assert set(rec) == {"n_atoms", "amplitudes"}
    back = CollectiveSpinState.from_record(rec)
    np.testing.assert_array_equal(back.amplitudes, s.amplitudes)
    path = tmp_path_factory.mktemp("ckpt") / "state.json"
    save_state(s, path)
    np.testing.assert_array_equal(load_state(path).amplitudes, s.amplitudes)


def test_dicke_validation():
    make_dicke(3, 1.5)
    for n, bad in ((4, 0.5), (3, 2.5), (3, 0.3), (3, math.nan)):
        with pytest.raises(InvalidArgument):
            make_dicke(n, bad)
    with pytest.raises(InvalidArgument):
        twin_fock(5)


@pytest.mark.parametrize(
    "build",
    [
        lambda: make_css(0, 0.1, 0.1),
        lambda: make_css(-3, 0.1, 0.1),
        lambda: make_css(3, math.inf, 0.1),
        lambda: make_css(3, 0.1, math.nan),
        lambda: CollectiveSpinState(2, [1, 0]),
        lambda: CollectiveSpinState(1, [1, 1]),
        lambda: CollectiveSpinState(1, [math.nan, 0]),
        lambda: CollectiveSpinState.from_record({"n_atoms": 1, "amplitudes": [[1, 0], [0, 0]], "x": 1}),
    ],
)
def test_invalid_inputs(build):
    with pytest.raises(InvalidArgument):
        build()


def test_state_is_immutable():
    s = make_dicke(4, 0)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1


def test_large_n_css_is_finite():
    s = make_css(10_000, 1.3, 0.4)
    mo = moments(s)
    assert mo.spin_length == pytest.approx(5000, rel=1e-9)
    assert mo.covariance[2, 2] == pytest.approx(2500 * math.sin(1.3) ** 2, rel=1e-6)
