from __future__ import annotations

import math

import numpy as np
import pytest

from branchwalk import (
    Spectrum,
    build_graph,
    chain_matrix,
    compare_walks,
    default_times,
    full_decompose,
    is_identity_up_to_sign,
    propagator,
    return_amplitude,
    shift_one_segment_branch,
    transfer_amplitude,
)
from branchwalk.errors import DimensionMismatch, UnknownNode

from _patterns import one_branch, random_graph


def _edge(omega):
    return build_graph(["1", "2"], [("1", "2", omega)])


@pytest.mark.parametrize("omega, sign", [(1, -1), (2, 1)])
def test_single_edge_at_pi(omega, sign):
    u = propagator(_edge(omega), math.pi)
    assert np.max(np.abs(u - sign * np.eye(2))) < 1e-12


def test_zero_time_is_exact_identity():
    g = random_graph(np.random.default_rng(1), 6, diag=True)
    assert np.array_equal(propagator(g, 0.0), np.eye(6))


def test_non_finite_time_rejected():
    with pytest.raises(ValueError):
        propagator(_edge(1), math.inf)


def test_return_amplitude_is_cosine():
    times = np.linspace(0, 6, 25)
    trace = return_amplitude(_edge(1), "1", times)
    assert np.allclose(trace.amplitudes, np.cos(times), atol=1e-12)
    assert trace.amplitudes[0] == 1
    assert abs(return_amplitude(_edge(1), "1", [math.pi / 2]).amplitudes[0]) < 1e-12


def test_transfer_amplitude_starts_at_zero_and_is_bounded():
    g = random_graph(np.random.default_rng(2), 7)
    trace = transfer_amplitude(g, "n0", "n3", default_times())
    assert trace.amplitudes[0] == 0
    assert max(abs(z) for z in trace.amplitudes) <= 1 + 1e-9


def test_unknown_node():
    with pytest.raises(UnknownNode):
        return_amplitude(_edge(1), "9", [0.0])


def test_cube_chain_returns_at_pi():
    h = chain_matrix([math.sqrt(10), 6 / math.sqrt(10), 8 / math.sqrt(10)])
    spec = Spectrum(h)
    start = np.eye(4)[0]
    assert abs(np.vdot(start, spec.evolve(start, math.pi)) - 1) < 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_unitarity_and_norm(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 9, diag=True)
    spec = Spectrum(g)
    for t in rng.uniform(-10, 10, 5):
        u = spec.propagator(t)
        assert np.max(np.abs(u.conj().T @ u - np.eye(9))) < 1e-10
        assert np.allclose(np.abs(np.linalg.eigvals(u)), 1, atol=1e-12)
        v = rng.normal(size=9) + 1j * rng.normal(size=9)
        v /= np.linalg.norm(v)
        assert abs(np.linalg.norm(spec.evolve(v, t)) - 1) < 1e-10


def test_identity_up_to_sign():
    assert is_identity_up_to_sign(np.eye(3)) == (True, 1)
    assert is_identity_up_to_sign(-np.eye(3)) == (True, -1)
    rot = np.array([[0, -1], [1, 0]])
    assert is_identity_up_to_sign(rot) == (False, 0)
    with pytest.raises(DimensionMismatch):
        is_identity_up_to_sign(np.ones((2, 3)))


def test_default_grid():
    times = default_times()
    assert len(times) == 65 and times[0] == 0 and times[-1] == 10 and math.pi in times


def test_compare_walks_one_branch():
    g, site = one_branch(0.6 + 0.2j, -0.5j, 1.1)
    r = shift_one_segment_branch(g, site)
    report = compare_walks(g, r, np.linspace(0, 5, 10))
    assert set(report["tracked"]) == {"0", "1", "3", "5"}
    assert report["max_deviation"] < 1e-9


def test_compare_walks_detects_wrong_graph():
    rng = np.random.default_rng(3)
    g = random_graph(rng, 6)
    d = full_decompose(g, "n0")
    with pytest.raises(DimensionMismatch):
        compare_walks(random_graph(rng, 7), d, [1.0])
    other = random_graph(rng, 6)
    report = compare_walks(other, d, np.linspace(0, 5, 10))
    assert report["max_deviation"] > 1e-3


def test_compare_walks_zero_grid():
    g = random_graph(np.random.default_rng(4), 5)
    report = compare_walks(g, full_decompose(g, "n0"), [0.0])
    assert report["max_deviation"] < 1e-15


def test_phase_gauge_invariance():
    rng = np.random.default_rng(5)
    hops = rng.uniform(0.2, 2, 5)
    times = np.linspace(0, 10, 40)
    base = Spectrum(chain_matrix(hops))
    dressed = Spectrum(chain_matrix(hops * np.exp(1j * rng.uniform(0, 2 * np.pi, 5))))
    e0 = np.eye(6)[0]
    for t in times:
        a = np.vdot(e0, base.evolve(e0, t))
        b = np.vdot(e0, dressed.evolve(e0, t))
        assert abs(a - b) < 1e-10


def test_csv_format():
    trace = return_amplitude(_edge(1), "1", [0.0, math.pi])
    lines = trace.to_csv().splitlines()
    assert lines[0] == "t,re,im,abs"
    assert lines[1] == "0.0,1.0,0.0,1.0"
    t, re_, im_, ab = lines[2].split(",")
    assert t == "3.1415926535897931"
    assert float(re_) == pytest.approx(-1, abs=1e-12)
