from __future__ import annotations

import math

import numpy as np
import pytest

from branchwalk import (
    branches_to_fourloop,
    build_graph,
    check_condition,
    compare_walks,
    fourloop_to_branches,
    reduce_three_loop,
    return_amplitude,
    rhomboid_expand,
    rhomboid_reduce,
    shift_one_segment_branch,
    sixloop_reduce,
)
from branchwalk.errors import (
    ChoiceOutOfRange,
    ConditionViolated,
    DegenerateAmplitudes,
    DivisionByZeroOperand,
    PatternMismatch,
)

from _patterns import (
    branch_for_expand,
    congruence_error,
    four_loop,
    one_branch,
    rhomboid,
    six_loop,
    spectra_gap,
    three_loop,
    two_branches,
    unit_disk,
)

SQ2 = math.sqrt(2)
WALK_TIMES = (0.1, 0.5, 1.0, 2.0, 5.0)


def _assert_equivalent(g, result, atol=1e-10):
    assert result.transform.unitarity_error() < atol
    assert congruence_error(g, result) < atol
    assert spectra_gap(g.matrix(), result.graph.matrix()) < 1e-9
    report = compare_walks(g, result, WALK_TIMES)
    assert report["max_deviation"] < 1e-9


def _values(result, *names):
    return [result.value(n) for n in names]


# -- one-segment branch ---------------------------------------------------------

@pytest.mark.parametrize(
    "a, ap, b, expected",
    [
        (3, 4, 5, (5, 3, 4)),
        (1, 0, 1, (1, 1, 0)),
        (1, 1, 1, (SQ2, 1 / SQ2, 1 / SQ2)),
    ],
)
def test_one_branch_examples(a, ap, b, expected):
    g, site = one_branch(a, ap, b)
    r = shift_one_segment_branch(g, site)
    assert np.allclose(_values(r, "Omega_x", "x->3", "3->x'"), expected, atol=1e-12)
    _assert_equivalent(g, r)


def test_one_branch_graph_shape():
    g, site = one_branch(3, 4, 5)
    r = shift_one_segment_branch(g, site)
    assert r.graph.nodes == ("0", "1", "x1", "x1'", "3", "5")
    assert r.graph.element("1", "x1") == 5
    assert r.graph.element("x1", "3") == pytest.approx(3)
    assert r.graph.element("3", "x1'") == pytest.approx(4)
    assert r.graph.element("1", "x1'") == 0
    # untouched edges survive verbatim
    assert r.graph.element("0", "1") == 0.7
    assert r.graph.element("3", "5") == 0.3 + 0.2j


def test_one_branch_errors():
    g, site = one_branch(0, 0, 1)
    with pytest.raises(DegenerateAmplitudes):
        shift_one_segment_branch(g, site)
    g, site = one_branch(1, 1, 1)
    with pytest.raises(PatternMismatch):
        shift_one_segment_branch(g, {**site, "2": "3", "3": "2"})
    with pytest.raises(PatternMismatch):
        shift_one_segment_branch(g, {"1": "1", "2": "2"})
    with pytest.raises(PatternMismatch):
        shift_one_segment_branch(g, {**site, "3": "nowhere"})


def test_role_spellings_and_fresh_names():
    g, _ = one_branch(1, 2, 3)
    r = shift_one_segment_branch(g, {"node1": "1", "node2": "2", "node1prime": "1'", "3": "3"})
    again = shift_one_segment_branch(
        build_graph(list(r.graph.nodes) + ["q"], list(r.graph.edges) + [("x1'", "q", 1)]),
        {"1": "3", "2": "x1'", "1p": "5", "3": "q"},
    )
    assert "x2" in again.graph.nodes and "x2'" in again.graph.nodes
    named = shift_one_segment_branch(g, {"1": "1", "2": "2", "1'": "1'", "3": "3"},
                                     names=("u", "v"))
    assert "u" in named.graph.nodes and "v" in named.graph.nodes


# -- three-segment loop -----------------------------------------------------------

@pytest.mark.parametrize(
    "a, ap, bp, b, expected",
    [
        (1, 1, 1, 1, {"Omega_x": SQ2, "A": 1 / SQ2, "A'": 0, "B'": 1 / SQ2,
                      "E_x": 0.5, "E_x'": -0.5}),
        (1, 2, 1, 1, {"Omega_x": math.sqrt(5), "A": 1 / math.sqrt(5), "A'": 0.6,
                      "B'": 2 / math.sqrt(5), "E_x": 0.4, "E_x'": -0.4}),
    ],
)
def test_three_loop_examples(a, ap, bp, b, expected):
    g, site = three_loop(a, ap, bp, b)
    r = reduce_three_loop(g, site)
    for name, value in expected.items():
        assert r.value(name) == pytest.approx(value, abs=1e-12)
    x, xp = "x1", "x1'"
    assert r.graph.energy(x) == pytest.approx(2 * expected["E_x"], abs=1e-12)
    assert r.graph.energy(xp) == pytest.approx(-2 * expected["E_x"], abs=1e-12)
    _assert_equivalent(g, r)


def test_three_loop_without_loop_edge_matches_one_branch():
    g, site = three_loop(0.8, 0.6j, 0, 1.3)
    r = reduce_three_loop(g, site)
    assert r.value("E_x") == 0 and r.value("E_x'") == 0
    g1, s1 = one_branch(0.8, 0.6j, 1.3, tail=False)
    r1 = shift_one_segment_branch(g1, s1)
    assert r.value("A") == pytest.approx(r1.value("x->3"))
    assert r.value("B'") == pytest.approx(np.conj(r1.value("3->x'")))


def test_three_loop_energy_pair_for_complex_amplitudes():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, ap, bp, b = unit_disk(rng, 4)
        g, site = three_loop(a, ap, bp, b)
        r = reduce_three_loop(g, site)
        om2 = abs(a) ** 2 + abs(ap) ** 2
        assert r.value("E_x") == pytest.approx(np.conj(a) * ap * bp / om2, abs=1e-12)
        assert r.value("E_x'") == pytest.approx(-r.value("E_x"), abs=1e-12)
        _assert_equivalent(g, r)


def test_three_loop_with_prior_self_loops():
    rng = np.random.default_rng(4)
    for _ in range(30):
        a, ap, bp, b = unit_disk(rng, 4)
        e1, e_one = rng.uniform(-1, 1, 2)
        g, site = three_loop(a, ap, bp, b, e1=e1, e_one=e_one)
        r = reduce_three_loop(g, site, e1prime=e1)
        assert r.graph.energy("1") == pytest.approx(e_one)
        _assert_equivalent(g, r)


def test_three_loop_energy_guard():
    g, site = three_loop(1, 1, 1, 1, e1=0.25)
    with pytest.raises(PatternMismatch):
        reduce_three_loop(g, site, e1prime=0.5)


# -- four-segment loop --------------------------------------------------------------

def test_fourloop_forward_examples():
    g, site = two_branches(1, 1, 1, 1, 1)
    r = branches_to_fourloop(g, site)
    got = _values(r, "Omega_x", "x->3", "3->x'", "x->2'", "x'->2'", "c")
    assert np.allclose(got, [SQ2, 1 / SQ2, 1 / SQ2, 1 / SQ2, 1 / SQ2, 1], atol=1e-12)
    _assert_equivalent(g, r)

    g, site = two_branches(2, 1, 1, 1, 1)
    r = branches_to_fourloop(g, site)
    s5 = math.sqrt(5)
    got = _values(r, "Omega_x", "x->3", "3->x'", "x->2'", "x'->2'")
    assert np.allclose(got, [s5, 2 / s5, 1 / s5, 2 / s5, 1 / s5], atol=1e-12)
    _assert_equivalent(g, r)


def test_fourloop_forward_without_second_branch():
    g, site = two_branches(0.9, 0.4j, 1.1, 0, 1)
    r = branches_to_fourloop(g, site)
    assert r.graph.neighbors("2'") == []
    _assert_equivalent(g, r)


def test_fourloop_reverse_example_and_round_trip():
    g, site = four_loop(1, 1, 1, 1, 1, 1)
    r = fourloop_to_branches(g, site)
    got = _values(r, "a", "a'", "b", "b'", "c")
    assert np.allclose(got, [1 / SQ2, 1 / SQ2, SQ2, SQ2, 1], atol=1e-12)
    _assert_equivalent(g, r)

    back = branches_to_fourloop(r.graph, r.next_site)
    for old, new in ((("1", "x"), ("1", back.next_site["x"])),
                     (("x", "3"), (back.next_site["x"], "3")),
                     (("3", "x'"), ("3", back.next_site["x'"])),
                     (("x", "2'"), (back.next_site["x"], "2'")),
                     (("2'", "x'"), ("2'", back.next_site["x'"]))):
        assert abs(back.graph.element(*new)) == pytest.approx(abs(g.element(*old)), abs=1e-10)


def test_fourloop_round_trip_random():
    rng = np.random.default_rng(5)
    for _ in range(40):
        a, ap, b, bp, c = unit_disk(rng, 5)
        g, site = two_branches(a, ap, b, bp, c)
        loop = branches_to_fourloop(g, site)
        branches = fourloop_to_branches(loop.graph, loop.next_site, tol=1e-9)
        _assert_equivalent(loop.graph, branches)
        new = branches.next_site
        for (u, v), (p, q) in (((site["1"], site["2"]), (new["1"], new["2"])),
                               ((site["1"], site["1'"]), (new["1"], new["1'"])),
                               ((site["2"], site["3"]), (new["2"], new["3"])),
                               ((site["2"], site["2'"]), (new["2"], new["2'"]))):
            assert abs(branches.graph.element(p, q)) == pytest.approx(abs(g.element(u, v)), abs=1e-10)


def test_fourloop_reverse_condition_violated():
    g, site = four_loop(1, 1, 1, 1, 2, 1)
    with pytest.raises(ConditionViolated) as info:
        fourloop_to_branches(g, site)
    assert info.value.lhs == 1 and info.value.rhs == 2


def test_fourloop_reverse_trivial_open_loop():
    g, site = four_loop(0.8, 1.2, 0, 0.5j, 0, 1)
    r = fourloop_to_branches(g, site)
    assert r.value("a'") == 0
    _assert_equivalent(g, r)


def test_fourloop_reverse_zero_B():
    g, site = four_loop(1, 0, 1, 1, 1, 1)
    with pytest.raises(ConditionViolated):
        fourloop_to_branches(g, site)


# -- rhomboid -----------------------------------------------------------------------

@pytest.mark.parametrize(
    "abcd, expected",
    [
        ((1, 1, 1, 1), (SQ2, SQ2, 0)),
        ((1, 2, 3, 4), (math.sqrt(17), 14 / math.sqrt(17), 5 / math.sqrt(17))),
        ((0.6, 0, 0, 0.8), (1, 0, 0)),
    ],
)
def test_rhomboid_examples(abcd, expected):
    g, site = rhomboid(*abcd)
    r = rhomboid_reduce(g, site)
    assert np.allclose(_values(r, "A", "B", "C"), expected, atol=1e-12)
    _assert_equivalent(g, r)


def test_rhomboid_expand_examples():
    g, site = branch_for_expand(SQ2, SQ2, 0)
    r = rhomboid_expand(g, site, 1, 0.0)
    assert np.allclose(_values(r, "a", "b", "c", "d"), [1, 1, 1, 1], atol=1e-12)
    _assert_equivalent(g, r)

    g, site = branch_for_expand(1, 1, 0)
    r = rhomboid_expand(g, site, 1)
    assert np.allclose(_values(r, "a", "b", "c", "d"), [1, 1, 0, 0], atol=1e-12)

    g, site = branch_for_expand(1, 0, 0)
    with pytest.raises(ChoiceOutOfRange):
        rhomboid_expand(g, site, 2)


def test_rhomboid_round_trip_random():
    rng = np.random.default_rng(6)
    for _ in range(40):
        A, B, C = unit_disk(rng, 3)
        g, site = branch_for_expand(A, B, C)
        choice = abs(A) * rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        square = rhomboid_expand(g, site, choice, rng.uniform(0, 2 * np.pi))
        _assert_equivalent(g, square)
        back = rhomboid_reduce(square.graph, square.next_site)
        assert np.allclose(np.abs(_values(back, "A", "B", "C")), np.abs([A, B, C]), atol=1e-10)


def test_rhomboid_walks_depend_only_on_magnitudes():
    rng = np.random.default_rng(7)
    a, b, c, d = unit_disk(rng, 4)
    r = rhomboid_reduce(*rhomboid(a, b, c, d))
    mags = np.abs(_values(r, "A", "B", "C"))
    traces = []
    for _ in range(3):
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
        g = build_graph(["0", "x", "2", "x'"],
                        [("0", "x", mags[0] * phases[0]), ("x", "2", mags[1] * phases[1]),
                         ("2", "x'", mags[2] * phases[2])])
        traces.append(np.array(return_amplitude(g, "0", WALK_TIMES).amplitudes))
    assert np.max(np.abs(traces[0] - traces[1])) < 1e-10
    assert np.max(np.abs(traces[0] - traces[2])) < 1e-10


# -- six-segment loop -----------------------------------------------------------------

def test_sixloop_uniform_example():
    g, site = six_loop(1, 1, 1, 1, 1, 1)
    r = sixloop_reduce(g, site)
    got = _values(r, "Omega_x", "Omega_y", "x->y", "y->x'", "x'->y'", "y->3", "3->y'")
    assert np.allclose(got, [SQ2, SQ2, 1, 0, 1, SQ2, 0], atol=1e-12)
    x, y, xp, yp = (r.next_site[k] for k in ("1", "x", "2'", "x'"))
    assert set(r.graph.neighbors(xp)) == {yp}
    assert set(r.graph.neighbors(yp)) == {xp}
    _assert_equivalent(g, r)


def test_sixloop_two_branch_example_then_reverse():
    g, site = six_loop(1, 1, 1, 1, 1, 0)
    assert check_condition("two_branch", {"a": 1, "b": 1, "c1": 1, "c2": 1})
    r = sixloop_reduce(g, site)
    branches = fourloop_to_branches(r.graph, r.next_site)
    _assert_equivalent(r.graph, branches)


def test_sixloop_failing_two_branch_condition():
    check = check_condition("two_branch", {"a": 2, "b": 1, "c1": 1, "c2": 1})
    assert not check and check.lhs == 1 and check.rhs == 4
    g, site = six_loop(2, 1, 1, 1, 1, 0)
    r = sixloop_reduce(g, site)
    _assert_equivalent(g, r)
    loop = {"A'": r.value("y->x'"), "B": r.value("y->3"), "B'": r.value("3->y'"),
            "C'": r.value("x'->y'")}
    with pytest.raises(DivisionByZeroOperand):
        check_condition("fourloop", loop)
    # cross-multiplied form B' A'^* = B^* C' is violated
    assert abs(loop["B'"] * np.conj(loop["A'"]) - np.conj(loop["B"]) * loop["C'"]) > 0.1


def test_sixloop_random_equivalence():
    rng = np.random.default_rng(8)
    for _ in range(40):
        g, site = six_loop(*unit_disk(rng, 6))
        _assert_equivalent(g, sixloop_reduce(g, site))


# -- conditions -----------------------------------------------------------------------

def test_check_condition_examples():
    res = check_condition("fourloop", {"A'": 1, "B": 1, "B'": 1, "C'": 1})
    assert res.holds and res.residual == 0
    res = check_condition("two_branch", {"a": 2, "b": 1, "c1": 1, "c2": 2})
    assert res.holds and res.lhs == 4 and res.rhs == 4
    with pytest.raises(DivisionByZeroOperand) as info:
        check_condition("fourloop", {"Ap": 1, "B": 0, "Bp": 1, "Cp": 1})
    assert info.value.operand == "B"
    with pytest.raises(ValueError):
        check_condition("hexagon", {})
