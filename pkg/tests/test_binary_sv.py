from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from svx.adversary import alpha_beta, phi_set
from svx.binary_sv import (all_base_delta, base_delta, binary_spec, curve_from_csv, curve_gap, curve_to_csv,
                           dominated_by, dominates_curve_point, domination_frontier, f_delta_curve, int_bits,
                           left_prefix_table, prefix_value, verify_basedelta_lemma, verify_prefix_optimality)
from tests.oracles import base_delta_by_definition

F = Fraction


def test_base_delta_examples():
    d = F(1, 3)
    assert base_delta("1", d) == F(2, 3)
    assert base_delta("011", d) == F(16, 27)
    assert base_delta("010", d) == F(4, 9)
    assert base_delta("", d) == 0


@given(st.integers(1, 10), st.data())
def test_half_gives_binary_value(n, data):
    x = data.draw(st.integers(0, 2**n - 1))
    assert base_delta(int_bits(x, n), F(1, 2)) == F(x, 2**n)


@pytest.mark.parametrize("delta", [F(1, 4), F(1, 3), F(9, 20), 0.3])
def test_recursion_matches_definition(delta):
    for n in range(0, 7):
        v = all_base_delta(n, delta)
        for x in range(2**n):
            ref = base_delta_by_definition(int_bits(x, n), delta)
            if isinstance(delta, Fraction):
                assert v[x] == ref
            else:
                assert v[x] == pytest.approx(ref, abs=1e-15)


@pytest.mark.parametrize("delta", [F(1, 4), F(1, 3), F(9, 20)])
def test_increasing_and_prefix_tables_attain_expansions(delta):
    n = 6
    v = all_base_delta(n, delta)
    w = all_base_delta(n, 1 - delta)
    assert all(a < b for a, b in zip(v, v[1:]))
    # left-prefix tables: beta is the expansion at delta, alpha the expansion at 1 - delta
    spec = binary_spec(delta)
    for x in range(2**n + 1):
        t = left_prefix_table(n, x)
        ab = alpha_beta(spec, t)
        assert ab.beta == prefix_value(x, n, delta)
        assert ab.alpha == prefix_value(x, n, 1 - delta)
    assert w[-1] < 1 and v[-1] < 1


def test_prefix_value_full_table():
    assert prefix_value(8, 3, F(1, 3)) == 1
    with pytest.raises(ValueError):
        left_prefix_table(3, 9)


@pytest.mark.parametrize("delta", [F(1, 4), F(1, 3), F(9, 20)])
def test_prefix_optimality_depth3(delta):
    rep = verify_prefix_optimality(delta, 3)
    assert rep.ok, rep.violations[:3]
    assert rep.checked == 256


def test_prefix_optimality_at_half():
    # at delta = 1/2 every table of size x gives exactly x / 2**n
    assert verify_prefix_optimality(F(1, 2), 2).ok


def test_lemma_holds_up_to_half():
    deltas = [F(k, 20) for k in range(1, 11)]
    rep = verify_basedelta_lemma(6, deltas)
    assert rep.ok
    assert rep.failures == rep.corollary_failures == 0
    assert all(v == 0 for v in rep.failures_by_delta.values())


def test_lemma_counterexample_above_half():
    # x = 011, y = 001, z = 100 at n = 3: left side (1-d)^2 (1 + d) + d (1-d)^2, right side 1 - d
    for d in (F(11, 20), F(3, 5), F(4, 5)):
        v = all_base_delta(3, d)
        assert v[3] + d / (1 - d) * v[1] < v[4]
    for d in (F(1, 2), F(9, 20), F(1, 3)):
        v = all_base_delta(3, d)
        assert v[3] + d / (1 - d) * v[1] >= v[4]
    # same numbers straight from the definition: the inequality reduces to d (1 - 2d) >= 0
    for d in (F(1, 5), F(1, 2), F(11, 20), F(9, 10)):
        lhs = base_delta_by_definition((0, 1, 1), d) + d / (1 - d) * base_delta_by_definition((0, 0, 1), d)
        assert (lhs >= base_delta_by_definition((1, 0, 0), d)) == (d <= F(1, 2))
    rep = verify_basedelta_lemma(3, [F(11, 20)])
    assert not rep.ok
    assert rep.failures > 0


def test_curve_contains_phi_one_point_and_gap():
    pts = f_delta_curve(F(1, 3), 12)
    assert len(pts) == 2**12 + 1
    assert np.any(np.all(np.isclose(pts, [1 / 3, 2 / 3], atol=1e-15), axis=1))
    assert curve_gap(pts) == pytest.approx(1 / 6)
    assert np.all(np.diff(pts[:, 0]) > 0)


def test_curve_argument_checks():
    with pytest.raises(ValueError):
        f_delta_curve(0.5, 3)
    with pytest.raises(ValueError):
        f_delta_curve(0.3, 21)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_phi_pairs_dominate_curve_points(n):
    curve = f_delta_curve(F(1, 3), 12)
    phi = phi_set(binary_spec(F(1, 3)), n).as_array()
    assert dominates_curve_point(phi, curve).all()


def test_same_size_prefix_is_dominated_exactly():
    # exact version: each table's pair dominates the left-prefix pair with the same number of zero leaves
    from svx.adversary import all_tables, alpha_beta_batch
    d = F(1, 3)
    labels = all_tables(2, 3)
    a, b = alpha_beta_batch(binary_spec(d), labels, exact=True)
    for row, ai, bi in zip(labels, a, b):
        x = int((row == 0).sum())
        assert ai <= prefix_value(x, 3, 1 - d) and bi >= prefix_value(x, 3, d)


def test_reverse_direction_fails_on_phi3():
    # no curve point has alpha <= 7/27 and beta >= 20/27, yet (7/27, 20/27) is achievable at depth 3
    curve = f_delta_curve(F(1, 3), 12)
    phi = phi_set(binary_spec(F(1, 3)), 3)
    assert (F(7, 27), F(20, 27)) in phi.points
    assert not dominated_by([[7 / 27, 20 / 27]], curve)[0]


def test_center_not_dominating_any_curve_point():
    curve = f_delta_curve(F(1, 3), 8)
    assert not dominates_curve_point([[0.5, 0.5]], curve)[0]
    assert dominated_by([[0.5, 0.5]], curve)[0]


def test_domination_frontier():
    pts = [[0.1, 0.2], [0.1, 0.3], [0.2, 0.25], [0.3, 0.9]]
    assert domination_frontier(pts).tolist() == [[0.1, 0.3], [0.3, 0.9]]


def test_csv_roundtrip_bit_exact():
    pts = f_delta_curve(0.3, 6)
    back = curve_from_csv(curve_to_csv(pts))
    assert np.array_equal(back, pts)
    with pytest.raises(ValueError):
        curve_from_csv("a,b\n1,2\n")
