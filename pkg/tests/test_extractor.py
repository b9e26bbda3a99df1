from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svx.core import SourceSpec, sample_sequence
from svx.extractor import (EXTRACTABLE, GAP, IMPOSSIBLE, MartingaleConfig, StreamExhausted, WalkSignStrategy,
                           adaptive_sign_dice, bias_bracket, check_restricted_necessary, default_threshold,
                           extract_bit, extract_bits, find_psi, make_witness, simulate_walks, verdict)
from svx.instances import binary_sv, three_symbol
from tests.oracles import nullspace_dim

F = Fraction


def test_three_symbol_witness_exact():
    w = find_psi(three_symbol())
    assert w.values == (F(1, 3), F(1, 3), F(-1))
    assert w.means == (0, 0)
    assert w.min_variance == F(1, 3)
    assert w.is_valid()


def test_binary_has_no_witness():
    assert find_psi(binary_sv()) is None
    assert verdict(binary_sv()).status == IMPOSSIBLE


def test_witness_normalization_sign():
    w = make_witness(three_symbol(), [F(-1), F(-1), F(3)])
    assert w.values == (F(1, 3), F(1, 3), F(-1))


def test_single_die_extractable():
    v = verdict(SourceSpec.from_dice([["1/2", "1/2"]]))
    assert v.status == EXTRACTABLE
    assert v.witness.values == (1, -1)


def test_degenerate_deterministic_die_impossible():
    # a die that always lands on 0 alone gives nothing
    v = verdict(SourceSpec.from_dice([[1, 0], [F(1, 2), F(1, 2)]]))
    assert v.status == IMPOSSIBLE
    assert v.subset == (0,)


def test_degenerate_gap():
    # zero-mean psi exists on {1, 2} for die 1 but die 0 is a point mass on symbol 0;
    # every nonzero nullspace vector has zero variance under die 0 and no subset test fires
    spec = SourceSpec.from_dice([[0, F(1, 2), F(1, 2)], [F(1, 2), F(1, 4), F(1, 4)]])
    assert check_restricted_necessary(spec, (0, 1)) is False
    # this spec is in fact extractable by (0, 1, -1)
    assert verdict(spec).status == EXTRACTABLE
    gap = SourceSpec.from_dice([[1, 0, 0], [0, F(1, 2), F(1, 2)]])
    v = verdict(gap)
    assert v.status in (GAP, IMPOSSIBLE)
    assert check_restricted_necessary(gap, (0,))


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 4), st.integers(1, 4), st.data())
def test_nondegenerate_verdict_matches_nullspace(k, S, data):
    dice = []
    for _ in range(S):
        w = [data.draw(st.integers(1, 6)) for _ in range(k)]
        dice.append([F(x, sum(w)) for x in w])
    spec = SourceSpec.from_dice(dice)
    v = verdict(spec)
    extractable = nullspace_dim(dice) > 0
    assert (v.status == EXTRACTABLE) == extractable
    assert v.status != GAP
    if extractable:
        assert v.witness.is_valid()
        assert max(abs(x) for x in v.witness.values) == 1


def test_default_threshold():
    assert default_threshold(1) == 1
    assert default_threshold(8) == 2
    assert default_threshold(9) == 3
    assert default_threshold(10**6) == 100
    assert default_threshold(10**6 + 1) == 101


def test_extract_bit_examples():
    cfg = MartingaleConfig(2, 10)
    psi = [1.0, -1.0]
    assert extract_bit(psi, cfg, [0, 0]) .__dict__ == {"bit": 1, "tau": 2, "y_tau": 2.0}
    t = extract_bit(psi, cfg, [1, 0, 1, 1, 0])
    assert (t.bit, t.tau, t.y_tau) == (0, 4, -2.0)
    t = extract_bit(psi, MartingaleConfig(5, 4), [0, 1, 0, 1])
    assert (t.bit, t.tau, t.y_tau) == (0, 4, 0.0)
    with pytest.raises(StreamExhausted):
        extract_bit(psi, cfg, [0, 1, 0])


def test_extract_bit_threshold_rounding():
    # 1/3 + 1/3 + 1/3 sums to slightly below 1 in floats; still a hit
    t = extract_bit([1 / 3, -1.0], MartingaleConfig(1, 10), [0, 0, 0])
    assert (t.bit, t.tau) == (1, 3)


def test_extract_bits_blocks():
    cfg = MartingaleConfig(1, 2)
    out = extract_bits([1.0, -1.0], cfg, [0, 1, 1, 0, 1, 1], 3)
    assert [b.bit for b in out] == [1, 0, 0]
    with pytest.raises(StreamExhausted):
        extract_bits([1.0, -1.0], cfg, [0] * 5, 3)


def test_bias_bracket_examples():
    w = find_psi(three_symbol())
    b = bias_bracket(MartingaleConfig(1, 4), w)
    # M = m = 1, v = 1/3, n = 4: tail = 4 / (4/3) = 3
    assert b.tail == pytest.approx(3.0)
    assert b.lo == pytest.approx(1 / 3 - 3)
    assert b.hi == pytest.approx(2 / 3 + 3)
    b = bias_bracket(MartingaleConfig(50, 10**6), w)
    assert b.lo == pytest.approx(50 / 101 - 51**2 * 3 / 10**6)
    assert b.hi == pytest.approx(51 / 101 + 51**2 * 3 / 10**6)


def test_adaptive_sign_dice():
    up, down = adaptive_sign_dice(three_symbol(), np.array([1 / 3, 1 / 3, -1.0]))
    # both dice put 3/4 on the positive symbols and 1/4 on the negative one: ties go to die 0
    assert (up, down) == (0, 0)


@pytest.mark.parametrize("policy", ["adaptive-sign", "constant:1", "uniform"])
def test_simulation_matches_sequential(policy):
    spec, w = three_symbol(), find_psi(three_symbol())
    cfg = MartingaleConfig(3, 60)
    res = simulate_walks(spec, w, cfg, 20, policy, seed=11, chunk=7)
    if policy == "adaptive-sign":
        strat = WalkSignStrategy.for_spec(spec, w)
    elif policy == "constant:1":
        strat = lambda h: 1
    else:
        strat = None
    for i in range(20):
        if strat is None:
            continue
        seq = sample_sequence(spec, strat, cfg.block_length, seed=11, trial=i)
        t = extract_bit(w, cfg, seq)
        assert (res.bits[i], res.tau[i]) == (t.bit, t.tau)
        assert res.y_tau[i] == pytest.approx(t.y_tau, abs=1e-12)


def test_simulation_batching_invariant():
    spec, w = three_symbol(), find_psi(three_symbol())
    cfg = MartingaleConfig(4, 200)
    whole = simulate_walks(spec, w, cfg, 30, seed=5, chunk=64)
    a = simulate_walks(spec, w, cfg, 12, seed=5, chunk=5)
    b = simulate_walks(spec, w, cfg, 18, seed=5, chunk=300, first_trial=12)
    assert np.array_equal(whole.bits, np.concatenate([a.bits, b.bits]))
    assert np.array_equal(whole.tau, np.concatenate([a.tau, b.tau]))


@pytest.mark.parametrize("policy", ["adaptive-sign", "constant:0", "constant:1", "uniform"])
def test_bias_within_bracket_and_optional_stopping(policy):
    spec, w = three_symbol(), find_psi(three_symbol())
    cfg = MartingaleConfig(5, 2000)
    res = simulate_walks(spec, w, cfg, 4000, policy, seed=1)
    s = res.summary()
    br = bias_bracket(cfg, w)
    assert br.lo - 4 * s["sigma"] <= s["freq_one"] <= br.hi + 4 * s["sigma"]
    assert s["freq_tau_eq_n"] <= br.tail + 0.01
    # the walk is a martingale under every policy: E[Y_tau] = 0
    assert abs(s["mean_y_tau"]) <= 4 * s["std_y_tau"] / np.sqrt(s["trials"])
    # overshoot is at most max|psi|
    assert np.all(np.abs(res.y_tau[res.tau < cfg.block_length]) < cfg.threshold + 1 + 1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        MartingaleConfig(0.5, 10)
    with pytest.raises(ValueError):
        MartingaleConfig(2, 0)
