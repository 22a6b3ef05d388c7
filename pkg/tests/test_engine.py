import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_counter_distribution
from qara.engine import (
    DistinctnessError,
    Distribution,
    analytic_distribution,
    best_case_probability,
    branch_amplitudes,
    branch_angles,
    encode_window,
    interfering_branches,
    outlier_bound,
    rotation_count,
    run_qara,
    sample_index,
    simulate_branches,
    simulate_statevector,
)
from qara.verify import bound_instance, strictly_ordered

SMALL_WINDOW = [5, 0, 15, 10]
WIDE_WINDOW = [8, 3, 29, 63, 14, 2, 45, 10]
# frozen from the brute-force Kronecker oracle in conftest
SMALL_WINDOW_PROBS = [0.3345908088261303, 0.4086624366561966, 0.0785315565889915, 0.17821519792868165]
INTERFERENCE_PROBS = [0.144912301296658, 0.03444110995146078, 0.5706465887518811, 0.25]


@st.composite
def distinct_windows(draw, ms=(1, 2, 3), ns=(3, 4, 5, 6)):
    m = draw(st.sampled_from(ms))
    n = draw(st.sampled_from([n for n in ns if n >= m]))
    values = draw(st.lists(st.integers(0, 2**n - 1), min_size=2**m, max_size=2**m, unique=True))
    ref = draw(st.integers(0, 2**n - 1))
    return values, ref, n


# -- encoding -----------------------------------------------------------------

def test_encode_fig4_unique():
    w = encode_window(SMALL_WINDOW, 0, 4, True)
    assert (w.geometry.M, w.geometry.m) == (4, 2)
    assert w.words == (5 * 4 + 0, 0 * 4 + 1, 15 * 4 + 2, 10 * 4 + 3)
    assert w.geometry.data_qubits == 6


def test_encode_duplicates_separated():
    w = encode_window([0, 0], 0, 1, True)
    assert w.words == (0, 1)
    assert not w.interferes


def test_encode_duplicates_without_unique_mode():
    w = encode_window([3, 3, 3, 3], 3, 2, False)
    assert w.has_duplicates and w.interferes


@pytest.mark.parametrize("values,ref,n", [([1, 2, 3], 0, 2), ([1], 0, 2), ([4, 0], 0, 2), ([1, 0], 4, 2), ([-1, 0], 0, 2)])
def test_encode_errors(values, ref, n):
    with pytest.raises(ValueError):
        encode_window(values, ref, n)


# -- branch angles ------------------------------------------------------------

def test_angle_zero_when_equal():
    assert branch_angles(encode_window([6, 6], 6, 3)).thetas[0] == 0.0


def test_angle_examples():
    thetas = branch_angles(encode_window([15, 5], 0, 4)).thetas
    bitwise = -(math.pi / 4 + math.pi / 8 + math.pi / 16 + math.pi / 32)
    assert thetas[0] == pytest.approx(-15 * math.pi / 32, abs=1e-15)
    assert thetas[0] == pytest.approx(bitwise, abs=1e-15)
    assert thetas[0] == pytest.approx(-(math.pi / 2 - math.pi / 32), abs=1e-15)
    assert thetas[1] == pytest.approx(-5 * math.pi / 32, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(distinct_windows(ns=(1, 4, 8, 12, 16)))
def test_angles_bounded(win):
    values, ref, n = win
    assert np.all(np.abs(branch_angles(encode_window(values, ref, n)).thetas) < math.pi / 2)


# -- analytic distribution ------------------------------------------------------

def test_analytic_uniform_when_all_match():
    p = analytic_distribution(encode_window([9] * 8, 9, 4, True)).probs
    np.testing.assert_allclose(p, 1 / 8, atol=1e-15)


def test_analytic_fig4():
    p = analytic_distribution(encode_window(SMALL_WINDOW, 0, 4, True)).probs
    np.testing.assert_allclose(p, [0.3346, 0.4087, 0.0785, 0.1782], atol=1e-4)
    np.testing.assert_allclose(p, SMALL_WINDOW_PROBS, atol=1e-12)


def test_analytic_single_outlier():
    values = [0, 0, 3, 0]
    p = analytic_distribution(encode_window(values, 0, 2, True)).probs
    assert p[2] == pytest.approx(math.sin(math.pi / 8) ** 2 / 4, abs=1e-15)
    assert p[2] == pytest.approx(0.03661, abs=1e-5)
    np.testing.assert_allclose(p, brute_force_counter_distribution(values, 0, 2, True), atol=1e-12)


def test_analytic_rejects_interfering_window():
    with pytest.raises(DistinctnessError, match="distinct"):
        analytic_distribution(encode_window([7, 7, 0, 0], 0, 3, False))


def test_analytic_sign_placement_irrelevant():
    w = encode_window(SMALL_WINDOW, 0, 4)
    amps = branch_amplitudes(w)
    flipped = amps * np.where(np.random.default_rng(1).random(amps.shape) < 0.5, -1, 1)
    np.testing.assert_allclose((flipped**2).sum(axis=0), analytic_distribution(w).probs, atol=1e-15)


# -- statevector ----------------------------------------------------------------

@pytest.mark.parametrize("rotations", ["gates", "dense"])
def test_statevector_fig4(rotations):
    p = simulate_statevector(encode_window(SMALL_WINDOW, 0, 4, True), rotations).probs
    np.testing.assert_allclose(p, SMALL_WINDOW_PROBS, atol=1e-10)


def test_statevector_fig5_ordering():
    p = simulate_statevector(encode_window(WIDE_WINDOW, 0, 6, True)).probs
    by_value = p[np.argsort(WIDE_WINDOW)]
    assert np.all(np.diff(by_value) < 0)


def test_statevector_interference():
    w = encode_window([7, 7, 0, 0], 0, 3, False)
    p = simulate_statevector(w).probs
    np.testing.assert_allclose(p, INTERFERENCE_PROBS, atol=1e-10)
    formula = analytic_distribution(encode_window([7, 7, 0, 0], 0, 3, True)).probs
    assert np.abs(p - formula).max() > 1e-6


def test_statevector_too_large():
    w = encode_window(list(range(128)), 0, 10, True)
    with pytest.raises(ValueError, match="simulate_branches"):
        simulate_statevector(w)


def test_statevector_unknown_rotation_backend():
    with pytest.raises(ValueError):
        simulate_statevector(encode_window(SMALL_WINDOW, 0, 4), rotations="magic")


@pytest.mark.parametrize(
    "values,ref,n,unique",
    [([3, 1, 2, 0], 2, 2, False), ([1, 1, 1, 1], 0, 2, False), ([5, 5, 2, 7], 3, 3, True), ([0, 1, 1, 0], 1, 1, False)],
)
def test_statevector_matches_brute_force(values, ref, n, unique):
    p = simulate_statevector(encode_window(values, ref, n, unique)).probs
    np.testing.assert_allclose(p, brute_force_counter_distribution(values, ref, n, unique), atol=1e-12)


# -- branch backend -------------------------------------------------------------

def test_branches_two_elements():
    n = 5
    w = encode_window([0, 2**n - 1], 0, n, True)
    np.testing.assert_allclose(simulate_branches(w).probs, simulate_statevector(w).probs, atol=1e-12)


def test_branches_uniform():
    p = simulate_branches(encode_window([4] * 16, 4, 3, True)).probs
    np.testing.assert_allclose(p, 1 / 16, atol=1e-15)


def test_branches_sweep(rng):
    worst = 0.0
    for _ in range(100):
        values = rng.choice(256, size=8, replace=False)
        w = encode_window(values, int(rng.integers(256)), 8, False)
        worst = max(worst, np.abs(simulate_branches(w).probs - analytic_distribution(w).probs).max())
    assert worst < 1e-10


def test_branches_scale():
    rng = np.random.default_rng(5)
    w = encode_window(rng.choice(2**16, size=1024, replace=False), 31337, 16, True)
    p = simulate_branches(w).probs
    assert abs(p.sum() - 1) < 1e-10
    np.testing.assert_allclose(p, analytic_distribution(w).probs, atol=1e-12)


def test_interfering_branches_match_statevector():
    for values, ref, n in [([7, 7, 0, 0], 0, 3), ([1, 1, 1, 1], 2, 2), ([2, 5, 2, 5, 2, 0, 1, 2], 4, 3)]:
        w = encode_window(values, ref, n, False)
        np.testing.assert_allclose(interfering_branches(w).probs, simulate_statevector(w).probs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(distinct_windows())
def test_backend_agreement(win):
    values, ref, n = win
    w = encode_window(values, ref, n, True)
    a = analytic_distribution(w).probs
    for other in (simulate_branches(w).probs, simulate_statevector(w).probs):
        assert np.abs(a - other).max() <= 1e-10
        assert abs(other.sum() - 1) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(distinct_windows(ms=(1, 2, 3, 4), ns=(2, 4, 6, 8)))
def test_monotone_ordering(win):
    values, ref, n = win
    assert strictly_ordered(values, ref, analytic_distribution(encode_window(values, ref, n)).probs)


@settings(max_examples=50, deadline=None)
@given(distinct_windows(), st.data())
def test_reference_fixed_point(win, data):
    values, _, n = win
    j = data.draw(st.integers(0, len(values) - 1))
    p = analytic_distribution(encode_window(values, values[j], n)).probs
    assert p[j] == p.max()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=4, max_size=4), st.integers(0, 3))
def test_unique_mode_restores_formula(values, ref):
    w = encode_window(values, ref, 2, True)
    np.testing.assert_allclose(simulate_statevector(w).probs, analytic_distribution(w).probs, atol=1e-10)


# -- sampling -------------------------------------------------------------------

def test_sample_point_mass():
    counts = sample_index(Distribution([0, 0, 1, 0]), 1000, seed=3)
    assert counts.tolist() == [0, 0, 1000, 0]


def test_sample_uniform_statistics():
    counts = sample_index(Distribution([0.25] * 4), 10**6, seed=11)
    sigma = math.sqrt(10**6 * 0.25 * 0.75)
    assert sigma == pytest.approx(433, abs=0.5)
    assert np.all(np.abs(counts - 250000) <= 4 * sigma)


def test_sample_fig4_statistics():
    dist = analytic_distribution(encode_window(SMALL_WINDOW, 0, 4))
    counts = sample_index(dist, 10**6, seed=1)
    p = np.asarray(SMALL_WINDOW_PROBS)
    sigma = np.sqrt(10**6 * p * (1 - p))
    assert np.all(np.abs(counts - 10**6 * p) <= 4 * sigma)


def test_sample_deterministic():
    dist = Distribution(SMALL_WINDOW_PROBS)
    assert sample_index(dist, 500, 42).tolist() == sample_index(dist, 500, 42).tolist()
    with pytest.raises(ValueError):
        sample_index(dist, 0, 1)


def test_distribution_validation_and_json():
    with pytest.raises(ValueError):
        Distribution([0.5, 0.6])
    out = Distribution([0.5, 0.5]).to_json([3, 7], 10, 9)
    assert out == {"probs": [0.5, 0.5], "counts": [3, 7], "shots": 10, "seed": 9}


# -- run_qara -------------------------------------------------------------------

def test_run_uniform_argmax():
    assert run_qara([6, 6, 6, 6], 6, 3) == (0, 6)


def test_run_fig4_argmax():
    assert run_qara(SMALL_WINDOW, 0, 4) == (1, 0)


@pytest.mark.parametrize("k", range(8))
def test_run_single_outlier_never_chosen(k):
    values = [10] * 8
    values[k] = 255
    idx, value = run_qara(values, 10, 8)
    assert idx != k and value == 10


def test_run_sampled_reproducible():
    draws = [run_qara(WIDE_WINDOW, 0, 6, mode="sampled", seed=s) for s in range(20)]
    assert draws == [run_qara(WIDE_WINDOW, 0, 6, mode="sampled", seed=s) for s in range(20)]
    assert all(WIDE_WINDOW[i] == v for i, v in draws)
    with pytest.raises(ValueError):
        run_qara(WIDE_WINDOW, 0, 6, mode="sampled")


def test_run_non_unique_uses_interference():
    idx, value = run_qara([7, 7, 0, 0], 0, 3, unique_mode=False)
    assert idx == int(np.argmax(INTERFERENCE_PROBS)) and value == 0


def test_rotation_count_independent_of_window():
    assert rotation_count(8) == 16


# -- bounds ---------------------------------------------------------------------

def test_best_case_examples():
    assert best_case_probability(4, 2) == pytest.approx(0.03661, abs=1e-5)
    assert best_case_probability(8, 4) == pytest.approx(math.sin(math.pi / 32) ** 2 / 8, abs=1e-15)
    assert best_case_probability(8, 4) == pytest.approx(0.001201, abs=1e-6)
    seq = [best_case_probability(8, n) for n in range(1, 20)]
    assert all(a > b for a, b in zip(seq, seq[1:]))


@pytest.mark.parametrize("M", [4, 8, 16])
@pytest.mark.parametrize("n", [2, 4, 8])
def test_best_case_matches_distribution(M, n):
    values = [0] * M
    values[M // 2] = 2**n - 1
    p = analytic_distribution(encode_window(values, 0, n)).probs[M // 2]
    assert abs(p - best_case_probability(M, n)) <= 1e-12


def test_best_case_statevector_cross_check():
    p = simulate_statevector(encode_window([0, 0, 0, 3], 0, 2)).probs[3]
    assert p == pytest.approx(best_case_probability(4, 2), abs=1e-12)


def test_outlier_bound_example():
    expected = (math.cos(3 * math.pi / 16) ** 2 + math.sin(math.pi / 16) ** 2) / 4
    assert outlier_bound(4, 8, 2, 1) == pytest.approx(expected, abs=1e-15)
    assert outlier_bound(4, 8, 2, 1) == pytest.approx(0.1824, abs=1e-4)


def test_outlier_bound_limit():
    assert outlier_bound(1 << 1, 8, 60, 0) * 2 == pytest.approx(0.5, abs=1e-15)


def test_outlier_bound_sweep(rng):
    for _ in range(200):
        values, r, n, M, l, p, k = bound_instance(rng)
        assert values[k] >= (r << l) and values[k] >= 1 << (n - 1)
        assert all(abs(v - r) <= r / 2**p for j, v in enumerate(values) if j != k)
        prob = analytic_distribution(encode_window(values, r, n)).probs[k]
        assert prob <= outlier_bound(M, n, l, p)


def test_outlier_bound_needs_top_bit():
    # d_k >= 2^l r holds but the outlier sits in the low bits; the bound fails,
    # which is why bound_instance also sets the outlier's top bit
    values, r, n, l, p = [8, 8, 8, 64], 8, 12, 3, 3
    prob = analytic_distribution(encode_window(values, r, n)).probs[3]
    assert prob > outlier_bound(4, n, l, p)
