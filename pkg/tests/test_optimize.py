import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mirs.channel import (CascadeChannel, GainMode, array_response, build_cascade,
                          make_rank1, random_cascade)
from mirs.metrics import received_power
from mirs.optimize import (AlternatingOpt, BeamformingSolution, BruteForce, ClosedForm,
                           GreedyQuantized, RandomPhase, SearchSpaceTooLarge,
                           UnsupportedChannelError, alignment_vectors, brute_force,
                           factored_amplitude, mrt_precoder, parse_solver, phase_align,
                           solve_alternating, solve_closed_form, solve_greedy_quantized,
                           solve_random_phase)
from mirs.scenario import Scenario


def dense_amplitude(chain, thetas, w):
    """Reference: explicit product of full matrices with diagonal phase matrices."""
    mats = [chain.hops[0].dense()]
    for k in range(1, chain.K + 1):
        mats.append(np.diag(np.exp(1j * np.asarray(thetas[k - 1]))))
        mats.append(chain.hops[k].dense())
    total = mats[0]
    for m in mats[1:]:
        total = m @ total
    return complex((total @ w)[0])


def scalar_chain(K=1):
    return CascadeChannel(tuple(make_rank1(1, [1], [1]) for _ in range(K + 1)))


def two_element_chain(alpha0, beta1):
    """K=1, M=2, N=1 chain whose only alignment vector is conj(beta1) * alpha0."""
    return CascadeChannel((make_rank1(1.0, alpha0, [1]), make_rank1(1.0, [1], beta1)))


# --- alignment vectors and phase alignment --------------------------------

def test_alignment_scalar():
    (u,) = alignment_vectors(scalar_chain())
    np.testing.assert_array_equal(u, [1])


def test_alignment_two_elements():
    beta = np.array([1, -1]) / np.sqrt(2)
    alpha = np.array([1, 1]) / np.sqrt(2)
    (u,) = alignment_vectors(two_element_chain(alpha, beta))
    np.testing.assert_allclose(u, [0.5, -0.5], atol=1e-15)


@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 4))
@settings(max_examples=50)
def test_alignment_modulus_sums_to_one(seed, M, K):
    chain = random_cascade(np.random.default_rng(seed), M, 2, K)
    for u in alignment_vectors(chain):
        assert abs(np.sum(np.abs(u)) - 1) < 1e-12


def test_alignment_rejects_multipath():
    chain = build_cascade(Scenario(K=1, M=2, N=2), rng=0, num_paths=2)
    with pytest.raises(UnsupportedChannelError):
        alignment_vectors(chain)


def test_phase_align_example():
    u = np.array([1, 1j, -1])
    theta = phase_align(u)
    np.testing.assert_allclose(np.mod(theta, 2 * np.pi), [0, 3 * np.pi / 2, np.pi])
    assert abs(np.exp(1j * theta) @ u - 3) < 1e-12


def test_phase_align_already_aligned():
    np.testing.assert_array_equal(phase_align([0.5, 0.5]), [0, 0])


def test_phase_align_zero_entries():
    np.testing.assert_array_equal(phase_align([0, 2j]), [0.0, -np.pi / 2])


def test_phase_align_random_64():
    rng = np.random.default_rng(3)
    u = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    s = np.exp(1j * phase_align(u)) @ u
    assert abs(s - np.sum(np.abs(u))) < 1e-10


# --- MRT ------------------------------------------------------------------

def test_mrt_scalar():
    np.testing.assert_allclose(mrt_precoder([1], 4.0), [2])


def test_mrt_unit_norm_input():
    np.testing.assert_allclose(mrt_precoder(0.5 * np.ones(4), 1.0), 0.5 * np.ones(4))


@given(st.integers(1, 32), st.floats(-1.5, 1.5), st.floats(0.01, 100))
def test_mrt_achieves_full_power(N, angle, P):
    b = array_response(N, angle)
    w = mrt_precoder(b, P)
    assert abs(np.vdot(b, w)) ** 2 == pytest.approx(P, rel=1e-12)
    assert np.vdot(w, w).real == pytest.approx(P, rel=1e-12)


def test_mrt_zero_vector():
    with pytest.raises(ValueError):
        mrt_precoder(np.zeros(3), 1.0)


# --- factorization identity -----------------------------------------------

@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(1, 4), st.integers(1, 4))
@settings(max_examples=100)
def test_factored_form_matches_dense_chain(seed, M, N, K):
    rng = np.random.default_rng(seed)
    chain = random_cascade(rng, M, N, K)
    thetas = [rng.uniform(0, 2 * np.pi, M) for _ in range(K)]
    w = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    ref = dense_amplitude(chain, thetas, w)
    got = factored_amplitude(chain, thetas, w)
    assert abs(got - ref) <= 1e-9 * abs(ref)


# --- closed form ----------------------------------------------------------

def test_closed_form_scalar_chain():
    chain = scalar_chain()
    assert received_power(chain, solve_closed_form(chain, 1.0)) == pytest.approx(1.0)


def test_closed_form_equals_product_of_gains():
    sc = Scenario(K=2, M=4, N=4, gain_mode=GainMode.DETERMINISTIC)
    chain = build_cascade(sc, rng=11)
    P = 3.0
    sol = solve_closed_form(chain, P)
    expected = P * np.prod(np.abs(chain.mus()) ** 2)
    assert abs(dense_amplitude(chain, sol.thetas, sol.w)) ** 2 == pytest.approx(expected, rel=1e-9)
    assert np.vdot(sol.w, sol.w).real <= P * (1 + 1e-9)


def test_closed_form_power_is_angle_invariant():
    sc = Scenario(K=3, M=6, N=5, gain_mode=GainMode.DETERMINISTIC)
    p1 = received_power(c := build_cascade(sc, rng=1), solve_closed_form(c, 2.0))
    p2 = received_power(c := build_cascade(sc, rng=2), solve_closed_form(c, 2.0))
    assert p1 == pytest.approx(p2, rel=1e-9)


# --- greedy quantized -----------------------------------------------------

@pytest.mark.parametrize("bits", [1, 2, 3, 6])
def test_greedy_quantized_bound(bits):
    rng = np.random.default_rng(bits)
    for _ in range(20):
        K = int(rng.integers(1, 4))
        chain = random_cascade(rng, 8, 3, K)
        cf = received_power(chain, solve_closed_form(chain, 1.0))
        gq = received_power(chain, solve_greedy_quantized(chain, 1.0, bits))
        assert gq <= cf * (1 + 1e-9)
        assert gq >= cf * math.cos(math.pi / 2**bits) ** (2 * K) * (1 - 1e-9)


def test_greedy_one_bit_example():
    # u = [1, j] / 2: alpha0 = (1/sqrt2)[1, j] (sin = 1/2), beta1 = (1/sqrt2)[1, 1]
    chain = two_element_chain(array_response(2, np.pi / 6), array_response(2, 0.0))
    (u,) = alignment_vectors(chain)
    np.testing.assert_allclose(u, [0.5, 0.5j], atol=1e-15)
    # brute enumeration over {0, pi}^2
    best = max(abs(np.exp(1j * np.array(c)) @ u) ** 2
               for c in itertools.product([0.0, np.pi], repeat=2))
    sol = solve_greedy_quantized(chain, 1.0, 1)
    assert set(np.round(sol.thetas[0], 12)) <= {0.0, round(np.pi, 12)}
    gq = received_power(chain, sol)
    cf = received_power(chain, solve_closed_form(chain, 1.0))
    assert gq == pytest.approx(best, rel=1e-12)
    assert gq < cf
    assert gq == pytest.approx(0.5 * cf, rel=1e-12)


@pytest.mark.parametrize("bits", [1, 2, 4])
def test_greedy_single_element_matches_closed_form(bits):
    chain = random_cascade(np.random.default_rng(7), 1, 3, 2)
    cf = received_power(chain, solve_closed_form(chain, 1.0))
    assert received_power(chain, solve_greedy_quantized(chain, 1.0, bits)) == pytest.approx(cf, rel=1e-12)


# --- random phase ---------------------------------------------------------

def test_random_phase_expected_ratio():
    chain = random_cascade(np.random.default_rng(0), 8, 2, 1)
    cf = received_power(chain, solve_closed_form(chain, 1.0))
    ratios = [received_power(chain, solve_random_phase(chain, 1.0, s)) / cf
              for s in range(10_000)]
    assert np.mean(ratios) == pytest.approx(1 / 8, rel=0.10)


def test_random_phase_single_element():
    chain = random_cascade(np.random.default_rng(1), 1, 4, 2)
    cf = received_power(chain, solve_closed_form(chain, 1.0))
    assert received_power(chain, solve_random_phase(chain, 1.0, 5)) == pytest.approx(cf, rel=1e-12)


def test_random_phase_deterministic_per_seed():
    chain = random_cascade(np.random.default_rng(2), 4, 2, 2)
    a = solve_random_phase(chain, 1.0, 42)
    b = solve_random_phase(chain, 1.0, 42)
    for x, y in zip(a.thetas, b.thetas):
        np.testing.assert_array_equal(x, y)
    np.testing.assert_array_equal(a.w, b.w)


# --- alternating optimization ---------------------------------------------

def test_alternating_reaches_closed_form_in_one_sweep():
    rng = np.random.default_rng(8)
    for _ in range(20):
        chain = random_cascade(rng, 5, 3, int(rng.integers(1, 4)))
        cf = received_power(chain, solve_closed_form(chain, 1.0))
        one = solve_alternating(chain, 1.0, max_iters=1)
        assert received_power(chain, one) == pytest.approx(cf, rel=1e-9)
        full = solve_alternating(chain, 1.0)
        assert full.converged
        assert received_power(chain, full) == pytest.approx(cf, rel=1e-9)


def test_alternating_degenerate_start():
    # u_1 sums to zero at phase 0: the first sweep must still make progress
    beta = np.array([1, -1]) / np.sqrt(2)
    alpha = np.array([1, 1]) / np.sqrt(2)
    chain = CascadeChannel((make_rank1(1.0, alpha, [1]), make_rank1(1.0, alpha, beta),
                            make_rank1(1.0, [1], beta)))
    cf = received_power(chain, solve_closed_form(chain, 1.0))
    sol = solve_alternating(chain, 1.0)
    assert received_power(chain, sol) == pytest.approx(cf, rel=1e-9)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_alternating_is_monotone(seed):
    chain = random_cascade(np.random.default_rng(seed), 3, 2, 2, num_paths=3)
    hist = solve_alternating(chain, 1.0, max_iters=20, tol=0.0).power_history
    assert all(b >= a * (1 - 1e-12) for a, b in zip(hist, hist[1:]))


def test_alternating_multipath_against_brute_force():
    rng = np.random.default_rng(21)
    hits = 0
    for _ in range(10):
        chain = random_cascade(rng, 2, 2, 1, num_paths=2)
        sol = solve_alternating(chain, 1.0)
        best, _ = brute_force(chain, 1.0, 64)
        p = received_power(chain, sol)
        assert p <= best / math.cos(math.pi / 64) ** 2 * (1 + 1e-9)
        hits += p >= 0.999 * best
    assert hits >= 8


# --- brute force ----------------------------------------------------------

def test_brute_force_single_element():
    chain = random_cascade(np.random.default_rng(4), 1, 3, 1)
    cf = received_power(chain, solve_closed_form(chain, 1.0))
    for levels in (2, 5, 16):
        best, _ = brute_force(chain, 1.0, levels)
        assert best == pytest.approx(cf, rel=1e-12)


def test_brute_force_two_levels_enumerates_both():
    chain = random_cascade(np.random.default_rng(5), 1, 2, 1)
    best, thetas = brute_force(chain, 1.0, 2, use_symmetry=False)
    w = solve_closed_form(chain, 1.0).w
    cands = [abs(dense_amplitude(chain, [np.array([p])], w)) ** 2 for p in (0, np.pi)]
    assert best == pytest.approx(max(cands), rel=1e-12)
    assert thetas[0][0] == 0.0  # tie goes to the lowest grid index


def test_brute_force_bounds_m2_k2():
    rng = np.random.default_rng(6)
    for _ in range(10):
        chain = random_cascade(rng, 2, 2, 2)
        cf = received_power(chain, solve_closed_form(chain, 1.0))
        best, thetas = brute_force(chain, 1.0, 16)
        assert best <= cf * (1 + 1e-9)
        assert best >= cf * math.cos(math.pi / 16) ** 4
        sol = BruteForce(16).solve(chain, 1.0)
        assert received_power(chain, sol) == pytest.approx(best, rel=1e-12)


def test_brute_force_symmetry_reduction_is_exact():
    rng = np.random.default_rng(10)
    for num_paths in (1, 2):
        chain = random_cascade(rng, 3, 2, 2, num_paths=num_paths)
        full, _ = brute_force(chain, 1.0, 4, use_symmetry=False)
        reduced, _ = brute_force(chain, 1.0, 4)
        assert reduced == pytest.approx(full, rel=1e-12)


def test_brute_force_argmax_is_consistent():
    chain = random_cascade(np.random.default_rng(12), 3, 2, 2)
    best, thetas = brute_force(chain, 2.0, 8)
    row = np.ones(1)
    for k in range(chain.K, 0, -1):
        row = (row @ chain.hops[k].dense()) * np.exp(1j * thetas[k - 1])
    h_eff = row @ chain.hops[0].dense()
    assert 2.0 * np.vdot(h_eff, h_eff).real == pytest.approx(best, rel=1e-12)
    for th in thetas:
        assert th[0] == 0.0
        np.testing.assert_allclose(np.mod(th * 8 / (2 * np.pi), 1), 0, atol=1e-12)


def test_brute_force_guard():
    chain = random_cascade(np.random.default_rng(0), 4, 1, 3)
    with pytest.raises(SearchSpaceTooLarge):
        brute_force(chain, 1.0, 64)


# --- cross-solver invariants ----------------------------------------------

SOLVERS = [ClosedForm(), RandomPhase(3), GreedyQuantized(2), AlternatingOpt(), BruteForce(8)]


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_closed_form_dominates_all_solvers(seed):
    rng = np.random.default_rng(seed)
    chain = random_cascade(rng, 2, 3, int(rng.integers(1, 4)))
    cf = received_power(chain, ClosedForm().solve(chain, 1.0))
    for s in SOLVERS[1:]:
        assert received_power(chain, s.solve(chain, 1.0)) <= cf * (1 + 1e-9)


@pytest.mark.parametrize("solver", SOLVERS, ids=lambda s: s.name)
def test_power_scale_equivariance(solver):
    chain = random_cascade(np.random.default_rng(13), 2, 3, 2)
    a = solver.solve(chain, 1.0)
    b = solver.solve(chain, 7.5)
    assert received_power(chain, b) == pytest.approx(7.5 * received_power(chain, a), rel=1e-9)
    for x, y in zip(a.thetas, b.thetas):
        np.testing.assert_allclose(np.mod(x, 2 * np.pi), np.mod(y, 2 * np.pi), atol=1e-9)


@pytest.mark.parametrize("solver", SOLVERS, ids=lambda s: s.name)
def test_global_phase_invariance(solver):
    chain = random_cascade(np.random.default_rng(14), 2, 3, 2)
    rotated = CascadeChannel(tuple(
        make_rank1(h.mu * np.exp(1j * (0.7 + k)), h.rx, h.tx) for k, h in enumerate(chain.hops)))
    p = received_power(chain, solver.solve(chain, 1.0))
    q = received_power(rotated, solver.solve(rotated, 1.0))
    assert q == pytest.approx(p, rel=1e-9)


def test_parse_solver():
    assert parse_solver("closed_form") == ClosedForm()
    assert parse_solver("greedy_q2") == GreedyQuantized(2)
    assert parse_solver("brute_force_l16") == BruteForce(16)
    assert parse_solver("random_phase").name == "random_phase"
    assert parse_solver("alternating").name == "alternating"
    for bad in ("", "greedy", "greedy_q0", "sdr"):
        with pytest.raises(ValueError):
            parse_solver(bad)
