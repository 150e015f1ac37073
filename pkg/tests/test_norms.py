"""Sup-norm brackets: ascent lower bounds, certified uppers, exact oracles."""

import math

import numpy as np
import pytest

from vnlab.norms import (
    estimate_norm,
    exact_norm_quadratic_l2,
    flattening_upper_bound,
    interpolation_upper,
    interpolation_upper_low,
    ksz_reference,
    lambda_constant,
    multilinear_estimate,
)
from vnlab.polynomials import (
    HomogeneousPolynomial,
    l1_ball_upper_bound,
    random_steiner_polynomial,
)
from vnlab.steiner import fano_system, greedy_generate


def pairs_poly(r):
    terms = {(2 * i + 1, 2 * i + 2): 1.0 for i in range(r)}
    return HomogeneousPolynomial(n=2 * r, k=2, coeffs=terms)


def monomial_poly(k):
    return HomogeneousPolynomial(n=k, k=k, coeffs={tuple(range(1, k + 1)): 1.0})


# ---------------------------------------------------------------- exact layer


def test_quadratic_exact_pair_sums():
    # sum of r disjoint cross terms has Euclidean sup exactly 1/2 for any r
    for r in (1, 2, 3, 5):
        assert exact_norm_quadratic_l2(pairs_poly(r)) == pytest.approx(0.5, abs=1e-12)


def test_quadratic_exact_square_and_zero():
    square = HomogeneousPolynomial(n=2, k=2, coeffs={(1, 1): 1.0})
    assert exact_norm_quadratic_l2(square) == pytest.approx(1.0, abs=1e-14)
    zero = HomogeneousPolynomial(n=2, k=2, coeffs={})
    assert exact_norm_quadratic_l2(zero) == 0.0
    with pytest.raises(ValueError):
        exact_norm_quadratic_l2(monomial_poly(3))


def test_quadratic_exact_matches_dense_svd_oracle():
    # independent oracle: assemble the symmetric matrix here and call SVD
    rng = np.random.default_rng(4)
    for _ in range(10):
        coeffs = {}
        n = 6
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                if rng.random() < 0.5:
                    coeffs[(i, j)] = complex(rng.normal(), rng.normal())
        p = HomogeneousPolynomial(n=n, k=2, coeffs=coeffs)
        a = np.zeros((n, n), dtype=complex)
        for (i, j), c in p.coeffs.items():
            if i == j:
                a[i - 1, j - 1] += c
            else:
                a[i - 1, j - 1] += c / 2
                a[j - 1, i - 1] += c / 2
        want = np.linalg.svd(a, compute_uv=False)[0] if coeffs else 0.0
        assert exact_norm_quadratic_l2(p) == pytest.approx(want, rel=1e-12, abs=1e-12)


# --------------------------------------------------------------- ascent layer


def test_ascent_hits_quadratic_oracle():
    p = pairs_poly(2)
    est = estimate_norm(p, 2, restarts=8, seed=1)
    assert est.lower == pytest.approx(0.5, abs=1e-6)
    assert est.lower <= est.upper + 1e-12


def test_ascent_hits_monomial_values():
    # sup of z1...zk on the Euclidean ball is k^{-k/2}
    for k in (2, 3, 4):
        est = estimate_norm(monomial_poly(k), 2, restarts=8, seed=2)
        assert est.lower == pytest.approx(k ** (-k / 2), abs=1e-4)
        assert est.lower <= 1.0 / k + 1e-9


def test_ascent_polytorus_pairs():
    # on the max-modulus ball each cross term attains 1, so the sup is r
    p = pairs_poly(2)
    est = estimate_norm(p, "inf", restarts=8, seed=3)
    assert est.lower == pytest.approx(2.0, abs=1e-6)
    assert est.upper == pytest.approx(2.0, abs=1e-12)  # coefficient-sum cap


def test_witness_reproduces_lower_and_respects_ball():
    rng = np.random.default_rng(9)
    p = random_steiner_polynomial(greedy_generate(8, 3, 2, seed=7), rng=rng)
    for q in (2, 4, "inf"):
        est = estimate_norm(p, q, restarts=6, seed=4)
        assert abs(p.evaluate(est.witness)) == pytest.approx(est.lower, rel=1e-10)
        if q == "inf":
            assert np.max(np.abs(est.witness)) <= 1 + 1e-10
        else:
            assert np.linalg.norm(est.witness, ord=q) <= 1 + 1e-10
        assert est.lower <= est.upper + 1e-9


def test_estimate_is_deterministic_in_seed():
    p = random_steiner_polynomial(fano_system(), rng=np.random.default_rng(11))
    a = estimate_norm(p, 2, restarts=4, seed=5)
    b = estimate_norm(p, 2, restarts=4, seed=5)
    c = estimate_norm(p, 2, restarts=4, seed=6)
    assert a.lower == b.lower
    assert np.array_equal(a.witness, b.witness)
    # different seeds may land on the same optimum but not the same witness
    assert not np.array_equal(a.witness, c.witness)


def test_zero_polynomial_estimate():
    zero = HomogeneousPolynomial(n=3, k=2, coeffs={})
    est = estimate_norm(zero, 2, restarts=2, seed=0)
    assert est.lower == 0.0 and est.upper == 0.0


def test_extra_start_can_only_help():
    p = random_steiner_polynomial(fano_system(), rng=np.random.default_rng(13))
    base = estimate_norm(p, 2, restarts=3, seed=7)
    seeded = estimate_norm(p, 2, restarts=3, seed=7, extra_starts=[base.witness])
    assert seeded.lower >= base.lower - 1e-12


def test_upper_bound_argument_caps_reported_upper():
    p = random_steiner_polynomial(fano_system(), rng=np.random.default_rng(14))
    est = estimate_norm(p, 2, restarts=3, seed=8, upper_bound=0.9)
    assert est.upper <= min(0.9, p.coefficient_sum) + 1e-15


# ----------------------------------------------------------- multilinear layer


def test_multilinear_diagonal_matches_polynomial_at_q2():
    # lambda(k,2) = 1: the multilinear sup equals the polynomial sup
    p = random_steiner_polynomial(fano_system(), rng=np.random.default_rng(15))
    est = estimate_norm(p, 2, restarts=12, seed=9)
    mul = multilinear_estimate(
        p, 2, restarts=6, seed=9, extra_starts=[np.tile(est.witness, (3, 1))]
    )
    assert mul.value >= est.lower - 1e-9  # diagonal start can only go up
    assert mul.value <= est.lower + 1e-3  # equality within ascent slack


def test_multilinear_linf_sandwich():
    # est <= sup L <= lambda(3,inf) * est with lambda(3,inf) = sqrt(3)
    p = random_steiner_polynomial(fano_system(), rng=np.random.default_rng(16))
    est = estimate_norm(p, "inf", restarts=12, seed=10)
    mul = multilinear_estimate(
        p, "inf", restarts=6, seed=10, extra_starts=[np.tile(est.witness, (3, 1))]
    )
    assert mul.value >= est.lower - 1e-9
    assert mul.value <= math.sqrt(3) * est.lower + 1e-3


def test_multilinear_zero_polynomial():
    zero = HomogeneousPolynomial(n=3, k=3, coeffs={})
    mul = multilinear_estimate(zero, 2, restarts=2, seed=0)
    assert mul.value == 0.0


# ------------------------------------------------------------ constants layer


def test_lambda_constant_values():
    for k in (2, 3, 4, 5):
        assert lambda_constant(k, 2) == 1.0
    assert lambda_constant(3, "inf") == pytest.approx(math.sqrt(3), rel=1e-14)
    assert lambda_constant(3, 4) == pytest.approx(27 / 6, rel=1e-14)
    assert lambda_constant(2, "inf") == pytest.approx(
        2 * 3 ** 1.5 / (4 * 2), rel=1e-14
    )
    with pytest.raises(ValueError):
        lambda_constant(1, 2)


def test_interpolation_upper_frozen_value():
    # q=4, U2=1, Uinf=2, k=3: sqrt(1) * sqrt(sqrt(3)*2)
    assert interpolation_upper(4, 1.0, 2.0, 3) == pytest.approx(
        1.8612097182041991, rel=1e-12
    )
    with pytest.raises(ValueError):
        interpolation_upper(2, 1.0, 1.0, 3)
    with pytest.raises(ValueError):
        interpolation_upper("inf", 1.0, 1.0, 3)
    with pytest.raises(ValueError):
        interpolation_upper(4, -1.0, 1.0, 3)


def test_interpolation_upper_low_frozen_value():
    # q=3/2, U1=1/2, U2=3/4, k=3: (4.5*0.5)^{1/3} * 0.75^{2/3}
    assert interpolation_upper_low(1.5, 0.5, 0.75, 3) == pytest.approx(
        1.0816871777305561, rel=1e-12
    )
    with pytest.raises(ValueError):
        interpolation_upper_low(2.5, 1.0, 1.0, 3)
    with pytest.raises(ValueError):
        interpolation_upper_low(1.0, 1.0, 1.0, 3)


def test_ksz_reference_frozen_value():
    assert ksz_reference(7, 7, 1.0, 3, 1.0) == pytest.approx(
        7.337029517777435, rel=1e-12
    )
    with pytest.raises(ValueError):
        ksz_reference(7, 7, 1.0, 1, 1.0)
    with pytest.raises(ValueError):
        ksz_reference(0, 7, 1.0, 3, 1.0)


# ------------------------------------------------------------ flattening layer


def test_flattening_fano_closed_form():
    # every point lies in 3 blocks: max_i sqrt(deg_i / (k * k!)) = sqrt(3/18)
    p = random_steiner_polynomial(fano_system(), rng=np.random.default_rng(17))
    assert flattening_upper_bound(p) == pytest.approx(
        math.sqrt(3 / 18), rel=1e-12
    )


def test_flattening_steiner_degree_formula():
    for seed, (n, k) in enumerate([(11, 3), (13, 3), (9, 4)]):
        sys_ = greedy_generate(n, k, 2, seed=seed).with_uniqueness(k - 1)
        p = random_steiner_polynomial(sys_, rng=np.random.default_rng(seed))
        deg = sys_.point_degrees().max()
        want = math.sqrt(deg / (k * math.factorial(k)))
        assert flattening_upper_bound(p) == pytest.approx(want, rel=1e-10)


def test_flattening_exact_for_rank_one_quadratics():
    # z1*z2: unfolding is [[0, 1/2], [1/2, 0]], sigma = 1/2 = true norm
    p = HomogeneousPolynomial(n=2, k=2, coeffs={(1, 2): 1.0})
    assert flattening_upper_bound(p) == pytest.approx(0.5, rel=1e-12)
    sq = HomogeneousPolynomial(n=1, k=2, coeffs={(1, 1): 1.0})
    assert flattening_upper_bound(sq) == pytest.approx(1.0, rel=1e-12)


def test_flattening_dominates_ascent():
    for seed in range(5):
        sys_ = greedy_generate(9, 3, 2, seed=seed)
        p = random_steiner_polynomial(sys_, rng=np.random.default_rng(seed))
        upper = flattening_upper_bound(p)
        est = estimate_norm(p, 2, restarts=8, seed=seed)
        assert est.lower <= upper + 1e-9


def test_flattening_degree_one():
    p = HomogeneousPolynomial(n=3, k=1, coeffs={(1,): 3.0, (2,): 4.0})
    assert flattening_upper_bound(p) == pytest.approx(5.0, rel=1e-14)


# ------------------------------------------------------------ soundness layer


def test_lower_bounds_respect_interpolation_uppers():
    rng = np.random.default_rng(19)
    for seed in range(3):
        p = random_steiner_polynomial(
            greedy_generate(7, 3, 2, seed=seed), rng=rng
        )
        u2 = min(flattening_upper_bound(p), p.coefficient_sum)
        uinf = p.coefficient_sum
        u1 = l1_ball_upper_bound(p)
        for q in (3, 4, 6):
            est = estimate_norm(p, q, restarts=6, seed=seed)
            assert est.lower <= interpolation_upper(q, u2, uinf, 3) + 1e-9
        for q in (1.25, 1.5, 1.75):
            est = estimate_norm(p, q, restarts=6, seed=seed)
            assert est.lower <= interpolation_upper_low(q, u1, u2, 3) + 1e-9


def test_row_norm_certificate_theory():
    # Banach duality: sup over two unit vectors of the symmetrized coefficient
    # tensor contracted once equals k! times the polynomial sup at q=2.
    # Cross-check ascent against the flattening on a single-block cubic where
    # both sides are known exactly: sup = 3^{-3/2}, flattening = 1/sqrt(18).
    p = HomogeneousPolynomial(n=3, k=3, coeffs={(1, 2, 3): 1.0})
    est = estimate_norm(p, 2, restarts=8, seed=3)
    assert est.lower == pytest.approx(3 ** -1.5, abs=1e-7)
    assert flattening_upper_bound(p) == pytest.approx(math.sqrt(1 / 18), rel=1e-12)
    # sqrt(1/18) = 3^{-3/2} * sqrt(3/2) > 3^{-3/2}: strictly looser but close
    assert flattening_upper_bound(p) > est.lower
