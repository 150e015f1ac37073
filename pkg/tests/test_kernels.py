"""Backend parity: the compiled kernels must agree with the NumPy fallback."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vnlab import kernels
from vnlab.kernels import available_backends, backend_name


def random_case(rng, nb=6, n=5, m=8, k=3):
    coef = rng.normal(size=m) + 1j * rng.normal(size=m)
    idx = np.sort(rng.integers(0, n, size=(m, k)), axis=1).astype(np.int64)
    Z = rng.normal(size=(nb, n)) + 1j * rng.normal(size=(nb, n))
    return coef, idx, Z


def test_active_backend_is_registered():
    assert backend_name() in available_backends()


def test_python_backend_always_available():
    assert "python" in available_backends()


def test_empty_support_gives_zeros():
    py = available_backends()["python"]
    Z = np.ones((4, 3), dtype=complex)
    coef = np.zeros(0, dtype=complex)
    idx = np.zeros((0, 2), dtype=np.int64)
    assert np.all(py.poly_eval_batch(coef, idx, Z) == 0)
    vals, grads = py.poly_eval_grad_batch(coef, idx, Z)
    assert np.all(vals == 0) and np.all(grads == 0)


def test_python_eval_matches_direct_product_sum():
    # oracle: naive per-monomial product loop written independently here
    rng = np.random.default_rng(0)
    coef, idx, Z = random_case(rng)
    py = available_backends()["python"]
    got = py.poly_eval_batch(coef, idx, Z)
    for b in range(Z.shape[0]):
        direct = sum(
            c * np.prod([Z[b, j] for j in row]) for c, row in zip(coef, idx)
        )
        assert got[b] == pytest.approx(direct, rel=1e-13)


def test_python_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    coef, idx, Z = random_case(rng, nb=2, n=4, m=5, k=3)
    py = available_backends()["python"]
    _, grads = py.poly_eval_grad_batch(coef, idx, Z)
    h = 1e-6
    for b in range(Z.shape[0]):
        for j in range(Z.shape[1]):
            zp, zm = Z.copy(), Z.copy()
            zp[b, j] += h
            zm[b, j] -= h
            fd = (
                py.poly_eval_batch(coef, idx, zp)[b]
                - py.poly_eval_batch(coef, idx, zm)[b]
            ) / (2 * h)
            assert grads[b, j] == pytest.approx(fd, rel=1e-6, abs=1e-8)


needs_cython = pytest.mark.skipif(
    "cython" not in available_backends(), reason="compiled backend not built"
)


@needs_cython
def test_backends_agree_on_values():
    rng = np.random.default_rng(2)
    back = available_backends()
    for _ in range(5):
        coef, idx, Z = random_case(rng, nb=7, n=6, m=11, k=4)
        a = back["python"].poly_eval_batch(coef, idx, Z)
        b = back["cython"].poly_eval_batch(coef, idx, Z)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)


@needs_cython
def test_backends_agree_on_gradients():
    rng = np.random.default_rng(3)
    back = available_backends()
    for _ in range(5):
        coef, idx, Z = random_case(rng, nb=4, n=6, m=9, k=3)
        va, ga = back["python"].poly_eval_grad_batch(coef, idx, Z)
        vb, gb = back["cython"].poly_eval_grad_batch(coef, idx, Z)
        np.testing.assert_allclose(va, vb, rtol=1e-13, atol=1e-14)
        np.testing.assert_allclose(ga, gb, rtol=1e-13, atol=1e-14)


@needs_cython
@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31),
    k=st.integers(min_value=1, max_value=5),
    m=st.integers(min_value=1, max_value=12),
)
def test_backend_parity_property(seed, k, m):
    rng = np.random.default_rng(seed)
    coef, idx, Z = random_case(rng, nb=3, n=5, m=m, k=k)
    back = available_backends()
    va, ga = back["python"].poly_eval_grad_batch(coef, idx, Z)
    vb, gb = back["cython"].poly_eval_grad_batch(coef, idx, Z)
    np.testing.assert_allclose(va, vb, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(ga, gb, rtol=1e-12, atol=1e-12)


def test_bench_runs_and_reports_speedup():
    from vnlab.bench import run_bench

    records = run_bench(nvar=8, terms=12, batch=8, k=3, repeats=2)
    names = {r["backend"] for r in records}
    assert "python" in names
    for r in records:
        assert r["eval_us"] > 0 and r["eval_grad_us"] > 0
        assert r["grad_speedup_vs_python"] > 0
