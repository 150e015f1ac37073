"""Sup-norms of homogeneous polynomials over l_q unit balls.

Lower estimates come from multistart projected gradient ascent on |p(z)|^2
(by homogeneity the search lives on the unit sphere of the ball); upper
bounds come from certified closed forms:

  * the coefficient absolute sum (any q),
  * the spectral norm of the coefficient-tensor flattening (q = 2),
  * exact singular values in the quadratic case (q = 2, k = 2),
  * Hoelder interpolation between certified endpoint bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .polynomials import HomogeneousPolynomial
from .util import Exponent, stream

_STEP_GROW = 1.3
_STEP_SHRINK = 0.5
_STEP_FLOOR = 1e-18
_BACKTRACK_LIMIT = 60


@dataclass(frozen=True)
class NormEstimate:
    """Certified bracket lower <= sup |p| <= upper with an attaining witness."""

    q: Exponent
    lower: float
    upper: float
    witness: np.ndarray
    method_lower: str
    method_upper: str
    restarts: int
    iterations: int
    converged_restarts: int

    def to_record(self) -> dict:
        return {
            "q": str(self.q),
            "lower": self.lower,
            "upper": self.upper,
            "method_lower": self.method_lower,
            "method_upper": self.method_upper,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "converged_restarts": self.converged_restarts,
        }

    def witness_json(self) -> list:
        return [{"re": z.real, "im": z.imag} for z in self.witness]


@dataclass(frozen=True)
class MultilinearEstimate:
    """Ascent lower estimate for the sup of the polarized multilinear form."""

    q: Exponent
    value: float
    vectors: np.ndarray
    restarts: int
    iterations: int
    converged_restarts: int


def _batched_ascent(params, value_fn, grad_fn, max_iter, tol):
    """Maximize value_fn over rows of params by backtracking gradient ascent.

    Returns (params, values, iterations, converged mask).  value_fn maps an
    (R, P) array to (R,); grad_fn additionally returns the (R, P) gradient.
    """
    params = np.array(params, dtype=np.float64)
    nrows = params.shape[0]
    values, grads = grad_fn(params)
    eta = np.full(nrows, 0.25)
    converged = np.zeros(nrows, dtype=bool)
    iterations = 0
    for _ in range(max_iter):
        if converged.all():
            break
        iterations += 1
        trial = params + eta[:, None] * grads
        trial_values = value_fn(trial)
        for _ in range(_BACKTRACK_LIMIT):
            worse = ~converged & (trial_values < values)
            if not worse.any():
                break
            eta[worse] *= _STEP_SHRINK
            stuck = worse & (eta < _STEP_FLOOR)
            converged |= stuck
            worse &= ~stuck
            if not worse.any():
                break
            trial[worse] = params[worse] + eta[worse, None] * grads[worse]
            trial_values[worse] = value_fn(trial[worse])
        accept = ~converged & (trial_values >= values)
        if accept.any():
            gain = trial_values[accept] - values[accept]
            base = np.maximum(values[accept], 1e-300)
            done = gain <= tol * base
            params[accept] = trial[accept]
            values[accept] = trial_values[accept]
            eta[accept] = np.minimum(eta[accept] * _STEP_GROW, 1e3)
            idx = np.flatnonzero(accept)
            converged[idx[done]] = True
        if converged.all():
            break
        values_new, grads = grad_fn(params)
        values = values_new
    return params, values, iterations, converged


def _phases_to_points(theta):
    return np.exp(1j * theta)


def _phase_pullback(g, z):
    # d|p|^2/dtheta_j for z_j = exp(i theta_j), with g = 2 conj(p) grad p
    return -np.imag(g * z)


def _softplus_points(w, theta, q):
    s = np.logaddexp(0.0, w)
    nu = (s**q).sum(axis=1) ** (1.0 / q)
    mag = s / nu[:, None]
    return mag * np.exp(1j * theta), s, nu


def _softplus_pullback(g, w, theta, s, nu, q):
    # chain rule through magnitudes m = s / ||s||_q with s = softplus(w)
    radial = np.real(g * np.exp(1j * theta))
    proj = (radial * s).sum(axis=1)
    dw = expit(w) * (
        radial / nu[:, None] - s ** (q - 1.0) * (proj / nu ** (q + 1.0))[:, None]
    )
    dtheta = -np.imag(g * s / nu[:, None] * np.exp(1j * theta))
    return dw, dtheta


def _init_params(p_n, q, restarts, seed, label, extra_points):
    """Random parameter rows plus rows encoding caller-supplied start points."""
    rows = []
    for r in range(restarts):
        rng = stream(seed, label, r)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=p_n)
        if q.is_inf:
            rows.append(theta)
        else:
            w = rng.normal(0.0, 1.0, size=p_n)
            rows.append(np.concatenate([w, theta]))
    for z in extra_points:
        z = np.asarray(z, dtype=np.complex128).reshape(-1)
        theta = np.angle(z)
        if q.is_inf:
            rows.append(theta)
        else:
            mag = np.maximum(np.abs(z), 1e-9)
            rows.append(np.concatenate([np.log(np.expm1(mag) + 1e-300), theta]))
    return np.array(rows, dtype=np.float64)


def estimate_norm(
    p: HomogeneousPolynomial,
    q,
    *,
    restarts: int = 32,
    max_iter: int = 2000,
    tol: float = 1e-10,
    seed: int = 0,
    upper_bound: float | None = None,
    upper_label: str = "caller_bound",
    extra_starts=(),
) -> NormEstimate:
    """Bracket sup_{||z||_q <= 1} |p(z)| by ascent (lower) and closed forms (upper).

    For q = infinity the search runs over phases only (the maximum modulus
    principle puts a maximizer on the polytorus); for finite q magnitudes are
    reparameterized through a normalized softplus so the iterates stay on the
    unit sphere and the objective stays smooth.  Each restart derives its own
    RNG stream from (seed, restart index).  The witness satisfies the ball
    constraint and reproduces the reported lower bound by direct evaluation.
    """
    q = Exponent.parse(q)
    upper = p.coefficient_sum
    method_upper = "coefficient_sum"
    if upper_bound is not None and float(upper_bound) < upper:
        upper = float(upper_bound)
        method_upper = upper_label

    if p.term_count == 0:
        witness = np.ones(p.n, dtype=np.complex128)
        if not q.is_inf:
            witness /= float(np.linalg.norm(witness, ord=q.as_float()))
        return NormEstimate(q, 0.0, 0.0, witness, "ascent", method_upper, 0, 0, 0)

    qf = q.as_float()

    def unpack(params):
        if q.is_inf:
            return _phases_to_points(params), None
        w, theta = params[:, : p.n], params[:, p.n :]
        z, s, nu = _softplus_points(w, theta, qf)
        return z, (w, theta, s, nu)

    def value_fn(params):
        z, _ = unpack(params)
        return np.abs(p.evaluate_batch(z)) ** 2

    def grad_fn(params):
        z, aux = unpack(params)
        vals, grads = p.gradient_batch(z)
        g = 2.0 * np.conj(vals)[:, None] * grads
        if q.is_inf:
            return np.abs(vals) ** 2, _phase_pullback(g, z)
        w, theta, s, nu = aux
        dw, dtheta = _softplus_pullback(g, w, theta, s, nu, qf)
        return np.abs(vals) ** 2, np.concatenate([dw, dtheta], axis=1)

    params = _init_params(p.n, q, restarts, seed, "norm-ascent", list(extra_starts))
    params, values, iterations, converged = _batched_ascent(
        params, value_fn, grad_fn, max_iter, tol
    )
    best = int(np.argmax(values))
    z_best, _ = unpack(params[best : best + 1])
    witness = z_best[0]
    if not q.is_inf:
        witness = witness / float(np.linalg.norm(witness, ord=qf))
    lower = abs(p.evaluate(witness))
    return NormEstimate(
        q,
        float(lower),
        float(upper),
        witness,
        "ascent",
        method_upper,
        params.shape[0],
        iterations,
        int(converged.sum()),
    )


def multilinear_estimate(
    p: HomogeneousPolynomial,
    q,
    *,
    restarts: int = 16,
    max_iter: int = 1500,
    tol: float = 1e-10,
    seed: int = 0,
    extra_starts=(),
) -> MultilinearEstimate:
    """Ascent lower estimate for sup |L(z1, ..., zk)| over k unit-ball vectors.

    L is the symmetric multilinear form whose diagonal is p, evaluated by
    sign averaging; each of the k vectors is constrained to its own l_q ball
    with the same parameterizations as estimate_norm.  extra_starts entries
    are (k, n) arrays; seeding one restart from a polynomial witness z
    (repeated k times) makes the estimate start at the diagonal value.
    """
    q = Exponent.parse(q)
    k, n = p.k, p.n
    if p.term_count == 0:
        return MultilinearEstimate(q, 0.0, np.ones((k, n), dtype=np.complex128), 0, 0, 0)
    qf = q.as_float()
    sign_rows = np.array(
        [[1.0 if (e >> j) & 1 == 0 else -1.0 for j in range(k)] for e in range(2**k)]
    )
    parity = sign_rows.prod(axis=1)
    scale = 1.0 / (2**k * math.factorial(k))
    per_vec = n if q.is_inf else 2 * n

    def unpack(params):
        nrows = params.shape[0]
        blocks = params.reshape(nrows, k, per_vec)
        if q.is_inf:
            return _phases_to_points(blocks), None
        w, theta = blocks[:, :, :n], blocks[:, :, n:]
        s = np.logaddexp(0.0, w)
        nu = (s**qf).sum(axis=2) ** (1.0 / qf)
        z = s / nu[:, :, None] * np.exp(1j * theta)
        return z, (w, theta, s, nu)

    def form_values(z):
        nrows = z.shape[0]
        points = np.einsum("ek,rkn->ren", sign_rows, z).reshape(-1, n)
        vals = p.evaluate_batch(points).reshape(nrows, -1)
        return scale * (vals @ parity)

    def value_fn(params):
        z, _ = unpack(params)
        return np.abs(form_values(z)) ** 2

    def grad_fn(params):
        z, aux = unpack(params)
        nrows = z.shape[0]
        points = np.einsum("ek,rkn->ren", sign_rows, z).reshape(-1, n)
        vals, grads = p.gradient_batch(points)
        vals = vals.reshape(nrows, -1)
        grads = grads.reshape(nrows, -1, n)
        form = scale * (vals @ parity)
        dform = scale * np.einsum("e,ek,ren->rkn", parity, sign_rows, grads)
        g = 2.0 * np.conj(form)[:, None, None] * dform
        if q.is_inf:
            pull = -np.imag(g * z)
            return np.abs(form) ** 2, pull.reshape(nrows, -1)
        w, theta, s, nu = aux
        radial = np.real(g * np.exp(1j * theta))
        proj = (radial * s).sum(axis=2)
        dw = expit(w) * (
            radial / nu[:, :, None] - s ** (qf - 1.0) * (proj / nu ** (qf + 1.0))[:, :, None]
        )
        dtheta = -np.imag(g * z)
        pull = np.concatenate([dw, dtheta], axis=2)
        return np.abs(form) ** 2, pull.reshape(nrows, -1)

    rows = []
    for r in range(restarts):
        rng = stream(seed, "multilinear-ascent", r)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=(k, n))
        if q.is_inf:
            rows.append(theta.reshape(-1))
        else:
            w = rng.normal(0.0, 1.0, size=(k, n))
            rows.append(np.concatenate([w, theta], axis=1).reshape(-1))
    for zs in extra_starts:
        zs = np.asarray(zs, dtype=np.complex128).reshape(k, n)
        theta = np.angle(zs)
        if q.is_inf:
            rows.append(theta.reshape(-1))
        else:
            mag = np.maximum(np.abs(zs), 1e-9)
            w = np.log(np.expm1(mag) + 1e-300)
            rows.append(np.concatenate([w, theta], axis=1).reshape(-1))
    params = np.array(rows, dtype=np.float64)

    params, values, iterations, converged = _batched_ascent(
        params, value_fn, grad_fn, max_iter, tol
    )
    best = int(np.argmax(values))
    z_best, _ = unpack(params[best : best + 1])
    vectors = z_best[0]
    if not q.is_inf:
        norms = np.linalg.norm(vectors, ord=qf, axis=1)
        vectors = vectors / norms[:, None]
    value = abs(complex(form_values(vectors[None, :, :])[0]))
    return MultilinearEstimate(
        q, float(value), vectors, params.shape[0], iterations, int(converged.sum())
    )


def exact_norm_quadratic_l2(p: HomogeneousPolynomial) -> float:
    """Exact sup of a 2-homogeneous polynomial on the Euclidean ball.

    Writing p(z) = z^T A z with A complex symmetric, the sup equals the
    largest singular value of A (Takagi factorization).
    """
    if p.k != 2:
        raise ValueError(f"exact quadratic norm requires k = 2, got k={p.k}")
    a = np.zeros((p.n, p.n), dtype=np.complex128)
    for (i, j), c in p.coeffs.items():
        if i == j:
            a[i - 1, i - 1] = c
        else:
            a[i - 1, j - 1] = c / 2.0
            a[j - 1, i - 1] = c / 2.0
    if not p.coeffs:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def lambda_constant(k: int, q) -> float:
    """Comparison constant between polynomial and multilinear sup-norms.

    Equals 1 at q = 2, k^{k/2} (k+1)^{(k+1)/2} / (2^k k!) at q = infinity,
    and the generic polarization constant k^k / k! otherwise.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got k={k}")
    q = Exponent.parse(q)
    if q.is_inf:
        return k ** (k / 2.0) * (k + 1) ** ((k + 1) / 2.0) / (2**k * math.factorial(k))
    if q.fraction == 2:
        return 1.0
    return float(k**k) / math.factorial(k)


def interpolation_upper(q, norm2_upper: float, norminf_upper: float, k: int) -> float:
    """Upper bound for the l_q sup, 2 < q < inf, from l_2 and l_inf bounds.

    Hoelder interpolation of the multilinear form gives
    (lam(k,2) U_2)^{2/q} (lam(k,inf) U_inf)^{(q-2)/q}.
    """
    q = Exponent.parse(q)
    if q.is_inf or not (2 < q.fraction):
        raise ValueError(f"interpolation requires 2 < q < inf, got q={q}")
    if norm2_upper < 0 or norminf_upper < 0:
        raise ValueError("norm upper bounds must be nonnegative")
    qf = q.as_float()
    a = lambda_constant(k, 2) * norm2_upper
    b = lambda_constant(k, Exponent.infinity()) * norminf_upper
    return a ** (2.0 / qf) * b ** ((qf - 2.0) / qf)


def interpolation_upper_low(q, norm1_upper: float, norm2_upper: float, k: int) -> float:
    """Upper bound for the l_q sup, 1 < q < 2, from l_1 and l_2 bounds.

    Hoelder interpolation gives (lam(k,1) U_1)^{(2-q)/q} (lam(k,2) U_2)^{(2q-2)/q}.
    """
    q = Exponent.parse(q)
    if q.is_inf or not (1 < q.fraction < 2):
        raise ValueError(f"interpolation requires 1 < q < 2, got q={q}")
    if norm1_upper < 0 or norm2_upper < 0:
        raise ValueError("norm upper bounds must be nonnegative")
    qf = q.as_float()
    a = lambda_constant(k, 1) * norm1_upper
    b = lambda_constant(k, 2) * norm2_upper
    return a ** ((2.0 - qf) / qf) * b ** ((2.0 * qf - 2.0) / qf)


def ksz_reference(n: int, cardinality: int, max_weight: float, k: int, d_const: float) -> float:
    """Reference scale D (n * card * max_weight^2 * log k)^{1/2} for sup growth.

    Natural logarithm; requires k >= 2 and positive arguments.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got k={k}")
    if n < 1 or cardinality < 0 or max_weight < 0 or d_const < 0:
        raise ValueError("arguments must be nonnegative (n >= 1)")
    return d_const * math.sqrt(n * cardinality * max_weight**2 * math.log(k))


def flattening_upper_bound(p: HomogeneousPolynomial) -> float:
    """Certified l_2 upper bound from the coefficient-tensor flattening.

    The symmetric coefficient tensor of p is unfolded into an n x n^{k-1}
    matrix M; since |p(z)| = |z^T M z^{otimes(k-1)}| <= sigma_max(M) ||z||^k,
    the largest singular value certifies the Euclidean sup.  For unit-weight
    supports on a partial Steiner system with t = k - 1 the Gram matrix
    M M^* is diagonal and the bound is max_i sqrt(deg(i) / (k * k!)).
    """
    if p.term_count == 0:
        return 0.0
    n, k = p.n, p.k
    if k == 1:
        return float(np.linalg.norm(list(p.coeffs.values())))
    rows, cols, data = [], [], []
    kfact = math.factorial(k)
    for key, c in p.coeffs.items():
        mult_fact = 1
        for x in set(key):
            mult_fact *= math.factorial(key.count(x))
        entry = c * (mult_fact / kfact)
        for perm in set(itertools.permutations(key)):
            rows.append(perm[0] - 1)
            col = 0
            for j in range(1, k):
                col = col * n + (perm[j] - 1)
            cols.append(col)
            data.append(entry)
    m = sp.coo_matrix((data, (rows, cols)), shape=(n, n ** (k - 1))).tocsr()
    gram = (m @ m.conjugate().transpose()).toarray()
    top = float(np.linalg.eigvalsh(gram)[-1])
    return math.sqrt(max(top, 0.0))
