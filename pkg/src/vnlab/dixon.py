"""Dixon tuples: commuting contractions built from a signed block family.

Given a partial Steiner system with uniqueness level t = k - 1 and a sign
c_J = +-1 per block, the construction produces n commuting operators
T_1, ..., T_n on a layered finite-dimensional space such that the support
polynomial p applied to the tuple satisfies p(T) e = |J| g exactly, where
|J| is the number of blocks.  Matrices are stored column-compressed since
every column has at most one nonzero entry.
"""

from __future__ import annotations

import math
import itertools
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .polynomials import HomogeneousPolynomial
from .steiner import PartialSteinerSystem, validate
from .util import stream


def dixon_dimension(n: int, k: int) -> int:
    """Dimension 2 + n + sum_{m=1}^{k-2} binom(n+m-1, m) of the layered space."""
    if k < 3 or n < k:
        raise ValueError(f"need n >= k >= 3, got n={n} k={k}")
    return 2 + n + sum(math.comb(n + m - 1, m) for m in range(1, k - 1))


@dataclass(frozen=True)
class DixonBasis:
    """Ordered basis: e, then m-tuples (m = 1..k-2, lexicographic), then f_i, then g."""

    n: int
    k: int
    labels: tuple
    index: dict

    @property
    def dimension(self) -> int:
        return len(self.labels)


def build_basis(n: int, k: int) -> DixonBasis:
    if k < 3 or n < k:
        raise ValueError(f"need n >= k >= 3, got n={n} k={k}")
    labels = [("e",)]
    for m in range(1, k - 1):
        for v in itertools.combinations_with_replacement(range(1, n + 1), m):
            labels.append(("t", v))
    labels.extend(("f", i) for i in range(1, n + 1))
    labels.append(("g",))
    index = {lab: pos for pos, lab in enumerate(labels)}
    assert len(labels) == dixon_dimension(n, k)
    return DixonBasis(n, k, tuple(labels), index)


@dataclass(frozen=True)
class DixonTuple:
    system: PartialSteinerSystem
    polynomial: HomogeneousPolynomial
    basis: DixonBasis
    ops: tuple  # n sparse CSC matrices

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def k(self) -> int:
        return self.system.k


def build_tuple(system: PartialSteinerSystem, p: HomogeneousPolynomial) -> DixonTuple:
    """Assemble the n operators for a signed block family.

    Requires a valid system with t = k - 1 whose blocks carry real signs +-1
    (exactly the support of p), and additionally pairwise-unique blocks: for
    k >= 4 a pair of points shared by two blocks would give the shift into
    the f-layer a Gram matrix with an entry 2, so the operators would have
    norm sqrt(2) instead of 1.  At k = 3 pair uniqueness is t-uniqueness.
    """
    n, k = system.n, system.k
    if k < 3:
        raise ValueError(f"construction requires k >= 3, got k={k}")
    if system.t != k - 1:
        raise ValueError(f"system must have uniqueness level t = k - 1, got t={system.t}")
    result = validate(system)
    if not result.valid:
        raise ValueError(f"system fails validation: {result}")
    if system.max_pair_multiplicity() > 1:
        raise ValueError(
            "blocks share a pair of points; operators would not be contractions"
        )
    if p.n != n or p.k != k:
        raise ValueError(f"polynomial shape ({p.n}, {p.k}) does not match system ({n}, {k})")
    support = set(p.coeffs.keys())
    blocks = set(system.blocks)
    if support != blocks:
        missing = blocks - support
        extra = support - blocks
        raise ValueError(f"sign map mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
    for key, c in p.coeffs.items():
        if c.imag != 0.0 or c.real not in (1.0, -1.0):
            raise ValueError(f"coefficient at {key} must be +1 or -1, got {c}")

    basis = build_basis(n, k)
    # completion map: (k-1)-subset -> (missing point, sign of the unique block)
    completion = {}
    for block in system.blocks:
        c = p.coeffs[block].real
        for x in block:
            completion[frozenset(block) - {x}] = (x, c)

    e_pos = basis.index[("e",)]
    g_pos = basis.index[("g",)]
    dim = basis.dimension
    ops = []
    for l in range(1, n + 1):
        rows, cols, data = [], [], []
        rows.append(basis.index[("t", (l,))])
        cols.append(e_pos)
        data.append(1.0)
        for lab in basis.labels:
            if lab[0] != "t":
                continue
            v = lab[1]
            if len(v) < k - 2:
                rows.append(basis.index[("t", tuple(sorted(v + (l,))))])
                cols.append(basis.index[lab])
                data.append(1.0)
            else:
                partial = frozenset(v) | {l}
                if len(partial) != k - 1:
                    continue
                hit = completion.get(partial)
                if hit is not None:
                    i, c = hit
                    rows.append(basis.index[("f", i)])
                    cols.append(basis.index[lab])
                    data.append(c)
        rows.append(g_pos)
        cols.append(basis.index[("f", l)])
        data.append(1.0)
        ops.append(
            sp.coo_matrix((data, (rows, cols)), shape=(dim, dim), dtype=np.complex128).tocsc()
        )
    return DixonTuple(system, p, basis, tuple(ops))


@dataclass(frozen=True)
class PowerIterationResult:
    value: float
    converged: bool
    iterations: int
    vector: np.ndarray


def power_iteration(a, tol: float = 1e-12, max_iter: int = 5000) -> PowerIterationResult:
    """Largest singular value of a (sparse or dense) via power iteration on A*A.

    Deterministic ramp start vector; stops when successive estimates agree
    to relative tolerance.  A zero matrix (or a start vector annihilated to
    exactly zero) reports 0 immediately.  The returned vector is the last
    right singular iterate.
    """
    dim = a.shape[1]
    v = np.ones(dim, dtype=np.complex128) + 1e-3 * np.arange(dim)
    v /= np.linalg.norm(v)
    ah = a.conjugate().transpose() if sp.issparse(a) else np.asarray(a).conj().T
    sigma_old = -1.0
    sigma = 0.0
    for it in range(1, max_iter + 1):
        w = a @ v
        sigma = float(np.linalg.norm(w))
        if sigma == 0.0:
            return PowerIterationResult(0.0, True, it, v)
        u = ah @ w
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return PowerIterationResult(sigma, True, it, v)
        v = u / nu
        if abs(sigma - sigma_old) <= tol * max(sigma, 1e-300):
            return PowerIterationResult(sigma, True, it, v)
        sigma_old = sigma
    return PowerIterationResult(sigma, False, max_iter, v)


def operator_norm(a, tol: float = 1e-12, max_iter: int = 5000) -> float:
    res = power_iteration(a, tol=tol, max_iter=max_iter)
    if not res.converged:
        warnings.warn(
            f"power iteration did not converge in {max_iter} iterations; "
            f"last estimate {res.value}",
            RuntimeWarning,
            stacklevel=2,
        )
    return res.value


def check_commuting(tup: DixonTuple) -> float:
    """Maximal operator norm of T_a T_b - T_b T_a over all pairs a < b."""
    worst = 0.0
    for a, b in itertools.combinations(tup.ops, 2):
        d = (a @ b - b @ a).tocsr()
        d.eliminate_zeros()
        if d.nnz == 0:
            continue
        worst = max(worst, operator_norm(d))
    return worst


def operator_norms(tup: DixonTuple) -> list:
    return [operator_norm(t) for t in tup.ops]


def apply_polynomial(p: HomogeneousPolynomial, tup: DixonTuple, v: np.ndarray) -> np.ndarray:
    """p(T) v with monomials read as products T_{j1} ... T_{jk}, j1 <= ... <= jk."""
    v = np.asarray(v, dtype=np.complex128)
    acc = np.zeros_like(v)
    for key, c in p.coeffs.items():
        w = v
        for j in reversed(key):
            w = tup.ops[j - 1] @ w
        acc = acc + c * w
    return acc


def polynomial_operator(p: HomogeneousPolynomial, tup: DixonTuple):
    """The full matrix p(T); only assembled when its norm is actually wanted."""
    dim = tup.basis.dimension
    acc = sp.csc_matrix((dim, dim), dtype=np.complex128)
    for key, c in p.coeffs.items():
        prod = tup.ops[key[0] - 1]
        for j in key[1:]:
            prod = prod @ tup.ops[j - 1]
        acc = acc + c * prod
    return acc


def pte_coefficient(tup: DixonTuple):
    """Coefficient of g in p(T) e and the norm of the off-g residual."""
    dim = tup.basis.dimension
    e = np.zeros(dim, dtype=np.complex128)
    e[tup.basis.index[("e",)]] = 1.0
    w = apply_polynomial(tup.polynomial, tup, e)
    g_pos = tup.basis.index[("g",)]
    coeff = complex(w[g_pos])
    w[g_pos] = 0.0
    return coeff, float(np.linalg.norm(w))


@dataclass(frozen=True)
class RowConditionResult:
    """Estimated sup over unit alpha of || sum_j alpha_j s T_j ||.

    value is a maximum over random trials plus adversarial ascent, so it is
    a certified lower estimate of the true supremum; block_row_norm is the
    norm of the stacked row [T_1 ... T_n] times s, which only upper-bounds
    the supremum by sqrt(n) times and is reported for reference.
    """

    value: float
    scale: float
    alpha: np.ndarray
    block_row_norm: float
    trials: int

    def satisfied(self, tol: float = 1e-9) -> bool:
        return self.value <= 1.0 + tol


def _tuple_combination(ops, alpha):
    acc = alpha[0] * ops[0]
    for j in range(1, len(ops)):
        acc = acc + alpha[j] * ops[j]
    return acc


def check_row_condition(
    tup: DixonTuple,
    scale: float,
    *,
    trials: int = 200,
    seed: int = 0,
    ascent_restarts: int = 6,
    ascent_iters: int = 120,
) -> RowConditionResult:
    """Probe sup_{||alpha||_2 = 1} || sum_j alpha_j (s T_j) || from below.

    Structured candidates (coordinate and uniform alpha), random unit
    vectors, and multistart gradient ascent on the top singular value are
    combined; the reported value is the best found, times the scale s.
    scale = 0 short-circuits to 0.
    """
    n = tup.n
    ops = tup.ops
    gram = _tuple_combination([t @ t.conjugate().transpose() for t in ops], np.ones(n))
    block_row = math.sqrt(operator_norm(gram)) * scale
    if scale == 0.0:
        return RowConditionResult(0.0, 0.0, np.zeros(n, dtype=np.complex128), block_row, 0)

    rng = stream(seed, "row-condition", n, tup.k)
    candidates = [np.ones(n, dtype=np.complex128) / math.sqrt(n)]
    eye = np.eye(n, dtype=np.complex128)
    candidates.extend(eye[j] for j in range(n))
    for _ in range(trials):
        alpha = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        candidates.append(alpha / np.linalg.norm(alpha))

    best_value = -1.0
    best_alpha = candidates[0]
    scored = []
    for alpha in candidates:
        sigma = power_iteration(_tuple_combination(ops, alpha), tol=1e-10, max_iter=2000).value
        scored.append((sigma, alpha))
        if sigma > best_value:
            best_value, best_alpha = sigma, alpha

    scored.sort(key=lambda t: -t[0])
    starts = [alpha for _, alpha in scored[:ascent_restarts]]
    for alpha0 in starts:
        alpha = alpha0.copy()
        a = _tuple_combination(ops, alpha)
        sigma = power_iteration(a, tol=1e-10, max_iter=2000).value
        eta = 0.5
        for _ in range(ascent_iters):
            res = power_iteration(a, tol=1e-10, max_iter=2000)
            v = res.vector
            av = a @ v
            sig = np.linalg.norm(av)
            if sig == 0.0:
                break
            u = av / sig
            grad = np.array([np.vdot(u, t @ v) for t in ops])
            step_ok = False
            for _ in range(30):
                cand = alpha + eta * np.conj(grad)
                cand /= np.linalg.norm(cand)
                a_cand = _tuple_combination(ops, cand)
                sig_cand = power_iteration(a_cand, tol=1e-10, max_iter=2000).value
                if sig_cand > sigma:
                    alpha, a, sigma = cand, a_cand, sig_cand
                    eta = min(eta * 1.5, 10.0)
                    step_ok = True
                    break
                eta *= 0.5
                if eta < 1e-12:
                    break
            if not step_ok:
                break
        if sigma > best_value:
            best_value, best_alpha = sigma, alpha

    return RowConditionResult(
        best_value * scale, scale, best_alpha, block_row, len(candidates)
    )


def corrupt_tuple(tup: DixonTuple, seed: int = 0) -> DixonTuple:
    """Negative control: move one f-layer entry of one operator to a wrong row.

    The returned tuple generically fails the commutation check, which is the
    point: it exercises the failure path of the certification.
    """
    rng = stream(seed, "corrupt")
    f_rows = {tup.basis.index[lab] for lab in tup.basis.labels if lab[0] == "f"}
    order = rng.permutation(len(tup.ops))
    for l in order:
        mat = tup.ops[l].tocoo()
        hits = [t for t in range(mat.nnz) if mat.row[t] in f_rows]
        if not hits:
            continue
        t = hits[int(rng.integers(0, len(hits)))]
        new_rows = sorted(f_rows - {mat.row[t]})
        mat.row[t] = new_rows[int(rng.integers(0, len(new_rows)))]
        ops = list(tup.ops)
        ops[l] = mat.tocsc()
        return DixonTuple(tup.system, tup.polynomial, tup.basis, tuple(ops))
    raise ValueError("tuple has no f-layer entries to corrupt")


def verify_report(
    tup: DixonTuple,
    *,
    scale: float | None = None,
    row_trials: int = 100,
    seed: int = 0,
) -> dict:
    """Full certification report for a tuple, as emitted by the CLI."""
    if scale is None:
        scale = (1.0 + tup.polynomial.coefficient_sum) ** -0.5
    coeff, residual = pte_coefficient(tup)
    row = check_row_condition(tup, scale, trials=row_trials, seed=seed)
    return {
        "dimension": tup.basis.dimension,
        "cardinality": tup.system.cardinality,
        "max_commutator": check_commuting(tup),
        "op_norms": operator_norms(tup),
        "pTe_coefficient": {"re": coeff.real, "im": coeff.imag},
        "pTe_residual": residual,
        "row_scale": scale,
        "row_condition_value": row.value,
        "block_row_norm": row.block_row_norm,
    }
