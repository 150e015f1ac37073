"""Random-sign processes indexed by ball points, and their increment geometry.

For a weighted block family the process is Y_z = (1/k) sum_J eps_J a_J z_J
with independent Rademacher signs eps_J.  The module provides the closed-form
L2 increment distance, Monte Carlo cross-checks, an empirical Orlicz psi_2
norm (Young function exp(t^2) - 1), and a sampled check of the Lipschitz
domination of the increment distance by the sup distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .norms import estimate_norm
from .polynomials import HomogeneousPolynomial
from .steiner import PartialSteinerSystem
from .util import stream

# psi_2 norm of a single Rademacher sign: E exp(1/c^2) - 1 = 1 at c = 1/sqrt(ln 2)
RADEMACHER_PSI2 = 1.0 / math.sqrt(math.log(2.0))


@dataclass(frozen=True)
class RademacherProcess:
    """Sign process on the blocks of a partial Steiner system with t = k - 1."""

    system: PartialSteinerSystem
    weights: dict | None = None

    def __post_init__(self):
        if self.system.t != self.system.k - 1:
            raise ValueError(
                f"process support must have t = k - 1, got t={self.system.t}"
            )
        if self.weights is not None:
            unknown = set(self.weights) - set(self.system.blocks)
            if unknown:
                raise ValueError(f"weights given for non-blocks: {sorted(unknown)}")

    @property
    def k(self) -> int:
        return self.system.k

    @property
    def n(self) -> int:
        return self.system.n

    @cached_property
    def _blocks(self) -> tuple:
        if self.weights is None:
            return self.system.blocks
        return tuple(b for b in self.system.blocks if self.weights.get(b, 1.0) != 0.0)

    @cached_property
    def _idx0(self) -> np.ndarray:
        if not self._blocks:
            return np.zeros((0, self.k), dtype=np.int64)
        return np.array(self._blocks, dtype=np.int64) - 1

    @cached_property
    def _amps(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(len(self._blocks))
        return np.array([float(self.weights.get(b, 1.0)) for b in self._blocks])

    @property
    def max_weight(self) -> float:
        return float(np.abs(self._amps).max()) if len(self._blocks) else 0.0

    def draw_signs(self, rng) -> np.ndarray:
        if not isinstance(rng, np.random.Generator):
            rng = stream(int(rng), "process-signs", self.n, self.k)
        return rng.integers(0, 2, size=len(self._blocks)) * 2 - 1

    def signed_polynomial(self, signs) -> HomogeneousPolynomial:
        """The normalized realization (1/k) sum eps_J a_J z_J for given signs."""
        coeffs = {
            b: complex(s * a / self.k)
            for b, s, a in zip(self._blocks, signs, self._amps)
        }
        return HomogeneousPolynomial(self.n, self.k, coeffs)

    def _block_products(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        if z.shape != (self.n,):
            raise ValueError(f"point has shape {z.shape}, expected ({self.n},)")
        if not self._blocks:
            return np.zeros(0, dtype=np.complex128)
        return z[self._idx0].prod(axis=1)


def l2_distance(proc: RademacherProcess, z, zp) -> float:
    """Closed-form L2 increment (1/k) (sum_J |a_J|^2 |z_J - z'_J|^2)^{1/2}."""
    diff = proc._block_products(z) - proc._block_products(zp)
    return float(np.sqrt((np.abs(proc._amps * diff) ** 2).sum()) / proc.k)


def mc_increment_std(proc: RademacherProcess, z, zp, draws: int, seed: int):
    """Monte Carlo root-mean-square of Y_z - Y_{z'} and a standard-error proxy.

    The increment is a mean-zero sign sum, so its RMS equals l2_distance;
    the proxy is the delta-method standard error of the RMS estimate.
    """
    w = proc._amps * (proc._block_products(z) - proc._block_products(zp)) / proc.k
    rng = stream(seed, "increment-mc")
    signs = rng.integers(0, 2, size=(draws, len(w))) * 2 - 1
    samples = np.abs(signs @ w) ** 2
    mean_sq = samples.mean()
    rms = math.sqrt(mean_sq)
    if rms == 0.0:
        return 0.0, 0.0
    se = samples.std(ddof=1) / math.sqrt(draws) / (2.0 * rms)
    return float(rms), float(se)


def sample_sup(proc: RademacherProcess, seed: int, **norm_kwargs) -> float:
    """One realized sup over the Euclidean ball: draw signs, run the ascent."""
    signs = proc.draw_signs(stream(seed, "sup-signs"))
    p = proc.signed_polynomial(signs)
    norm_kwargs.setdefault("seed", seed)
    return estimate_norm(p, 2, **norm_kwargs).lower


@dataclass(frozen=True)
class OrliczEstimate:
    value: float
    samples: int
    se_proxy: float
    unstable: bool


def _orlicz_gauge(abs_sq: np.ndarray, c: float) -> float:
    with np.errstate(over="ignore"):
        return float(np.expm1(abs_sq / (c * c)).mean())


def _psi2_from_abs_sq(abs_sq: np.ndarray, rel_tol: float) -> float:
    l2 = math.sqrt(abs_sq.mean())
    if l2 == 0.0:
        return 0.0
    hi = 10.0 * l2
    for _ in range(200):
        if _orlicz_gauge(abs_sq, hi) <= 1.0:
            break
        hi *= 2.0
    lo = hi / 2.0
    while _orlicz_gauge(abs_sq, lo) <= 1.0 and lo > 1e-12 * l2:
        lo *= 0.5
    for _ in range(200):
        if hi - lo <= rel_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if _orlicz_gauge(abs_sq, mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def psi2_norm_mc(sampler, samples: int, seed: int, rel_tol: float = 1e-3) -> OrliczEstimate:
    """Empirical psi_2 norm: smallest c with mean(exp(|Z|^2/c^2) - 1) <= 1.

    sampler(rng, size) must return a real or complex sample array.  The
    gauge is monotone in c, so bisection from a bracketed interval converges
    to the stated relative tolerance.  The standard-error proxy is half the
    spread between half-sample solutions, and the estimate is flagged
    unstable when the empirical gauge differs grossly between halves
    (heavy tails making the exponential mean unreliable).
    """
    rng = stream(seed, "orlicz-sampler")
    z = np.asarray(sampler(rng, samples))
    abs_sq = np.abs(z) ** 2
    if not abs_sq.any():
        return OrliczEstimate(0.0, samples, 0.0, False)
    value = _psi2_from_abs_sq(abs_sq, rel_tol)
    half = samples // 2
    if half >= 1:
        c1 = _psi2_from_abs_sq(abs_sq[:half], rel_tol)
        c2 = _psi2_from_abs_sq(abs_sq[half:], rel_tol)
        se_proxy = 0.5 * abs(c1 - c2)
        g1 = _orlicz_gauge(abs_sq[:half], value)
        g2 = _orlicz_gauge(abs_sq[half:], value)
        unstable = not math.isfinite(g1) or not math.isfinite(g2) or abs(g1 - g2) > 0.5
    else:
        se_proxy, unstable = 0.0, False
    return OrliczEstimate(float(value), samples, float(se_proxy), bool(unstable))


def ball_point(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform point of the complex Euclidean unit ball in dimension n.

    Gaussian direction times radius u^{1/(2n)}; the exponent is 2n because
    the ball has 2n real dimensions.
    """
    g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    g /= np.linalg.norm(g)
    return g * rng.uniform() ** (1.0 / (2 * n))


@dataclass(frozen=True)
class LipschitzReport:
    pairs: int
    max_ratio: float
    violations: int
    rows: tuple  # (lhs, rhs, ratio) per sampled pair
    psi2_l2_ratios: tuple  # empirical psi2/L2 comparability on a few increments


def lipschitz_check(
    proc: RademacherProcess,
    pairs: int,
    seed: int,
    *,
    tol: float = 1e-12,
    mc_pairs: int = 3,
    mc_draws: int = 20000,
) -> LipschitzReport:
    """Sampled check of d(z, z') <= max_J |a_J| * ||z - z'||_inf on ball pairs.

    Also reports the empirical psi_2 / L2 ratio of the increment on a few
    pairs, which should sit inside the two-sided sub-Gaussian corridor.
    """
    amax = proc.max_weight
    rows = []
    violations = 0
    max_ratio = 0.0
    ratios_psi2 = []
    for i in range(pairs):
        z = ball_point(stream(seed, "lipschitz", i, 0), proc.n)
        zp = ball_point(stream(seed, "lipschitz", i, 1), proc.n)
        lhs = l2_distance(proc, z, zp)
        rhs = amax * float(np.abs(z - zp).max())
        if rhs == 0.0:
            continue
        ratio = lhs / rhs
        rows.append((lhs, rhs, ratio))
        max_ratio = max(max_ratio, ratio)
        if lhs > rhs + tol:
            violations += 1
        if i < mc_pairs and lhs > 0.0:
            w = proc._amps * (proc._block_products(z) - proc._block_products(zp)) / proc.k

            def increment_sampler(rng, size, w=w):
                signs = rng.integers(0, 2, size=(size, len(w))) * 2 - 1
                return signs @ w

            est = psi2_norm_mc(increment_sampler, mc_draws, seed + 7919 * i)
            ratios_psi2.append(est.value / lhs)
    return LipschitzReport(
        pairs=len(rows),
        max_ratio=float(max_ratio),
        violations=violations,
        rows=tuple(rows),
        psi2_l2_ratios=tuple(ratios_psi2),
    )
