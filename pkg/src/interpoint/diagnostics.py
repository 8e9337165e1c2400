"""Numerical checks of the two probabilistic tools behind the law.

* Chen-Stein Poisson approximation for the maximum of the pair statistics
  over ``I = {(i, j): i < j}`` with neighborhoods ``B_(i,j)`` = pairs sharing
  exactly one row with ``(i, j)``. Pairs with no common row are built from
  disjoint rows and are independent, so ``b3`` is identically zero.
* The moderate-deviation ratio ``P(S_n / sqrt(n) >= x) / (1 - Phi(x))``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np
from scipy.special import ndtr

from ._parallel import ordered_map
from .distance import _pow_q, as_matrix
from .distributions import DistributionSpec, stream
from .errors import LowCountWarning, ModeError, ParameterError
from .moments import MomentProfile, analytic_profile, profile_from_sampler

Mode = Literal["exact", "monte_carlo", "auto"]
Scale = Literal["raw", "normalized"]

MC_CHUNK = 2000


def std_normal_cdf(x):
    """Standard normal CDF (Cephes ``ndtr``; absolute error well below 1e-10)."""
    out = ndtr(np.asarray(x, dtype=np.float64))
    return float(out) if np.ndim(out) == 0 else out


def default_threshold(p: int, epsilon: float = 0.1) -> float:
    """``sqrt((4 - epsilon) ln p)`` on the normalized scale."""
    return math.sqrt((4.0 - epsilon) * math.log(p))


# --------------------------------------------------------------------- pairs


@dataclass(frozen=True)
class PairStatistic:
    i: int
    j: int
    sum: float
    normalized: float


def eta_entries(matrix, profile: MomentProfile) -> np.ndarray:
    """Standardized pair terms ``(|X_ik - X_jk|^q - E) / sd`` with shape (pairs, n)."""
    x = as_matrix(matrix).values
    p = x.shape[0]
    sd = math.sqrt(profile.pair_var_q)
    rows = [(_pow_q(x[i + 1:] - x[i], profile.q) - profile.pair_mean_q) / sd for i in range(p - 1)]
    return np.concatenate(rows) if rows else np.empty((0, x.shape[1]))


def pair_statistics(matrix, profile: MomentProfile) -> list[PairStatistic]:
    """One entry per pair ``i < j``: the eta sum and the sum over ``sqrt(n)``."""
    m = as_matrix(matrix)
    sums = eta_entries(m, profile).sum(axis=1)
    root_n = math.sqrt(m.n)
    pairs = itertools.combinations(range(m.p), 2)
    return [PairStatistic(i, j, float(s), float(s) / root_n) for (i, j), s in zip(pairs, sums)]


# ---------------------------------------------------------------- Chen-Stein


def chen_stein_bound(lam: float, b1: float, b2: float, b3: float = 0.0) -> float:
    """``min(1, 1/lam) * (b1 + b2 + b3)``; the factor is 1 when ``lam == 0``."""
    for name, v in (("lambda", lam), ("b1", b1), ("b2", b2), ("b3", b3)):
        if not v >= 0:
            raise ParameterError(f"{name} must be nonnegative, got {v}")
    factor = 1.0 if lam <= 1.0 else 1.0 / lam
    return factor * (b1 + b2 + b3)


@dataclass(frozen=True)
class ChenSteinReport:
    t: float
    lam: float
    b1: float
    b2: float
    b3: float
    bound: float
    p_max_le_t: float
    poisson_approx: float
    gap: float
    mode: str
    p: int
    n: int
    scale: str
    p_single: float
    p_overlap: float
    replications: int | None = None
    stderr: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def _assemble(t, p, n, scale, mode, p1, p12, pmax, replications=None, se=None) -> ChenSteinReport:
    pairs = p * (p - 1) // 2
    neigh = 2 * (p - 2)
    lam = pairs * p1
    b1 = pairs * neigh * p1 * p1
    b2 = pairs * neigh * p12
    b3 = 0.0
    bound = chen_stein_bound(lam, b1, b2, b3)
    approx = math.exp(-lam)
    gap = abs(pmax - approx)
    stderr = {}
    if se is not None:
        se1, se12, semax = se
        se_lam = pairs * se1
        se_b1 = pairs * neigh * 2.0 * p1 * se1
        se_b2 = pairs * neigh * se12
        factor = 1.0 if lam <= 1.0 else 1.0 / lam
        dfac = 0.0 if lam <= 1.0 else -(b1 + b2) / (lam * lam)
        stderr = {
            "p_single": se1,
            "p_overlap": se12,
            "p_max_le_t": semax,
            "lambda": se_lam,
            "b1": se_b1,
            "b2": se_b2,
            "gap": math.hypot(semax, approx * se_lam),
            # b1 and b2 errors are correlated through lambda; add them linearly
            "bound": abs(dfac) * se_lam + factor * (se_b1 + se_b2),
        }
    return ChenSteinReport(
        t=float(t), lam=lam, b1=b1, b2=b2, b3=b3, bound=bound, p_max_le_t=pmax,
        poisson_approx=approx, gap=gap, mode=mode, p=p, n=n, scale=scale,
        p_single=p1, p_overlap=p12, replications=replications, stderr=stderr,
    )


def _resolve_scale(dist, q, scale, profile):
    """``None`` for raw sums, else ``(center, sd)`` of a single pair term."""
    if scale == "raw":
        return None
    if scale != "normalized":
        raise ParameterError(f"scale must be 'raw' or 'normalized', got {scale!r}")
    if profile is None:
        profile = analytic_profile(dist) if q == 2 else profile_from_sampler(dist, q)
    return profile.pair_mean_q, math.sqrt(profile.pair_var_q)


def _standardize(sums, n, norm):
    if norm is None:
        return sums
    center, sd = norm
    return (sums - n * center) / (math.sqrt(n) * sd)


def _pair_sums(x: np.ndarray, q: float) -> np.ndarray:
    """Pair sums for stacked matrices ``x`` of shape (reps, p, n) -> (reps, pairs)."""
    p = x.shape[1]
    cols = [_pow_q(x[:, i + 1:, :] - x[:, i:i + 1, :], q).sum(axis=2) for i in range(p - 1)]
    return np.concatenate(cols, axis=1)


def _exact(dist, p, n, t, q, norm, budget):
    support = dist.support()
    if support is None:
        raise ModeError(f"exact enumeration needs a finite-support distribution, got {dist.label()}")
    values, probs = support
    cells = p * n
    count = len(values) ** cells
    if count > budget:
        raise ModeError(f"exact enumeration needs {len(values)}^{cells} = {count} outcomes > budget {budget}")
    idx = np.array(list(itertools.product(range(len(values)), repeat=cells)), dtype=np.intp)
    weights = np.prod(np.asarray(probs)[idx], axis=1)
    x = np.asarray(values)[idx].reshape(count, p, n)
    exceed = _standardize(_pair_sums(x, q), n, norm) > t
    # float probabilities need not sum to exactly 1; dividing by the total keeps sure events at exactly 1
    total = math.fsum(weights)
    p1 = math.fsum(weights[exceed[:, 0]]) / total
    # pairs (0, 1) and (0, 2) share row 0; exchangeability makes them representative
    p12 = math.fsum(weights[exceed[:, 0] & exceed[:, 1]]) / total if p >= 3 else 0.0
    pmax = math.fsum(weights[~exceed.any(axis=1)]) / total
    return p1, p12, pmax


def _mc_chunk(args):
    dist, p, n, t, q, norm, seed, chunk, reps = args
    x = dist.sample(stream(seed, 2, chunk), (reps, p, n))
    exceed = (_standardize(_pair_sums(x, q), n, norm) > t).astype(np.int64)
    c1 = exceed.sum(axis=1)
    ii, jj = np.triu_indices(p, 1)
    incidence = np.zeros((len(ii), p), dtype=np.int64)
    incidence[np.arange(len(ii)), ii] = 1
    incidence[np.arange(len(ii)), jj] = 1
    # exceedances touching each row; sum_r d_r (d_r - 1) counts ordered overlapping pairs
    deg = exceed @ incidence
    c12 = (deg * deg - deg).sum(axis=1)
    cmax = int((c1 == 0).sum())
    return int(c1.sum()), int((c1 * c1).sum()), int(c12.sum()), int((c12 * c12).sum()), cmax


def _mc(dist, p, n, t, q, norm, reps, seed, threads):
    if reps < 2:
        raise ParameterError("Monte Carlo mode needs at least 2 replications")
    chunks = []
    done = 0
    while done < reps:
        size = min(MC_CHUNK, reps - done)
        chunks.append((dist, p, n, t, q, norm, seed, len(chunks), size))
        done += size
    parts = ordered_map(_mc_chunk, chunks, threads)
    s1, s11, s12, s1212, smax = (sum(col) for col in zip(*parts))
    pairs = p * (p - 1) // 2
    ordered_overlaps = p * (p - 1) * (p - 2)

    def mean_se(total, total_sq, scale):
        mean = total / reps
        var = max(total_sq / reps - mean * mean, 0.0) * reps / (reps - 1)
        return mean / scale, math.sqrt(var / reps) / scale

    p1, se1 = mean_se(s1, s11, pairs)
    p12, se12 = mean_se(s12, s1212, ordered_overlaps) if p >= 3 else (0.0, 0.0)
    pmax, semax = mean_se(smax, smax, 1)
    return p1, p12, pmax, (se1, se12, semax)


def chen_stein_interpoint(
    dist: DistributionSpec,
    p: int,
    n: int,
    t: float,
    mode: Mode = "auto",
    budget: int = 100_000,
    seed: int = 0,
    q: float = 2.0,
    scale: Scale = "raw",
    profile: MomentProfile | None = None,
    threads: int | None = None,
) -> ChenSteinReport:
    """Chen-Stein quantities for ``max_{i<j} T_(i,j) <= t``.

    ``T`` is the raw pair sum ``sum_k |X_ik - X_jk|^q`` when ``scale='raw'``
    and the standardized sum ``sum_k eta_ijk / sqrt(n)`` when
    ``scale='normalized'``. ``exact`` enumerates every matrix (finite support,
    at most ``budget`` outcomes); ``monte_carlo`` uses ``budget`` replicated
    matrices; ``auto`` picks exact when it fits.

    By exchangeability ``lambda = C(p,2) P1``, ``b1 = C(p,2) 2(p-2) P1^2`` and
    ``b2 = C(p,2) 2(p-2) P12`` where ``P1`` is a single-pair exceedance
    probability and ``P12`` the joint exceedance of two pairs sharing a row.
    """
    if int(p) != p or p < 2:
        raise ParameterError(f"p must be an integer >= 2, got {p}")
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if not math.isfinite(t):
        raise ParameterError(f"threshold must be finite, got {t}")
    p, n, budget = int(p), int(n), int(budget)
    norm = _resolve_scale(dist, q, scale, profile)
    if mode == "auto":
        support = dist.support()
        mode = "exact" if support is not None and len(support[0]) ** (p * n) <= budget else "monte_carlo"
    if mode == "exact":
        p1, p12, pmax = _exact(dist, p, n, t, q, norm, budget)
        return _assemble(t, p, n, scale, "exact", p1, p12, pmax)
    if mode == "monte_carlo":
        p1, p12, pmax, se = _mc(dist, p, n, t, q, norm, budget, seed, threads)
        return _assemble(t, p, n, scale, "monte_carlo", p1, p12, pmax, replications=budget, se=se)
    raise ModeError(f"unknown mode {mode!r}")


# -------------------------------------------------------- moderate deviation


@dataclass(frozen=True)
class MdpEstimate:
    ratio: float
    tail_prob: float
    normal_tail: float
    exceedances: int
    iters: int
    n: int
    x: float
    stderr: float
    low_count: bool


def _mdp_chunk(args):
    dist, n, x, mu, sd, seed, chunk, rows = args
    draws = dist.sample(stream(seed, 3, chunk), (rows, n))
    s = (draws - mu).sum(axis=1) / (sd * math.sqrt(n))
    return int((s >= x).sum())


def mdp_estimate(
    dist: DistributionSpec,
    n: int,
    x: float,
    iters: int = 1_000_000,
    seed: int = 0,
    threads: int | None = None,
) -> MdpEstimate:
    """Monte Carlo ``P(S_n/sqrt(n) >= x)`` for summands standardized by the family's mean and sd."""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if not (x >= 0 and math.isfinite(x)):
        raise ParameterError(f"x must be finite and >= 0, got {x}")
    iters = int(iters)
    if iters < 1:
        raise ParameterError("iters must be positive")
    mu, var = dist.mean, dist.variance
    sd = math.sqrt(var)
    normal_tail = float(ndtr(-x))
    if iters * normal_tail < 100:
        warnings.warn(f"iters * (1 - Phi(x)) = {iters * normal_tail:.3g} < 100", LowCountWarning, stacklevel=2)
    rows = max(1, (1 << 22) // n)
    chunks = [(dist, n, x, mu, sd, seed, k, min(rows, iters - k * rows)) for k in range(-(-iters // rows))]
    hits = sum(ordered_map(_mdp_chunk, chunks, threads))
    tail = hits / iters
    low = hits == 0
    if low:
        warnings.warn(f"no exceedances of x = {x} in {iters} draws; ratio reported as 0", LowCountWarning, stacklevel=2)
    se = math.sqrt(tail * (1 - tail) / iters) / normal_tail
    return MdpEstimate(tail / normal_tail, tail, normal_tail, hits, iters, int(n), float(x), se, low)


def mdp_ratio(dist: DistributionSpec, n: int, x: float, iters: int = 1_000_000, seed: int = 0) -> float:
    """Ratio of the simulated standardized-sum tail at ``x`` to ``1 - Phi(x)``."""
    return mdp_estimate(dist, n, x, iters, seed).ratio
