"""Moment profiles of the entry law and the correlation admissibility check.

For centered ``X`` with ``m2 = E X^2`` and ``m4 = E X^4`` the squared pair
distance ``D = (X1 - X2)^2`` has

    E D = 2 m2,    Var D = 2 (m4 + m2^2),
    Corr((X1 - X2)^2, (X1 - X3)^2) = (m4 - m2^2) / (2 (m4 + m2^2)),

and the correlation is below 1/3 exactly when ``m4 < 5 m2^2``. For other
exponents ``q`` no closed form is used; the pair moments are estimated from
sampled triples ``(X1, X2, X3)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .distance import as_matrix
from .distributions import DistributionSpec, Normal, stream
from .errors import DegeneracyError, ParameterError

Source = Literal["analytic", "monte_carlo", "sample"]

DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 20240101


@dataclass(frozen=True)
class MomentProfile:
    mu: float
    sigma2: float
    m2: float
    m4: float
    q: float
    pair_mean_q: float
    pair_var_q: float
    rho: float
    pair_sum_var: float
    source: Source
    # Corr of squared differences, reported alongside rho when q != 2
    rho_sq: float | None = None
    stderr: dict = field(default_factory=dict, compare=False)
    samples: int | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "stderr"}
        d["stderr"] = dict(self.stderr)
        return d


@dataclass(frozen=True)
class ConditionReport:
    rho: float
    passes: bool
    kurtosis_ratio: float
    equivalent_passes: bool
    moment_order_checked: float | None
    q: float = 2.0
    rho_sq: float | None = None


def rho_from_moments(m2: float, m4: float) -> float:
    return (m4 - m2 * m2) / (2.0 * (m4 + m2 * m2))


def _q2_profile(mu, m2, m4, source, **extra) -> MomentProfile:
    if not m2 > 0:
        raise DegeneracyError(f"zero variance (m2 = {m2})")
    pair_var = 2.0 * (m4 + m2 * m2)
    rho = rho_from_moments(m2, m4)
    return MomentProfile(
        mu=mu, sigma2=m2, m2=m2, m4=m4, q=2.0,
        pair_mean_q=2.0 * m2, pair_var_q=pair_var,
        rho=rho, pair_sum_var=2.0 + 2.0 * rho, source=source, rho_sq=rho, **extra,
    )


def analytic_profile(dist: DistributionSpec) -> MomentProfile:
    """Closed-form q = 2 profile from the family's central moments."""
    mu, m2, _, m4 = dist.central_moments()
    return _q2_profile(mu, m2, m4, "analytic")


def gaussian_profile(q: float = 2.0, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> MomentProfile:
    """Standard normal profile; exact at q = 2, sampled otherwise."""
    if not q >= 1:
        raise ParameterError(f"q must be >= 1, got {q}")
    if q == 2:
        return _q2_profile(0.0, 1.0, 3.0, "analytic")
    return profile_from_sampler(Normal(), q, samples, seed)


def _corr_stats(a: np.ndarray, b: np.ndarray):
    """Pooled mean/variance of a and b, their correlation and delta-method errors."""
    n = a.size
    pooled = np.concatenate([a, b])
    mean = float(pooled.mean())
    var = float(pooled.var())
    ca, cb = a - mean, b - mean
    if not var > 0:
        raise DegeneracyError("pair-distance variance estimate is not positive")
    za, zb = ca / math.sqrt(var), cb / math.sqrt(var)
    rho = float(np.mean(za * zb))
    # influence function of the pooled-variance correlation
    psi = za * zb - 0.5 * rho * (za * za + zb * zb)
    se_rho = float(psi.std() / math.sqrt(n))
    se_mean = math.sqrt(var / (2 * n))
    d2 = 0.5 * (ca * ca + cb * cb) - var
    se_var = float(d2.std() / math.sqrt(n))
    return mean, var, rho, {"rho": se_rho, "pair_mean_q": se_mean, "pair_var_q": se_var}


def _central(x: np.ndarray):
    mu = float(x.mean())
    d = x - mu
    d2 = d * d
    m2 = float(d2.mean())
    m3 = float((d2 * d).mean())
    m4 = float((d2 * d2).mean())
    n = x.size
    se_m2 = float((d2 - m2).std() / math.sqrt(n))
    se_m4 = float((d2 * d2 - m4 - 4.0 * m3 * d).std() / math.sqrt(n))
    return mu, m2, m4, {"m2": se_m2, "m4": se_m4}


def _rho_sq_se(m2, m4, se):
    # delta method on (m2, m4) treated as independent; a conservative summary only
    den = (m4 + m2 * m2) ** 2
    dr_dm4 = m2 * m2 / den
    dr_dm2 = -2.0 * m2 * m4 / den
    return math.hypot(dr_dm2 * se["m2"], dr_dm4 * se["m4"])


def profile_from_sampler(
    dist: DistributionSpec,
    q: float = 2.0,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> MomentProfile:
    """Plug-in profile from ``samples`` i.i.d. triples drawn from ``dist``.

    Uses the q-th powers ``|X1 - X2|^q`` and ``|X1 - X3|^q``; ``stderr``
    carries delta-method standard errors for rho and the pair moments.
    """
    if not q >= 1:
        raise ParameterError(f"q must be >= 1, got {q}")
    samples = int(samples)
    if samples < 2:
        raise ParameterError("need at least 2 samples")
    if samples < 10_000:
        warnings.warn(f"profile estimate from only {samples} triples", stacklevel=2)
    bitgen = stream(seed, 0)
    x = dist.sample(bitgen, (samples, 3))
    return _profile_from_triples(x, q, dist_samples=x.ravel(), source="monte_carlo", seed=seed)


def _profile_from_triples(x, q, dist_samples, source, seed):
    samples = x.shape[0]
    a = np.abs(x[:, 0] - x[:, 1]) ** q
    b = np.abs(x[:, 0] - x[:, 2]) ** q
    mu, m2, m4, se = _central(dist_samples)
    if not m2 > 0:
        raise DegeneracyError("sampled distribution has zero variance")
    mean_q, var_q, rho, se_pair = _corr_stats(a, b)
    se.update(se_pair)
    if q == 2:
        rho_sq = rho
    else:
        a2 = (x[:, 0] - x[:, 1]) ** 2
        b2 = (x[:, 0] - x[:, 2]) ** 2
        rho_sq = _corr_stats(a2, b2)[2]
    return MomentProfile(
        mu=mu, sigma2=m2, m2=m2, m4=m4, q=float(q),
        pair_mean_q=mean_q, pair_var_q=var_q, rho=rho, pair_sum_var=2.0 + 2.0 * rho,
        source=source, rho_sq=rho_sq, stderr=se, samples=samples, seed=seed,
    )


def profile_from_data(
    matrix,
    q: float = 2.0,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> MomentProfile:
    """Profile treating all ``p * n`` entries as one i.i.d. sample.

    At q = 2 the pair moments follow from the sample ``m2`` and ``m4``; for
    other q, ``samples`` triples are resampled from the empirical law with
    the given ``seed``.
    """
    m = as_matrix(matrix)
    x = m.values.ravel()
    if x.size < 4:
        raise ParameterError(f"need at least 4 entries, got {x.size}")
    mu, m2, m4, se = _central(x)
    if not m2 > 0:
        raise DegeneracyError("data have zero sample variance")
    if q == 2:
        prof = _q2_profile(mu, m2, m4, "sample", samples=x.size)
        se_rho = _rho_sq_se(m2, m4, se)
        se.update({"rho": se_rho, "pair_mean_q": 2.0 * se["m2"]})
        return replace(prof, stderr=se)
    if not q >= 1:
        raise ParameterError(f"q must be >= 1, got {q}")
    rng = np.random.Generator(stream(seed, 1))
    idx = rng.integers(0, x.size, size=(int(samples), 3))
    return _profile_from_triples(x[idx], q, dist_samples=x, source="sample", seed=seed)


def check_condition(
    profile: MomentProfile,
    tau: float | None = None,
    dist: DistributionSpec | None = None,
    epsilon: float = 0.0,
) -> ConditionReport:
    """Evaluate ``rho < 1/3`` and, from ``m2``/``m4``, the equivalent ``m4 < 5 m2^2``.

    ``moment_order_checked`` is only filled in when both a polynomial growth
    exponent ``tau`` and a distribution family are given; it is the order
    ``q (4 tau + 4) + epsilon`` whose finiteness the family guarantees.
    Finiteness of moments is never inferred from data.
    """
    kurt = profile.m4 / (profile.m2 * profile.m2)
    order = None
    if tau is not None and dist is not None:
        needed = profile.q * (4.0 * tau + 4.0) + epsilon
        order = needed if dist.finite_moment_order > needed else None
    return ConditionReport(
        rho=profile.rho,
        passes=bool(profile.rho < 1.0 / 3.0),
        kurtosis_ratio=kurt,
        equivalent_passes=bool(profile.m4 < 5.0 * profile.m2 * profile.m2),
        moment_order_checked=order,
        q=profile.q,
        rho_sq=profile.rho_sq,
    )
