"""Law-of-the-logarithm normalization and growth-regime sequences.

All logarithms are natural. The normalized statistic is

    z = (M^q - n * E|X1 - X2|^q) / sqrt(Var(|X1 - X2|^q) * n * ln p)

which tends to 2 almost surely under the moment and correlation
conditions. For standard normal entries at q = 2 the constants reduce to
``2n`` and ``2 sqrt(2 n ln p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import ParameterError, ProfileError, RegimeError
from .moments import MomentProfile


@dataclass(frozen=True)
class LawStatistic:
    m_pow_q: float
    n: int
    p: int
    q: float
    center: float
    scale: float
    z: float


def _check_np(n, p):
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if int(p) != p or p < 2:
        raise ParameterError(f"p must be an integer >= 2 for ln p > 0, got {p}")


def normalized_statistic(m_pow_q: float, n: int, p: int, profile: MomentProfile) -> LawStatistic:
    _check_np(n, p)
    if not profile.pair_var_q > 0:
        raise ProfileError(f"pair variance must be positive, got {profile.pair_var_q}")
    center = n * profile.pair_mean_q
    scale = math.sqrt(profile.pair_var_q * n * math.log(p))
    return LawStatistic(
        m_pow_q=float(m_pow_q), n=int(n), p=int(p), q=profile.q,
        center=center, scale=scale, z=(m_pow_q - center) / scale,
    )


def gaussian_z(m_sq: float, n: int, p: int) -> float:
    """``(M^2 - 2n) / (2 sqrt(2 n ln p))`` for standard normal entries."""
    _check_np(n, p)
    return (m_sq - 2.0 * n) / (2.0 * math.sqrt(2.0 * n * math.log(p)))


@dataclass(frozen=True)
class GrowthRegime:
    """How p grows with n.

    polynomial: ``c1 <= p / n**tau <= c2``.
    exponential: ``p = exp(c * n**beta)``, valid only when
    ``beta < alpha / (2 - alpha)`` with ``alpha`` in (0, 1/2].
    """

    kind: Literal["polynomial", "exponential"]
    tau: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    alpha: float = 0.5
    beta: float = 0.25
    c: float = 1.0

    def violations(self) -> list[str]:
        out = []
        if self.kind == "polynomial":
            if not self.tau > 0:
                out.append(f"tau > 0 (tau = {self.tau})")
            if not 0 < self.c1:
                out.append(f"0 < c1 (c1 = {self.c1})")
            if not self.c1 <= self.c2:
                out.append(f"c1 <= c2 (c1 = {self.c1}, c2 = {self.c2})")
        elif self.kind == "exponential":
            if not 0 < self.alpha <= 0.5:
                out.append(f"0 < alpha <= 1/2 (alpha = {self.alpha})")
            if not self.beta > 0:
                out.append(f"beta > 0 (beta = {self.beta})")
            bound = self.alpha / (2.0 - self.alpha)
            if not self.beta < bound:
                out.append(f"beta < alpha/(2-alpha) ({self.beta:g} >= {bound:g})")
            if not self.c > 0:
                out.append(f"c > 0 (c = {self.c})")
        else:
            out.append(f"kind in {{polynomial, exponential}} (kind = {self.kind!r})")
        return out

    @property
    def valid(self) -> bool:
        return not self.violations()

    def validate(self) -> GrowthRegime:
        bad = self.violations()
        if bad:
            raise RegimeError("invalid growth regime: violates " + "; ".join(bad))
        return self


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def regime_sequence(regime: GrowthRegime, n_values) -> list[tuple[int, int]]:
    """``(n, p)`` pairs following ``regime`` for each increasing ``n``.

    Polynomial p is ``round(sqrt(c1 c2) n^tau)`` pulled back into the band if
    rounding left it; a band containing no integer >= 2 is an error.
    """
    regime.validate()
    ns = [int(v) for v in n_values]
    if any(v < 1 for v in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ParameterError(f"n values must be increasing positive integers, got {ns}")
    out = []
    for n in ns:
        if regime.kind == "polynomial":
            base = n**regime.tau
            lo = math.ceil(regime.c1 * base * (1 - 1e-12))
            hi = math.floor(regime.c2 * base * (1 + 1e-12))
            lo = max(lo, 2)
            if lo > hi:
                raise RegimeError(
                    f"no integer p >= 2 with {regime.c1:g} <= p/n^{regime.tau:g} <= {regime.c2:g} at n = {n}"
                )
            p = min(max(_round_half_up(math.sqrt(regime.c1 * regime.c2) * base), lo), hi)
        else:
            try:
                p = _round_half_up(math.exp(regime.c * n**regime.beta))
            except OverflowError:
                raise RegimeError(f"p = exp({regime.c:g} n^{regime.beta:g}) overflows at n = {n}") from None
            p = max(p, 2)
        out.append((n, p))
    return out
