"""Entry distributions and the counter-based random streams that feed them.

Every variate is produced by inverse-CDF transform of exactly one 64-bit draw
from a Philox4x64-10 stream, so entry ``(i, k)`` of a sampled matrix depends
only on its stream position ``i * n + k``. Streams are keyed through
``numpy.random.SeedSequence`` spawn keys, which map ``(seed, *key)``
injectively to independent Philox keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.special import ndtri

from .errors import ParameterError

RNG_ID = "philox4x64-10/seedsequence/inverse-cdf-u53"

_U53 = 2.0**-53


def stream(seed: int, *key: int) -> np.random.Philox:
    """Return the Philox bit generator for ``seed`` and spawn ``key``."""
    if int(seed) < 0 or any(int(k) < 0 for k in key):
        raise ParameterError(f"seeds and stream keys must be nonnegative, got {seed}, {key}")
    return np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def uniforms(bitgen: np.random.BitGenerator, size: int | tuple[int, ...]) -> np.ndarray:
    """Open-interval uniforms, one raw 64-bit draw each."""
    count = int(np.prod(size))
    raw = bitgen.random_raw(count)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _U53
    return u.reshape(size)


@dataclass(frozen=True)
class DistributionSpec:
    """Base class for the i.i.d. entry law of the data matrix.

    Subclasses implement ``transform`` (inverse CDF on (0, 1)) and
    ``central_moments``. ``tail_alpha`` is the largest alpha in (0, 1/2] with
    ``E exp(t0 |X|^(2 alpha)) < inf`` for some ``t0 > 0``, or ``None`` when the
    family only has polynomial moments.
    """

    family: ClassVar[str] = ""
    tail_alpha: ClassVar[float | None] = 0.5
    finite_moment_order: ClassVar[float] = math.inf

    def transform(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def central_moments(self) -> tuple[float, float, float, float]:
        """Return ``(mean, m2, m3, m4)`` with ``mk = E (X - mean)^k``."""
        raise NotImplementedError

    def support(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Finite support as ``(values, probabilities)``, or ``None``."""
        return None

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"family": self.family, **self.params()}

    def label(self) -> str:
        args = ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in self.params().values())
        return f"{self.family}({args})"

    def sample(self, bitgen: np.random.BitGenerator, size: int | tuple[int, ...]) -> np.ndarray:
        return self.transform(uniforms(bitgen, size))

    @property
    def mean(self) -> float:
        return self.central_moments()[0]

    @property
    def variance(self) -> float:
        return self.central_moments()[1]


@dataclass(frozen=True)
class Normal(DistributionSpec):
    mu: float = 0.0
    sigma: float = 1.0

    family: ClassVar[str] = "normal"

    def __post_init__(self):
        _finite(self.mu, "mu")
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise ParameterError(f"normal sigma must be positive, got {self.sigma}")

    def transform(self, u):
        return self.mu + self.sigma * ndtri(u)

    def central_moments(self):
        s2 = self.sigma**2
        return self.mu, s2, 0.0, 3.0 * s2 * s2

    def params(self):
        return {"mu": float(self.mu), "sigma": float(self.sigma)}


@dataclass(frozen=True)
class Uniform(DistributionSpec):
    a: float = -1.0
    b: float = 1.0

    family: ClassVar[str] = "uniform"

    def __post_init__(self):
        _finite(self.a, "a")
        _finite(self.b, "b")
        if not self.a < self.b:
            raise ParameterError(f"uniform requires a < b, got a={self.a}, b={self.b}")

    def transform(self, u):
        return self.a + (self.b - self.a) * u

    def central_moments(self):
        w = self.b - self.a
        return 0.5 * (self.a + self.b), w * w / 12.0, 0.0, w**4 / 80.0

    def params(self):
        return {"a": float(self.a), "b": float(self.b)}


@dataclass(frozen=True)
class SparseTwoPoint(DistributionSpec):
    """``X = +a`` or ``-a`` with probability ``epsilon / 2`` each, else 0."""

    a: float = 1.0
    epsilon: float = 0.1

    family: ClassVar[str] = "sparse"

    def __post_init__(self):
        _finite(self.a, "a")
        if self.a == 0:
            raise ParameterError("sparse two-point requires a != 0")
        if not 0 < self.epsilon <= 1:
            raise ParameterError(f"sparse two-point requires 0 < epsilon <= 1, got {self.epsilon}")

    def transform(self, u):
        half = 0.5 * self.epsilon
        return np.where(u < half, -self.a, np.where(u < self.epsilon, self.a, 0.0))

    def central_moments(self):
        a2 = self.a * self.a
        return 0.0, a2 * self.epsilon, 0.0, a2 * a2 * self.epsilon

    def support(self):
        a = abs(self.a)
        half = 0.5 * self.epsilon
        if self.epsilon == 1:
            return np.array([-a, a]), np.array([0.5, 0.5])
        return np.array([-a, 0.0, a]), np.array([half, 1.0 - self.epsilon, half])

    def params(self):
        return {"a": float(self.a), "epsilon": float(self.epsilon)}


@dataclass(frozen=True)
class CenteredExponential(DistributionSpec):
    """``Exponential(rate) - 1/rate``."""

    rate: float = 1.0

    family: ClassVar[str] = "exp"

    def __post_init__(self):
        if not self.rate > 0 or not math.isfinite(self.rate):
            raise ParameterError(f"exponential rate must be positive, got {self.rate}")

    def transform(self, u):
        return (-np.log1p(-u) - 1.0) / self.rate

    def central_moments(self):
        s = 1.0 / self.rate
        return 0.0, s**2, 2.0 * s**3, 9.0 * s**4

    def params(self):
        return {"rate": float(self.rate)}


@dataclass(frozen=True)
class Discrete(DistributionSpec):
    """Finite-support law; probabilities default to uniform weights."""

    values: tuple[float, ...]
    probs: tuple[float, ...] = field(default=())

    family: ClassVar[str] = "discrete"

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ParameterError("discrete distribution needs at least one support point")
        for v in values:
            _finite(v, "support value")
        probs = tuple(float(w) for w in self.probs) or tuple(1.0 / len(values) for _ in values)
        if len(probs) != len(values):
            raise ParameterError("discrete values and probs differ in length")
        if any(not w > 0 for w in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ParameterError("discrete probs must be positive and sum to 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    def transform(self, u):
        edges = np.cumsum(self.probs)[:-1]
        return np.asarray(self.values)[np.searchsorted(edges, u, side="right")]

    def central_moments(self):
        v = np.asarray(self.values)
        w = np.asarray(self.probs)
        mu = float(np.dot(w, v))
        d = v - mu
        return mu, float(np.dot(w, d**2)), float(np.dot(w, d**3)), float(np.dot(w, d**4))

    def support(self):
        return np.asarray(self.values), np.asarray(self.probs)

    def params(self):
        return {"values": list(self.values), "probs": list(self.probs)}

    def label(self):
        return f"discrete({self.values}, {self.probs})"


def _finite(x, name):
    if not math.isfinite(x):
        raise ParameterError(f"{name} must be finite, got {x}")


def parse_distribution(text: str) -> DistributionSpec:
    """Parse ``family[:arg,arg,...]``.

    Accepted forms: ``normal[:mu,sigma]``, ``uniform[:a,b]``,
    ``sparse[:a,epsilon]``, ``exp[:rate]``, ``bernoulli[:p]``,
    ``discrete:v1,v2,...[|p1,p2,...]``.
    """
    name, _, rest = text.strip().partition(":")
    name = name.lower()

    def nums(s):
        try:
            return [float(x) for x in s.split(",") if x.strip()] if s.strip() else []
        except ValueError:
            raise ParameterError(f"bad distribution parameters in {text!r}") from None

    if name == "discrete":
        vals, _, probs = rest.partition("|")
        return Discrete(tuple(nums(vals)), tuple(nums(probs)))
    args = nums(rest)
    factories = {
        "normal": Normal,
        "gaussian": Normal,
        "uniform": Uniform,
        "sparse": SparseTwoPoint,
        "exp": CenteredExponential,
        "exponential": CenteredExponential,
    }
    if name == "bernoulli":
        (p,) = args or [0.5]
        if not 0 < p < 1:
            raise ParameterError(f"bernoulli p must lie in (0, 1), got {p}")
        return Discrete((0.0, 1.0), (1.0 - p, p))
    if name not in factories:
        raise ParameterError(f"unknown distribution family {name!r}")
    try:
        return factories[name](*args)
    except TypeError:
        raise ParameterError(f"wrong number of parameters for {name!r}") from None
