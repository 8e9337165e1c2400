"""Seeded sampling of data matrices and the K-iteration z simulation.

Iteration ``k`` of pair ``j`` draws its matrix from the Philox stream keyed by
``(master_seed, 1, j, k)``; nothing else feeds it, so any worker pool can run
iterations in any order and results land in pre-allocated slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._parallel import ordered_map
from .distance import DEFAULT_TILE, DataMatrix, DistanceSpec, max_interpoint
from .distributions import RNG_ID, DistributionSpec, Normal, stream
from .errors import ParameterError
from .law import normalized_statistic
from .moments import (
    DEFAULT_SAMPLES,
    MomentProfile,
    analytic_profile,
    check_condition,
    profile_from_sampler,
)

REFERENCE_PAIRS = ((150, 100), (200, 200), (500, 250), (600, 400))
REFERENCE_ITERATIONS = 300
BAND = (1.5, 2.5)

# spawn-key prefixes keep the sampling and profile streams disjoint
_ITER_STREAM = 1
_PROFILE_STREAM = 2


def sample_matrix(dist: DistributionSpec, p: int, n: int, seed: int, *key: int) -> DataMatrix:
    """``p x n`` i.i.d. draws, row-major from the stream ``(seed, *key)``."""
    if int(p) != p or p < 1 or int(n) != n or n < 1:
        raise ParameterError(f"p and n must be positive integers, got p={p}, n={n}")
    return DataMatrix(dist.sample(stream(seed, *key), (int(p), int(n))))


@dataclass(frozen=True)
class SimulationConfig:
    dist: DistributionSpec = field(default_factory=Normal)
    pairs: tuple[tuple[int, int], ...] = REFERENCE_PAIRS
    iterations: int = REFERENCE_ITERATIONS
    master_seed: int = 0
    q: float = 2.0
    profile_source: str = "analytic"
    tile: int = DEFAULT_TILE

    def __post_init__(self):
        pairs = tuple((int(p), int(n)) for p, n in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise ParameterError("at least one (p, n) pair is required")
        for p, n in pairs:
            if p < 2 or n < 1:
                raise ParameterError(f"each pair needs p >= 2 and n >= 1, got ({p}, {n})")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ParameterError(f"iterations must be a positive integer, got {self.iterations}")
        if int(self.master_seed) != self.master_seed or self.master_seed < 0:
            raise ParameterError(f"master_seed must be a nonnegative integer, got {self.master_seed}")
        if not self.q >= 1:
            raise ParameterError(f"q must be >= 1, got {self.q}")
        if self.profile_source not in ("analytic", "monte_carlo"):
            raise ParameterError(f"profile_source must be 'analytic' or 'monte_carlo', got {self.profile_source!r}")

    def describe(self) -> dict:
        return {
            "distribution": self.dist.describe(),
            "pairs": [list(pn) for pn in self.pairs],
            "iterations": self.iterations,
            "master_seed": self.master_seed,
            "q": self.q,
            "profile_source": self.profile_source,
            "tile": self.tile,
        }


def resolve_profile(config: SimulationConfig) -> MomentProfile:
    """Closed form at q = 2 unless Monte Carlo is requested; sampled triples otherwise."""
    if config.q == 2 and config.profile_source == "analytic":
        return analytic_profile(config.dist)
    seed = int(np.random.SeedSequence(config.master_seed, spawn_key=(_PROFILE_STREAM,)).generate_state(1)[0])
    return profile_from_sampler(config.dist, config.q, DEFAULT_SAMPLES, seed)


def _distance_spec(config):
    if config.q == 2:
        return DistanceSpec(q=2.0, kernel="blocked_gram", tile=config.tile)
    return DistanceSpec(q=config.q)


def iteration_matrix(config: SimulationConfig, pair_index: int, iter_index: int) -> DataMatrix:
    p, n = config.pairs[pair_index]
    return sample_matrix(config.dist, p, n, config.master_seed, _ITER_STREAM, pair_index, iter_index)


def run_iteration(
    config: SimulationConfig,
    pair_index: int,
    iter_index: int,
    profile: MomentProfile | None = None,
) -> float:
    """z value of one simulated matrix."""
    if not 0 <= pair_index < len(config.pairs):
        raise ParameterError(f"pair_index {pair_index} out of range")
    if not 0 <= iter_index < config.iterations:
        raise ParameterError(f"iter_index {iter_index} out of range")
    profile = profile or resolve_profile(config)
    p, n = config.pairs[pair_index]
    res = max_interpoint(iteration_matrix(config, pair_index, iter_index), _distance_spec(config))
    return normalized_statistic(res.value_pow_q, n, p, profile).z


@dataclass(frozen=True)
class PairSummary:
    p: int
    n: int
    K: int
    mean: float
    sd: float
    min: float
    max: float
    frac_in_band: float


@dataclass(frozen=True)
class PairResult:
    pair_index: int
    p: int
    n: int
    z: np.ndarray
    summary: PairSummary


@dataclass(frozen=True)
class SimulationResult:
    config: SimulationConfig
    pairs: tuple[PairResult, ...]
    provenance: dict

    def __eq__(self, other):
        return (
            isinstance(other, SimulationResult)
            and self.config == other.config
            and self.provenance == other.provenance
            and len(self.pairs) == len(other.pairs)
            and all(a.summary == b.summary and np.array_equal(a.z, b.z) for a, b in zip(self.pairs, other.pairs))
        )

    __hash__ = None

    def summary_dict(self) -> dict:
        return {
            "pairs": [vars(r.summary) | {"pair_index": r.pair_index} for r in self.pairs],
            "provenance": self.provenance,
        }


def summarize(values: np.ndarray, p: int, n: int, band=BAND) -> PairSummary:
    """Summary in slot order with ``math.fsum``; sd uses ``K - 1`` and is 0 for K = 1."""
    vals = [float(v) for v in values]
    k = len(vals)
    mean = math.fsum(vals) / k
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (k - 1)) if k > 1 else 0.0
    inside = sum(1 for v in vals if band[0] <= v <= band[1])
    return PairSummary(p, n, k, mean, sd, min(vals), max(vals), inside / k)


def hypotheses_check(config: SimulationConfig, profile: MomentProfile) -> dict:
    """Whether the configured law satisfies the correlation and tail conditions."""
    cond = check_condition(profile)
    reasons = []
    if not cond.passes:
        reasons.append(f"Corr condition fails: rho = {cond.rho:.6g} >= 1/3")
    if config.dist.tail_alpha is None and config.dist.finite_moment_order < math.inf:
        reasons.append("only finitely many moments")
    return {
        "within_hypotheses": not reasons,
        "rho": cond.rho,
        "kurtosis_ratio": cond.kurtosis_ratio,
        "tail_alpha": config.dist.tail_alpha,
        "reasons": reasons,
    }


def run_simulation(config: SimulationConfig, threads: int | None = None) -> SimulationResult:
    """All ``K`` iterations for every (p, n) pair; ``threads`` only affects speed."""
    profile = resolve_profile(config)
    tasks = [(j, k) for j in range(len(config.pairs)) for k in range(config.iterations)]
    zs = ordered_map(lambda jk: run_iteration(config, jk[0], jk[1], profile), tasks, threads)
    slots = np.array(zs, dtype=np.float64).reshape(len(config.pairs), config.iterations)
    results = []
    for j, (p, n) in enumerate(config.pairs):
        z = slots[j].copy()
        z.setflags(write=False)
        results.append(PairResult(j, p, n, z, summarize(z, p, n)))
    provenance = {
        "version": __version__,
        "master_seed": config.master_seed,
        "distribution": config.dist.describe(),
        "q": config.q,
        "profile_source": profile.source,
        "profile": {k: v for k, v in profile.to_dict().items() if k != "stderr"},
        "rng_id": RNG_ID,
        "stream_key": "(master_seed, 1, pair_index, iter_index)",
        "kernel": _distance_spec(config).kernel,
        "log": "natural",
        "hypotheses": hypotheses_check(config, profile),
        "config": config.describe(),
    }
    return SimulationResult(config, tuple(results), provenance)


def reproduce_paper_figures(master_seed: int, out_dir, threads: int | None = None) -> dict:
    """Run the four-pair K = 300 standard normal protocol and write its artifacts.

    Writes one results CSV per (p, n), ``summary.json`` and two SVG figures,
    each holding two scatter panels with the reference line z = 2. Pairs are
    always labelled ``(p, n)`` = (rows, dimension).
    """
    from pathlib import Path

    from .io import atomic_write, scatter_svg_text, write_results_csv, write_summary_json

    out = Path(out_dir)
    config = SimulationConfig(master_seed=master_seed)
    result = run_simulation(config, threads)
    files = {"csv": [], "json": None, "svg": []}
    for r in result.pairs:
        files["csv"].append(write_results_csv(result, out / f"z_p{r.p}_n{r.n}.csv", pair_indices={r.pair_index}))
    files["json"] = write_summary_json(result, out / "summary.json")
    for fig, idx in enumerate(((0, 1), (2, 3)), start=1):
        panels = [(result.pairs[j].z, 2.0, f"(p, n) = ({result.pairs[j].p}, {result.pairs[j].n})") for j in idx]
        text = scatter_svg_text(panels, provenance=result.provenance)
        files["svg"].append(atomic_write(out / f"figure{fig}.svg", text))
    files["result"] = result
    return files
