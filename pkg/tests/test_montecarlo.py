import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interpoint.distance import DistanceSpec, max_interpoint
from interpoint.distributions import CenteredExponential, Normal, SparseTwoPoint, Uniform, stream
from interpoint.errors import ParameterError
from interpoint.law import normalized_statistic
from interpoint.moments import analytic_profile
from interpoint.montecarlo import (
    SimulationConfig,
    iteration_matrix,
    resolve_profile,
    run_iteration,
    run_simulation,
    sample_matrix,
    summarize,
)

SMALL = SimulationConfig(pairs=((12, 5), (20, 9)), iterations=6, master_seed=17)


# ---- sampling


def test_sparse_nonzero_fraction():
    x = sample_matrix(SparseTwoPoint(1.0, 0.1), 1000, 1000, 3).values
    frac = np.count_nonzero(x) / x.size
    assert abs(frac - 0.1) < 3 * math.sqrt(0.1 * 0.9 / x.size)
    assert set(np.unique(x)) == {-1.0, 0.0, 1.0}


def test_uniform_second_moment():
    x = sample_matrix(Uniform(-1, 1), 1000, 1000, 4).values
    # Var(X^2) = 1/5 - 1/9 for Uniform(-1, 1)
    assert abs((x**2).mean() - 1 / 3) < 3 * math.sqrt(1 / 5 - 1 / 9) / 1000


def test_sampling_deterministic():
    a = sample_matrix(CenteredExponential(2.0), 7, 3, 11, 5)
    assert a == sample_matrix(CenteredExponential(2.0), 7, 3, 11, 5)
    assert a != sample_matrix(CenteredExponential(2.0), 7, 3, 11, 6)


def test_stream_position_accounting():
    p, n, seed = 9, 4, 23
    dist = Normal()
    bg = stream(seed, 1, 0, 2)
    x = dist.sample(bg, (p, n))
    raw = stream(seed, 1, 0, 2).random_raw(p * n + 1)
    # exactly one 64-bit word per variate, consumed row-major
    assert bg.random_raw() == raw[-1]
    u = ((raw[:-1] >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    assert np.array_equal(x, dist.transform(u).reshape(p, n))
    assert np.array_equal(iteration_matrix(SimulationConfig(pairs=((p, n),), iterations=3, master_seed=seed), 0, 2).values, x)


def test_iteration_streams_disjoint():
    words = [set(stream(5, 1, j, k).random_raw(4000).tolist()) for j in range(2) for k in range(3)]
    for a in range(len(words)):
        for b in range(a + 1, len(words)):
            assert not words[a] & words[b]


def test_degenerate_sparse_rejected():
    with pytest.raises(ParameterError):
        SparseTwoPoint(0.0, 1.0)
    with pytest.raises(ParameterError):
        sample_matrix(Normal(), 0, 3, 1)


def test_config_validation():
    with pytest.raises(ParameterError):
        SimulationConfig(iterations=0)
    with pytest.raises(ParameterError):
        SimulationConfig(pairs=((1, 5),))
    with pytest.raises(ParameterError):
        SimulationConfig(profile_source="guess")


# ---- iterations and simulations


def test_run_iteration_matches_naive_recompute():
    cfg = SimulationConfig(pairs=((150, 100),), iterations=3, master_seed=2)
    prof = analytic_profile(Normal())
    for k in range(3):
        x = iteration_matrix(cfg, 0, k)
        naive = max_interpoint(x, DistanceSpec(kernel="naive")).value_pow_q
        z = run_iteration(cfg, 0, k)
        assert z == pytest.approx(normalized_statistic(naive, 100, 150, prof).z, rel=1e-12)
        assert 1 <= z <= 3


def test_run_iteration_index_errors():
    with pytest.raises(ParameterError):
        run_iteration(SMALL, 2, 0)
    with pytest.raises(ParameterError):
        run_iteration(SMALL, 0, 6)


def test_other_q_uses_sampled_profile():
    cfg = SimulationConfig(pairs=((10, 4),), iterations=2, master_seed=1, q=1.0)
    prof = resolve_profile(cfg)
    assert prof.source == "monte_carlo" and prof.q == 1.0
    x = iteration_matrix(cfg, 0, 1)
    m = max_interpoint(x, DistanceSpec(q=1.0)).value_pow_q
    assert run_iteration(cfg, 0, 1, prof) == normalized_statistic(m, 4, 10, prof).z


def test_single_iteration():
    cfg = SimulationConfig(pairs=((30, 10),), iterations=1, master_seed=8)
    res = run_simulation(cfg)
    assert res.pairs[0].z.tolist() == [run_iteration(cfg, 0, 0)]
    assert res.pairs[0].summary.sd == 0


def test_simulation_deterministic_and_complete():
    a, b = run_simulation(SMALL), run_simulation(SMALL)
    assert a == b
    for r in a.pairs:
        assert len(r.z) == SMALL.iterations and np.isfinite(r.z).all()
    assert a.provenance["master_seed"] == 17
    assert a.provenance["profile"]["rho"] == 0.25
    assert a != run_simulation(SimulationConfig(pairs=SMALL.pairs, iterations=6, master_seed=18))


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.tuples(st.integers(2, 12), st.integers(1, 6)), min_size=1, max_size=3),
    st.integers(1, 5),
    st.integers(0, 2**32),
    st.integers(2, 4),
    st.sampled_from([Normal(), Uniform(-1, 1), CenteredExponential(1.5)]),
)
def test_thread_count_independence(pairs, k, seed, threads, dist):
    cfg = SimulationConfig(dist=dist, pairs=tuple(pairs), iterations=k, master_seed=seed)
    assert run_simulation(cfg, threads=1) == run_simulation(cfg, threads=threads)


def test_summary_fields():
    s = summarize(np.array([1.0, 2.0, 3.0, 2.4]), 5, 2)
    assert (s.K, s.min, s.max) == (4, 1.0, 3.0)
    assert s.mean == 2.1
    assert s.sd == pytest.approx(np.std([1.0, 2.0, 3.0, 2.4], ddof=1), rel=1e-15)
    assert s.frac_in_band == 0.5


def test_outside_hypotheses_flagged():
    cfg = SimulationConfig(dist=SparseTwoPoint(1.0, 0.05), pairs=((20, 10),), iterations=3, master_seed=1)
    res = run_simulation(cfg)
    hyp = res.provenance["hypotheses"]
    assert not hyp["within_hypotheses"]
    assert hyp["kurtosis_ratio"] == pytest.approx(20, rel=1e-12)
    assert np.isfinite(res.pairs[0].z).all()
    assert run_simulation(SMALL).provenance["hypotheses"]["within_hypotheses"]


@pytest.mark.slow
def test_law_convergence_trend(trend_means):
    # probabilistic: |mean z - 2| should shrink from (150, 100) to (600, 400) in at least 8 of 10 seeds
    improved = [abs(big - 2) <= abs(small - 2) for small, big in trend_means.values()]
    assert sum(improved) >= 8, trend_means
