"""Maximum interpoint distance of high-dimensional random matrices.

Exact farthest-pair kernels, the law-of-the-logarithm normalization, moment
and correlation conditions, Chen-Stein and moderate-deviation diagnostics,
and a seed-deterministic Monte Carlo harness.
"""

__version__ = "0.1.0"

from .diagnostics import (  # noqa: E402
    ChenSteinReport,
    MdpEstimate,
    PairStatistic,
    chen_stein_bound,
    chen_stein_interpoint,
    mdp_estimate,
    mdp_ratio,
    pair_statistics,
    std_normal_cdf,
)
from .distance import (  # noqa: E402
    DataMatrix,
    DistanceSpec,
    MaxDistanceResult,
    blocked_gram_max_sq,
    max_interpoint,
    qnorm_pow_q_distance,
)
from .distributions import (  # noqa: E402
    CenteredExponential,
    Discrete,
    DistributionSpec,
    Normal,
    SparseTwoPoint,
    Uniform,
    parse_distribution,
)
from .law import GrowthRegime, LawStatistic, gaussian_z, normalized_statistic, regime_sequence  # noqa: E402
from .moments import (  # noqa: E402
    ConditionReport,
    MomentProfile,
    analytic_profile,
    check_condition,
    gaussian_profile,
    profile_from_data,
    profile_from_sampler,
)
from .montecarlo import (  # noqa: E402
    SimulationConfig,
    SimulationResult,
    reproduce_paper_figures,
    run_iteration,
    run_simulation,
    sample_matrix,
)
