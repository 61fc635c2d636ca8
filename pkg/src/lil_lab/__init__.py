"""Numerical laboratory for limit constants and concentration bounds of
vector-valued random sums."""

from .bounds import (
    BoundParams,
    FnConstants,
    MomentData,
    VerifyReport,
    fn_constants,
    fuk_nagaev_bound,
    klein_rio_mgf_bound,
    maximal_tail_bound,
    mc_verify,
    split_tail_bound,
)
from .constants import (
    Bracket,
    ConstantsReport,
    SeriesProbe,
    SeriesVerdict,
    alpha0_compute,
    beta0_estimate,
    c0_compute,
    constants_report,
    lambda_compute,
    lil_ratio_check,
    parse_tsm,
    sandwich_bounds,
    series_classify,
    sigma_compute,
)
from .distributions import (
    Gaussian,
    PointMass,
    RademacherProduct,
    RadialPareto,
    ScalarEmbedded,
    parse_dist,
)
from .simulate import (
    PathConfig,
    PathResult,
    geometric_checkpoints,
    limsup_estimate,
    mean_norm_curve,
    run_path,
    truncated_path,
)
from .slowvary import (
    NormalizerSeq,
    PowerSeq,
    SlowVaryFn,
    check_normalizing_conditions,
    hq_classify,
    parse_cseq,
    parse_slow_vary,
    psi,
    psi_inv,
    psi_inv_moment,
)
from .spaces import (
    EmpiricalTSM,
    SpaceSpec,
    TruncatedCov,
    dual_ball_sup,
    norm,
    norms,
    trunc_cov_empirical,
    truncated_second_moment,
)

__version__ = "0.1.0"
