"""certlab: randomized-smoothing certification and its dimensional limits.

Monte-Carlo certification with exact binomial confidence bounds, closed-form
upper bounds on the certifiable lp radius for four smoothing families, and
executable worst-case classifiers that demonstrate those bounds empirically.
"""

__version__ = "0.1.0"

from ._backend import backend_name
from .bounds import (
    BoundQuery,
    BoundResult,
    bound_sweep,
    evaluate_bound,
    gengauss_upper_bound,
    iid_upper_bound,
    l1_uniform_upper_bound,
    linf_uniform_upper_bound,
    ratio_gengauss_to_gaussian,
    ratio_iid_to_gaussian,
)
from .certify import (
    ABSTAIN,
    BaseClassifier,
    CertificateResult,
    CertifyConfig,
    ProbabilityPair,
    certify,
    estimate_p1_lower,
    gaussian_l2_radius,
    gaussian_lp_radius,
    p2_upper_from_p1,
    smoothed_predict,
)
from .distributions import (
    GeneralizedGaussian,
    RngStream,
    SmoothingDistribution,
    UniformL1,
    UniformLinf,
    even_moment,
    gengauss_normalizer,
    lemma1_constant,
    log_density,
    mgf_bound_check,
    parse_distribution,
    sample,
    scale_from_sigma,
    sigma_from_scale,
)
from .harness import (
    ConstantClassifier,
    LinearClassifier,
    PrototypeClassifier,
    ResolutionSpec,
    crossing_scan,
    make_blob_task,
    p1_lower_by_q,
    pool_resolution,
    run_bound_vs_certificate,
    run_dimension_sweep,
)
from .statkernel import (
    ConfidenceLevel,
    clopper_pearson_lower,
    log_gamma,
    reg_inc_beta,
    std_normal_cdf,
    std_normal_inv_cdf,
)
from .worstcase import (
    HalfSpaceConstruction,
    ShiftedBoxConstruction,
    ShiftedL1Construction,
    box_flip_threshold,
    box_flip_verify,
    box_overlap_prob,
    build_halfspace,
    flip_lp_norm,
    halfspace_classify,
    l1_ball_volume,
    l1_intersection_check,
    l1_overlap_prob_lower,
    verify_flip,
)
