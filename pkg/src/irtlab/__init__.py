"""Imputation-based randomization tests for randomized experiments with
interference.
"""

__version__ = "0.1.0"

from .designs import (
    BernoulliDesign,
    CompleteDesign,
    Design,
    TwoStageDesign,
    sample_two_stage,
)
from .imputation import (
    BetaBinomialImputer,
    EmpiricalImputer,
    KernelImputer,
    NIGImputer,
    NormalKnownVarImputer,
    OracleImputer,
    fit_imputer,
    kernel_bandwidth,
)
from .irt import (
    ImputationRandomizationTest,
    IrtResult,
    exact_frt_pvalue,
    frt_pvalue_mc,
    irt_pvalue,
    irt_pvalue_nested,
)
from .network import (
    InterferenceNetwork,
    ThreeLevelExposure,
    TwoRoundExposure,
    build_network,
    cluster_network,
    exposure_three_level,
    exposure_two_round,
    spatial_network,
)
from .teststat import (
    FocalSets,
    PartialTheta,
    diff_in_means,
    focal_sets,
    observed_theta,
)

__all__ = [
    "BernoulliDesign",
    "BetaBinomialImputer",
    "CompleteDesign",
    "Design",
    "EmpiricalImputer",
    "FocalSets",
    "ImputationRandomizationTest",
    "InterferenceNetwork",
    "IrtResult",
    "KernelImputer",
    "NIGImputer",
    "NormalKnownVarImputer",
    "OracleImputer",
    "PartialTheta",
    "ThreeLevelExposure",
    "TwoRoundExposure",
    "TwoStageDesign",
    "build_network",
    "cluster_network",
    "diff_in_means",
    "exact_frt_pvalue",
    "exposure_three_level",
    "exposure_two_round",
    "fit_imputer",
    "focal_sets",
    "frt_pvalue_mc",
    "irt_pvalue",
    "irt_pvalue_nested",
    "kernel_bandwidth",
    "observed_theta",
    "sample_two_stage",
    "spatial_network",
]
