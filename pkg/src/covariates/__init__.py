# Covariate distributions and shift pairs
# 协变量分布与偏移对

from .distributions import (
    BallUniform,
    CovariateDistribution,
    CovariateKind,
    GaussianCovariate,
    SphereShifted,
    sample_covariate,
    second_moment,
    unit_directions,
)
from .shift import ShiftPair, ball_pair, density_ratio

__all__ = [
    "CovariateKind",
    "CovariateDistribution",
    "GaussianCovariate",
    "SphereShifted",
    "BallUniform",
    "ShiftPair",
    "sample_covariate",
    "second_moment",
    "density_ratio",
    "ball_pair",
    "unit_directions",
]
