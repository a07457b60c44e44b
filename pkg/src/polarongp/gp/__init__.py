"""Gaussian-process regression with composite anisotropic kernels."""

from .kernels import (
    BASE_KERNELS,
    Kernel,
    Leaf,
    Matern52,
    Product,
    RationalQuadratic,
    SquaredExponential,
    Sum,
    eval_kernel,
    kernel_from_dict,
    parameter_count,
    squared_differences,
)
from .regression import (
    JITTER_LADDER,
    ConditioningError,
    TrainedGP,
    condition,
    fit,
    gp_from_dict,
    gp_to_dict,
    load_gp,
    log_marginal_likelihood,
    parameter_bounds,
    predict,
    save_gp,
)
