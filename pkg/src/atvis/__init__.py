"""Adaptive-threshold total-variation iterative shrinkage (ATVIS).

Image restoration and compressed-sensing MRI by iterative shrinkage of the
image gradient field, with a threshold that is either held constant (TVIS)
or adapted every iteration from the balance between the data-consistency
error and the sparse-approximation error (ATVIS).
"""

from .adapt import AdaptState, estimate_sigma, initial_threshold, update_threshold
from .diffops import BoundaryCondition, div, grad, integration_filter, left_inverse, tv_norm
from .forward import (
    BlurKernel,
    BlurOperator,
    FourierOperator,
    add_noise,
    blur_adjoint,
    blur_apply,
    fourier_adjoint,
    fourier_undersample,
    make_gaussian_kernel,
    make_motion_kernel,
    synth_coils,
)
from .masks import phase_encode_mask, radial_mask, variable_density_mask
from .metrics import TraceRecord, rlne, sos_combine
from .phantoms import geometric_phantom, shepp_logan
from .recon import NumericalError, ReconConfig, ReconReport, reconstruct, run_atvis, run_restore, run_tvis
from .shrinkage import FistaState, fista_step, landweber_residual, soft_threshold

__version__ = "0.1.0"

__all__ = [
    "AdaptState",
    "BlurKernel",
    "BlurOperator",
    "BoundaryCondition",
    "FistaState",
    "FourierOperator",
    "NumericalError",
    "ReconConfig",
    "ReconReport",
    "TraceRecord",
    "add_noise",
    "blur_adjoint",
    "blur_apply",
    "div",
    "estimate_sigma",
    "fista_step",
    "fourier_adjoint",
    "fourier_undersample",
    "geometric_phantom",
    "grad",
    "initial_threshold",
    "integration_filter",
    "landweber_residual",
    "left_inverse",
    "make_gaussian_kernel",
    "make_motion_kernel",
    "phase_encode_mask",
    "radial_mask",
    "reconstruct",
    "rlne",
    "run_atvis",
    "run_restore",
    "run_tvis",
    "shepp_logan",
    "soft_threshold",
    "sos_combine",
    "synth_coils",
    "tv_norm",
    "update_threshold",
    "variable_density_mask",
]
