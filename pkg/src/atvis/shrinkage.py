"""Soft thresholding, the derivative-space Landweber residual, FISTA momentum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffops import BoundaryCondition, grad, left_inverse
from .forward import FourierOperator


def soft_threshold(d, beta: float, mode: str = "componentwise"):
    """Complex soft thresholding of a gradient field.

    ``componentwise`` shrinks every entry of both planes independently:
    ``x - beta * x / |x|`` when ``|x| > beta`` and 0 otherwise.
    ``vector`` shrinks the joint per-pixel magnitude of ``(dx, dy)``.
    """
    if beta < 0:
        raise ValueError(f"threshold must be nonnegative, got {beta}")
    d = np.asarray(d)
    if mode == "componentwise":
        mag = np.abs(d)
    elif mode == "vector":
        if d.ndim < 3 or d.shape[-3] != 2:
            raise ValueError("vector shrinkage needs a (2, N, M) field")
        mag = np.sqrt((np.abs(d) ** 2).sum(axis=-3, keepdims=True))
    else:
        raise ValueError(f"unknown shrinkage mode {mode!r}")
    if beta == 0:
        return d.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > beta, 1.0 - beta / mag, 0.0)
    return d * scale


def landweber_residual(d, data, operator, bc=BoundaryCondition.PBC, damping: float = 1.0):
    """Gradient of the back-projected data residual for the image ``X(d)``.

    Returns ``damping * grad(A'(data - A X(d)))`` where ``A`` is the
    measurement operator: a :class:`~atvis.forward.FourierOperator`, a
    :class:`~atvis.forward.BlurOperator`, or a bare sampling mask.
    """
    if isinstance(operator, np.ndarray):
        operator = FourierOperator(operator)
    data = np.asarray(data)
    d = np.asarray(d)
    if d.shape[1:] != data.shape or tuple(operator.shape) != data.shape:
        raise ValueError(
            f"shape mismatch: field {d.shape[1:]}, data {data.shape}, operator {tuple(operator.shape)}"
        )
    residual = data - operator.forward(left_inverse(d, bc))
    eps = grad(operator.adjoint(residual), bc)
    if damping != 1.0:
        eps *= damping
    return eps


@dataclass
class FistaState:
    t: float = 1.0
    d_prev: np.ndarray | None = None


def fista_step(state: FistaState, d_new):
    """Advance the momentum sequence and return ``(new_state, relaxed_field)``.

    Uses ``t+ = (1 + sqrt(1 + 4 t^2)) / 2`` and
    ``d_relaxed = d_new + (t - 1) / t+ * (d_new - d_prev)``.
    """
    t_next = (1.0 + np.sqrt(1.0 + 4.0 * state.t**2)) / 2.0
    if state.d_prev is None:
        relaxed = d_new * (1.0 + (state.t - 1.0) / t_next)
    else:
        relaxed = d_new + ((state.t - 1.0) / t_next) * (d_new - state.d_prev)
    return FistaState(t=float(t_next), d_prev=d_new), relaxed
