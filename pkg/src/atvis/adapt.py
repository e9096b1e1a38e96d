"""Threshold initialisation and the discrepancy-driven threshold update."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .diffops import tv_norm

logger = logging.getLogger(__name__)

# location/scale regression coefficients of the TV universal threshold
A_MU0 = -0.395
B_MU0 = 0.552
A_GAMMA0 = -1.512
B_GAMMA0 = -0.247

MAD_SCALE = 1.4826

PHI_KINDS = ("identity", "log1p", "one_minus_exp")


def estimate_sigma(d_hat_first) -> float:
    """Noise scale from the median absolute deviation of gradient entries.

    Real and imaginary parts of every entry (all planes, all channels) are
    pooled into one real sample set ``s`` and
    ``sigma = 1.4826 / sqrt(2) * median(|s - median(s)|)``.
    """
    d = np.asarray(d_hat_first)
    if d.size == 0:
        raise ValueError("cannot estimate noise scale from an empty field")
    if np.iscomplexobj(d):
        s = np.concatenate([d.real.ravel(), d.imag.ravel()])
    else:
        s = d.ravel().astype(np.float64)
    mad = np.median(np.abs(s - np.median(s)))
    return float(MAD_SCALE / np.sqrt(2.0) * mad)


def initial_threshold(sigma_hat: float, n: int, m: int | None = None) -> float:
    """Universal TV threshold for an ``n x m`` image with noise scale ``sigma_hat``."""
    if m is None:
        m = n
    if n < 2 or m < 2:
        raise ValueError("image must be at least 2x2")
    if sigma_hat < 0:
        raise ValueError("sigma_hat must be nonnegative")
    # number of finite differences; equals 2N(N-1) for square images
    p_m = n * (m - 1) + m * (n - 1)
    p = 1.0 - 2.0 / np.sqrt(np.log(p_m))
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level {p:.4g} outside (0, 1) for a {n}x{m} image")
    loglog_n = np.log(np.log(n))
    mu = np.exp(A_MU0 + B_MU0 * loglog_n)
    gamma = np.exp(A_GAMMA0 + B_GAMMA0 * loglog_n)
    quantile = mu - gamma * np.log(-np.log(p))
    return float(sigma_hat * quantile)


def sparse_approx_error(d_hat, d):
    """Difference between the gradient field before and after thresholding."""
    d_hat = np.asarray(d_hat)
    d = np.asarray(d)
    if d_hat.shape != d.shape:
        raise ValueError(f"shape mismatch {d_hat.shape} vs {d.shape}")
    return d_hat - d


def discrepancy(eps_res, eps_n, mode: str = "anisotropic") -> float:
    """Absolute difference of the TV norms of the two error fields."""
    eps_res = np.asarray(eps_res)
    eps_n = np.asarray(eps_n)
    if eps_res.shape != eps_n.shape:
        raise ValueError(f"shape mismatch {eps_res.shape} vs {eps_n.shape}")
    return abs(tv_norm(eps_res, mode) - tv_norm(eps_n, mode))


def phi(d1: float, kind: str = "identity", c: float = 1.0) -> float:
    if d1 < 0:
        raise ValueError("discrepancy must be nonnegative")
    if c <= 0:
        raise ValueError("phi scale must be positive")
    x = c * d1
    if kind == "identity":
        return float(x)
    if kind == "log1p":
        return float(np.log1p(x))
    if kind == "one_minus_exp":
        return float(-np.expm1(-x))
    raise ValueError(f"unknown phi kind {kind!r}; expected one of {PHI_KINDS}")


def auto_phi_scale(beta0: float, n: int, m: int, tv_mode: str = "anisotropic") -> float:
    """Default discrepancy scale ``1 / (count * beta0)``.

    ``count`` is the number of terms in the TV sum (``2 N M`` anisotropic,
    ``N M`` isotropic), so ``c * d1`` becomes a per-entry discrepancy in
    units of the initial threshold and the update is invariant to the
    intensity scale of the data. With a zero initial threshold the scale
    falls back to 1.
    """
    count = 2 * n * m if tv_mode == "anisotropic" else n * m
    if beta0 <= 0:
        return 1.0
    return 1.0 / (count * beta0)


def expectation_abs(field) -> float:
    """Sample mean of the moduli of every entry."""
    field = np.asarray(field)
    if field.size == 0:
        raise ValueError("empty field")
    return float(np.abs(field).mean())


@dataclass
class AdaptState:
    beta: float
    phi_kind: str = "identity"
    phi_scale: float = 1.0
    sigma_hat: float = 0.0
    beta0: float | None = None
    history: list = field(default_factory=list)
    stalled: int = 0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("threshold must be nonnegative")
        if self.beta0 is None:
            self.beta0 = self.beta


def update_threshold(state: AdaptState, e_res: float, e_n: float, d1: float) -> AdaptState:
    """Apply ``beta <- E_res / (phi(d1) + E_n / beta)`` in place and return ``state``.

    A zero denominator (or zero current threshold) leaves ``beta`` unchanged
    and increments ``state.stalled``. Every call appends
    ``(d1, e_res, e_n, beta_new)`` to ``state.history``.
    """
    if min(e_res, e_n, d1) < 0:
        raise ValueError("expectations and discrepancy must be nonnegative")
    beta = state.beta
    f = phi(d1, state.phi_kind, state.phi_scale)
    denom = f + (e_n / beta if beta > 0 else np.inf)
    if beta > 0 and denom > 0 and np.isfinite(denom):
        state.beta = float(e_res / denom)
    else:
        state.stalled += 1
        logger.warning("threshold update skipped: degenerate denominator (beta=%g, phi=%g, E_n=%g)", beta, f, e_n)
    state.history.append((d1, e_res, e_n, state.beta))
    return state
