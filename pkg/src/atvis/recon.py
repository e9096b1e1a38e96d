"""TVIS / ATVIS reconstruction drivers.

Both drivers iterate in derivative space: a Landweber residual step, soft
thresholding, recovery of the image through the left inverse, and FISTA
over-relaxation. TVIS keeps the threshold fixed; ATVIS adapts it after every
iteration from the consistency and sparse-approximation errors.

Multi-channel data are processed channel by channel with a shared threshold.
Error fields are combined across channels by a pixelwise root-sum-of-squares
before they drive the threshold update.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import adapt
from .diffops import BoundaryCondition, as_bc, left_inverse, tv_norm
from .forward import BlurKernel, BlurOperator, FourierOperator
from .metrics import TraceRecord, rlne, sos_combine
from .shrinkage import FistaState, fista_step, landweber_residual, soft_threshold

logger = logging.getLogger(__name__)

ALGOS = ("tvis", "atvis")
PROBLEMS = ("cs_single", "cs_multi", "restore")


class NumericalError(RuntimeError):
    """Raised when an iterate stops being finite."""


@dataclass
class ReconConfig:
    algo: str = "atvis"
    problem: str | None = None
    bc: BoundaryCondition = BoundaryCondition.PBC
    shrink_mode: str = "componentwise"
    tv_mode: str = "anisotropic"
    phi_kind: str = "identity"
    phi_scale: float | None = None
    tol: float = 1e-4
    max_iter: int = 200
    damping: float = 1.0
    seed: int = 0
    fixed_beta: float | None = None
    fista: bool = True
    threads: int | None = None

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}, got {self.algo!r}")
        if self.problem is not None and self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.damping <= 0:
            raise ValueError("damping must be positive")
        if self.phi_scale is not None and self.phi_scale <= 0:
            raise ValueError("phi_scale must be positive")
        if self.fixed_beta is not None and self.fixed_beta < 0:
            raise ValueError("fixed_beta must be nonnegative")
        self.bc = as_bc(self.bc)


@dataclass
class ReconReport:
    image: np.ndarray
    trace: list[TraceRecord]
    converged: bool
    iterations: int
    beta_initial: float
    beta_final: float
    sigma_hat: float = float("nan")
    channel_images: np.ndarray | None = None
    stalled_updates: int = 0
    phi_scale: float | None = None
    config: ReconConfig | None = field(default=None, repr=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.trace])


def _thread_count(cfg: ReconConfig, n_channels: int) -> int:
    n = cfg.threads
    if n is None:
        n = int(os.environ.get("ATVIS_THREADS", "0") or 0)
    if n <= 0:
        n = os.cpu_count() or 1
    return max(1, min(n, n_channels))


def _infer_problem(data, operator) -> str:
    if isinstance(operator, BlurOperator):
        return "restore"
    return "cs_multi" if data.ndim == 3 else "cs_single"


def _run(data, operator, cfg: ReconConfig, reference, adaptive: bool) -> ReconReport:
    data = np.asarray(data)
    if data.ndim not in (2, 3):
        raise ValueError(f"measurements must be 2-D or (channels, N, M), got {data.shape}")
    problem = cfg.problem or _infer_problem(data, operator)
    if problem == "cs_multi" and data.ndim == 2:
        data = data[None]
    if problem != "cs_multi" and data.ndim == 3:
        raise ValueError(f"problem {problem!r} expects a single 2-D measurement")
    if problem == "restore" and not isinstance(operator, BlurOperator):
        raise ValueError("restoration needs a blur operator")
    chans = data if data.ndim == 3 else data[None]
    n_ch, n, m = chans.shape
    if tuple(operator.shape) != (n, m):
        raise ValueError(f"operator shape {tuple(operator.shape)} does not match data {(n, m)}")
    if n < 2 or m < 2:
        raise ValueError("images must be at least 2x2")
    if reference is not None:
        reference = np.asarray(reference)
        if reference.shape != (n, m):
            raise ValueError(f"reference shape {reference.shape} does not match {(n, m)}")

    bc = cfg.bc
    means = [operator.image_mean(k) for k in chans]

    def combine(images):
        # restoration keeps the signed image; CS reports magnitudes (SoS)
        return images[0] if problem == "restore" else sos_combine(images)

    def residual_step(c):
        eps = landweber_residual(relaxed[c], chans[c], operator, bc, cfg.damping)
        return eps, relaxed[c] + eps

    real_data = not np.iscomplexobj(data)

    def shrink_step(c):
        d = soft_threshold(d_hat[c], beta, cfg.shrink_mode)
        x = left_inverse(d, bc)
        # a real problem keeps a real image; the imaginary part is round-off
        if real_data:
            x = x.real
        return d, d_hat[c] - d, x + means[c]

    n_threads = _thread_count(cfg, n_ch)
    pool = ThreadPoolExecutor(n_threads) if n_threads > 1 else None
    pmap = pool.map if pool is not None else map

    field_shape = (n_ch, 2, n, m)
    relaxed = np.zeros(field_shape, dtype=np.complex128)
    eps_n_comb = np.zeros((2, n, m))
    prev_image = combine(np.stack([np.full((n, m), mu, dtype=np.float64 if real_data else np.complex128) for mu in means]))
    fista = FistaState()
    beta = None
    state = None
    sigma_hat = float("nan")
    trace: list[TraceRecord] = []
    converged = False
    images = None
    start = time.perf_counter()

    try:
        for k in range(1, cfg.max_iter + 1):
            results = list(pmap(residual_step, range(n_ch)))
            eps_res = np.stack([r[0] for r in results])
            d_hat = np.stack([r[1] for r in results])

            if beta is None:
                # a real-valued problem has no imaginary noise to pool
                sigma_hat = adapt.estimate_sigma(d_hat if np.iscomplexobj(data) else d_hat.real)
                if cfg.fixed_beta is not None:
                    beta = float(cfg.fixed_beta)
                else:
                    beta = adapt.initial_threshold(sigma_hat, n, m)
                if adaptive:
                    scale = cfg.phi_scale
                    if scale is None:
                        scale = adapt.auto_phi_scale(beta, n, m, cfg.tv_mode)
                    state = adapt.AdaptState(beta, cfg.phi_kind, scale, sigma_hat)

            eps_res_comb = sos_combine(eps_res)
            l1_res = tv_norm(eps_res_comb, cfg.tv_mode)
            l1_n = tv_norm(eps_n_comb, cfg.tv_mode)
            d1 = abs(l1_res - l1_n)

            results = list(pmap(shrink_step, range(n_ch)))
            d_new = np.stack([r[0] for r in results])
            eps_n = np.stack([r[1] for r in results])
            images = np.stack([r[2] for r in results])
            if not np.isfinite(images).all():
                raise NumericalError(f"non-finite image at iteration {k} (beta={beta:g})")

            if cfg.fista:
                fista, relaxed = fista_step(fista, d_new)
            else:
                relaxed = d_new

            image = combine(images)
            err = rlne(image, reference) if reference is not None else float("nan")
            trace.append(
                TraceRecord(k, float(beta), err, l1_res, l1_n, d1, 1e3 * (time.perf_counter() - start))
            )

            num = np.linalg.norm(image - prev_image)
            den = np.linalg.norm(prev_image)
            change = num / den if den > 0 else (0.0 if num == 0 else np.inf)
            prev_image = image

            if adaptive:
                adapt.update_threshold(
                    state, adapt.expectation_abs(eps_res_comb), adapt.expectation_abs(eps_n_comb), d1
                )
                beta = state.beta
            eps_n_comb = sos_combine(eps_n)

            if change <= cfg.tol:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()

    if adaptive and len(trace) >= 5 and not any(
        trace[i + 1].beta < trace[i].beta for i in range(min(5, len(trace) - 1))
    ):
        logger.info("threshold did not decrease within the first 5 iterations; consider a larger phi_scale")

    final = combine(images)
    return ReconReport(
        image=images[0] if problem != "cs_multi" else final,
        trace=trace,
        converged=converged,
        iterations=len(trace),
        beta_initial=trace[0].beta,
        beta_final=trace[-1].beta,
        sigma_hat=sigma_hat,
        channel_images=images if problem == "cs_multi" else None,
        stalled_updates=state.stalled if state is not None else 0,
        phi_scale=state.phi_scale if state is not None else None,
        config=cfg,
    )


def _as_operator(operator, shape):
    if isinstance(operator, (FourierOperator, BlurOperator)):
        return operator
    if isinstance(operator, BlurKernel):
        return BlurOperator(operator, shape)
    return FourierOperator(operator)


def run_tvis(measurements, operator, config: ReconConfig | None = None, reference=None) -> ReconReport:
    """Constant-threshold TVIS with FISTA over-relaxation.

    ``operator`` is a sampling mask, a :class:`FourierOperator`, a
    :class:`BlurKernel` or a :class:`BlurOperator`. Without
    ``config.fixed_beta`` the threshold is the universal threshold computed
    from the first Landweber gradient, as in ATVIS.
    """
    cfg = replace(config or ReconConfig(), algo="tvis")
    data = np.asarray(measurements)
    return _run(data, _as_operator(operator, data.shape[-2:]), cfg, reference, adaptive=False)


def run_atvis(measurements, operator, config: ReconConfig | None = None, reference=None) -> ReconReport:
    """Adaptive-threshold TVIS.

    The threshold starts at the universal threshold (or ``config.fixed_beta``
    when given) and is updated after every iteration from the mean moduli of
    the consistency error and the previous sparse-approximation error.
    """
    cfg = replace(config or ReconConfig(), algo="atvis")
    data = np.asarray(measurements)
    return _run(data, _as_operator(operator, data.shape[-2:]), cfg, reference, adaptive=True)


def run_restore(blurred, kernel: BlurKernel, config: ReconConfig | None = None, reference=None) -> ReconReport:
    """Deblurring with whichever algorithm ``config.algo`` selects."""
    cfg = replace(config or ReconConfig(), problem="restore")
    blurred = np.asarray(blurred)
    op = BlurOperator(kernel, blurred.shape)
    return _run(blurred, op, cfg, reference, adaptive=cfg.algo == "atvis")


def reconstruct(measurements, operator, config: ReconConfig | None = None, reference=None) -> ReconReport:
    cfg = config or ReconConfig()
    runner = run_atvis if cfg.algo == "atvis" else run_tvis
    return runner(measurements, operator, cfg, reference)
