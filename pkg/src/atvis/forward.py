"""Measurement operators and data simulation.

k-space arrays and sampling masks use the centred convention: the DC bin
sits at ``(N // 2, M // 2)``. All DFTs are orthonormal, so the undersampled
Fourier operator has unit norm and its adjoint is a right inverse on the
acquired set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft


def check_mask(mask) -> np.ndarray:
    """Validate a sampling mask and return it as a boolean array."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"sampling mask must be 2-D, got shape {mask.shape}")
    mask = mask.astype(bool, copy=False)
    if not mask.any():
        raise ValueError("sampling mask acquires no samples")
    return mask


def density(mask) -> float:
    """Fraction of acquired k-space samples."""
    mask = np.asarray(mask, dtype=bool)
    return float(mask.sum()) / mask.size


def _same_shape(a, b, what):
    if a.shape[-2:] != b.shape[-2:]:
        raise ValueError(f"{what}: shape mismatch {a.shape[-2:]} vs {b.shape[-2:]}")


def fourier_undersample(u, mask):
    """Centred orthonormal 2-D DFT of ``u`` with unacquired bins zeroed.

    Leading axes (e.g. coils) are transformed independently.
    """
    u = np.asarray(u)
    mask = check_mask(mask)
    _same_shape(u, mask, "fourier_undersample")
    k = sfft.fftshift(sfft.fft2(u, norm="ortho"), axes=(-2, -1))
    return k * mask


def fourier_adjoint(k, mask):
    """Adjoint of :func:`fourier_undersample`: masked centred inverse DFT."""
    k = np.asarray(k)
    mask = check_mask(mask)
    _same_shape(k, mask, "fourier_adjoint")
    return sfft.ifft2(sfft.ifftshift(k * mask, axes=(-2, -1)), norm="ortho")


@dataclass(frozen=True)
class BlurKernel:
    """Normalised point-spread function of odd size ``(2r+1, 2r+1)``."""

    taps: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 2 or taps.shape[0] != taps.shape[1] or taps.shape[0] % 2 == 0:
            raise ValueError(f"kernel taps must be square with odd size, got {taps.shape}")
        if (taps < 0).any():
            raise ValueError("kernel taps must be nonnegative")
        if abs(taps.sum() - 1.0) > 1e-12:
            raise ValueError(f"kernel taps must sum to 1, got {taps.sum()!r}")
        object.__setattr__(self, "taps", taps)

    @property
    def radius(self) -> int:
        return self.taps.shape[0] // 2


def make_gaussian_kernel(radius: int = 4, sigma_b: float = 2.0) -> BlurKernel:
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if sigma_b <= 0:
        raise ValueError("sigma_b must be positive")
    x = np.arange(-radius, radius + 1)
    g = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / (2 * sigma_b**2))
    return BlurKernel(g / g.sum(), kind="gaussian")


def make_motion_kernel(length: int = 9, angle: float = 30.0) -> BlurKernel:
    """Linear motion blur of ``length`` pixels at ``angle`` degrees.

    The angle is measured counter-clockwise from the column axis. The
    segment is sampled at unit spacing and splatted with bilinear weights.
    """
    if length < 2:
        raise ValueError("length must be >= 2")
    theta = np.deg2rad(angle)
    half = (length - 1) / 2
    r = int(np.ceil(half))
    taps = np.zeros((2 * r + 1, 2 * r + 1))
    for t in np.linspace(-half, half, length):
        row = r - t * np.sin(theta)
        col = r + t * np.cos(theta)
        r0, c0 = int(np.floor(row)), int(np.floor(col))
        fr, fc = row - r0, col - c0
        for dr, wr in ((0, 1 - fr), (1, fr)):
            for dc, wc in ((0, 1 - fc), (1, fc)):
                w = wr * wc
                if w > 1e-15:
                    taps[r0 + dr, c0 + dc] += w
    return BlurKernel(taps / taps.sum(), kind="motion")


def _kernel_spectrum(kernel: BlurKernel, shape):
    n, m = shape
    taps = kernel.taps
    if taps.shape[0] > n or taps.shape[1] > m:
        raise ValueError(f"kernel {taps.shape} larger than image {shape}")
    psf = np.zeros(shape)
    psf[: taps.shape[0], : taps.shape[1]] = taps
    psf = np.roll(psf, (-kernel.radius, -kernel.radius), axis=(0, 1))
    return sfft.fft2(psf)


def blur_apply(u, kernel: BlurKernel):
    """Circular convolution of ``u`` with the kernel taps."""
    u = np.asarray(u)
    out = sfft.ifft2(sfft.fft2(u) * _kernel_spectrum(kernel, u.shape[-2:]))
    return out if np.iscomplexobj(u) else out.real


def blur_adjoint(u, kernel: BlurKernel):
    """Circular correlation with the taps, the adjoint of :func:`blur_apply`."""
    u = np.asarray(u)
    out = sfft.ifft2(sfft.fft2(u) * np.conj(_kernel_spectrum(kernel, u.shape[-2:])))
    return out if np.iscomplexobj(u) else out.real


class FourierOperator:
    """Undersampled Fourier acquisition ``F_u`` for a fixed mask."""

    def __init__(self, mask):
        self.mask = check_mask(mask)
        self.shape = self.mask.shape

    def forward(self, u):
        return fourier_undersample(u, self.mask)

    def adjoint(self, k):
        return fourier_adjoint(k, self.mask)

    def image_mean(self, k):
        """Image mean implied by the DC bin of centred k-space ``k``."""
        n, m = self.shape
        if not self.mask[n // 2, m // 2]:
            raise ValueError("mask does not acquire the DC bin; image mean is unknown")
        return np.asarray(k)[..., n // 2, m // 2] / np.sqrt(n * m)


class BlurOperator:
    """Circular blur ``H`` with its adjoint."""

    def __init__(self, kernel: BlurKernel, shape):
        self.kernel = kernel
        self.shape = tuple(shape)
        self._spec = _kernel_spectrum(kernel, self.shape)

    def forward(self, u):
        return sfft.ifft2(sfft.fft2(u) * self._spec)

    def adjoint(self, v):
        return sfft.ifft2(sfft.fft2(v) * np.conj(self._spec))

    def image_mean(self, v):
        # normalised taps preserve the mean
        return np.asarray(v).mean(axis=(-2, -1))


def add_noise(x, sigma: float, seed: int):
    """Add white Gaussian noise of standard deviation ``sigma``.

    Complex inputs receive independent noise on real and imaginary parts;
    real inputs stay real.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    x = np.asarray(x)
    if sigma == 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    if np.iscomplexobj(x):
        return x + sigma * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))
    return x + sigma * rng.standard_normal(x.shape)


def synth_coils(n_coils: int, n: int, m: int, seed: int = 0, flat: bool = False):
    """Smooth synthetic receive-coil sensitivities, shape ``(n_coils, n, m)``.

    Each coil is a Gaussian bump centred on a ring around the field of view
    (at the centre for a single coil) with a slowly varying phase. Peak combined power is normalised to 1.
    """
    if n_coils < 1:
        raise ValueError("need at least one coil")
    if flat:
        return np.ones((n_coils, n, m), dtype=np.complex128) / np.sqrt(n_coils)
    rng = np.random.default_rng(seed)
    y = np.linspace(-1, 1, n)[:, None]
    x = np.linspace(-1, 1, m)[None, :]
    maps = np.empty((n_coils, n, m), dtype=np.complex128)
    for c in range(n_coils):
        ang = 2 * np.pi * c / n_coils + rng.uniform(-0.2, 0.2)
        # a lone coil sits in the middle so its profile covers the corners
        ring = 0.9 if n_coils > 1 else 0.0
        cy, cx = ring * np.sin(ang), ring * np.cos(ang)
        width = rng.uniform(0.9, 1.2)
        mag = np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2 * width**2))
        py, px, p0 = rng.uniform(-1.5, 1.5, size=3)
        maps[c] = mag * np.exp(1j * (py * y + px * x + p0))
    power = (np.abs(maps) ** 2).sum(axis=0)
    return maps / np.sqrt(power.max())
