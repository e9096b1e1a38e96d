"""Finite-difference operators, TV norms and the spectral left inverse.

Gradient fields are stored as arrays of shape ``(2, N, M)``: plane 0 holds
the differences along the first (row) axis, plane 1 along the second
(column) axis. Images are ``(N, M)`` arrays, real or complex.
"""

from __future__ import annotations

import enum
from functools import lru_cache

import numpy as np
import scipy.fft as sfft


class BoundaryCondition(str, enum.Enum):
    """Boundary handling for the difference operators.

    ``SBC`` replicates the first row/column (symmetric extension) and pairs
    with the cosine transform; ``PBC`` wraps around and pairs with the DFT.
    """

    SBC = "sbc"
    PBC = "pbc"


def as_bc(bc) -> BoundaryCondition:
    if isinstance(bc, BoundaryCondition):
        return bc
    try:
        return BoundaryCondition(str(bc).lower())
    except ValueError:
        raise ValueError(f"unknown boundary condition {bc!r}") from None


def _check_image(u):
    u = np.asarray(u)
    if u.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {u.shape}")
    if u.shape[0] < 2 or u.shape[1] < 2:
        raise ValueError(f"image must be at least 2x2 for differencing, got {u.shape}")
    return u


def _check_field(d):
    d = np.asarray(d)
    if d.ndim != 3 or d.shape[0] != 2:
        raise ValueError(f"gradient field must have shape (2, N, M), got {d.shape}")
    if d.shape[1] < 2 or d.shape[2] < 2:
        raise ValueError(f"gradient field planes must be at least 2x2, got {d.shape[1:]}")
    return d


def grad(u, bc=BoundaryCondition.PBC):
    """Backward-difference gradient ``u[n] - u[n-1]`` along both axes.

    With SBC the out-of-range neighbour is the boundary sample itself, so the
    first row of ``dx`` and first column of ``dy`` are zero. With PBC the
    neighbour wraps to the opposite edge.
    """
    u = _check_image(u)
    bc = as_bc(bc)
    d = np.empty((2,) + u.shape, dtype=np.result_type(u.dtype, np.float64))
    if bc is BoundaryCondition.PBC:
        d[0] = u - np.roll(u, 1, axis=0)
        d[1] = u - np.roll(u, 1, axis=1)
    else:
        d[0, 0, :] = 0
        d[0, 1:, :] = u[1:, :] - u[:-1, :]
        d[1, :, 0] = 0
        d[1, :, 1:] = u[:, 1:] - u[:, :-1]
    return d


def div(d, bc=BoundaryCondition.PBC):
    """Discrete divergence, the negative adjoint of :func:`grad`.

    Satisfies ``<grad(u), d> = -<u, div(d)>`` for the same boundary condition.
    """
    d = _check_field(d)
    bc = as_bc(bc)
    dx, dy = d[0], d[1]
    if bc is BoundaryCondition.PBC:
        return (np.roll(dx, -1, axis=0) - dx) + (np.roll(dy, -1, axis=1) - dy)
    out = np.zeros(dx.shape, dtype=np.result_type(d.dtype, np.float64))
    # adjoint of the SBC stencil: row 0 of dx never enters the gradient
    out[1:, :] -= dx[1:, :]
    out[:-1, :] += dx[1:, :]
    out[:, 1:] -= dy[:, 1:]
    out[:, :-1] += dy[:, 1:]
    return out


@lru_cache(maxsize=32)
def _filter_cached(n: int, m: int, bc: BoundaryCondition) -> np.ndarray:
    a = 1.0 if bc is BoundaryCondition.SBC else 2.0
    # column frequency k runs over M, row frequency l over N
    k = np.arange(m)[None, :]
    l = np.arange(n)[:, None]
    denom = 2 * np.cos(a * np.pi * k / m) + 2 * np.cos(a * np.pi * l / n) - 4
    denom[0, 0] = 1.0
    w = 1.0 / denom
    w[0, 0] = 0.0
    w.setflags(write=False)
    return w


def integration_filter(n: int, m: int, bc=BoundaryCondition.PBC) -> np.ndarray:
    """Spectral integration filter for an ``n x m`` grid.

    Entry ``[l, k]`` (row frequency ``l``, column frequency ``k``) equals
    ``1 / (2 cos(a pi k / m) + 2 cos(a pi l / n) - 4)`` with ``a = 1`` for SBC
    and ``a = 2`` for PBC. The singular DC entry is set to 0. The returned
    array is read-only and shared between calls.
    """
    if n < 2 or m < 2:
        raise ValueError(f"filter size must be at least 2x2, got {n}x{m}")
    return _filter_cached(int(n), int(m), as_bc(bc))


def _forward_transform(x, bc):
    if bc is BoundaryCondition.SBC:
        return sfft.dctn(x, type=2, norm="ortho")
    return sfft.fft2(x, norm="ortho")


def _inverse_transform(x, bc):
    if bc is BoundaryCondition.SBC:
        return sfft.idctn(x, type=2, norm="ortho")
    return sfft.ifft2(x, norm="ortho")


def left_inverse(d, bc=BoundaryCondition.PBC):
    """Map a gradient field back to the zero-mean image it best explains.

    Computes ``T^-1(T(div d) * W)`` with ``T`` the cosine transform (SBC) or
    the DFT (PBC) and ``W`` the :func:`integration_filter`. For any image
    ``u`` the result of ``left_inverse(grad(u))`` is ``u - mean(u)``.
    Output is complex.
    """
    d = _check_field(d)
    bc = as_bc(bc)
    w = integration_filter(d.shape[1], d.shape[2], bc)
    spec = _forward_transform(div(d, bc).astype(np.complex128, copy=False), bc)
    return _inverse_transform(spec * w, bc)


def tv_norm(d, mode: str = "anisotropic") -> float:
    """Total variation of a gradient field.

    ``isotropic`` sums the per-pixel Euclidean length of ``(dx, dy)``;
    ``anisotropic`` sums ``|dx| + |dy|``. Complex entries use their modulus.
    """
    d = np.asarray(d)
    if d.ndim != 3 or d.shape[0] != 2:
        raise ValueError(f"gradient field must have shape (2, N, M), got {d.shape}")
    mag = np.abs(d)
    if mode == "isotropic":
        return float(np.sqrt(mag[0] ** 2 + mag[1] ** 2).sum())
    if mode == "anisotropic":
        return float(mag.sum())
    raise ValueError(f"unknown TV mode {mode!r}")
