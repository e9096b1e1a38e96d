"""Ground-truth test images."""

from __future__ import annotations

import numpy as np

# semi-axes a/b, centre x/y, angle (deg); intensities listed separately
_ELLIPSE_GEOMETRY = (
    (0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.0230, 0.0460, 0.06, -0.6050, 0.0),
)
_ORIGINAL_VALUES = (2.0, -0.98, -0.02, -0.02, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01)
_MODIFIED_VALUES = (1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1)


def shepp_logan(n: int = 256, modified: bool = False):
    """Shepp-Logan phantom on ``[-1, 1]^2`` scaled to ``[0, 1]``.

    The original intensities are used unless ``modified`` selects the
    high-contrast variant. Row 0 is the top of the image (``y = +1``).
    Returned as complex128 with zero imaginary part.
    """
    if n < 32:
        raise ValueError("phantom size must be >= 32")
    ax = np.linspace(-1.0, 1.0, n)
    x = ax[None, :]
    y = ax[::-1, None]
    img = np.zeros((n, n))
    values = _MODIFIED_VALUES if modified else _ORIGINAL_VALUES
    for value, (a, b, x0, y0, deg) in zip(values, _ELLIPSE_GEOMETRY):
        th = np.deg2rad(deg)
        xr = (x - x0) * np.cos(th) + (y - y0) * np.sin(th)
        yr = (y - y0) * np.cos(th) - (x - x0) * np.sin(th)
        img = img + value * ((xr / a) ** 2 + (yr / b) ** 2 <= 1.0)
    img = np.clip(img, 0.0, None)
    return (img / img.max()).astype(np.complex128)


def geometric_phantom(n: int = 256, seed: int = 0, n_shapes: int = 8):
    """Piecewise-constant phantom of random disks and rectangles.

    A soft-tissue-like ellipse of intensity 0.25 holds ``n_shapes`` inclusions
    with intensities in ``[0.4, 1]``; the background is zero.
    """
    if n < 32:
        raise ValueError("phantom size must be >= 32")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[:n, :n] / (n - 1) * 2.0 - 1.0
    img = np.zeros((n, n))
    img[(xx / 0.85) ** 2 + (yy / 0.75) ** 2 <= 1.0] = 0.25
    for i in range(n_shapes):
        # keep inclusions inside the body ellipse
        while True:
            cx, cy = rng.uniform(-0.55, 0.55, size=2)
            size = rng.uniform(0.06, 0.2)
            if (cx / 0.85) ** 2 + (cy / 0.75) ** 2 <= 0.45:
                break
        value = rng.uniform(0.4, 1.0)
        if i % 2 == 0:
            inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= size**2
        else:
            hw, hh = size, rng.uniform(0.5, 1.5) * size
            inside = (np.abs(xx - cx) <= hw) & (np.abs(yy - cy) <= hh)
        img[inside] = value
    return img.astype(np.complex128)
