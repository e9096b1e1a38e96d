"""k-space undersampling patterns (centred convention, DC at ``(N//2, M//2)``)."""

from __future__ import annotations

import numpy as np

GOLDEN_RATIO = (1 + np.sqrt(5)) / 2
GOLDEN_ANGLE = 180.0 / GOLDEN_RATIO  # ~111.246 degrees
GOLDEN_FRACTION = GOLDEN_RATIO - 1  # 0.6180339887...

VD_POWER = 2.0


def _central_block(n: int, m: int, central_frac: float):
    side = np.sqrt(central_frac)
    rows = max(1, int(round(side * n)))
    cols = max(1, int(round(side * m)))
    r0 = n // 2 - rows // 2
    c0 = m // 2 - cols // 2
    return slice(r0, r0 + rows), slice(c0, c0 + cols)


def variable_density_mask(n: int, m: int, frac: float = 0.30, central_frac: float = 0.0155, seed: int = 0):
    """Random variable-density mask with a fully sampled square core.

    The core is the centred ``round(sqrt(central_frac) * N) x
    round(sqrt(central_frac) * M)`` block. The rest of the
    ``round(frac * N * M)`` budget is drawn without replacement with
    probability proportional to ``(1 + r / r_max) ** -2``, ``r`` being the
    distance from the DC bin.
    """
    if not 0 < central_frac < frac <= 1:
        raise ValueError(f"need 0 < central_frac < frac <= 1, got {central_frac}, {frac}")
    total = int(round(frac * n * m))
    mask = np.zeros((n, m), dtype=bool)
    if total >= n * m:
        mask[:] = True
        return mask
    rs, cs = _central_block(n, m, central_frac)
    mask[rs, cs] = True
    remaining = total - int(mask.sum())
    if remaining < 0:
        raise ValueError("central block exceeds the total sample budget")
    yy, xx = np.mgrid[:n, :m]
    r = np.hypot(yy - n // 2, xx - m // 2)
    weight = (1.0 + r / r.max()) ** -VD_POWER
    free = np.flatnonzero(~mask.ravel())
    p = weight.ravel()[free]
    rng = np.random.default_rng(seed)
    pick = rng.choice(free, size=remaining, replace=False, p=p / p.sum())
    mask.ravel()[pick] = True
    return mask


def spoke_angles(spokes: int, spacing: str = "golden"):
    """Spoke angles in degrees."""
    j = np.arange(spokes)
    if spacing == "golden":
        return (j * GOLDEN_ANGLE) % 180.0
    if spacing == "uniform":
        return j * 180.0 / spokes
    raise ValueError(f"unknown spoke spacing {spacing!r}")


def radial_mask(n: int, m: int, spokes: int = 80, spacing: str = "golden"):
    """Union of ``spokes`` diameters through the centre, rasterised to the grid.

    Each spoke carries ``max(n, m)`` unit-spaced samples mapped to their
    nearest grid point; angle 0 runs along the central row.
    """
    if spokes < 1:
        raise ValueError("spokes must be >= 1")
    length = max(n, m)
    t = np.arange(length) - length // 2
    mask = np.zeros((n, m), dtype=bool)
    for deg in spoke_angles(spokes, spacing):
        th = np.deg2rad(deg)
        rows = np.floor(n // 2 - t * (n / length) * np.sin(th) + 0.5).astype(int)
        cols = np.floor(m // 2 + t * (m / length) * np.cos(th) + 0.5).astype(int)
        ok = (rows >= 0) & (rows < n) & (cols >= 0) & (cols < m)
        mask[rows[ok], cols[ok]] = True
    return mask


def phase_encode_mask(n: int, m: int, lines: int = 120, central_lines: int = 32, seed: int = 0):
    """Cartesian mask of full readout rows.

    ``central_lines`` contiguous rows around the DC row are always taken; the
    remaining rows follow the golden-ratio sequence
    ``floor(frac(j * 0.618...) * R)`` over the ``R`` non-central rows,
    skipping repeats. ``seed`` offsets the start of the sequence.
    """
    if not 0 <= central_lines <= lines <= n:
        raise ValueError(f"need 0 <= central_lines <= lines <= N, got {central_lines}, {lines}, {n}")
    mask = np.zeros((n, m), dtype=bool)
    r0 = n // 2 - central_lines // 2
    central = np.arange(r0, r0 + central_lines)
    others = np.setdiff1d(np.arange(n), central)
    chosen = set()
    need = lines - central_lines
    j = int(seed)
    # the sequence is equidistributed, so every index is eventually hit
    while len(chosen) < need:
        j += 1
        chosen.add(int(np.floor((j * GOLDEN_FRACTION) % 1.0 * len(others))))
    mask[central, :] = True
    mask[others[sorted(chosen)], :] = True
    return mask
