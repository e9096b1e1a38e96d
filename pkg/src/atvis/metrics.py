"""Reconstruction quality metrics, coil combination and trace records."""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np


def rlne(u, u_ref) -> float:
    """Relative l2-norm error ``||u - u_ref|| / ||u_ref||``."""
    u = np.asarray(u)
    u_ref = np.asarray(u_ref)
    if u.shape != u_ref.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {u_ref.shape}")
    ref_norm = np.linalg.norm(u_ref)
    if ref_norm == 0:
        raise ValueError("reference image has zero norm")
    return float(np.linalg.norm(u - u_ref) / ref_norm)


def sos_combine(channels):
    """Root-sum-of-squares combination over the leading (channel) axis."""
    if isinstance(channels, (list, tuple)):
        if not channels:
            raise ValueError("no channels to combine")
        shapes = {np.shape(c) for c in channels}
        if len(shapes) != 1:
            raise ValueError(f"channel shapes differ: {sorted(shapes)}")
    channels = np.asarray(channels)
    if channels.ndim < 1 or channels.shape[0] == 0:
        raise ValueError("no channels to combine")
    power = np.zeros(channels.shape[1:])
    # fixed channel order keeps the reduction bitwise reproducible
    for c in channels:
        power += c.real**2 + c.imag**2 if np.iscomplexobj(c) else c**2
    return np.sqrt(power)


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    beta: float
    rlne: float
    l1_eps_res: float
    l1_eps_n: float
    d1: float
    elapsed_ms: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def as_tuple(self):
        return astuple(self)
