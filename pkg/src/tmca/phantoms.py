"""Seeded synthetic scenes.

``blocks``
    Piecewise-constant: a background plus axis-aligned rectangles, every
    region carrying one of ``num_values`` spectral signatures.  Each band
    therefore holds at most ``num_values`` distinct values.
``gauss``
    Smooth blobs with per-band amplitudes over a small floor.
``spectra-ramp``
    Each band is a linear ramp across columns with its own offset and slope.

Three dims give a cube ``(M, N, L)``.  Four dims ``(My, Mx, Uy, Ux)`` give a
Lambertian plane light field: a single-band image of the chosen kind seen
from every view with a shift of ``disparity * v`` pixels.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, InvalidInputError

KINDS = ("blocks", "gauss", "spectra-ramp")


def _blocks(m, n, bands, rng, num_values=4, num_rects=6):
    signatures = rng.uniform(0.1, 1.0, size=(num_values, bands))
    labels = np.zeros((m, n), dtype=int)
    for _ in range(num_rects):
        h = rng.integers(max(1, m // 4), max(2, m // 2) + 1)
        w = rng.integers(max(1, n // 4), max(2, n // 2) + 1)
        i0 = rng.integers(0, m - h + 1)
        j0 = rng.integers(0, n - w + 1)
        labels[i0:i0 + h, j0:j0 + w] = rng.integers(0, num_values)
    return signatures[labels]


def _gauss(m, n, bands, rng, num_blobs=4):
    ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    out = np.full((m, n, bands), 0.05)
    for _ in range(num_blobs):
        ci, cj = rng.uniform(0, m), rng.uniform(0, n)
        sigma = rng.uniform(0.1, 0.3) * max(m, n)
        amp = rng.uniform(0.2, 1.0, size=bands)
        out += np.exp(-((ii - ci) ** 2 + (jj - cj) ** 2) / (2 * sigma ** 2))[:, :, None] * amp
    return out


def _ramp(m, n, bands, rng):
    offset = rng.uniform(0.1, 0.5, size=bands)
    slope = rng.uniform(-0.1, 0.5, size=bands)
    t = np.linspace(0.0, 1.0, n)
    band = offset[None, :] + np.clip(slope, -offset, None)[None, :] * t[:, None]
    return np.broadcast_to(band[None], (m, n, bands)).copy()


def gen_phantom(kind, dims, seed=0, num_values=4, disparity=1):
    dims = tuple(int(d) for d in dims)
    if kind not in KINDS:
        raise InvalidInputError(f"unknown phantom kind {kind!r}; expected one of {KINDS}")
    if len(dims) not in (3, 4) or min(dims) < 1:
        raise DimensionError(f"phantom dims must be (M, N, L) or (My, Mx, Uy, Ux), got {dims}")
    rng = np.random.default_rng(seed)
    if len(dims) == 3:
        return _make(kind, dims, rng, num_values)
    my, mx, uy, ux = dims
    if uy % 2 == 0 or ux % 2 == 0:
        raise DimensionError("angular sizes must be odd")
    ry, rx = (uy - 1) // 2, (ux - 1) // 2
    py, px = abs(disparity) * ry, abs(disparity) * rx
    base = _make(kind, (my + 2 * py, mx + 2 * px, 1), rng, num_values)[:, :, 0]
    lf = np.empty(dims)
    for iy in range(uy):
        for ix in range(ux):
            oy = py + disparity * (iy - ry)
            ox = px + disparity * (ix - rx)
            lf[:, :, iy, ix] = base[oy:oy + my, ox:ox + mx]
    return lf


def _make(kind, dims, rng, num_values):
    m, n, bands = dims
    if kind == "blocks":
        return _blocks(m, n, bands, rng, num_values)
    if kind == "gauss":
        return _gauss(m, n, bands, rng)
    return _ramp(m, n, bands, rng)
