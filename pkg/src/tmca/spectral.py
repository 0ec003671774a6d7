"""CASSI-style spectral imager with a time-multiplexed coded aperture.

Cubes are ``f[i, j, l]`` with ``M x N`` spatial samples and ``L`` bands.  The
prism shifts band ``l`` by ``l * dispersion_step`` columns, so the sensor is
``M x (N + (L - 1) * dispersion_step)`` and is what the shutter codes cover.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MeasurementMatrix, code_array, compose_exposure
from .errors import CapacityError, DimensionError, InvalidInputError
from .lightfield import DEFAULT_MAX_ENTRIES


@dataclass(frozen=True)
class SpectralConfig:
    bands: int
    dispersion_step: int = 1
    sensor_response: tuple = None

    def __post_init__(self):
        if int(self.bands) != self.bands or self.bands < 1:
            raise InvalidInputError("bands must be a positive integer")
        if int(self.dispersion_step) != self.dispersion_step or self.dispersion_step < 1:
            raise InvalidInputError("dispersion_step must be an integer >= 1")
        kappa = (1.0,) * self.bands if self.sensor_response is None else tuple(float(k) for k in self.sensor_response)
        if len(kappa) != self.bands:
            raise DimensionError(f"sensor_response has {len(kappa)} values for {self.bands} bands")
        if any(not np.isfinite(k) or k < 0 for k in kappa):
            raise InvalidInputError("sensor_response must be finite and non-negative")
        object.__setattr__(self, "sensor_response", kappa)

    @property
    def kappa(self) -> np.ndarray:
        return np.asarray(self.sensor_response)

    def sensor_shape(self, aperture_shape) -> tuple:
        m, n = aperture_shape
        return (m, n + (self.bands - 1) * self.dispersion_step)

    def columns(self, band, n):
        off = band * self.dispersion_step
        return slice(off, off + n)


def _check_codes(aperture, shutter, cfg):
    t = code_array(aperture)
    s = code_array(shutter)
    if t.shape[0] != s.shape[0]:
        raise DimensionError(f"aperture has {t.shape[0]} slots, shutter has {s.shape[0]}")
    if s.shape[1:] != cfg.sensor_shape(t.shape[1:]):
        raise DimensionError(f"shutter shape {s.shape[1:]} != sensor shape {cfg.sensor_shape(t.shape[1:])}")
    return t, s


def _check_cube(cube, aperture_shape, cfg):
    f = np.asarray(cube, dtype=np.float64)
    if f.shape != tuple(aperture_shape) + (cfg.bands,):
        raise DimensionError(f"cube shape {f.shape} != {tuple(aperture_shape) + (cfg.bands,)}")
    if not np.isfinite(f).all():
        raise InvalidInputError("cube must be finite")
    return f


def hs_slot_fields(cube, aperture, cfg: SpectralConfig) -> np.ndarray:
    """Coded, dispersed field on the sensor for every slot."""
    t = code_array(aperture)
    f = _check_cube(cube, t.shape[1:], cfg)
    kappa = cfg.kappa
    n = t.shape[2]
    g = np.zeros((t.shape[0],) + cfg.sensor_shape(t.shape[1:]))
    for band in range(cfg.bands):
        g[:, :, cfg.columns(band, n)] += kappa[band] * t * f[:, :, band]
    return g


def hs_simulate(cube, aperture, shutter, cfg: SpectralConfig) -> np.ndarray:
    _check_codes(aperture, shutter, cfg)
    return compose_exposure(hs_slot_fields(cube, aperture, cfg), shutter)


def hs_equivalent_aperture(aperture, shutter, cfg: SpectralConfig) -> np.ndarray:
    """Colour code ``T_hat[i, j, l] = sum_k S^k[i, j + l*step] T^k[i, j]``."""
    t, s = _check_codes(aperture, shutter, cfg)
    n = t.shape[2]
    out = np.empty(t.shape[1:] + (cfg.bands,))
    for band in range(cfg.bands):
        out[:, :, band] = np.einsum("kij,kij->ij", s[:, :, cfg.columns(band, n)], t)
    return out


def hs_contract(equivalent, cube, cfg: SpectralConfig) -> np.ndarray:
    """Snapshot via the equivalent code: each band is weighted, coded and shifted."""
    that = np.asarray(equivalent)
    f = np.asarray(cube, dtype=np.float64)
    m, n = that.shape[:2]
    e = np.zeros(cfg.sensor_shape((m, n)))
    for band in range(cfg.bands):
        e[:, cfg.columns(band, n)] += cfg.kappa[band] * that[:, :, band] * f[:, :, band]
    return e


def hs_equivalent_aperture_vjp(grad_equivalent, aperture, shutter, cfg):
    t, s = _check_codes(aperture, shutter, cfg)
    n = t.shape[2]
    dt = np.zeros_like(t)
    ds = np.zeros_like(s)
    for band in range(cfg.bands):
        cols = cfg.columns(band, n)
        gb = grad_equivalent[:, :, band]
        dt += s[:, :, cols] * gb
        ds[:, :, cols] += t * gb
    return dt, ds


def hs_matrix_from_equivalent(equivalent, cfg, max_entries=DEFAULT_MAX_ENTRIES):
    that = np.asarray(equivalent)
    m, n = that.shape[:2]
    sensor = cfg.sensor_shape((m, n))
    rows = sensor[0] * sensor[1]
    cols = m * n * cfg.bands
    if rows * cols > max_entries:
        raise CapacityError(f"{rows}x{cols} matrix exceeds the cap of {max_entries} entries")
    entries = np.zeros((rows, cols))
    ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    for band in range(cfg.bands):
        r = (ii * sensor[1] + jj + band * cfg.dispersion_step).ravel()
        # columns: band-major, then spatial (l, i, j)
        c = (band * m * n + ii * n + jj).ravel()
        entries[r, c] = cfg.kappa[band] * that[:, :, band].ravel()
    return MeasurementMatrix(
        entries,
        sensor_shape=sensor,
        scene_shape=(m, n, cfg.bands),
        scene_axes=(2, 0, 1),
        meta={"system": "hs", "dispersion_step": cfg.dispersion_step},
    )


def hs_assemble_matrix(aperture, shutter, cfg: SpectralConfig, cube_dims=None,
                       max_entries=DEFAULT_MAX_ENTRIES) -> MeasurementMatrix:
    t = code_array(aperture)
    if cube_dims is not None and tuple(cube_dims) != t.shape[1:] + (cfg.bands,):
        raise DimensionError(f"cube_dims {tuple(cube_dims)} inconsistent with codes and config")
    sensor = cfg.sensor_shape(t.shape[1:])
    if sensor[0] * sensor[1] * t.shape[1] * t.shape[2] * cfg.bands > max_entries:
        raise CapacityError(f"spectral matrix exceeds the cap of {max_entries} entries")
    matrix = hs_matrix_from_equivalent(hs_equivalent_aperture(aperture, shutter, cfg), cfg, max_entries)
    matrix.meta["num_slots"] = t.shape[0]
    return matrix
