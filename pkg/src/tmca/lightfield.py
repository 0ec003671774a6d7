"""Coded-aperture light-field camera with synchronized pixel shutters.

Light fields are arrays ``l[my, mx, iy, ix]``: two spatial sensor indices and
two angular indices.  Angular index ``i`` in ``0..U-1`` stands for the view
offset ``v = i - (U - 1) // 2``; view ``v`` sees the aperture shifted by
``shear_step * v`` pixels along each axis.  The aperture carries a margin of
``shear_step * (U - 1) // 2`` pixels on every side, so no lookup falls off it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MeasurementMatrix, code_array, compose_exposure
from .errors import CapacityError, DimensionError, InvalidInputError

DEFAULT_MAX_ENTRIES = 50_000_000


@dataclass(frozen=True)
class LightFieldGeometry:
    sensor_shape: tuple
    angular_shape: tuple = (3, 3)
    shear_step: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sensor_shape", tuple(int(s) for s in self.sensor_shape))
        object.__setattr__(self, "angular_shape", tuple(int(u) for u in self.angular_shape))
        if len(self.sensor_shape) != 2 or min(self.sensor_shape) < 1:
            raise DimensionError(f"bad sensor shape {self.sensor_shape}")
        if len(self.angular_shape) != 2 or any(u < 1 or u % 2 == 0 for u in self.angular_shape):
            raise DimensionError(f"angular sizes must be odd and positive, got {self.angular_shape}")
        if int(self.shear_step) != self.shear_step or self.shear_step < 0:
            raise InvalidInputError("shear_step must be a non-negative integer")

    @classmethod
    def for_light_field(cls, lf_shape, shear_step=1):
        return cls(tuple(lf_shape[:2]), tuple(lf_shape[2:]), shear_step)

    @property
    def aperture_shape(self) -> tuple:
        d = self.shear_step
        return tuple(m + d * (u - 1) for m, u in zip(self.sensor_shape, self.angular_shape))

    @property
    def lf_shape(self) -> tuple:
        return self.sensor_shape + self.angular_shape

    def window(self, iy, ix):
        """Aperture slice seen by the whole sensor through angular sample (iy, ix)."""
        d = self.shear_step
        my, mx = self.sensor_shape
        return slice(d * iy, d * iy + my), slice(d * ix, d * ix + mx)


def _check_codes(aperture, shutter, geom):
    t = code_array(aperture)
    s = code_array(shutter)
    if t.shape[0] != s.shape[0]:
        raise DimensionError(f"aperture has {t.shape[0]} slots, shutter has {s.shape[0]}")
    if s.shape[1:] != geom.sensor_shape:
        raise DimensionError(f"shutter shape {s.shape[1:]} != sensor shape {geom.sensor_shape}")
    if t.shape[1:] != geom.aperture_shape:
        raise DimensionError(f"aperture shape {t.shape[1:]} != required {geom.aperture_shape}")
    return t, s


def _check_lf(lf, geom):
    lf = np.asarray(lf, dtype=np.float64)
    if lf.shape != geom.lf_shape:
        raise DimensionError(f"light field shape {lf.shape} != {geom.lf_shape}")
    if not np.isfinite(lf).all():
        raise InvalidInputError("light field must be finite")
    return lf


def lf_slot_fields(lf, aperture, geom) -> np.ndarray:
    """Per-slot sensor fields ``g^k[m] = sum_v T^k[m + d v] l[m, v]``."""
    t = code_array(aperture)
    lf = _check_lf(lf, geom)
    uy, ux = geom.angular_shape
    g = np.zeros((t.shape[0],) + geom.sensor_shape)
    for iy in range(uy):
        for ix in range(ux):
            g += t[(slice(None),) + geom.window(iy, ix)] * lf[:, :, iy, ix]
    return g


def lf_simulate(lf, aperture, shutter, geom: LightFieldGeometry) -> np.ndarray:
    _check_codes(aperture, shutter, geom)
    return compose_exposure(lf_slot_fields(lf, aperture, geom), shutter)


def lf_equivalent_aperture(aperture, shutter, geom: LightFieldGeometry) -> np.ndarray:
    """Angle-dependent code ``T_hat[m, v] = sum_k S^k[m] T^k[m + d v]``."""
    t, s = _check_codes(aperture, shutter, geom)
    uy, ux = geom.angular_shape
    out = np.empty(geom.lf_shape)
    for iy in range(uy):
        for ix in range(ux):
            out[:, :, iy, ix] = np.einsum("kij,kij->ij", s, t[(slice(None),) + geom.window(iy, ix)])
    return out


def lf_contract(equivalent, lf) -> np.ndarray:
    """Snapshot from the equivalent aperture: ``e[m] = sum_v T_hat[m, v] l[m, v]``."""
    return np.einsum("abij,abij->ab", np.asarray(equivalent), np.asarray(lf, dtype=np.float64))


def lf_equivalent_aperture_vjp(grad_equivalent, aperture, shutter, geom):
    """Pull a gradient on ``T_hat`` back onto the aperture and shutter codes."""
    t, s = _check_codes(aperture, shutter, geom)
    uy, ux = geom.angular_shape
    dt = np.zeros_like(t)
    ds = np.zeros_like(s)
    for iy in range(uy):
        for ix in range(ux):
            w = geom.window(iy, ix)
            gv = grad_equivalent[:, :, iy, ix]
            dt[(slice(None),) + w] += s * gv
            ds += t[(slice(None),) + w] * gv
    return dt, ds


def lf_column_order(geom):
    # columns: angular-major, then spatial (iy, ix, my, mx)
    return (2, 3, 0, 1)


def lf_matrix_from_equivalent(equivalent, geom, max_entries=DEFAULT_MAX_ENTRIES):
    my, mx = geom.sensor_shape
    uy, ux = geom.angular_shape
    rows = my * mx
    cols = rows * uy * ux
    if rows * cols > max_entries:
        raise CapacityError(f"{rows}x{cols} matrix exceeds the cap of {max_entries} entries")
    entries = np.zeros((rows, cols))
    pix = np.arange(rows)
    flat = np.asarray(equivalent).reshape(rows, uy * ux)
    for view in range(uy * ux):
        entries[pix, view * rows + pix] = flat[:, view]
    return MeasurementMatrix(
        entries,
        sensor_shape=geom.sensor_shape,
        scene_shape=geom.lf_shape,
        scene_axes=lf_column_order(geom),
        meta={"system": "lf", "shear_step": geom.shear_step},
    )


def lf_assemble_matrix(aperture, shutter, geom: LightFieldGeometry, lf_dims=None,
                       max_entries=DEFAULT_MAX_ENTRIES) -> MeasurementMatrix:
    if lf_dims is not None and tuple(lf_dims) != geom.lf_shape:
        raise DimensionError(f"lf_dims {tuple(lf_dims)} inconsistent with geometry {geom.lf_shape}")
    rows = int(np.prod(geom.sensor_shape))
    if rows * rows * int(np.prod(geom.angular_shape)) > max_entries:
        raise CapacityError(f"light-field matrix exceeds the cap of {max_entries} entries")
    matrix = lf_matrix_from_equivalent(lf_equivalent_aperture(aperture, shutter, geom), geom, max_entries)
    matrix.meta["num_slots"] = code_array(aperture).shape[0]
    return matrix
