"""Shared types and the generic slot-wise exposure model.

A snapshot is the sum over K sub-exposures of the shutter-gated field that
reaches the sensor during each slot.  Scenes are kept in their native array
layout; a :class:`MeasurementMatrix` knows how to flatten them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionError, InvalidInputError


@dataclass(frozen=True)
class TimingConfig:
    num_slots: int
    slot_duration: float = 1.0

    def __post_init__(self):
        if int(self.num_slots) != self.num_slots or self.num_slots < 1:
            raise InvalidInputError(f"num_slots must be a positive integer, got {self.num_slots}")
        if not self.slot_duration > 0:
            raise InvalidInputError("slot_duration must be positive")

    @property
    def exposure(self) -> float:
        return self.num_slots * self.slot_duration


class CodeSequence:
    """K binary code slots stored as a ``(K, rows, cols)`` uint8 array."""

    kind = "code"

    def __init__(self, codes):
        arr = np.asarray(codes)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[0] < 1:
            raise DimensionError(f"{self.kind} codes must have shape (K, rows, cols), got {arr.shape}")
        if arr.dtype != np.uint8:
            if not np.all((arr == 0) | (arr == 1)):
                raise InvalidInputError(f"{self.kind} codes must be binary")
            arr = arr.astype(np.uint8)
        elif arr.max(initial=0) > 1:
            raise InvalidInputError(f"{self.kind} codes must be binary")
        arr = arr.copy()
        arr.flags.writeable = False
        self._codes = arr

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    @property
    def num_slots(self) -> int:
        return self._codes.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self._codes.shape[1:]

    def __len__(self):
        return self.num_slots

    def __array__(self, dtype=None, copy=None):
        return self._codes if dtype is None else self._codes.astype(dtype)

    def __eq__(self, other):
        return type(self) is type(other) and np.array_equal(self._codes, other._codes)

    def __repr__(self):
        return f"{type(self).__name__}(K={self.num_slots}, shape={self.shape})"

    @classmethod
    def ones(cls, num_slots, shape):
        return cls(np.ones((num_slots, *shape), dtype=np.uint8))

    @classmethod
    def zeros(cls, num_slots, shape):
        return cls(np.zeros((num_slots, *shape), dtype=np.uint8))

    @classmethod
    def random(cls, num_slots, shape, rng, p=0.5):
        """i.i.d. Bernoulli(p) entries drawn from ``rng``."""
        return cls((rng.random((num_slots, *shape)) < p).astype(np.uint8))


class ApertureSequence(CodeSequence):
    """Time-varying coded aperture; 1 passes light, 0 blocks it."""

    kind = "aperture"


class ShutterSequence(CodeSequence):
    """Per-pixel shutter functions; 1 means the pixel integrates."""

    kind = "shutter"


def code_array(codes) -> np.ndarray:
    """Float view of a code sequence, or of relaxed codes with values in [0, 1]."""
    if isinstance(codes, CodeSequence):
        return codes.codes.astype(np.float64)
    arr = np.asarray(codes, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise DimensionError(f"codes must have shape (K, rows, cols), got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """Dense matrix mapping a vectorized scene to a vectorized snapshot.

    Row ``r`` is sensor pixel ``np.unravel_index(r, sensor_shape)``.  Columns
    follow the scene transposed by ``scene_axes`` and flattened in C order,
    so ``vectorize`` and ``unvectorize`` are the column index map.
    """

    entries: np.ndarray
    sensor_shape: tuple
    scene_shape: tuple
    scene_axes: tuple = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise DimensionError("measurement matrix must be 2-D")
        sensor_shape = tuple(int(s) for s in self.sensor_shape)
        scene_shape = tuple(int(s) for s in self.scene_shape)
        axes = tuple(range(len(scene_shape))) if self.scene_axes is None else tuple(self.scene_axes)
        if sorted(axes) != list(range(len(scene_shape))):
            raise DimensionError(f"scene_axes {axes} is not a permutation for shape {scene_shape}")
        if int(np.prod(sensor_shape)) != entries.shape[0]:
            raise DimensionError(f"sensor shape {sensor_shape} does not match {entries.shape[0]} rows")
        if int(np.prod(scene_shape)) != entries.shape[1]:
            raise DimensionError(f"scene shape {scene_shape} does not match {entries.shape[1]} columns")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "sensor_shape", sensor_shape)
        object.__setattr__(self, "scene_shape", scene_shape)
        object.__setattr__(self, "scene_axes", axes)

    @classmethod
    def plain(cls, entries, **meta: Any) -> "MeasurementMatrix":
        entries = np.asarray(entries, dtype=np.float64)
        return cls(entries, (entries.shape[0],), (entries.shape[1],), meta=meta)

    @property
    def shape(self):
        return self.entries.shape

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def vectorize(self, scene) -> np.ndarray:
        scene = np.asarray(scene, dtype=np.float64)
        if scene.shape != self.scene_shape:
            raise DimensionError(f"scene shape {scene.shape} != {self.scene_shape}")
        return np.ascontiguousarray(scene.transpose(self.scene_axes)).ravel()

    def unvectorize(self, vector) -> np.ndarray:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.cols,):
            raise DimensionError(f"scene vector of length {vector.size} != {self.cols}")
        permuted = tuple(self.scene_shape[a] for a in self.scene_axes)
        return np.ascontiguousarray(vector.reshape(permuted).transpose(np.argsort(self.scene_axes)))

    def column_index(self, voxel) -> int:
        """Column holding the native-layout voxel index ``voxel``."""
        permuted_idx = tuple(voxel[a] for a in self.scene_axes)
        permuted = tuple(self.scene_shape[a] for a in self.scene_axes)
        return int(np.ravel_multi_index(permuted_idx, permuted))

    def row_index(self, pixel) -> int:
        return int(np.ravel_multi_index(tuple(pixel), self.sensor_shape))


def compose_exposure(slot_fields, shutter) -> np.ndarray:
    """Sum the shutter-gated fields over slots: ``e = sum_k S^k * g^k``."""
    g = np.asarray(slot_fields, dtype=np.float64)
    s = code_array(shutter)
    if g.ndim != 3 or g.shape != s.shape:
        raise DimensionError(f"slot fields {g.shape} and shutter {s.shape} must both be (K, rows, cols)")
    return np.einsum("kij,kij->ij", s, g)


def apply_matrix(matrix: MeasurementMatrix, scene_vector) -> np.ndarray:
    x = np.asarray(scene_vector, dtype=np.float64)
    if x.shape != (matrix.cols,):
        raise DimensionError(f"scene vector of shape {x.shape} does not match {matrix.cols} columns")
    return (matrix.entries @ x).reshape(matrix.sensor_shape)


def apply_adjoint(matrix: MeasurementMatrix, snapshot) -> np.ndarray:
    e = np.asarray(snapshot, dtype=np.float64)
    if e.shape != matrix.sensor_shape:
        raise DimensionError(f"snapshot shape {e.shape} does not match sensor shape {matrix.sensor_shape}")
    return matrix.entries.T @ e.ravel()


def quantize_codes(logits, kind="aperture"):
    """Hard threshold at zero; a logit of exactly 0 maps to 0."""
    z = np.asarray(logits, dtype=np.float64)
    if np.isnan(z).any():
        raise InvalidInputError("NaN logit")
    codes = (z > 0).astype(np.uint8)
    if kind == "aperture":
        return ApertureSequence(codes)
    if kind == "shutter":
        return ShutterSequence(codes)
    if kind is None:
        return codes
    raise InvalidInputError(f"unknown code kind {kind!r}")
