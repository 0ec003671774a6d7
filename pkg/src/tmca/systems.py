"""Uniform handle on the two imaging systems, keyed by ``"lf"`` or ``"hs"``.

``dims`` is the native scene shape: ``(My, Mx, Uy, Ux)`` for light fields and
``(M, N, L)`` for spectral cubes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lightfield as lfm
from . import spectral as hsm
from .core import ApertureSequence, ShutterSequence
from .errors import DimensionError, InvalidInputError

SYSTEMS = ("lf", "hs")


@dataclass(frozen=True)
class System:
    name: str
    dims: tuple
    step: int = 1
    sensor_response: tuple = None

    def __post_init__(self):
        if self.name not in SYSTEMS:
            raise InvalidInputError(f"unknown system {self.name!r}; expected one of {SYSTEMS}")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != (4 if self.name == "lf" else 3):
            raise DimensionError(f"{self.name} system needs {'4' if self.name == 'lf' else '3'} dims, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def config(self):
        if self.name == "lf":
            return lfm.LightFieldGeometry(self.dims[:2], self.dims[2:], self.step)
        return hsm.SpectralConfig(self.dims[2], self.step, self.sensor_response)

    @property
    def aperture_shape(self):
        if self.name == "lf":
            return self.config.aperture_shape
        return self.dims[:2]

    @property
    def sensor_shape(self):
        if self.name == "lf":
            return self.dims[:2]
        return self.config.sensor_shape(self.dims[:2])

    def random_codes(self, num_slots, rng, open_shutter=False):
        aperture = ApertureSequence.random(num_slots, self.aperture_shape, rng)
        if open_shutter:
            shutter = ShutterSequence.ones(num_slots, self.sensor_shape)
        else:
            shutter = ShutterSequence.random(num_slots, self.sensor_shape, rng)
        return aperture, shutter

    def simulate(self, scene, aperture, shutter):
        if self.name == "lf":
            return lfm.lf_simulate(scene, aperture, shutter, self.config)
        return hsm.hs_simulate(scene, aperture, shutter, self.config)

    def equivalent_aperture(self, aperture, shutter):
        if self.name == "lf":
            return lfm.lf_equivalent_aperture(aperture, shutter, self.config)
        return hsm.hs_equivalent_aperture(aperture, shutter, self.config)

    def equivalent_aperture_vjp(self, grad, aperture, shutter):
        if self.name == "lf":
            return lfm.lf_equivalent_aperture_vjp(grad, aperture, shutter, self.config)
        return hsm.hs_equivalent_aperture_vjp(grad, aperture, shutter, self.config)

    def matrix_from_equivalent(self, equivalent, **kw):
        if self.name == "lf":
            return lfm.lf_matrix_from_equivalent(equivalent, self.config, **kw)
        return hsm.hs_matrix_from_equivalent(equivalent, self.config, **kw)

    def equivalent_from_matrix_grad(self, grad_entries):
        """Gather a dense matrix gradient onto the entries that depend on codes."""
        g = np.asarray(grad_entries)
        if self.name == "lf":
            my, mx, uy, ux = self.dims
            rows = my * mx
            pix = np.arange(rows)
            out = np.empty((rows, uy * ux))
            for view in range(uy * ux):
                out[:, view] = g[pix, view * rows + pix]
            return out.reshape(self.dims)
        m, n, bands = self.dims
        cfg = self.config
        width = self.sensor_shape[1]
        ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
        out = np.empty(self.dims)
        for band in range(bands):
            r = ii * width + jj + band * cfg.dispersion_step
            c = band * m * n + ii * n + jj
            out[:, :, band] = cfg.kappa[band] * g[r, c]
        return out

    def assemble(self, aperture, shutter, **kw):
        if self.name == "lf":
            return lfm.lf_assemble_matrix(aperture, shutter, self.config, self.dims, **kw)
        return hsm.hs_assemble_matrix(aperture, shutter, self.config, self.dims, **kw)
