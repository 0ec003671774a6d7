"""Quality metrics for reconstructed cubes and light fields.

Arrays are ``(M, N, L)`` with bands last; 2-D inputs are a single band and
light fields ``(My, Mx, Uy, Ux)`` are scored with their views as bands.

``rmse`` and ``dd`` divide by the voxel count as written in the metric
definitions this package follows; ``rmse`` therefore equals the textbook
RMSE scaled by ``1 / sqrt(count)``.  ``rmse_conventional`` is the textbook one.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import DimensionError, InvalidInputError

EPS = 1e-12


def _pair(x, x_hat):
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise DimensionError(f"shape mismatch: {x.shape} vs {x_hat.shape}")
    if x.ndim == 2:
        x, x_hat = x[:, :, None], x_hat[:, :, None]
    elif x.ndim == 4:
        x = x.reshape(x.shape[0], x.shape[1], -1)
        x_hat = x_hat.reshape(x.shape)
    elif x.ndim != 3:
        raise DimensionError(f"expected 2-D, 3-D or 4-D arrays, got {x.ndim}-D")
    return x, x_hat


def rmse(x, x_hat) -> float:
    x, x_hat = _pair(x, x_hat)
    return float(np.linalg.norm((x - x_hat).ravel()) / x.size)


def rmse_conventional(x, x_hat) -> float:
    x, x_hat = _pair(x, x_hat)
    return float(np.linalg.norm((x - x_hat).ravel()) / math.sqrt(x.size))


def dd(x, x_hat) -> float:
    x, x_hat = _pair(x, x_hat)
    return float(np.abs(x - x_hat).sum() / x.size)


def _uiqi_band(a, b):
    mu_a, mu_b = a.mean(), b.mean()
    da, db = a - mu_a, b - mu_b
    var_a, var_b = np.mean(da * da), np.mean(db * db)
    cov = np.mean(da * db)
    sd_ab = math.sqrt(var_a * var_b)
    # correlation * luminance * contrast; the product is the closed-form index
    corr = (cov + EPS) / (sd_ab + EPS)
    lum = (2 * mu_a * mu_b + EPS) / (mu_a * mu_a + mu_b * mu_b + EPS)
    contrast = (2 * sd_ab + EPS) / (var_a + var_b + EPS)
    return corr * lum * contrast


def uiqi(x, x_hat) -> float:
    """Global (unwindowed) universal image quality index, averaged over bands."""
    x, x_hat = _pair(x, x_hat)
    return float(np.mean([_uiqi_band(x[:, :, i], x_hat[:, :, i]) for i in range(x.shape[2])]))


def sam(x, x_hat, return_skipped=False):
    """Mean spectral angle in degrees over pixels with non-zero spectra.

    The angle is evaluated as ``2 atan2(|u - v|, |u + v|)`` on unit vectors,
    which equals the arccos form but stays accurate for nearly parallel spectra.
    """
    x, x_hat = _pair(x, x_hat)
    a = x.reshape(-1, x.shape[2])
    b = x_hat.reshape(-1, x.shape[2])
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    ok = (na > 0) & (nb > 0)
    skipped = int((~ok).sum())
    if not ok.any():
        value = float("nan")
    else:
        u = a[ok] / na[ok, None]
        v = b[ok] / nb[ok, None]
        ang = 2.0 * np.arctan2(np.linalg.norm(u - v, axis=1), np.linalg.norm(u + v, axis=1))
        value = float(np.degrees(ang).mean())
    return (value, skipped) if return_skipped else value


def ergas(x, x_hat, divisor="count") -> float:
    """100 * sqrt(mean_i (RMSE_i / mu_i)^2) over bands.

    ``divisor="count"`` uses the per-band RMSE with the pixel-count divisor
    of :func:`rmse`; ``divisor="sqrt"`` uses the textbook per-band RMSE.
    """
    x, x_hat = _pair(x, x_hat)
    mu = x.mean(axis=(0, 1))
    bad = np.flatnonzero(np.abs(mu) < EPS)
    if bad.size:
        raise InvalidInputError(f"bands with near-zero mean: {bad.tolist()}")
    err = np.linalg.norm((x - x_hat).reshape(-1, x.shape[2]), axis=0)
    pixels = x.shape[0] * x.shape[1]
    if divisor == "count":
        band_rmse = err / pixels
    elif divisor == "sqrt":
        band_rmse = err / math.sqrt(pixels)
    else:
        raise InvalidInputError(f"unknown divisor {divisor!r}")
    return float(100.0 * math.sqrt(np.mean((band_rmse / mu) ** 2)))


def psnr(x, x_hat, peak=None) -> float:
    x, x_hat = _pair(x, x_hat)
    peak = float(x.max()) if peak is None else float(peak)
    mse = float(np.mean((x - x_hat) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak ** 2 / mse)


def ssim(x, x_hat, peak=None, window=8) -> float:
    """Single-scale SSIM with a uniform window (valid positions only), averaged over bands."""
    x, x_hat = _pair(x, x_hat)
    peak = float(x.max()) if peak is None else float(peak)
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    wy, wx = min(window, x.shape[0]), min(window, x.shape[1])
    values = []
    for band in range(x.shape[2]):
        a, b = x[:, :, band], x_hat[:, :, band]
        values.append(_ssim_map(a, b, wy, wx, c1, c2).mean())
    return float(np.mean(values))


def _ssim_map(a, b, wy, wx, c1, c2):
    def local_mean(img):
        full = uniform_filter(img, size=(wy, wx), mode="constant")
        oy, ox = wy // 2, wx // 2
        return full[oy:oy + a.shape[0] - wy + 1, ox:ox + a.shape[1] - wx + 1]

    mu_a, mu_b = local_mean(a), local_mean(b)
    var_a = local_mean(a * a) - mu_a * mu_a
    var_b = local_mean(b * b) - mu_b * mu_b
    cov = local_mean(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


@dataclass
class MetricReport:
    psnr: float
    ssim: float
    rmse: float
    rmse_conventional: float
    uiqi: float
    sam: float
    ergas: float
    dd: float

    def as_dict(self) -> dict:
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, float) and math.isinf(value):
                out[key] = "inf" if value > 0 else "-inf"
            elif isinstance(value, float) and math.isnan(value):
                out[key] = "nan"
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def evaluate(x, x_hat, peak=None) -> MetricReport:
    try:
        erg = ergas(x, x_hat)
    except InvalidInputError:
        erg = float("nan")
    return MetricReport(
        psnr=psnr(x, x_hat, peak),
        ssim=ssim(x, x_hat, peak),
        rmse=rmse(x, x_hat),
        rmse_conventional=rmse_conventional(x, x_hat),
        uiqi=uiqi(x, x_hat),
        sam=sam(x, x_hat),
        ergas=erg,
        dd=dd(x, x_hat),
    )
