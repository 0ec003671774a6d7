"""Eigenvalue spectra of measurement matrices and random-code studies."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import MeasurementMatrix
from .errors import CapacityError, SolverError
from .systems import System

log = logging.getLogger(__name__)

DEFAULT_EIGEN_CAP = 4000
NEAR_ZERO = 1e-12


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    spread_ratio: float
    decay_profile: np.ndarray
    coherence: float
    num_near_zero: int

    def summary(self) -> dict:
        return {
            "num_eigenvalues": int(self.eigenvalues.size),
            "lambda_max": float(self.eigenvalues[0]) if self.eigenvalues.size else 0.0,
            "spread_ratio": self.spread_ratio,
            "coherence": self.coherence,
            "num_near_zero": self.num_near_zero,
        }


def gram(entries: np.ndarray) -> np.ndarray:
    """Gram matrix over the smaller dimension of ``entries``."""
    rows, cols = entries.shape
    return entries @ entries.T if rows < cols else entries.T @ entries


def mutual_coherence(entries: np.ndarray, max_cols=DEFAULT_EIGEN_CAP) -> float:
    """Largest |cosine| between two distinct non-zero columns."""
    if entries.shape[1] > max_cols:
        raise CapacityError(f"coherence over {entries.shape[1]} columns exceeds cap {max_cols}")
    norms = np.linalg.norm(entries, axis=0)
    keep = norms > 0
    if keep.sum() < 2:
        return 0.0
    cols = entries[:, keep] / norms[keep]
    g = np.abs(cols.T @ cols)
    np.fill_diagonal(g, 0.0)
    return float(min(g.max(), 1.0))


def spectrum(matrix, eigen_cap=DEFAULT_EIGEN_CAP) -> SpectrumReport:
    entries = matrix.entries if isinstance(matrix, MeasurementMatrix) else np.asarray(matrix, dtype=np.float64)
    if entries.size == 0:
        raise SolverError("empty matrix")
    if min(entries.shape) > eigen_cap:
        raise CapacityError(f"Gram dimension {min(entries.shape)} exceeds eigen cap {eigen_cap}")
    try:
        eig = np.linalg.eigvalsh(gram(entries))[::-1]
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigendecomposition failed: {exc}") from exc
    if not np.isfinite(eig).all():
        raise SolverError("non-finite eigenvalues")
    eig = np.clip(eig, 0.0, None)
    eig = np.sort(eig)[::-1]
    lam_max = eig[0]
    near_zero = eig <= NEAR_ZERO * lam_max
    n_zero = int(near_zero.sum())
    if n_zero:
        log.debug("clipped %d eigenvalues below %.0e * lambda_max", n_zero, NEAR_ZERO)
    retained = eig[~near_zero]
    spread = float(retained[-1] / lam_max) if retained.size else 0.0
    total = eig.sum()
    decay = np.cumsum(eig) / total if total > 0 else np.zeros_like(eig)
    cap = 4 * eigen_cap
    mu = mutual_coherence(entries, max_cols=cap) if entries.shape[1] <= cap else float("nan")
    return SpectrumReport(eig, spread, decay, mu, n_zero)


def study_rng(base_seed, num_slots, seed):
    return np.random.default_rng([int(base_seed), int(num_slots), int(seed)])


def study_codes(system: System, num_slots, seed, base_seed=0, open_shutter_k1=False):
    """Bernoulli(0.5) codes used by :func:`conditioning_study` for one (K, seed)."""
    rng = study_rng(base_seed, num_slots, seed)
    return system.random_codes(num_slots, rng, open_shutter=open_shutter_k1 and num_slots == 1)


@dataclass
class StudyResult:
    system: str
    dims: tuple
    reports: dict = field(default_factory=dict)   # (K, seed) -> SpectrumReport

    def for_k(self, num_slots):
        return [r for (k, _), r in sorted(self.reports.items()) if k == num_slots]

    def median_decay(self, num_slots) -> np.ndarray:
        return np.median(np.stack([r.decay_profile for r in self.for_k(num_slots)]), axis=0)

    def median_spread(self, num_slots) -> float:
        return float(np.median([r.spread_ratio for r in self.for_k(num_slots)]))

    def median_near_zero(self, num_slots) -> float:
        return float(np.median([r.num_near_zero for r in self.for_k(num_slots)]))

    def summary_rows(self):
        ks = sorted({k for k, _ in self.reports})
        for k in ks:
            reports = self.for_k(k)
            decay = self.median_decay(k)
            quarter = max(1, decay.size // 4)
            yield {
                "system": self.system,
                "K": k,
                "num_seeds": len(reports),
                "median_spread_ratio": self.median_spread(k),
                "median_near_zero": self.median_near_zero(k),
                "median_coherence": float(np.median([r.coherence for r in reports])),
                "median_decay_q1": float(decay[quarter - 1]),
            }


def conditioning_study(system, dims=None, k_list=(1, 8), num_seeds=20, base_seed=0,
                       step=1, open_shutter_k1=True, eigen_cap=DEFAULT_EIGEN_CAP) -> StudyResult:
    """Spectra of measurement matrices built from random codes for each K.

    Code entries are Bernoulli(0.5).  With ``open_shutter_k1`` (the default)
    the K=1 shutter is left fully open, which makes K=1 a plain coded-aperture
    camera; pass ``False`` to draw that shutter at random as well.
    """
    if not isinstance(system, System):
        system = System(system, dims, step)
    result = StudyResult(system.name, system.dims)
    for k in k_list:
        for seed in range(num_seeds):
            aperture, shutter = study_codes(system, k, seed, base_seed, open_shutter_k1)
            result.reports[(int(k), seed)] = spectrum(system.assemble(aperture, shutter), eigen_cap)
    return result
