"""Back-projection and ADMM with an anisotropic total-variation prior.

``admm_tv`` solves  min_x  1/2 ||M x - e||^2 + tau * ||D x||_1  where ``D``
takes forward differences along the two spatial axes of the native scene
layout (spectral and angular axes are not regularized).  The splitting is
z = D x in scaled form; the x-update is a warm-started conjugate gradient
solve of (M^T M + rho D^T D) x = M^T e + rho D^T (z - u).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .core import MeasurementMatrix, apply_adjoint
from .errors import DimensionError, DivergenceError, InvalidInputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdmmConfig:
    tv_weight: float = None     # None: 0.01 * max|M^T e|
    rho: float = 1.0
    max_iters: int = 300
    abs_tol: float = 1e-5
    rel_tol: float = 1e-5
    cg_iters: int = 100
    cg_tol: float = 1e-10

    def __post_init__(self):
        if self.tv_weight is not None and not self.tv_weight >= 0:
            raise InvalidInputError("tv_weight must be >= 0")
        if not self.rho > 0:
            raise InvalidInputError("rho must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidInputError("max_iters must be a positive integer")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidInputError("tolerances must be positive")


@dataclass
class ReconResult:
    estimate: np.ndarray
    objective_trace: list = field(default_factory=list)
    residual_trace: list = field(default_factory=list)   # (primal, dual) per iteration
    iterations_used: int = 0
    converged: bool = False
    tv_weight: float = 0.0
    best_iteration: int = 0
    tolerances: tuple = (np.inf, np.inf)   # (primal, dual) thresholds at the last iteration


def backproject(matrix: MeasurementMatrix, snapshot) -> np.ndarray:
    """Transpose lifting ``M^T e`` in the scene's native layout."""
    return matrix.unvectorize(apply_adjoint(matrix, snapshot))


def tv_prox(volume, threshold):
    if threshold < 0:
        raise InvalidInputError("threshold must be non-negative")
    z = np.asarray(volume, dtype=np.float64)
    return np.sign(z) * np.maximum(np.abs(z) - threshold, 0.0)


def grad(x):
    return np.diff(x, axis=0), np.diff(x, axis=1)


def grad_adjoint(d0, d1):
    out = np.zeros((d0.shape[0] + 1,) + d0.shape[1:])
    out[:-1] -= d0
    out[1:] += d0
    out[:, :-1] -= d1
    out[:, 1:] += d1
    return out


def total_variation(x) -> float:
    d0, d1 = grad(x)
    return float(np.abs(d0).sum() + np.abs(d1).sum())


def objective(matrix, snapshot, x, tau) -> float:
    r = matrix.entries @ matrix.vectorize(x) - np.asarray(snapshot).ravel()
    return 0.5 * float(r @ r) + tau * total_variation(x)


def conjugate_gradient(op, rhs, x0, maxiter=100, tol=1e-10):
    """CG for a symmetric positive semi-definite ``op``; stops on ||r|| <= tol * ||rhs||."""
    x = x0.copy()
    r = rhs - op(x)
    p = r.copy()
    rs = float(np.vdot(r, r))
    target = tol * float(np.sqrt(np.vdot(rhs, rhs)))
    for _ in range(maxiter):
        if np.sqrt(rs) <= target:
            break
        ap = op(p)
        pap = float(np.vdot(p, ap))
        if pap <= 0:
            break
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.vdot(r, r))
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x


def _norm(*arrays):
    return float(np.sqrt(sum(float(np.vdot(a, a)) for a in arrays)))


def admm_tv(matrix: MeasurementMatrix, snapshot, cfg: AdmmConfig = None, scene_dims=None,
            x0=None) -> ReconResult:
    cfg = cfg or AdmmConfig()
    if scene_dims is not None and tuple(scene_dims) != matrix.scene_shape:
        raise DimensionError(f"scene_dims {tuple(scene_dims)} != matrix scene shape {matrix.scene_shape}")
    shape = matrix.scene_shape
    if len(shape) < 2:
        raise DimensionError("TV needs a scene with at least two spatial axes")
    e = np.asarray(snapshot, dtype=np.float64)
    if e.shape != matrix.sensor_shape:
        raise DimensionError(f"snapshot shape {e.shape} != sensor shape {matrix.sensor_shape}")

    a = matrix.entries
    if np.count_nonzero(a) < 0.25 * a.size:
        a = sp.csr_matrix(a)
    at = a.T
    rho = cfg.rho
    ate = matrix.unvectorize(at @ e.ravel())
    tau = 0.01 * float(np.abs(ate).max()) if cfg.tv_weight is None else float(cfg.tv_weight)

    def normal_op(v):
        return matrix.unvectorize(at @ (a @ matrix.vectorize(v))) + rho * grad_adjoint(*grad(v))

    def obj(v, dv):
        r = a @ matrix.vectorize(v) - e.ravel()
        return 0.5 * float(r @ r) + tau * float(np.abs(dv[0]).sum() + np.abs(dv[1]).sum())

    x = np.zeros(shape) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != shape:
        raise DimensionError(f"x0 shape {x.shape} != {shape}")
    z = grad(x)
    u = (np.zeros_like(z[0]), np.zeros_like(z[1]))
    n_pri = z[0].size + z[1].size
    n_dual = x.size
    result = ReconResult(x.copy(), tv_weight=tau)
    best = np.inf

    for it in range(1, cfg.max_iters + 1):
        rhs = ate + rho * grad_adjoint(z[0] - u[0], z[1] - u[1])
        x = conjugate_gradient(normal_op, rhs, x, cfg.cg_iters, cfg.cg_tol)
        dx = grad(x)
        z_old = z
        z = (tv_prox(dx[0] + u[0], tau / rho), tv_prox(dx[1] + u[1], tau / rho))
        u = (u[0] + dx[0] - z[0], u[1] + dx[1] - z[1])

        r_pri = _norm(dx[0] - z[0], dx[1] - z[1])
        r_dual = rho * _norm(grad_adjoint(z[0] - z_old[0], z[1] - z_old[1]))
        value = obj(x, dx)
        if not (np.isfinite(value) and np.isfinite(r_pri) and np.isfinite(r_dual)):
            raise DivergenceError(f"non-finite iterate at iteration {it}", iteration=it,
                                  last_good=result.estimate)
        result.objective_trace.append(value)
        result.residual_trace.append((r_pri, r_dual))
        result.iterations_used = it
        log.info("iter=%d objective=%.10e r_primal=%.4e r_dual=%.4e", it, value, r_pri, r_dual)
        if value < best:
            best = value
            result.estimate = x.copy()
            result.best_iteration = it

        eps_pri = np.sqrt(n_pri) * cfg.abs_tol + cfg.rel_tol * max(_norm(*dx), _norm(*z))
        eps_dual = np.sqrt(n_dual) * cfg.abs_tol + cfg.rel_tol * rho * _norm(grad_adjoint(*u))
        result.tolerances = (float(eps_pri), float(eps_dual))
        if r_pri <= eps_pri and r_dual <= eps_dual:
            result.converged = True
            break
    return result

