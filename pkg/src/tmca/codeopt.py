"""Gradient-based design of binary aperture and shutter codes.

Codes are parameterized by logits.  The hardware-facing codes are the hard
threshold of the logits; gradients flow through ``sigmoid(beta * logit)``.
In ``mode="mismatch"`` the objective is evaluated on the thresholded codes
and only the backward pass uses the sigmoid; in ``mode="relaxed"`` both
passes use the sigmoid.

Surrogates, both functions of the assembled matrix ``M``:

``gram_identity``
    ``||G / mean(eig(G)) - I||_F^2`` with ``G`` the Gram matrix over the
    smaller dimension of ``M``.  It is zero exactly when every eigenvalue of
    ``G`` is equal.  The Gram of column-normalized ``M`` is useless here: every
    column of both systems' matrices has a single non-zero entry, so that
    Gram does not depend on the code values at all.
``coherence_softmax``
    ``(1/gamma) log sum_{i<j} exp(gamma |c_ij|)`` over cosines ``c_ij`` between
    columns, a smooth upper bound on the mutual coherence.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import expit, logsumexp

from .conditioning import gram
from .core import ApertureSequence, ShutterSequence, quantize_codes
from .errors import DivergenceError, InvalidInputError
from .systems import System

NORM_EPS = 1e-12
KINDS = ("gram_identity", "coherence_softmax")


@dataclass(frozen=True)
class CodeParams:
    aperture_logits: np.ndarray
    shutter_logits: np.ndarray
    beta: float = 4.0

    def __post_init__(self):
        a = np.array(self.aperture_logits, dtype=np.float64)
        s = np.array(self.shutter_logits, dtype=np.float64)
        if a.ndim != 3 or s.ndim != 3 or a.shape[0] != s.shape[0]:
            raise InvalidInputError(f"logits must be (K, rows, cols) with equal K, got {a.shape} and {s.shape}")
        if not (np.isfinite(a).all() and np.isfinite(s).all()):
            raise InvalidInputError("logits must be finite")
        if not self.beta > 0:
            raise InvalidInputError("beta must be positive")
        object.__setattr__(self, "aperture_logits", a)
        object.__setattr__(self, "shutter_logits", s)

    @property
    def num_slots(self):
        return self.aperture_logits.shape[0]

    def relaxed_codes(self):
        return expit(self.beta * self.aperture_logits), expit(self.beta * self.shutter_logits)

    def quantized(self):
        return (quantize_codes(self.aperture_logits, "aperture"),
                quantize_codes(self.shutter_logits, "shutter"))


@dataclass(frozen=True)
class SurrogateObjective:
    kind: str = "gram_identity"
    binarization_weight: float = 0.0
    softness: float = 100.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown objective {self.kind!r}; expected one of {KINDS}")
        if self.binarization_weight < 0 or not self.softness > 0:
            raise InvalidInputError("binarization_weight must be >= 0 and softness > 0")


def init_params(system: System, num_slots, seed=0, beta=4.0, scale=0.1) -> CodeParams:
    """Logits drawn uniformly from ``(-scale, scale)``."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-scale, scale, size=(num_slots,) + tuple(system.aperture_shape))
    s = rng.uniform(-scale, scale, size=(num_slots,) + tuple(system.sensor_shape))
    return CodeParams(a, s, beta)


def gram_identity(entries):
    """Value and gradient of ``||n G / tr(G) - I||_F^2`` with respect to ``entries``.

    Expanded, the value is ``n^2 ||G||_F^2 / tr(G)^2 - n``.
    """
    m = np.asarray(entries, dtype=np.float64)
    g = gram(m)
    n = g.shape[0]
    tr = float(np.trace(g))
    if tr <= 0:
        return float(n), np.zeros_like(m)
    fro2 = float(np.vdot(g, g))
    value = n * n * fro2 / tr ** 2 - n
    dg = (2 * n * n / tr ** 2) * g
    dg[np.diag_indices(n)] -= 2 * n * n * fro2 / tr ** 3
    grad = 2 * (dg @ m) if m.shape[0] < m.shape[1] else 2 * (m @ dg)
    return value, grad


def coherence_softmax(entries, softness=100.0):
    """Softened maximum column coherence; columns norms are regularized by ``NORM_EPS``."""
    m = np.asarray(entries, dtype=np.float64)
    cols = m.shape[1]
    norms = np.sqrt(np.sum(m * m, axis=0))
    inv = 1.0 / (norms + NORM_EPS)
    g = m.T @ m
    c = g * inv[:, None] * inv[None, :]
    iu = np.triu_indices(cols, k=1)
    if iu[0].size == 0:
        return 0.0, np.zeros_like(m)
    vals = c[iu]
    z = softness * np.abs(vals)
    value = float(logsumexp(z) / softness)
    w = np.exp(z - logsumexp(z)) * np.sign(vals)
    dc = np.zeros((cols, cols))
    dc[iu] = 0.5 * w
    dc = dc + dc.T
    # c = diag(inv) G diag(inv)
    dg = dc * inv[:, None] * inv[None, :]
    dinv = 2 * np.sum(dc * g * inv[None, :], axis=1)
    dnorm = -dinv * inv ** 2
    safe = np.where(norms > 0, norms, 1.0)
    grad = 2 * (m @ dg) + m * (dnorm / safe)[None, :]
    return value, grad


def matrix_objective(entries, objective: SurrogateObjective):
    if objective.kind == "gram_identity":
        return gram_identity(entries)
    return coherence_softmax(entries, objective.softness)


def relaxed_matrix(params: CodeParams, system: System):
    """Measurement matrix with every code replaced by ``sigmoid(beta * logit)``."""
    a, s = params.relaxed_codes()
    return system.matrix_from_equivalent(system.equivalent_aperture(a, s))


def quantized_objective(params: CodeParams, objective: SurrogateObjective, system: System) -> float:
    aperture, shutter = params.quantized()
    return matrix_objective(system.assemble(aperture, shutter).entries, objective)[0]


def objective_and_gradient(params: CodeParams, objective: SurrogateObjective, system: System,
                           mode="relaxed"):
    """Objective value and its gradient with respect to both logit arrays.

    Returns ``(value, (grad_aperture_logits, grad_shutter_logits))``.
    """
    a_soft, s_soft = params.relaxed_codes()
    if mode == "relaxed":
        a_fwd, s_fwd = a_soft, s_soft
    elif mode == "mismatch":
        a_fwd = quantize_codes(params.aperture_logits, None).astype(np.float64)
        s_fwd = quantize_codes(params.shutter_logits, None).astype(np.float64)
    else:
        raise InvalidInputError(f"unknown mode {mode!r}")

    matrix = system.matrix_from_equivalent(system.equivalent_aperture(a_fwd, s_fwd))
    value, d_entries = matrix_objective(matrix.entries, objective)
    d_equiv = system.equivalent_from_matrix_grad(d_entries)
    d_a, d_s = system.equivalent_aperture_vjp(d_equiv, a_fwd, s_fwd)

    w = objective.binarization_weight
    if w:
        value += w * float(np.sum(a_fwd * (1 - a_fwd)) + np.sum(s_fwd * (1 - s_fwd)))
        d_a = d_a + w * (1 - 2 * a_fwd)
        d_s = d_s + w * (1 - 2 * s_fwd)

    beta = params.beta
    grad_a = d_a * beta * a_soft * (1 - a_soft)
    grad_s = d_s * beta * s_soft * (1 - s_soft)
    return value, (grad_a, grad_s)


class OptimizeResult(NamedTuple):
    params: CodeParams
    aperture: ApertureSequence
    shutter: ShutterSequence
    trace: list


@dataclass
class TraceRow:
    step: int
    relaxed_obj: float
    quantized_obj: float


def optimize_codes(init: CodeParams, objective: SurrogateObjective, system: System, steps=500,
                   learning_rate=0.1, momentum=0.9, mode="mismatch", beta_schedule=None) -> OptimizeResult:
    """Heavy-ball gradient descent on the logits.

    ``beta_schedule`` optionally maps the step index to a sigmoid slope;
    by default ``init.beta`` is kept throughout.
    """
    if int(steps) != steps or steps < 1:
        raise InvalidInputError("steps must be a positive integer")
    params = init
    vel_a = np.zeros_like(params.aperture_logits)
    vel_s = np.zeros_like(params.shutter_logits)
    trace = []
    for step in range(int(steps)):
        if beta_schedule is not None:
            params = replace(params, beta=float(beta_schedule(step)))
        relaxed_value = matrix_objective(relaxed_matrix(params, system).entries, objective)[0]
        quant_value = quantized_objective(params, objective, system)
        _, (ga, gs) = objective_and_gradient(params, objective, system, mode)
        if not (np.isfinite(relaxed_value) and np.isfinite(quant_value)
                and np.isfinite(ga).all() and np.isfinite(gs).all()):
            raise DivergenceError(f"non-finite objective at step {step}", iteration=step, last_good=params)
        trace.append(TraceRow(step, relaxed_value, quant_value))
        vel_a = momentum * vel_a - learning_rate * ga
        vel_s = momentum * vel_s - learning_rate * gs
        params = CodeParams(params.aperture_logits + vel_a, params.shutter_logits + vel_s, params.beta)
    aperture, shutter = params.quantized()
    return OptimizeResult(params, aperture, shutter, trace)


def random_baseline(objective: SurrogateObjective, system: System, num_slots, num_draws=50, seed=0):
    """Objective values of ``num_draws`` i.i.d. Bernoulli(0.5) code draws."""
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(num_draws):
        aperture, shutter = system.random_codes(num_slots, rng)
        values.append(matrix_objective(system.assemble(aperture, shutter).entries, objective)[0])
    return np.asarray(values)
