"""Structural invariants of the forward models, spectra and solver."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tmca.conditioning import spectrum
from tmca.core import apply_matrix, compose_exposure
from tmca.recon import AdmmConfig, admm_tv
from tmca.systems import System

systems = st.sampled_from([System("lf", (4, 5, 3, 3)), System("hs", (5, 4, 3)), System("hs", (3, 6, 4), 2),
                           System("lf", (3, 3, 1, 3), 2)])


@settings(max_examples=25, deadline=None)
@given(system=systems, k=st.integers(1, 5), seed=st.integers(0, 2**31))
def test_linearity(system, k, seed):
    rng = np.random.default_rng(seed)
    a, s = system.random_codes(k, rng)
    m = system.assemble(a, s)
    x, y = rng.standard_normal((2, m.cols))
    alpha, beta = rng.standard_normal(2)
    lhs = apply_matrix(m, alpha * x + beta * y)
    rhs = alpha * apply_matrix(m, x) + beta * apply_matrix(m, y)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(rhs))
    g, h = rng.standard_normal((2, k) + tuple(system.sensor_shape))
    np.testing.assert_allclose(compose_exposure(alpha * g + beta * h, s),
                               alpha * compose_exposure(g, s) + beta * compose_exposure(h, s), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(system=systems, k=st.integers(1, 5), seed=st.integers(0, 2**31))
def test_snapshots_non_negative(system, k, seed):
    rng = np.random.default_rng(seed)
    a, s = system.random_codes(k, rng)
    assert np.all(system.simulate(rng.random(system.dims), a, s) >= 0)


def test_k1_open_shutter_is_plain_coded_aperture(rng):
    system = System("hs", (5, 5, 3))
    a, _ = system.random_codes(1, rng)
    from tmca.core import ShutterSequence
    from tmca.spectral import hs_slot_fields
    cube = rng.random(system.dims)
    e = system.simulate(cube, a, ShutterSequence.ones(1, system.sensor_shape))
    np.testing.assert_array_equal(e, hs_slot_fields(cube, a, system.config)[0])


def test_lf_angular_selectivity():
    system = System("lf", (6, 6, 3, 3))
    for seed in range(100):
        a, s = system.random_codes(4, np.random.default_rng(seed))
        that = system.equivalent_aperture(a, s)
        assert np.any(that.max(axis=(2, 3)) != that.min(axis=(2, 3))), seed


def test_hs_non_binary_and_colour_codes():
    system = System("hs", (8, 8, 4))
    for seed in range(100):
        a, s = system.random_codes(4, np.random.default_rng(seed))
        that = system.equivalent_aperture(a, s)
        assert np.any((that > 0) & (that < 4)), seed
        assert np.any(that.max(axis=2) != that.min(axis=2)), seed


@pytest.mark.parametrize("step", [1, 2, 3])
def test_snapshot_width(step, rng):
    system = System("hs", (4, 7, 5), step)
    a, s = system.random_codes(2, rng)
    assert system.simulate(rng.random(system.dims), a, s).shape == (4, 7 + 4 * step)


@settings(max_examples=25, deadline=None)
@given(system=systems, k=st.integers(1, 4), seed=st.integers(0, 2**31), c=st.floats(0.1, 10))
def test_spectrum_invariants(system, k, seed, c):
    rng = np.random.default_rng(seed)
    a, s = system.random_codes(k, rng)
    entries = system.assemble(a, s).entries
    base = spectrum(entries).eigenvalues
    if not base.any():
        return
    perm = spectrum(entries[rng.permutation(entries.shape[0])]).eigenvalues
    assert np.abs(perm - base).max() <= 1e-10 * base[0]
    assert abs(base.sum() - np.sum(entries ** 2)) <= 1e-8 * np.sum(entries ** 2)
    scaled = spectrum(c * entries).eigenvalues
    assert np.abs(scaled - c * c * base).max() <= 1e-10 * c * c * base[0]


def test_admm_fixed_point(rng):
    system = System("hs", (6, 6, 3))
    a, s = system.random_codes(4, rng)
    m = system.assemble(a, s)
    x = rng.random(system.dims)
    e = system.simulate(x, a, s)
    res = admm_tv(m, e, AdmmConfig(tv_weight=0.0, max_iters=20), x0=x)
    assert np.abs(res.estimate - x).max() <= 1e-10


@pytest.mark.parametrize("iters", [5, 300])
def test_converged_flag_means_residuals_below_tolerance(iters, rng):
    system = System("hs", (6, 6, 2))
    a, s = system.random_codes(3, rng)
    m = system.assemble(a, s)
    e = system.simulate(rng.random(system.dims), a, s)
    res = admm_tv(m, e, AdmmConfig(max_iters=iters, abs_tol=1e-4, rel_tol=1e-4))
    r_pri, r_dual = res.residual_trace[-1]
    below = r_pri <= res.tolerances[0] and r_dual <= res.tolerances[1]
    assert res.converged == below
    if res.converged:
        assert res.iterations_used <= iters
