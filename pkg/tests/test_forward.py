"""Light-field and spectral forward models against loop-built matrices."""
import numpy as np
import pytest

from tmca.core import ApertureSequence, ShutterSequence
from tmca.errors import CapacityError, DimensionError, InvalidInputError
from tmca.lightfield import LightFieldGeometry, lf_contract, lf_equivalent_aperture, lf_simulate
from tmca.spectral import SpectralConfig, hs_contract, hs_equivalent_aperture, hs_simulate
from tmca.systems import System

from conftest import hs_matrix_oracle, lf_matrix_oracle, random_system, rel_err


def oracle(system, aperture, shutter):
    if system.name == "lf":
        return lf_matrix_oracle(aperture.codes, shutter.codes, system.dims, system.step)
    return hs_matrix_oracle(aperture.codes, shutter.codes, system.dims, system.step,
                            system.config.kappa)


@pytest.mark.parametrize("name", ["lf", "hs"])
def test_assembled_matrix_matches_loop_oracle(name, rng):
    for _ in range(15):
        system, aperture, shutter = random_system(rng, name, max_side=5, max_k=4)
        m = system.assemble(aperture, shutter)
        np.testing.assert_array_equal(m.entries, oracle(system, aperture, shutter))


@pytest.mark.parametrize("name", ["lf", "hs"])
def test_three_paths_agree(name, rng):
    for _ in range(10):
        system, aperture, shutter = random_system(rng, name)
        scene = rng.random(system.dims)
        m = system.assemble(aperture, shutter)
        e_slot = system.simulate(scene, aperture, shutter)
        e_mat = (m.entries @ m.vectorize(scene)).reshape(m.sensor_shape)
        equiv = system.equivalent_aperture(aperture, shutter)
        if name == "lf":
            e_eq = lf_contract(equiv, scene)
        else:
            e_eq = hs_contract(equiv, scene, system.config)
        assert rel_err(e_slot, e_mat) <= 1e-12
        assert rel_err(e_slot, e_eq) <= 1e-12


def test_hs_kappa_weighting(rng):
    kappa = (0.5, 2.0, 1.0)
    system = System("hs", (4, 5, 3), 2, kappa)
    aperture, shutter = system.random_codes(3, rng)
    np.testing.assert_array_equal(system.assemble(aperture, shutter).entries,
                                  hs_matrix_oracle(aperture.codes, shutter.codes, (4, 5, 3), 2, kappa))


def test_single_view_single_band_identity(rng):
    lf = rng.random((4, 5, 1, 1))
    geom = LightFieldGeometry((4, 5), (1, 1))
    e = lf_simulate(lf, ApertureSequence.ones(1, (4, 5)), ShutterSequence.ones(1, (4, 5)), geom)
    np.testing.assert_array_equal(e, lf[:, :, 0, 0])
    cube = rng.random((4, 5, 1))
    cfg = SpectralConfig(1)
    e = hs_simulate(cube, ApertureSequence.ones(1, (4, 5)), ShutterSequence.ones(1, (4, 5)), cfg)
    np.testing.assert_array_equal(e, cube[:, :, 0])


def test_open_everything_sums_views(rng):
    geom = LightFieldGeometry((3, 3), (3, 3))
    lf = rng.random(geom.lf_shape)
    e = lf_simulate(lf, ApertureSequence.ones(2, geom.aperture_shape), ShutterSequence.ones(2, (3, 3)), geom)
    np.testing.assert_allclose(e, 2 * lf.sum(axis=(2, 3)), rtol=1e-14)


@pytest.mark.parametrize("name", ["lf", "hs"])
def test_closed_shutter_gives_zero(name, rng):
    system = System(name, (4, 4, 3, 3) if name == "lf" else (4, 4, 3))
    aperture, _ = system.random_codes(3, rng)
    shutter = ShutterSequence.zeros(3, system.sensor_shape)
    assert not system.simulate(rng.random(system.dims), aperture, shutter).any()
    assert not system.assemble(aperture, shutter).entries.any()


def test_hs_equivalent_definition(rng):
    cfg = SpectralConfig(3, 2)
    t = ApertureSequence.random(4, (3, 4), rng)
    s = ShutterSequence.random(4, cfg.sensor_shape((3, 4)), rng)
    that = hs_equivalent_aperture(t, s, cfg)
    for i in range(3):
        for j in range(4):
            for band in range(3):
                ref = sum(int(s.codes[k, i, j + 2 * band]) * int(t.codes[k, i, j]) for k in range(4))
                assert that[i, j, band] == ref


def test_lf_equivalent_definition(rng):
    geom = LightFieldGeometry((3, 4), (3, 3), 2)
    t = ApertureSequence.random(3, geom.aperture_shape, rng)
    s = ShutterSequence.random(3, (3, 4), rng)
    that = lf_equivalent_aperture(t, s, geom)
    for py in range(3):
        for px in range(4):
            for iy in range(3):
                for ix in range(3):
                    ref = sum(int(s.codes[k, py, px]) * int(t.codes[k, py + 2 * iy, px + 2 * ix])
                              for k in range(3))
                    assert that[py, px, iy, ix] == ref


@pytest.mark.parametrize("name", ["lf", "hs"])
def test_vjp_is_exact_for_bilinear_map(name, rng):
    system = System(name, (4, 3, 3, 3) if name == "lf" else (4, 3, 3), 1)
    k = 3
    a = rng.random((k,) + tuple(system.aperture_shape))
    s = rng.random((k,) + tuple(system.sensor_shape))
    g = rng.standard_normal(system.dims)
    da, ds = system.equivalent_aperture_vjp(g, a, s)
    delta_a = rng.standard_normal(a.shape)
    delta_s = rng.standard_normal(s.shape)
    base = system.equivalent_aperture(a, s)
    lin_a = np.vdot(g, system.equivalent_aperture(a + delta_a, s) - base)
    lin_s = np.vdot(g, system.equivalent_aperture(a, s + delta_s) - base)
    assert abs(lin_a - np.vdot(da, delta_a)) <= 1e-10 * max(1, abs(lin_a))
    assert abs(lin_s - np.vdot(ds, delta_s)) <= 1e-10 * max(1, abs(lin_s))


def test_shape_errors(rng):
    geom = LightFieldGeometry((4, 4), (3, 3))
    with pytest.raises(DimensionError):
        lf_simulate(rng.random(geom.lf_shape), ApertureSequence.ones(1, (4, 4)), ShutterSequence.ones(1, (4, 4)), geom)
    with pytest.raises(DimensionError):
        lf_simulate(rng.random(geom.lf_shape), ApertureSequence.ones(2, (6, 6)), ShutterSequence.ones(1, (4, 4)), geom)
    cfg = SpectralConfig(3)
    with pytest.raises(DimensionError):
        hs_simulate(rng.random((4, 4, 3)), ApertureSequence.ones(1, (4, 4)), ShutterSequence.ones(1, (4, 4)), cfg)
    with pytest.raises(DimensionError):
        System("hs", (4, 4))
    with pytest.raises(DimensionError):
        LightFieldGeometry((4, 4), (2, 3))
    with pytest.raises(InvalidInputError):
        SpectralConfig(3, 0)


def test_non_finite_scene_rejected(rng):
    system = System("hs", (3, 3, 2))
    a, s = system.random_codes(1, rng)
    cube = rng.random((3, 3, 2))
    cube[0, 0, 0] = np.inf
    with pytest.raises(InvalidInputError):
        system.simulate(cube, a, s)


def test_capacity_cap(rng):
    system = System("lf", (10, 10, 3, 3))
    a, s = system.random_codes(1, rng)
    with pytest.raises(CapacityError):
        system.assemble(a, s, max_entries=1000)
