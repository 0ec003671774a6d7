"""Shared fixtures and independent oracles.

The oracles rebuild quantities from their elementwise definitions with plain
Python loops so they share no code path with the package.
"""
import numpy as np
import pytest

from tmca.systems import System


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def lf_matrix_oracle(aperture, shutter, dims, step=1):
    """e[p] = sum_k S_k[p] sum_v T_k[p + step * (v + c)] l[p, v], one entry per (pixel, view)."""
    t = np.asarray(aperture, dtype=float)
    s = np.asarray(shutter, dtype=float)
    my, mx, uy, ux = dims
    rows = my * mx
    out = np.zeros((rows, rows * uy * ux))
    for py in range(my):
        for px in range(mx):
            r = py * mx + px
            for iy in range(uy):
                for ix in range(ux):
                    col = ((iy * ux + ix) * my + py) * mx + px
                    acc = 0.0
                    for k in range(t.shape[0]):
                        acc += s[k, py, px] * t[k, py + step * iy, px + step * ix]
                    out[r, col] = acc
    return out


def hs_matrix_oracle(aperture, shutter, dims, step=1, kappa=None):
    """e[i, j'] = sum_k S_k[i, j'] sum_l kappa_l T_k[i, j' - step l] f[i, j' - step l, l]."""
    t = np.asarray(aperture, dtype=float)
    s = np.asarray(shutter, dtype=float)
    m, n, bands = dims
    kappa = np.ones(bands) if kappa is None else np.asarray(kappa, dtype=float)
    width = n + (bands - 1) * step
    out = np.zeros((m * width, m * n * bands))
    for i in range(m):
        for jp in range(width):
            for band in range(bands):
                j = jp - step * band
                if not 0 <= j < n:
                    continue
                acc = 0.0
                for k in range(t.shape[0]):
                    acc += s[k, i, jp] * t[k, i, j]
                out[i * width + jp, band * m * n + i * n + j] = kappa[band] * acc
    return out


def jacobi_eigenvalues(a, sweeps=100, tol=1e-14):
    """Cyclic Jacobi rotations on a symmetric matrix; eigenvalues in descending order."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(a * a) - np.sum(np.diag(a) ** 2))
        if off <= tol * max(1.0, np.abs(a).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))[::-1]


def random_system(rng, name, max_side=8, max_k=8, max_bands=6):
    k = int(rng.integers(1, max_k + 1))
    if name == "lf":
        dims = (int(rng.integers(1, max_side + 1)), int(rng.integers(1, max_side + 1)),
                int(rng.choice([1, 3])), int(rng.choice([1, 3])))
    else:
        dims = (int(rng.integers(1, max_side + 1)), int(rng.integers(1, max_side + 1)),
                int(rng.integers(1, max_bands + 1)))
    step = int(rng.integers(1, 3))
    system = System(name, dims, step)
    aperture, shutter = system.random_codes(k, rng)
    return system, aperture, shutter


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    return 0.0 if scale == 0 else float(np.linalg.norm(a - b) / scale)


def run_cli_pipeline(workdir, seed=11):
    """Run every subcommand once inside ``workdir``; returns produced file names."""
    from tmca.cli import main

    w = str(workdir)
    commands = [
        ["gen-phantom", "--kind", "blocks", "--dims", "6", "6", "3", "--out", f"{w}/cube.t"],
        ["gen-phantom", "--kind", "gauss", "--dims", "5", "5", "3", "3", "--out", f"{w}/lf.t"],
        ["optimize", "--system", "hs", "--dims", "6", "6", "3", "--slots", "2", "--steps", "5",
         "--out-aperture", f"{w}/hs_a.t", "--out-shutter", f"{w}/hs_s.t", "--trace", f"{w}/opt.csv"],
        ["optimize", "--system", "lf", "--dims", "5", "5", "3", "3", "--slots", "2", "--steps", "5",
         "--out-aperture", f"{w}/lf_a.t", "--out-shutter", f"{w}/lf_s.t"],
        ["simulate-hs", "--scene", f"{w}/cube.t", "--aperture", f"{w}/hs_a.t", "--shutter", f"{w}/hs_s.t",
         "--noise-sigma", "0.01", "--out", f"{w}/hs_e.t"],
        ["simulate-lf", "--scene", f"{w}/lf.t", "--aperture", f"{w}/lf_a.t", "--shutter", f"{w}/lf_s.t",
         "--noise-sigma", "0.01", "--out", f"{w}/lf_e.t"],
        ["assemble", "--system", "hs", "--bands", "3", "--aperture", f"{w}/hs_a.t", "--shutter", f"{w}/hs_s.t",
         "--out", f"{w}/hs_m.t"],
        ["spectrum", "--matrix", f"{w}/hs_m.t", "--out", f"{w}/eig.csv", "--summary", f"{w}/eig_sum.csv"],
        ["study", "--system", "lf", "--dims", "4", "4", "3", "3", "--num-seeds", "2",
         "--out", f"{w}/study.csv", "--summary", f"{w}/study_sum.csv"],
        ["reconstruct", "--matrix", f"{w}/hs_m.t", "--snapshot", f"{w}/hs_e.t", "--max-iters", "8",
         "--out", f"{w}/rec.t", "--trace", f"{w}/rec.csv"],
        ["metrics", "--reference", f"{w}/cube.t", "--estimate", f"{w}/rec.t",
         "--json", f"{w}/metrics.json", "--csv", f"{w}/metrics.csv"],
    ]
    for argv in commands:
        code = main(argv + ["--seed", str(seed)])
        if code != 0:
            raise AssertionError(f"{argv[0]} exited with {code}")
    import os
    return sorted(f for f in os.listdir(w) if not f.endswith(".tmp"))
