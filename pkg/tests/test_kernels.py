import numpy as np
import pytest

from rissim import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not installed")


def _rays(rng, links, rays):
    coef = rng.standard_normal((links, rays)) + 1j * rng.standard_normal((links, rays))
    return coef, *(rng.uniform(-np.pi, np.pi, (links, rays)) for _ in range(4))


def _naive(coef, rpy, rpz, tpy, tpz, rs, ts):
    def resp(py, pz, shape):
        m, n = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")
        return np.exp(1j * (m.ravel() * py + n.ravel() * pz))

    out = np.zeros((coef.shape[0], rs[0] * rs[1], ts[0] * ts[1]), dtype=complex)
    for l in range(coef.shape[0]):
        for r in range(coef.shape[1]):
            out[l] += coef[l, r] * np.outer(resp(rpy[l, r], rpz[l, r], rs), resp(tpy[l, r], tpz[l, r], ts))
    return out


@pytest.mark.parametrize("rs,ts", [((1, 1), (4, 2)), ((3, 2), (2, 5)), ((4, 4), (1, 1))])
def test_ray_sum_numpy_matches_naive(rs, ts):
    args = _rays(np.random.default_rng(0), 3, 7)
    np.testing.assert_allclose(_kernels.ray_sum_numpy(*args, rs, ts), _naive(*args, rs, ts), atol=1e-12)


@needs_numba
@pytest.mark.parametrize("rs,ts", [((1, 1), (10, 4)), ((16, 16), (10, 4))])
def test_ray_sum_paths_agree(rs, ts):
    args = _rays(np.random.default_rng(1), 5, 30)
    a = _kernels.ray_sum_numpy(*args, rs, ts)
    b = _kernels.ray_sum_numba(*args, rs, ts)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


@needs_numba
@pytest.mark.parametrize("n,levels", [(1, 3), (4, 4), (6, 2), (5, 8)])
def test_exhaustive_paths_agree(n, levels):
    rng = np.random.default_rng(n * levels)
    casc = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    h = 0.2 - 0.4j
    va, ia = _kernels.exhaustive_best_numpy(h, casc, levels)
    vb, ib = _kernels.exhaustive_best_numba(h, casc, levels)
    assert va == pytest.approx(vb, rel=1e-12)
    np.testing.assert_array_equal(ia, ib)


def test_disable_flag(monkeypatch):
    monkeypatch.setattr(_kernels, "USE_NUMBA", False)
    args = _rays(np.random.default_rng(3), 2, 4)
    np.testing.assert_allclose(_kernels.ray_sum(*args, (2, 2), (3, 1)), _naive(*args, (2, 2), (3, 1)), atol=1e-12)


@needs_numba
def test_env_flag_selects_numpy_path_end_to_end():
    import json
    import os
    import subprocess
    import sys

    code = (
        "import json; from rissim import _kernels; from rissim.engine import SimConfig, run_drop;"
        "cfg = SimConfig(rings=0, users_per_sector=2, ris_horizontal=4, ris_vertical=4, drops=1, seed=3);"
        "m = run_drop(cfg, 0, ['ideal']).metrics['ideal'];"
        "print(json.dumps([_kernels.USE_NUMBA, m.sinr_db.tolist()]))"
    )
    runs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, RISSIM_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        runs[flag] = json.loads(out.stdout)
    assert runs["0"][0] is True and runs["1"][0] is False
    np.testing.assert_allclose(runs["0"][1], runs["1"][1], rtol=0, atol=1e-9)
