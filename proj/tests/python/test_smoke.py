import math

import numpy as np
import pytest

import mvem


def test_families_and_defaults():
    fams = mvem.builtin_families()
    assert "linear_mf" in fams
    assert mvem.builtin_defaults("linear_mf")["a"] == -1.0


def test_simulate_shapes_and_determinism():
    a = mvem.simulate("linear_mf", n=32, steps=64, seed=7, record_stride=16)
    b = mvem.simulate("linear_mf", n=32, steps=64, seed=7, record_stride=16)
    assert a.states.shape == (5, 32, 1)
    assert not a.diverged
    assert np.array_equal(a.states, b.states)
    assert a.to_bytes()[:8] == b"MVEMPATH"
    assert a.times[-1] == pytest.approx(1.0)


def test_strong_error_self_zero():
    fine = mvem.simulate("holder_diffusion_1d", n=16, steps=64, seed=3)
    coarse = mvem.simulate("holder_diffusion_1d", n=16, steps=64, seed=3, factor=8)
    assert mvem.strong_error(fine, fine) == 0.0
    assert mvem.strong_error(fine, coarse) > 0.0


def test_wasserstein_matches_permutation_minimum():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(5, 2))
    b = rng.normal(size=(5, 2))
    import itertools

    best = min(
        np.mean(np.sum((a - b[list(p)]) ** 2, axis=1))
        for p in itertools.permutations(range(5))
    )
    assert mvem.wasserstein_matching(2.0, a, b) == pytest.approx(math.sqrt(best), abs=1e-12)
    assert mvem.wasserstein_sliced(2.0, a, b) <= mvem.wasserstein_matching(2.0, a, b) + 1e-12
    assert mvem.coupling_upper_bound(2.0, a, b) >= mvem.wasserstein_matching(2.0, a, b) - 1e-12
    x = rng.normal(size=7)
    assert mvem.wasserstein_1d(1.0, x, x + 0.5) == pytest.approx(0.5)


def test_fit_rate_and_oracle():
    fit = mvem.fit_rate([1.0, 2.0, 4.0], [3.0, 3.0 * 2**-0.25, 3.0 * 4**-0.25])
    assert fit.slope == pytest.approx(-0.25, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    mean, var = mvem.oracle_linear_gaussian(-1.0, 0.5, 0.0, 1.0, 0.25, 1.0)
    assert mean == pytest.approx(math.exp(-0.5))
    assert var == pytest.approx(math.exp(-2.0) * 0.25)
    with pytest.raises(ValueError):
        mvem.fit_rate([1.0], [1.0])


def test_smoothing():
    s = mvem.Smoothing(math.e**2, 0.1)
    assert s.v(0.0) == 0.0
    assert s.v_prime(0.5) == 1.0
    assert s.psi_integral(0.1) == pytest.approx(1.0, abs=1e-14)
    ok, checks = s.check()
    assert ok and all(checks.values())
    assert mvem.Smoothing.from_eps(0.5).gamma == pytest.approx(math.e**2)


def test_validate_and_picard():
    rep = mvem.validate_model("linear_mf", n_pairs=100)
    assert rep["pass"]
    d = mvem.picard("linear_mf", n=128, steps=64, k_max=5)
    assert len(d) == 5
    assert d[-1] < d[1]


def test_sweeps():
    ts = mvem.timestep_sweep("linear_mf", n=32, factors=[4, 8, 16], steps=256, replications=2)
    assert ts["divergences"] == 0
    assert ts["fit"].slope > 0.5
    assert ts["csv"].startswith("kind,key,delta")
    ch = mvem.chaos_sweep("linear_mf", n_list=[16, 32, 64], steps=64, n_extra=192)
    assert len(ch["aggregates"]) == 3
    gl = mvem.glivenko_sweep(n_list=[32, 64, 128, 256], replications=8)
    assert gl["fit"].slope < 0


def test_cli_and_criterion(tmp_path):
    code, out, err = mvem.run_cli(["yamada-check", "--eps", "0.1", "--out", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "summary.json").exists()
    assert mvem.run_cli(["simulate", "--M", "1000", "--out", str(tmp_path)])[0] == 2
    r = mvem.run_criterion(10)
    assert r["pass"] and r["name"] == "ot_exactness"
