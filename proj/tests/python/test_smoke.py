import math

import numpy as np
import pytest

import stochinf as si


def test_module_surface():
    assert si.__version__ == "0.1.0"
    sys = si.heat_system(3)
    assert (sys.n, sys.m, sys.p, sys.noise_terms) == (9, 3, 1, 1)
    assert "StochasticSystem" in repr(sys)
    sys.validate()


def test_heat_norm_report():
    rep = si.stoch_hinf_norm(si.heat_system(4), tol=1e-4)
    assert rep["gamma_lo"] <= rep["norm"] <= rep["gamma_hi"]
    assert abs(rep["norm"] - 0.4824) < 2e-3
    assert rep["det_hinf"] <= rep["norm"] + 1e-4
    assert "Converged" in {e["status"] for e in rep["bracket_history"]}
    assert "total_s" in rep["timings"]


def test_stability_details():
    sys = si.heat_system(3)
    assert si.ms_stable(sys)
    v = si.ms_stability(sys)
    assert v["stable"]
    assert v["abscissa"] < 0
    assert 0 < v["rho"] < 1
    assert v["rho_converged"]


def test_newton_solution_is_negative_semidefinite():
    out = si.newton_solve(si.heat_system(3), gamma=1.0)
    assert out["status"] == "Converged"
    assert np.linalg.eigvalsh(out["X"]).max() <= 1e-10
    assert 0 < out["rho_final"] < 1
    assert out["residuals"][-1] <= 1e-8


def test_profile_points():
    pts = si.profile(si.heat_system(2), [1.0, 2.0, 3.0])
    assert [p["status"] for p in pts] == ["Converged"] * 3
    for p in pts:
        assert 0 < p["rho"] < 1
        assert p["alpha"] < 0
        assert not p["alpha_is_surrogate"]
    assert pts[0]["rho"] >= pts[-1]["rho"]
    grid = si.default_profile_grid(2.0, points=11)
    assert len(grid) == 11 and grid[0] < grid[-1]


def test_mc_lower_bound():
    sys = si.random_system(3, 1, 1, 11)
    ratio, se = si.mc_norm_lower_bound(
        sys, lambda t: np.array([math.exp(-t)]), t_final=5.0, paths=10
    )
    assert ratio > 0
    assert se >= 0
    rep = si.stoch_hinf_norm(sys)
    assert ratio - 3 * se <= rep["norm"] + 1e-9


def test_manifest_round_trip(tmp_path):
    sys = si.random_system(4, 2, 2, 42)
    path = str(tmp_path / "sys.json")
    si.save_manifest(path, sys, name="roundtrip", inline_arrays=True)
    loaded, name = si.load_manifest(path)
    assert name == "roundtrip"
    np.testing.assert_array_equal(loaded.A, sys.A)
    np.testing.assert_array_equal(loaded.Nx[0], sys.Nx[0])
    np.testing.assert_array_equal(loaded.B, sys.B)


def test_seed_determinism():
    a = si.random_system(5, 2, 2, 7)
    b = si.random_system(5, 2, 2, 7)
    np.testing.assert_array_equal(a.A, b.A)
    np.testing.assert_array_equal(a.Nx[0], b.Nx[0])


def test_unstable_raises():
    sys = si.StochasticSystem(
        A=np.array([[1.0]]),
        N=np.zeros((1, 1)),
        B=np.ones((1, 1)),
        C=np.ones((1, 1)),
        D=np.zeros((1, 1)),
    )
    with pytest.raises(si.MSUnstableError):
        si.stoch_hinf_norm(sys)
