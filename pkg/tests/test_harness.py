import hashlib
from dataclasses import replace

import numpy as np
import pytest

from conftest import rk4_reference
from randvib.errors import ConfigurationError, DivergenceError
from randvib.harness import RunConfig, convergence_study, ensemble_run, run_simulation
from randvib.model import make_duffing_vdp
from randvib.noise import NoiseConfig
from randvib.output import emit_outputs, path_rows, write_failure
from randvib.schemes import Interpretation, JumpSolver, Stepper

ITO, STRAT = Interpretation.ITO, Interpretation.STRATONOVICH_DPF


def _cfg(**noise):
    return RunConfig(noise=NoiseConfig(**noise))


def test_config_rejects_unknown_model_and_emit():
    with pytest.raises(ConfigurationError):
        RunConfig(model_label="nope")
    with pytest.raises(ConfigurationError):
        RunConfig(emit=frozenset({"plot"}))
    with pytest.raises(ConfigurationError):
        RunConfig(jump_work_mode="eq")
    with pytest.raises(ConfigurationError):
        RunConfig(initial_x=float("nan"))


def test_scheme_follows_noise_weights():
    cfg = RunConfig(noise=NoiseConfig(b=0.3, c=2.0), interpretation=ITO)
    assert (cfg.scheme.b, cfg.scheme.c, cfg.scheme.interpretation) == (0.3, 2.0, ITO)


def test_trajectory_structure():
    res = run_simulation(_cfg(seed=7, dt=1e-3))
    traj = res.trajectory
    assert np.all(np.diff(traj.t) >= 0)
    same = np.flatnonzero(np.diff(traj.t) == 0)
    # equal times only as (pre, post) jump pairs, with x continuous
    assert np.array_equal(same + 1, np.flatnonzero(traj.post_jump))
    assert np.array_equal(traj.x[same], traj.x[same + 1])
    assert len(same) == len(res.path.jumps)
    assert np.array_equal(traj.t[same], res.path.grid_times[res.path.jump_nodes])
    assert traj.state(0) == (0.0, 2.0, 0.0)


def test_jump_pairs_use_matched_map(duffing):
    from randvib.jumps import jump_map_dpf_ode, jump_map_ito
    for interp, jump in ((ITO, jump_map_ito), (STRAT, lambda m, x, v, d: jump_map_dpf_ode(m, x, v, d, 64))):
        res = run_simulation(replace(_cfg(seed=2, dt=1e-3), interpretation=interp))
        traj = res.trajectory
        for i, ev in zip(traj.pre_jump_indices, res.path.jumps):
            assert traj.v[i + 1] == jump(duffing, traj.x[i], traj.v[i], ev.scaled_size).v_plus


def test_deterministic_run_matches_rk4():
    res = run_simulation(_cfg(b=0.0, intensity=0.0, dt=1e-4))
    _, x, v = rk4_reference(make_duffing_vdp(), 2.0, 0.0, 1.0, 10_000)
    assert np.max(np.abs(res.trajectory.x - x)) <= 5e-3
    assert np.max(np.abs(res.trajectory.v - v)) <= 5e-3


def test_first_euler_step_by_hand():
    res = run_simulation(_cfg(b=0.0, intensity=0.0, dt=1e-4))
    assert res.trajectory.x[1] == 2.0
    assert res.trajectory.v[1] == pytest.approx(-1e-3, abs=1e-18)


def test_vop_stepper_runs():
    res = run_simulation(replace(_cfg(seed=0), stepper=Stepper.VARIATION_OF_PARAMETERS))
    assert res.ledger.max_rel_discrepancy <= 0.02


def test_run_is_deterministic():
    a = run_simulation(_cfg(seed=11, dt=1e-3))
    b = run_simulation(_cfg(seed=11, dt=1e-3))
    assert np.array_equal(a.trajectory.v, b.trajectory.v)
    assert np.array_equal(a.ledger.work, b.ledger.work)


def test_summary_contents():
    res = run_simulation(_cfg(seed=1, dt=1e-3))
    s = res.summary()
    assert s["n_jumps"] == len(res.path.jumps)
    assert s["n_records"] == len(res.trajectory) == s["n_intervals"] + 1 + s["n_jumps"]
    assert s["max_rel_discrepancy"] == res.ledger.max_rel_discrepancy
    assert s["interpretation"] == "strat-dpf" and s["jump_solver"] == "ode:64"


def test_divergence_carries_partial_trajectory(tmp_path):
    cfg = RunConfig(noise=NoiseConfig(b=0.0, intensity=0.0, dt=1e-3), initial_x=1e110)
    with pytest.raises(DivergenceError) as info:
        run_simulation(cfg)
    exc = info.value
    assert exc.step == 0
    assert len(exc.trajectory) == 1
    written = write_failure(exc, tmp_path)
    text = (tmp_path / "failure.txt").read_text()
    assert "status=diverged" in text and "step=0" in text
    assert [p.name for p in written] == ["failure.txt", "trajectory.csv"]


# convergence

def test_convergence_rows_and_order():
    rows = convergence_study(_cfg(seed=0), [1e-2, 1e-3])
    assert [(r.interpretation, r.dt) for r in rows] == [
        ("ito", 1e-2), ("ito", 1e-3), ("strat-dpf", 1e-2), ("strat-dpf", 1e-3)]
    assert len({r.n_jumps for r in rows}) == 1


def test_convergence_uses_one_path():
    cfg = _cfg(seed=3)
    rows = convergence_study(cfg, [1e-3, 1e-4], [STRAT])
    direct = run_simulation(replace(cfg, noise=replace(cfg.noise, dt=1e-4)))
    # the finest row is exactly the stand-alone fine run
    assert rows[-1].max_abs_discrepancy == direct.ledger.max_abs_discrepancy


def test_convergence_rejects_non_nested():
    with pytest.raises(ConfigurationError):
        convergence_study(_cfg(), [1e-2, 3e-3])
    with pytest.raises(ConfigurationError):
        convergence_study(_cfg(), [])


def test_convergence_noise_free_rows():
    rows = convergence_study(_cfg(b=0.0, intensity=0.0), [1e-2, 1e-3, 1e-4])
    # drift work by trapezoid vs Euler stepping: a quadrature error that shrinks with dt
    for interp in ("ito", "strat-dpf"):
        errs = [r.max_abs_discrepancy for r in rows if r.interpretation == interp]
        assert errs[0] > errs[1] > errs[2]


def test_convergence_free_oscillator_rows():
    cfg = RunConfig(noise=NoiseConfig(b=0.0, intensity=0.0), model_label="free",
                    stepper=Stepper.VARIATION_OF_PARAMETERS)
    for row in convergence_study(cfg, [1e-2, 1e-3, 1e-4]):
        assert row.max_abs_discrepancy <= 1e-8


def test_convergence_writes_csv(tmp_path):
    convergence_study(replace(_cfg(seed=0), output_dir=tmp_path), [1e-2, 1e-3])
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert lines[0].startswith("interpretation,dt,max_abs_discrepancy")
    assert len(lines) == 5


# ensemble

def test_ensemble_single_path_equals_run():
    cfg = _cfg(seed=5, dt=1e-3)
    summary = ensemble_run(cfg, 1)
    led = run_simulation(cfg).ledger
    agg = summary.aggregates["strat-dpf"]
    assert agg["n_ok"] == 1
    assert agg["rel_mean"] == agg["rel_median"] == agg["rel_p95"] == led.max_rel_discrepancy
    assert agg["abs_median"] == led.max_abs_discrepancy


def test_ensemble_independent_of_workers(tmp_path):
    cfg = _cfg(seed=0, dt=1e-3)
    serial = ensemble_run(cfg, 6, [ITO, STRAT], workers=1)
    parallel = ensemble_run(cfg, 6, [ITO, STRAT], workers=3)
    assert serial.records == parallel.records
    assert serial.aggregates == parallel.aggregates
    assert [r[0] for r in serial.records] == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5]


def test_ensemble_counts_divergence():
    cfg = RunConfig(noise=NoiseConfig(b=0.0, intensity=0.0, dt=1e-2), initial_x=1e110)
    agg = ensemble_run(cfg, 3).aggregates["strat-dpf"]
    assert (agg["n_ok"], agg["n_diverged"]) == (0, 3)
    assert np.isnan(agg["rel_median"])


def test_ensemble_rejects_bad_count():
    with pytest.raises(ConfigurationError):
        ensemble_run(_cfg(), 0)


def test_ensemble_writes_files(tmp_path):
    ensemble_run(replace(_cfg(dt=1e-2), output_dir=tmp_path), 2, [ITO, STRAT])
    assert len((tmp_path / "ensemble.csv").read_text().splitlines()) == 5
    assert len((tmp_path / "ensemble_summary.csv").read_text().splitlines()) == 3


# outputs

def _digest(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(directory.iterdir())}


def test_outputs_byte_identical(tmp_path):
    cfg = _cfg(seed=9, dt=1e-3)
    for name in ("a", "b"):
        (tmp_path / name).mkdir()
        emit_outputs(run_simulation(cfg), tmp_path / name, {"path", "trajectory", "ledger", "summary"})
    assert _digest(tmp_path / "a") == _digest(tmp_path / "b")


def test_emit_summary_only(tmp_path):
    emit_outputs(run_simulation(_cfg(dt=1e-2)), tmp_path, {"summary"})
    assert [p.name for p in tmp_path.iterdir()] == ["summary.txt"]


def test_csv_shapes_and_format(tmp_path):
    res = run_simulation(_cfg(seed=4, dt=1e-3))
    emit_outputs(res, tmp_path, {"path", "trajectory", "ledger"})
    raw = (tmp_path / "ledger.csv").read_bytes()
    assert b"\r" not in raw
    ledger = raw.decode().splitlines()
    assert ledger[0] == "t,x,v,delta_E,work,discrepancy"
    assert len(ledger) - 1 == len(res.trajectory)
    traj = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert traj[0] == "t,x,v,is_post_jump" and len(traj) == len(ledger)
    assert (tmp_path / "path.csv").read_text().splitlines()[0] == "t,L"
    # 17 significant digits round-trip exactly
    vals = np.loadtxt(tmp_path / "ledger.csv", delimiter=",", skiprows=1)
    assert np.array_equal(vals[:, 4], res.ledger.work)


def test_path_rows_left_limits():
    res = run_simulation(_cfg(seed=4, dt=1e-3, b=0.0))
    t, L, flag = path_rows(res.path)
    L = np.array(L)
    post = np.flatnonzero(flag)
    sizes = np.array([ev.scaled_size for ev in res.path.jumps])
    assert np.allclose(L[post] - L[post - 1], sizes, atol=1e-12)
    assert len(t) == len(res.trajectory)


def test_emit_nothing_is_an_error(tmp_path):
    from randvib.errors import OutputError
    with pytest.raises(OutputError):
        emit_outputs(run_simulation(_cfg(dt=1e-2)), tmp_path, set())


def test_unwritable_directory_reports_path(tmp_path):
    from randvib.errors import OutputError
    missing = tmp_path / "no" / "such"
    with pytest.raises(OutputError) as info:
        emit_outputs(run_simulation(_cfg(dt=1e-2)), missing, {"summary"})
    assert "summary.txt" in str(info.value)


def test_series_solver_run():
    cfg = replace(_cfg(seed=0), jump_solver=JumpSolver("series", 15))
    assert run_simulation(cfg).ledger.max_rel_discrepancy <= 0.02


def test_ito_discrepancy_tracks_full_deficit():
    # the Ito gap is the jump terms plus (b^2/2m) * integral of f^2 from the
    # Brownian quadratic variation; at dt=1e-4 the sum matches within 5%
    model = make_duffing_vdp()
    from randvib.audit import ito_diffusion_deficit, ito_jump_deficit
    for seed in range(5):
        res = run_simulation(RunConfig(noise=NoiseConfig(seed=seed), interpretation=ITO))
        total = ito_jump_deficit(model, res.trajectory, res.path) + ito_diffusion_deficit(
            model, res.trajectory, res.path, 1.0)
        assert res.ledger.max_abs_discrepancy == pytest.approx(total, rel=0.05)
