import json
import subprocess
import sys

import numpy as np
import pytest

from nsds.cli import emit_plot_data, main
from nsds.errors import UnsupportedError
from nsds.integrate import IntegratorConfig, Trajectory
from nsds.nonsmooth import make_function
from nsds.scenarios import SCENARIOS, RunSpec, get_scenario, run_batch


EXPECTED_CATALOG = {
    "brick", "oscillator", "oscillator_dissipative", "move_away_1",
    "move_away_n", "consensus", "cart", "nonholonomic_integrator",
    "smq_flow", "sphere_packing",
}


def run_cli(*argv):
    """Invoke the CLI in-process, capturing stdout and the exit code."""
    import io
    from contextlib import redirect_stdout

    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


class TestCatalog:
    def test_exact_scenario_list(self):
        assert set(SCENARIOS) == EXPECTED_CATALOG

    def test_all_builders_validate(self):
        for name, sc in SCENARIOS.items():
            built = sc.build()
            assert built is not None

    def test_unknown_constant_rejected(self):
        from nsds.errors import ModelError

        with pytest.raises(ModelError):
            get_scenario("brick").build({"mass": 3.0})

    def test_control_scenario_has_no_autonomous_dynamics(self):
        with pytest.raises(UnsupportedError):
            get_scenario("nonholonomic_integrator").simulate([0.0, 0.0, 0.0], 1.0)


class TestBatch:
    def test_parallel_runs_match_serial(self):
        specs = [
            RunSpec("brick", (1.0,), 0.6),
            RunSpec("oscillator", (1.0, 0.0), 3.0, dt_max=5e-3),
            RunSpec("move_away_1", (0.5, 0.5), 1.5),
        ]
        parallel = run_batch(specs, max_workers=3)
        serial = [run_batch([s])[0] for s in specs]
        for a, b in zip(parallel, serial):
            assert np.array_equal(a.states, b.states)
            assert np.array_equal(a.times, b.times)


class TestCli:
    def test_filippov_set_move_away_square(self):
        code, out = run_cli("filippov-set", "--scenario", "move_away_1",
                            "--point", "0,0")
        assert code == 0
        payload = json.loads(out)
        assert payload["dim"] == 2
        assert payload["tol"] == 1e-9
        verts = {tuple(v) for v in payload["vertices"]}
        assert verts == {(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0), (0.0, -1.0)}

    def test_filippov_set_descent_function(self):
        code, out = run_cli("filippov-set", "--function", "abs", "--point", "0")
        assert code == 0
        verts = sorted(v[0] for v in json.loads(out)["vertices"])
        assert verts == [-1.0, 1.0]

    def test_gradient_and_proximal(self):
        code, out = run_cli("gradient", "--function", "abs", "--point", "0")
        assert code == 0
        payload = json.loads(out)
        assert sorted(v[0] for v in payload["vertices"]) == [-1.0, 1.0]
        assert payload["exact"] is True
        code, out = run_cli("gradient", "--function", "neg_abs", "--point", "0",
                            "--proximal")
        assert code == 0
        assert json.loads(out)["vertices"] == []
        code, out = run_cli("gradient", "--function", "sqrt_abs", "--point", "0",
                            "--proximal")
        assert code == 0
        assert json.loads(out)["all_space"] is True

    def test_consensus_command(self):
        code, out = run_cli("consensus", "--graph", "1-2,2-3", "--variant", "sign",
                            "--p0", "0,1,5")
        assert code == 0
        payload = json.loads(out)
        assert payload["schema"] == 1
        assert abs(payload["consensus_value"] - 2.5) <= 1e-3
        assert payload["consensus_time"] <= 10.0

    def test_simulate_round_trips_csv(self, tmp_path):
        out_file = tmp_path / "tr.csv"
        code, out = run_cli("simulate", "--scenario", "brick", "--x0", "1",
                            "--t-end", "0.5", "--out", str(out_file))
        assert code == 0
        text = out_file.read_text()
        tr = Trajectory.from_csv(text)
        assert tr.to_csv() == text
        assert json.loads(out)["schema"] == 1

    def test_simulate_json_format(self, tmp_path):
        out_file = tmp_path / "tr.json"
        code, _ = run_cli("simulate", "--scenario", "oscillator", "--x0", "1,0",
                          "--t-end", "1.0", "--out", str(out_file),
                          "--format", "json")
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert payload["schema"] == 1
        tr = Trajectory.from_json_dict(payload)
        assert tr.dim == 2

    def test_determinism_identical_outputs(self, tmp_path):
        f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for f in (f1, f2):
            code, _ = run_cli("pack", "--n", "3", "--seed", "4", "--t-end", "3",
                              "--out", str(f))
            assert code == 0
        assert f1.read_bytes() == f2.read_bytes()

    def test_lyapunov_report(self):
        code, out = run_cli("lyapunov", "--scenario", "oscillator",
                            "--function", "energy_oscillator",
                            "--theorem", "thm1", "--grid=-1:1:21,-1:1:21")
        assert code == 0
        payload = json.loads(out)
        assert payload["verdict"] == "certified"
        assert payload["checked_points"] == 441
        assert payload["schema"] == 1

    def test_lyapunov_prop13w_cart(self):
        code, out = run_cli("lyapunov", "--scenario", "cart",
                            "--function", "cart_lyapunov",
                            "--theorem", "prop13w", "--grid=-1:1:15,-1:1:15",
                            "--exclude-band", "1e-6", "--exclude-axes", "0")
        assert code == 0
        assert json.loads(out)["verdict"] == "certified"

    def test_sample_hold_command(self):
        code, out = run_cli("sample-hold", "--scenario", "cart",
                            "--x0", "0.6,0.3", "--diam", "0.01", "--t-end", "2")
        assert code == 0
        payload = json.loads(out)
        assert payload["final_norm"] < 0.7

    def test_pack_reports_radius(self, tmp_path):
        code, out = run_cli("pack", "--n", "2", "--seed", "1", "--t-end", "4")
        assert code == 0
        payload = json.loads(out)
        assert payload["final_hsp"] >= payload["initial_hsp"] - 1e-9

    def test_exit_codes(self, capsys):
        # Argument errors exit 2 through argparse.
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--scenario", "brick"])
        assert exc.value.code == 2
        # Model errors exit 1 and name the error.
        code = main(["simulate", "--scenario", "unknown", "--x0", "1",
                     "--t-end", "1", "--out", "/tmp/never.csv"])
        assert code == 1
        assert "Model" in capsys.readouterr().err
        code = main(["gradient", "--function", "smq", "--point", "5,5,5"])
        assert code == 1


class TestPlotData:
    def test_phase_closed_orbit(self, tmp_path):
        tr = get_scenario("oscillator").simulate([1.0, 0.0], 4.0 * np.sqrt(2.0),
                                                 IntegratorConfig(dt_max=1e-3))
        text = emit_plot_data(tr, "phase")
        rows = [r for r in text.splitlines() if r]
        first = np.array([float(v) for v in rows[0].split()])
        last = np.array([float(v) for v in rows[-1].split()])
        assert np.linalg.norm(first - last) <= 1e-3

    def test_time_table_monotone_after_stop(self):
        tr = get_scenario("brick").simulate([1.0], 0.6)
        text = emit_plot_data(tr, "time")
        rows = [[float(v) for v in r.split()] for r in text.splitlines() if r]
        decel = 9.8 * (np.cos(np.pi / 6) - np.sin(np.pi / 6))
        t_star = 1.0 / decel
        tail = [r[1] for r in rows if r[0] >= t_star + 1e-3]
        assert max(abs(v) for v in tail) <= 1e-8

    def test_level_overlay_grid_vanishes_only_at_origin(self):
        sc = get_scenario("oscillator")
        trajectory = sc.simulate([0.4, 0.0], 1.0)
        f = make_function("cart_lyapunov")
        text = emit_plot_data(trajectory, "level_overlay", f, grid_n=21)
        grid_rows = [r for r in text.splitlines() if len(r.split()) == 3]
        assert grid_rows, "grid block missing"
        vals = np.array([[float(v) for v in r.split()] for r in grid_rows])
        assert np.all(np.isfinite(vals))
        for row in vals[np.abs(vals[:, 2]) <= 1e-12]:
            assert np.linalg.norm(row[:2]) <= 1e-9
        # Nonzero away from the origin on the sampled grid.
        away = vals[np.linalg.norm(vals[:, :2], axis=1) > 1e-6]
        assert np.all(away[:, 2] > 0.0)

    def test_phase_needs_planar_data(self):
        tr = get_scenario("brick").simulate([1.0], 0.2)
        from nsds.errors import DimensionMismatchError

        with pytest.raises(DimensionMismatchError):
            emit_plot_data(tr, "phase")


def test_cli_entrypoint_subprocess():
    out = subprocess.run(
        [sys.executable, "-m", "nsds.cli", "gradient", "--function", "abs",
         "--point", "2"],
        capture_output=True, text=True, timeout=120,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["vertices"] == [[1.0]]
