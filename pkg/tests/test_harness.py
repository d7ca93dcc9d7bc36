import csv
import json
import math
import subprocess
import sys

import pytest

from shape_pnp import GridSpec, SweepConfig, box_polygon
from shape_pnp.cli import main
from shape_pnp.harness import (
    SIMULATION_CSV_HEADER,
    pool_size,
    run_bench,
    run_estimate,
    run_simulation,
    write_bench_csv,
    write_dat,
    write_simulation_csv,
    write_theta_csv,
)
from shape_pnp.scenegen import (
    SceneConfig,
    config_to_dict,
    generate,
    save_scene,
    scene_to_dict,
)

QUICK_GRID = GridSpec(
    t_x_bounds=(-6.0, 6.0), t_z_bounds=(-6.0, 6.0), points=(16, 16, 32), stages=2
)
QUICK_SWEEP = SweepConfig(coarse_k=360, fine_k=128)


def quick_config(seed=123):
    return SceneConfig(seed=seed, num_points=8)


class TestPoolSize:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("SHAPE_THREADS", "3")
        assert pool_size() == 3

    def test_env_invalid(self, monkeypatch):
        monkeypatch.setenv("SHAPE_THREADS", "zero")
        with pytest.raises(ValueError):
            pool_size()
        monkeypatch.setenv("SHAPE_THREADS", "0")
        with pytest.raises(ValueError):
            pool_size()

    def test_default_positive(self, monkeypatch):
        monkeypatch.delenv("SHAPE_THREADS", raising=False)
        assert pool_size() >= 1


class TestRunSimulation:
    def test_row_shape_and_accounting(self):
        rows, theta_rows = run_simulation(
            quick_config(),
            m_values=[5, 6, 7],
            trials=5,
            methods=["shape", "l2", "linf"],
            mode="known",
            sweep=QUICK_SWEEP,
            grid=QUICK_GRID,
            workers=1,
        )
        assert len(rows) == 9  # 3 methods x 3 point counts
        assert theta_rows == []
        assert [r.m for r in rows] == [5, 5, 5, 6, 6, 6, 7, 7, 7]
        for r in rows:
            assert r.trials_used + r.trials_excluded == 5
            assert r.mean_sq_err >= 0.0
            assert r.log2_m == pytest.approx(math.log2(r.m))
            if r.mean_sq_err > 0:
                assert r.log2_err == pytest.approx(math.log2(r.mean_sq_err))

    def test_full_mode_emits_theta_rows(self):
        rows, theta_rows = run_simulation(
            quick_config(),
            m_values=[6],
            trials=3,
            methods=["shape", "l2"],
            mode="full",
            sweep=QUICK_SWEEP,
            grid=QUICK_GRID,
            workers=1,
        )
        assert len(rows) == 2
        assert len(theta_rows) == 2
        for tr in theta_rows:
            assert tr.mean_sq_theta_err >= 0.0

    def test_deterministic_against_worker_count(self):
        kwargs = dict(
            m_values=[5, 6],
            trials=6,
            methods=["shape", "l2"],
            mode="known",
            sweep=QUICK_SWEEP,
            grid=QUICK_GRID,
        )
        serial, _ = run_simulation(quick_config(), workers=1, **kwargs)
        pooled, _ = run_simulation(quick_config(), workers=2, **kwargs)
        for a, b in zip(serial, pooled):
            assert a.method == b.method and a.m == b.m
            assert a.mean_sq_err == b.mean_sq_err
            assert a.trials_used == b.trials_used
            assert a.trials_excluded == b.trials_excluded

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            run_simulation(quick_config(), [5], 0, ["shape"], workers=1)
        with pytest.raises(ValueError):
            run_simulation(quick_config(), [5], 1, ["newton"], workers=1)
        with pytest.raises(ValueError):
            run_simulation(quick_config(), [5], 1, ["shape"], mode="sideways", workers=1)


class TestCsvOutput:
    def test_byte_stable_except_timing(self, tmp_path):
        paths = []
        for run in (0, 1):
            rows, _ = run_simulation(
                quick_config(),
                m_values=[5, 6],
                trials=4,
                methods=["shape", "l2"],
                mode="known",
                sweep=QUICK_SWEEP,
                grid=QUICK_GRID,
                workers=1,
            )
            p = tmp_path / f"out{run}.csv"
            write_simulation_csv(rows, str(p))
            paths.append(p)
        a = [line.split(",") for line in paths[0].read_text().splitlines()]
        b = [line.split(",") for line in paths[1].read_text().splitlines()]
        assert a[0] == SIMULATION_CSV_HEADER
        timing_col = SIMULATION_CSV_HEADER.index("median_ms")
        for ra, rb in zip(a, b):
            for i, (va, vb) in enumerate(zip(ra, rb)):
                if i != timing_col:
                    assert va == vb

    def test_dat_blocks(self, tmp_path):
        rows, _ = run_simulation(
            quick_config(),
            m_values=[5, 6],
            trials=2,
            methods=["shape", "l2"],
            mode="known",
            sweep=QUICK_SWEEP,
            grid=QUICK_GRID,
            workers=1,
        )
        p = tmp_path / "out.dat"
        write_dat(rows, str(p))
        text = p.read_text()
        assert "# method=shape" in text and "# method=l2" in text
        assert "\n\n\n" in text  # gnuplot index separator

    def test_theta_csv(self, tmp_path):
        rows, theta_rows = run_simulation(
            quick_config(),
            m_values=[6],
            trials=2,
            methods=["shape"],
            mode="full",
            sweep=QUICK_SWEEP,
            grid=QUICK_GRID,
            workers=1,
        )
        p = tmp_path / "theta.csv"
        write_theta_csv(theta_rows, str(p))
        header = p.read_text().splitlines()[0]
        assert header == "method,M,trials_used,mean_sq_theta_err"


class TestRunBench:
    def test_rows(self):
        rows = run_bench(quick_config(), [20, 40], reps=3)
        assert [r.m for r in rows] == [20, 40]
        for r in rows:
            assert r.median_ms > 0.0
            assert r.ms_per_point == pytest.approx(r.median_ms / r.m)
            assert 0 < r.max_vertices <= 64

    def test_csv(self, tmp_path):
        rows = run_bench(quick_config(), [10], reps=1)
        p = tmp_path / "bench.csv"
        write_bench_csv(rows, str(p))
        lines = p.read_text().splitlines()
        assert lines[0] == "M,median_ms,ms_per_point,max_vertices"
        assert len(lines) == 2


class TestRunEstimate:
    def test_region_report_for_shape(self, world50):
        scene = generate(quick_config())
        report = run_estimate(scene, "shape", "known", QUICK_SWEEP, QUICK_GRID, world50)
        est = report.estimate
        er = (est.t_x_hat - scene.true_pose.t_x) ** 2 + (
            est.t_z_hat - scene.true_pose.t_z
        ) ** 2
        assert report.sq_location_error == pytest.approx(er, rel=1e-12)
        assert report.region is not None
        assert len(report.region.region) >= 3

    def test_baseline_report_has_no_region(self, world50):
        scene = generate(quick_config())
        report = run_estimate(scene, "l2", "known", QUICK_SWEEP, QUICK_GRID, world50)
        assert report.region is None
        assert report.sq_orientation_error is None


class TestCli:
    def estimate_args(self, scene_path, method="shape", mode="known"):
        return [
            "estimate",
            "--scene",
            str(scene_path),
            "--method",
            method,
            "--mode",
            mode,
            "--coarse-k",
            "360",
            "--fine-k",
            "128",
            "--grid",
            "16,16,32",
            "--grid-bounds=-6,6",
        ]

    def test_estimate_reports_matching_error(self, tmp_path, capsys):
        scene = generate(quick_config())
        path = tmp_path / "scene.json"
        save_scene(scene, str(path))
        assert main(self.estimate_args(path)) == 0
        out = capsys.readouterr().out
        fields = {}
        for line in out.splitlines():
            if "=" in line and line.startswith(("estimate:", "sq_location_error")):
                for token in line.replace("estimate: ", "").split():
                    k, _, v = token.partition("=")
                    fields[k] = v
        t_x_hat = float(fields["t_x_hat"])
        t_z_hat = float(fields["t_z_hat"])
        reported = float(fields["sq_location_error"])
        recomputed = (t_x_hat - scene.true_pose.t_x) ** 2 + (
            t_z_hat - scene.true_pose.t_z
        ) ** 2
        assert reported == pytest.approx(recomputed, rel=1e-12)

    def test_estimate_prints_region_polygon(self, tmp_path, capsys):
        # Three points seen by a 6-pixel camera: the printed consistency
        # region is a genuine polygon.
        from shape_pnp import CameraModel

        cam6 = CameraModel(f=1.0, n=6, tau=2.0)
        scene = generate(SceneConfig(seed=0, num_points=3, camera=cam6))
        path = tmp_path / "scene6.json"
        save_scene(scene, str(path))
        assert main(self.estimate_args(path)) == 0
        out = capsys.readouterr().out
        assert len([ln for ln in out.splitlines() if ln.startswith("vertex:")]) >= 3

    def test_estimate_malformed_json_exits_2(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(self.estimate_args(path)) == 2

    def test_estimate_missing_file_exits_2(self, tmp_path):
        assert main(self.estimate_args(tmp_path / "nope.json")) == 2

    def test_estimate_known_mode_without_pose_exits_2(self, tmp_path):
        scene = generate(quick_config())
        d = scene_to_dict(scene)
        d["pose"] = None
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(d))
        assert main(self.estimate_args(path)) == 2

    def test_estimate_inconsistent_scene_exits_3(self, tmp_path):
        scene = generate(quick_config())
        d = scene_to_dict(scene)
        # Duplicate a point but report it in a far-away pixel.
        d["points"].append(d["points"][0])
        d["observations"].append(d["observations"][0] + 0.5)
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(d))
        assert main(self.estimate_args(path)) == 3

    def test_simulate_writes_csv(self, tmp_path, capsys):
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config_to_dict(quick_config())))
        out_path = tmp_path / "out.csv"
        dat_path = tmp_path / "out.dat"
        code = main(
            [
                "simulate",
                "--config",
                str(cfg_path),
                "--m-min",
                "5",
                "--m-max",
                "6",
                "--trials",
                "3",
                "--methods",
                "shape",
                "--seed",
                "77",
                "--out",
                str(out_path),
                "--dat",
                str(dat_path),
                "--coarse-k",
                "360",
                "--fine-k",
                "128",
                "--grid",
                "16,16,32",
            ]
        )
        assert code == 0
        with open(out_path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert rows[0]["method"] == "shape"
        assert dat_path.exists()

    def test_simulate_bad_config_exits_2(self, tmp_path):
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text('{"seed": 1}')
        assert (
            main(
                ["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "o.csv")]
            )
            == 2
        )

    def test_bench_writes_csv(self, tmp_path):
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config_to_dict(quick_config())))
        out_path = tmp_path / "bench.csv"
        code = main(
            [
                "bench",
                "--config",
                str(cfg_path),
                "--m",
                "10,20",
                "--reps",
                "2",
                "--out",
                str(out_path),
            ]
        )
        assert code == 0
        assert out_path.read_text().splitlines()[0] == "M,median_ms,ms_per_point,max_vertices"

    def test_bench_rejects_unsorted_m(self, tmp_path):
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config_to_dict(quick_config())))
        assert (
            main(
                [
                    "bench",
                    "--config",
                    str(cfg_path),
                    "--m",
                    "20,10",
                    "--out",
                    str(tmp_path / "b.csv"),
                ]
            )
            == 2
        )

    def test_module_entry_point(self, tmp_path):
        scene = generate(quick_config())
        path = tmp_path / "scene.json"
        save_scene(scene, str(path))
        proc = subprocess.run(
            [sys.executable, "-m", "shape_pnp"] + self.estimate_args(path),
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "estimate:" in proc.stdout
