"""Command-line runner tests: exit-code contract (0 success, 2 validation
with nothing written, 1 runtime failure with a FAILED marker), flag over
config over default precedence, seed plumbing through SYNLEARN_SEED, manifest
integrity, and byte-identical replays."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest
from pytest import approx

from synlearn import Dataset, SupervisedSet
from synlearn.cli import main
from synlearn.fileio import read_csv, write_csv


def _run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path, monkeypatch):
    # every test runs in its own scratch directory; relative out_dirs and
    # the "nothing written" assertions key off it
    workdir = tmp_path / "work"
    workdir.mkdir()
    monkeypatch.chdir(workdir)
    monkeypatch.delenv("SYNLEARN_SEED", raising=False)
    return workdir


class TestParsing:
    def test_help_exits_zero_and_lists_subcommands(self, capsys):
        code, out, _ = _run(["--help"], capsys)
        assert code == 0
        for name in ("ensemble", "gmm-select", "fnn-train", "rd-sim", "gen-data"):
            assert name in out

    def test_missing_subcommand_exits_two(self, capsys):
        code, _, err = _run([], capsys)
        assert code == 2
        assert "subcommand is required" in err

    def test_unknown_subcommand_exits_two(self, capsys):
        code, _, _ = _run(["frobnicate"], capsys)
        assert code == 2

    def test_console_script_is_installed(self):
        result = subprocess.run(
            [sys.executable, "-m", "synlearn.cli", "--help"],
            capture_output=True,
            text=True,
            check=False,
        )
        assert result.returncode == 0
        assert "gmm-select" in result.stdout


class TestEnsemble:
    def test_stdout_report_without_out_dir(self, capsys, _isolated_cwd):
        code, out, _ = _run(["ensemble", "--energies", "0,1", "--beta", "1.0"], capsys)
        assert code == 0
        payload = json.loads(out)
        z = 1.0 + np.exp(-1.0)
        assert payload["partition_z"] == approx(z, rel=1e-12)
        assert payload["free_energy"] == approx(-np.log(z), rel=1e-12)
        assert sum(payload["probabilities"]) == approx(1.0, abs=1e-12)
        assert os.listdir(_isolated_cwd) == []

    def test_out_dir_writes_report_and_manifest(self, capsys, tmp_path):
        out_dir = tmp_path / "ens"
        code, _, _ = _run(
            ["ensemble", "--energies", "0,1,2", "--out-dir", str(out_dir)], capsys
        )
        assert code == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert len(report["probabilities"]) == 3
        manifest = json.loads((out_dir / "run.json").read_text())
        assert manifest["subcommand"] == "ensemble"
        assert manifest["artifacts"] == ["report.json"]
        assert manifest["config"]["energies"] == [0.0, 1.0, 2.0]
        assert "version" in manifest and "wall_time_s" in manifest

    def test_missing_energies_exits_two(self, capsys, _isolated_cwd):
        code, _, err = _run(["ensemble", "--beta", "1.0"], capsys)
        assert code == 2
        assert "energies" in err
        assert os.listdir(_isolated_cwd) == []

    def test_flag_overrides_config_overrides_default(self, capsys, tmp_path):
        cfg = _write_config(tmp_path, {"energies": [0.0, 1.0], "beta": 2.0})
        code, out, _ = _run(["ensemble", "--config", cfg], capsys)
        assert code == 0
        assert json.loads(out)["temperature"] == approx(0.5)
        code, out, _ = _run(["ensemble", "--config", cfg, "--beta", "4.0"], capsys)
        assert code == 0
        assert json.loads(out)["temperature"] == approx(0.25)

    def test_unknown_config_keys_exit_two(self, capsys, tmp_path):
        cfg = _write_config(tmp_path, {"energies": [0.0], "betta": 1.0})
        code, _, err = _run(["ensemble", "--config", cfg], capsys)
        assert code == 2
        assert "unknown config keys" in err

    @pytest.mark.parametrize(
        "content", ["not json at all", json.dumps([1, 2, 3])]
    )
    def test_malformed_config_exits_two(self, capsys, tmp_path, content):
        path = tmp_path / "bad.json"
        path.write_text(content)
        code, _, _ = _run(["ensemble", "--config", str(path)], capsys)
        assert code == 2

    def test_missing_config_file_exits_two(self, capsys, tmp_path):
        code, _, err = _run(
            ["ensemble", "--config", str(tmp_path / "absent.json")], capsys
        )
        assert code == 2
        assert "cannot read config" in err

    def test_invalid_spec_exits_two(self, capsys, _isolated_cwd):
        code, _, _ = _run(["ensemble", "--energies", "0,1", "--beta", "-1.0"], capsys)
        assert code == 2
        assert os.listdir(_isolated_cwd) == []


def _blobs_csv(tmp_path, name="blobs.csv"):
    path = str(tmp_path / name)
    rng = np.random.default_rng(0)
    points = np.vstack([rng.normal(0.0, 0.2, (10, 2)), rng.normal(2.0, 0.2, (10, 2))])
    write_csv(Dataset(points), path)
    return path


class TestGmmSelect:
    def test_requires_input(self, capsys, _isolated_cwd):
        code, _, err = _run(["gmm-select"], capsys)
        assert code == 2
        assert "input" in err
        assert os.listdir(_isolated_cwd) == []

    def test_missing_input_file_exits_two(self, capsys):
        code, _, err = _run(["gmm-select", "--input", "nope.csv"], capsys)
        assert code == 2
        assert "cannot read" in err

    # validation-only failure: k_max beyond N leaves the filesystem untouched
    def test_config_k_max_beyond_n_exits_two_writing_nothing(
        self, capsys, tmp_path, _isolated_cwd
    ):
        data_csv = _blobs_csv(tmp_path)
        cfg = _write_config(tmp_path, {"k_max": 100})
        code, _, err = _run(
            ["gmm-select", "--input", data_csv, "--config", cfg], capsys
        )
        assert code == 2
        assert "exceeds the number of samples" in err
        assert os.listdir(_isolated_cwd) == []

    def test_supervised_input_rejected(self, capsys, tmp_path):
        path = str(tmp_path / "pairs.csv")
        write_csv(SupervisedSet(np.zeros((5, 1)), np.zeros((5, 1))), path)
        code, _, err = _run(["gmm-select", "--input", path], capsys)
        assert code == 2
        assert "supervised" in err

    def test_bad_k_range_exits_two(self, capsys, tmp_path):
        data_csv = _blobs_csv(tmp_path)
        code, _, _ = _run(
            ["gmm-select", "--input", data_csv, "--k-min", "3", "--k-max", "2"], capsys
        )
        assert code == 2

    def test_writes_selection_artifacts_and_manifest(self, capsys, tmp_path):
        data_csv = _blobs_csv(tmp_path)
        out_dir = tmp_path / "sel"
        code, _, _ = _run(
            [
                "gmm-select",
                "--input",
                data_csv,
                "--k-min",
                "1",
                "--k-max",
                "2",
                "--mc-samples",
                "500",
                "--seed",
                "0",
                "--out-dir",
                str(out_dir),
            ],
            capsys,
        )
        assert code == 0
        report = json.loads((out_dir / "selection.json").read_text())
        assert report["chosen_k"] in (1, 2)
        assert [row["k"] for row in report["per_k"]] == [1, 2]
        table = (out_dir / "selection.csv").read_text().splitlines()
        assert table[0].startswith("k,converged_loglik,h_sq,kl_estimate")
        assert len(table) == 3
        manifest = json.loads((out_dir / "run.json").read_text())
        for artifact in manifest["artifacts"]:
            assert (out_dir / artifact).exists()
        assert manifest["config"]["seed"] == 0

    def test_replay_is_byte_identical(self, capsys, tmp_path):
        data_csv = _blobs_csv(tmp_path)
        dirs = [tmp_path / "a", tmp_path / "b"]
        for out_dir in dirs:
            args = [
                "gmm-select",
                "--input",
                data_csv,
                "--k-max",
                "2",
                "--mc-samples",
                "500",
                "--seed",
                "7",
                "--out-dir",
                str(out_dir),
            ]
            assert _run(args, capsys)[0] == 0
        for name in ("selection.csv", "selection.json"):
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()


class TestFnnTrain:
    def test_requires_exactly_one_source(self, capsys, tmp_path):
        code, _, err = _run(["fnn-train"], capsys)
        assert code == 2
        assert "exactly one" in err
        data_csv = str(tmp_path / "d.csv")
        write_csv(SupervisedSet(np.zeros((4, 1)), np.zeros((4, 1))), data_csv)
        code, _, _ = _run(
            ["fnn-train", "--data", data_csv, "--task", "sinc"], capsys
        )
        assert code == 2

    def test_pil_writes_model_and_summary(self, capsys, tmp_path):
        out_dir = tmp_path / "pil"
        code, _, _ = _run(
            [
                "fnn-train",
                "--task",
                "sinc",
                "--n",
                "30",
                "--trainer",
                "pil",
                "--h",
                "0.5",
                "--hidden",
                "6",
                "--seed",
                "3",
                "--out-dir",
                str(out_dir),
            ],
            capsys,
        )
        assert code == 0
        model = json.loads((out_dir / "model.json").read_text())
        assert np.asarray(model["w_in"]).shape == (6, 1)
        assert np.asarray(model["w_out"]).shape == (1, 6)
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["trainer"] == "pil"
        assert summary["h_final"] == 0.5
        assert summary["total_final"] >= 0.0
        assert not (out_dir / "loss_trace.csv").exists()

    def test_gd_writes_loss_trace(self, capsys, tmp_path):
        out_dir = tmp_path / "gd"
        code, _, _ = _run(
            [
                "fnn-train",
                "--task",
                "linear",
                "--n",
                "20",
                "--epochs",
                "3",
                "--lr",
                "1e-3",
                "--hidden",
                "4",
                "--out-dir",
                str(out_dir),
            ],
            capsys,
        )
        assert code == 0
        lines = (out_dir / "loss_trace.csv").read_text().splitlines()
        assert lines[0] == "epoch,total_loss,h"
        assert len(lines) == 5
        manifest = json.loads((out_dir / "run.json").read_text())
        assert sorted(manifest["artifacts"]) == [
            "loss_trace.csv",
            "model.json",
            "summary.json",
        ]

    def test_trains_from_csv_data(self, capsys, tmp_path):
        data_csv = str(tmp_path / "pairs.csv")
        rng = np.random.default_rng(1)
        x = rng.uniform(-1.0, 1.0, (25, 1))
        write_csv(SupervisedSet(x, np.sin(x)), data_csv)
        out_dir = tmp_path / "fit"
        code, _, _ = _run(
            [
                "fnn-train",
                "--data",
                data_csv,
                "--trainer",
                "pil",
                "--h",
                "0",
                "--hidden",
                "8",
                "--out-dir",
                str(out_dir),
            ],
            capsys,
        )
        assert code == 0
        assert (out_dir / "model.json").exists()

    def test_dataset_without_targets_rejected(self, capsys, tmp_path):
        data_csv = str(tmp_path / "x.csv")
        write_csv(Dataset(np.zeros((5, 2))), data_csv)
        code, _, err = _run(["fnn-train", "--data", data_csv], capsys)
        assert code == 2
        assert "z\\*" in err or "z*" in err

    @pytest.mark.parametrize(
        "extra",
        [
            ["--trainer", "pil", "--h", "auto"],
            ["--h", "fast"],
            ["--h", "-1"],
            ["--hidden", "0"],
            ["--lr", "-0.5"],
            ["--epochs", "-2"],
        ],
    )
    def test_invalid_options_exit_two(self, capsys, extra, _isolated_cwd):
        code, _, _ = _run(["fnn-train", "--task", "sinc"] + extra, capsys)
        assert code == 2
        assert os.listdir(_isolated_cwd) == []


class TestRdSim:
    def test_gradient_flow_writes_metrics_and_snapshots(self, capsys, tmp_path):
        cfg = _write_config(
            tmp_path,
            {
                "mode": "gradient-flow-1d",
                "grid": 16,
                "dx": 0.5,
                "init": {"kind": "homogeneous", "value": 0.3},
                "potential": "zero",
                "steps": 4,
                "snapshot_every": 2,
            },
        )
        out_dir = tmp_path / "rd"
        code, _, _ = _run(
            ["rd-sim", "--config", cfg, "--out-dir", str(out_dir)], capsys
        )
        assert code == 0
        lines = (out_dir / "metrics.csv").read_text().splitlines()
        assert lines[0] == "step,time,metric"
        assert [row.split(",")[0] for row in lines[1:]] == ["0", "2", "4"]
        for step in (0, 2, 4):
            image = out_dir / f"snap_{step:06d}.pgm"
            assert image.read_bytes().startswith(b"P5\n")
            assert (out_dir / f"snap_{step:06d}.pgm.json").exists()
        manifest = json.loads((out_dir / "run.json").read_text())
        for artifact in manifest["artifacts"]:
            assert (out_dir / artifact).exists()

    def test_gray_scott_dump_csv_round_trips(self, capsys, tmp_path):
        cfg = _write_config(
            tmp_path,
            {"grid": 8, "dx": 1.0, "steps": 2, "snapshot_every": 2, "init": {"kind": "random"}},
        )
        out_dir = tmp_path / "gs"
        code, _, _ = _run(
            ["rd-sim", "--config", cfg, "--dump-csv", "--out-dir", str(out_dir)], capsys
        )
        assert code == 0
        back = read_csv(str(out_dir / "snap_000002_v.csv"))
        assert back.points.shape == (8, 8)

    @pytest.mark.parametrize(
        "payload, message",
        [
            ({"dt_factor": 1.5}, "dt_factor"),
            ({"mode": "heat-3d"}, "unknown mode"),
            ({"init": {"kind": "stripes"}}, "unknown init kind"),
            ({"grid": [8, 8, 8]}, "grid"),
            (
                {
                    "mode": "gradient-flow-1d",
                    "potential": "cubic",
                    "init": {"kind": "homogeneous"},
                },
                "unknown potential",
            ),
            ({"init": {"kind": "seeded-square", "size": 99}, "grid": 8}, "does not fit"),
        ],
    )
    def test_validation_failures_exit_two(
        self, capsys, tmp_path, _isolated_cwd, payload, message
    ):
        cfg = _write_config(tmp_path, payload)
        code, _, err = _run(["rd-sim", "--config", cfg], capsys)
        assert code == 2
        assert message in err
        assert os.listdir(_isolated_cwd) == []

    # stiff kinetics blow up mid-run: exit 1 and a FAILED marker, not silence
    def test_runtime_blow_up_exits_one_with_marker(self, capsys, tmp_path):
        cfg = _write_config(
            tmp_path,
            {
                "grid": 8,
                "dx": 0.125,
                "kill": 1e6,
                "steps": 50,
                "init": {"kind": "homogeneous", "u": 0.5, "v": 0.25},
            },
        )
        out_dir = tmp_path / "boom"
        code, _, err = _run(
            ["rd-sim", "--config", cfg, "--out-dir", str(out_dir)], capsys
        )
        assert code == 1
        assert "non-finite field" in err
        marker = (out_dir / "FAILED").read_text()
        assert "RuntimeError" in marker


class TestGenData:
    def test_requires_exactly_one_generator(self, capsys, _isolated_cwd):
        assert _run(["gen-data"], capsys)[0] == 2
        code, _, _ = _run(
            ["gen-data", "--blobs", "k=2", "--regression", "fn=sinc"], capsys
        )
        assert code == 2
        assert os.listdir(_isolated_cwd) == []

    def test_blobs_csv_reads_back_labeled(self, capsys, tmp_path):
        out = str(tmp_path / "two.csv")
        code, _, _ = _run(
            ["gen-data", "--blobs", "k=2", "n=5", "sigma=0.3", "seed=1", "--out", out],
            capsys,
        )
        assert code == 0
        back = read_csv(out)
        assert back.points.shape == (10, 2)
        assert sorted(set(back.labels)) == [0, 1]
        manifest = json.loads((tmp_path / "run.json").read_text())
        assert manifest["config"]["kind"] == "blobs"
        assert manifest["config"]["sigma"] == 0.3

    def test_blob_defaults_fill_unset_keys(self, capsys, tmp_path):
        out_dir = tmp_path / "defaults"
        code, _, _ = _run(["gen-data", "--blobs", "--out-dir", str(out_dir)], capsys)
        assert code == 0
        back = read_csv(str(out_dir / "blobs.csv"))
        assert back.points.shape == (300, 2)
        manifest = json.loads((out_dir / "run.json").read_text())
        assert manifest["config"]["k"] == 3
        assert manifest["config"]["sep"] == 8.0
        assert manifest["config"]["sigma"] == 0.2

    def test_regression_csv_reads_back_supervised(self, capsys, tmp_path):
        out = str(tmp_path / "reg.csv")
        code, _, _ = _run(
            ["gen-data", "--regression", "fn=linear", "n=7", "noise=0", "--out", out],
            capsys,
        )
        assert code == 0
        back = read_csv(out)
        assert isinstance(back, SupervisedSet)
        assert np.array_equal(back.targets, back.inputs)

    @pytest.mark.parametrize(
        "token, message",
        [
            ("k", "expected key=value"),
            ("k=two", "bad value"),
            ("clusters=3", "unknown key"),
        ],
    )
    def test_malformed_tokens_exit_two(self, capsys, token, message, _isolated_cwd):
        code, _, err = _run(["gen-data", "--blobs", token], capsys)
        assert code == 2
        assert message in err
        assert os.listdir(_isolated_cwd) == []

    def test_replay_is_byte_identical(self, capsys, tmp_path):
        paths = [str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]
        for path in paths:
            args = ["gen-data", "--blobs", "k=2", "n=20", "seed=5", "--out", path]
            assert _run(args, capsys)[0] == 0
        assert open(paths[0], "rb").read() == open(paths[1], "rb").read()


class TestSeedPlumbing:
    def test_env_seed_fills_default(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("SYNLEARN_SEED", "42")
        out_env = str(tmp_path / "env.csv")
        assert _run(["gen-data", "--blobs", "k=2", "n=6", "--out", out_env], capsys)[0] == 0
        assert json.loads((tmp_path / "run.json").read_text())["config"]["seed"] == 42
        monkeypatch.delenv("SYNLEARN_SEED")
        out_flag = str(tmp_path / "flag.csv")
        assert _run(
            ["gen-data", "--blobs", "k=2", "n=6", "seed=42", "--out", out_flag], capsys
        )[0] == 0
        assert open(out_env, "rb").read() == open(out_flag, "rb").read()

    def test_explicit_seed_beats_env(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("SYNLEARN_SEED", "42")
        out = str(tmp_path / "explicit.csv")
        assert _run(
            ["gen-data", "--blobs", "k=2", "n=6", "seed=3", "--out", out], capsys
        )[0] == 0
        assert json.loads((tmp_path / "run.json").read_text())["config"]["seed"] == 3

    def test_unset_env_defaults_to_zero(self, capsys, tmp_path):
        out = str(tmp_path / "zero.csv")
        assert _run(["gen-data", "--blobs", "k=2", "n=6", "--out", out], capsys)[0] == 0
        assert json.loads((tmp_path / "run.json").read_text())["config"]["seed"] == 0
