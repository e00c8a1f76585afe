"""End-to-end tests for the command-line surface: config resolution, artifact
contents, exit codes, and determinism of the four subcommands."""

import json

import pytest

from mbselect.cli import ALPHA_PRESETS, SCHEMA_VERSION, main
from mbselect.data import load_table


def _write_config(tmp_path, sections, name="config.json"):
    payload = {"schema_version": SCHEMA_VERSION}
    payload.update(sections)
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _simulate(tmp_path, out="sim", **overrides):
    spec = {"kind": "linear_interactions", "n": 400, "seed": 0}
    spec.update(overrides)
    cfg = _write_config(tmp_path, {"simulate": spec}, name=f"{out}_config.json")
    out_dir = tmp_path / out
    code = main(["simulate", "--config", cfg, "--out", str(out_dir)])
    assert code == 0
    return out_dir


class TestSimulate:
    def test_writes_csv_and_truth(self, tmp_path):
        out_dir = _simulate(tmp_path)
        header = (out_dir / "data.csv").read_text().splitlines()[0]
        assert header.split(",") == [f"x{i}" for i in range(51)] + ["y"]
        truth = json.loads((out_dir / "truth.json").read_text())
        assert truth["schema_version"] == SCHEMA_VERSION
        assert len(truth["true_mb"]) == 22
        assert truth["resolved_config"]["simulate"]["kind"] == "linear_interactions"
        assert truth["resolved_config"]["simulate"]["rho"] == 0.5

    def test_same_seed_byte_identical(self, tmp_path):
        first = _simulate(tmp_path, out="a")
        second = _simulate(tmp_path, out="b")
        assert (first / "data.csv").read_bytes() == (second / "data.csv").read_bytes()

    def test_complex_truth_has_22_members(self, tmp_path):
        out_dir = _simulate(tmp_path, out="cx", kind="complex", n=300)
        truth = json.loads((out_dir / "truth.json").read_text())
        assert len(truth["true_mb"]) == 22
        assert truth["roles"]["x20"] == "spouse"

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = _write_config(
            tmp_path, {"simulate": {"kind": "complex", "bogus": 1}}
        )
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_bad_kind_rejected(self, tmp_path):
        cfg = _write_config(tmp_path, {"simulate": {"kind": "cubic"}})
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli_sim")
    return tmp, _simulate(tmp)


def _run_select(tmp_path, data_csv, select_cfg, out="sel"):
    cfg = _write_config(tmp_path, {"select": select_cfg}, name=f"{out}_config.json")
    out_dir = tmp_path / out
    code = main(["select", "--config", cfg, "--data", str(data_csv), "--out", str(out_dir)])
    return code, out_dir / "report.json"


class TestSelect:
    def test_report_contents(self, sim_dir):
        tmp, out_dir = sim_dir
        code, report_path = _run_select(tmp, out_dir / "data.csv", {"target": "y"})
        assert code == 0
        report = json.loads(report_path.read_text())
        assert report["selected"] == sorted(report["selected"])
        assert report["iterations"] >= 1
        assert isinstance(report["converged"], bool)
        assert report["grouping"] == "clustered"
        assert report["runtime_s"] > 0
        grouped = [n for g in report["groups"].values() for n in g]
        assert len(grouped) == 51
        assert set(grouped) == {f"x{i}" for i in range(51)}
        resolved = report["resolved_config"]["select"]
        assert resolved["alpha"] == 1e-4
        assert resolved["rcit"]["m"] == 5
        assert resolved["ensemble_classification"]["n_trees"] == 300

    def test_deterministic_given_config(self, sim_dir):
        tmp, out_dir = sim_dir
        _, first_path = _run_select(tmp, out_dir / "data.csv", {"target": "y"}, out="d1")
        _, second_path = _run_select(tmp, out_dir / "data.csv", {"target": "y"}, out="d2")
        first = json.loads(first_path.read_text())
        second = json.loads(second_path.read_text())
        for key in ("selected", "iterations", "converged", "per_group_selected"):
            assert first[key] == second[key]

    def test_prespecified_groups_noted(self, sim_dir):
        tmp, out_dir = sim_dir
        groups = [[f"x{i}" for i in range(j, 51, 3)] for j in range(3)]
        code, report_path = _run_select(
            tmp, out_dir / "data.csv", {"target": "y", "groups": groups}, out="pg"
        )
        assert code == 0
        report = json.loads(report_path.read_text())
        assert report["grouping"] == "prespecified"
        assert report["groups"]["g0"] == groups[0]

    def test_alpha_preset(self, sim_dir):
        tmp, out_dir = sim_dir
        code, report_path = _run_select(
            tmp, out_dir / "data.csv", {"target": "y", "alpha": "real-data"}, out="ap"
        )
        assert code == 0
        report = json.loads(report_path.read_text())
        assert report["resolved_config"]["select"]["alpha"] == ALPHA_PRESETS["real-data"]

    def test_missing_target_is_usage_error(self, sim_dir, capsys):
        tmp, out_dir = sim_dir
        code, _ = _run_select(tmp, out_dir / "data.csv", {"target": "zz"}, out="mt")
        assert code == 2
        assert "zz" in capsys.readouterr().err

    def test_missing_data_flag_is_usage_error(self, sim_dir, capsys):
        tmp, _ = sim_dir
        cfg = _write_config(tmp, {"select": {"target": "y"}}, name="nodata.json")
        assert main(["select", "--config", cfg, "--out", str(tmp / "nd")]) == 2
        assert "--data" in capsys.readouterr().err

    def test_missing_data_file_is_usage_error(self, sim_dir):
        tmp, _ = sim_dir
        code, _ = _run_select(tmp, tmp / "absent.csv", {"target": "y"}, out="mf")
        assert code == 2

    def test_target_only_table_is_runtime_error(self, tmp_path):
        data = tmp_path / "only_y.csv"
        data.write_text("y\n" + "\n".join(str(float(i % 3)) for i in range(80)) + "\n")
        code, _ = _run_select(tmp_path, data, {"target": "y"}, out="oy")
        assert code == 1


class TestCalibrate:
    def test_csv_round_trip(self, tmp_path):
        cfg = _write_config(
            tmp_path,
            {"calibrate": {"cond_sizes": [0, 2], "d_values": [10, 20], "n": 300, "n_reps": 2}},
        )
        out_dir = tmp_path / "cal"
        assert main(["calibrate", "--config", cfg, "--out", str(out_dir)]) == 0
        table = load_table(out_dir / "calibration.csv")
        assert table.names == ("cond_size", "d", "fpr", "mean_runtime_s")
        assert table.n_rows == 4
        fpr = table.column("fpr").values
        assert ((fpr >= 0.0) & (fpr <= 1.0)).all()


class TestBench:
    def test_report_structure(self, tmp_path):
        cfg = _write_config(
            tmp_path,
            {
                "bench": {
                    "study": {"kind": "linear_interactions", "n": 250},
                    "n_reps": 2,
                    "select": {"max_outer_iterations": 2},
                }
            },
        )
        out_dir = tmp_path / "bench"
        assert main(["bench", "--config", cfg, "--out", str(out_dir)]) == 0
        report = json.loads((out_dir / "bench_report.json").read_text())
        assert len(report["records"]) == 2
        assert set(report["selection_frequency"]) == {f"x{i}" for i in range(51)}
        assert report["resolved_config"]["bench"]["n_reps"] == 2


class TestConfigErrors:
    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2
        assert "JSON" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        missing = str(tmp_path / "absent.json")
        assert main(["simulate", "--config", missing, "--out", str(tmp_path)]) == 2

    def test_wrong_schema_version(self, tmp_path):
        path = tmp_path / "v9.json"
        path.write_text(json.dumps({"schema_version": 9, "simulate": {"kind": "complex"}}))
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2

    def test_missing_section(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, {"simulate": {"kind": "complex"}})
        assert main(["bench", "--config", cfg, "--out", str(tmp_path)]) == 2
        assert "bench" in capsys.readouterr().err

    def test_unknown_alpha_preset(self, sim_dir):
        tmp, out_dir = sim_dir
        code, _ = _run_select(
            tmp, out_dir / "data.csv", {"target": "y", "alpha": "loose"}, out="bp"
        )
        assert code == 2

    def test_unknown_subcommand_exits_2(self, capsys):
        assert main(["explain"]) == 2
        capsys.readouterr()
