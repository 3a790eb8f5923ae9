"""CLI contract: subcommands, exit codes, deterministic outputs."""

import json
import subprocess
import sys

import pytest

from sicluster.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NO_PATH, EXIT_RESOURCE, main
from sicluster.lattice import DonorLattice, predicted_edge_set, standard_protocol


def run_cli(args):
    return main(list(args))


class TestBuildCluster:
    def test_2x2_statevector_matches_predictor(self, tmp_path):
        out = tmp_path / "o"
        rc = run_cli(["build-cluster", "--size", "2x2", "--protocol", "standard",
                      "--backend", "statevector", "--seed", "7",
                      "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "cluster.json").read_text())
        got = {tuple(e) for e in doc["edges"]}
        want = predicted_edge_set(DonorLattice(2, 2), standard_protocol())
        assert got == want
        report = json.loads((out / "report.json").read_text())
        assert report["backend"] == "statevector"
        assert report["graph"]["edges"] == 3

    def test_byte_identical_given_config_and_seed(self, tmp_path):
        blobs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            rc = run_cli(["build-cluster", "--size", "3x3", "--protocol", "square",
                          "--seed", "13", "--out", str(out)])
            assert rc == 0
            blobs.append((out / "report.json").read_bytes()
                         + (out / "cluster.json").read_bytes()
                         + (out / "cluster.dot").read_bytes())
        assert blobs[0] == blobs[1]

    def test_malformed_json_config(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"lx": 2,\n  "ly": }')
        rc = run_cli(["build-cluster", "--config", str(cfg)])
        assert rc == EXIT_CONFIG

    def test_malformed_json_reports_line_column(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"lx": 2,\n  "ly": }')
        run_cli(["build-cluster", "--config", str(cfg)])
        err = capsys.readouterr().err
        assert "line 2" in err and "column" in err

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"lx": 2, "ly": 2, "qubits": 7}')
        assert run_cli(["build-cluster", "--config", str(cfg)]) == EXIT_CONFIG

    def test_statevector_cap_exit_code(self, tmp_path):
        rc = run_cli(["build-cluster", "--size", "4x3", "--backend", "statevector",
                      "--out", str(tmp_path / "o")])
        assert rc == EXIT_RESOURCE

    def test_custom_protocol_steps_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "lx": 2, "ly": 2, "seed": 3,
            "protocol": [
                {"op": "prepare_all_plus"},
                {"op": "global_cphase"},
                {"op": "shuttle", "direction": "+x"},
                {"op": "global_cphase"},
                {"op": "measure_electrons", "basis": "Y"},
            ],
        }))
        rc = run_cli(["build-cluster", "--config", str(cfg), "--out",
                      str(tmp_path / "o")])
        assert rc == 0
        doc = json.loads((tmp_path / "o" / "cluster.json").read_text())
        assert {tuple(e) for e in doc["edges"]} == {(0, 2), (1, 3)}

    def test_100x100_square_stabilizer_completes(self, tmp_path):
        out = tmp_path / "big"
        rc = run_cli(["build-cluster", "--size", "100x100", "--protocol", "square",
                      "--backend", "stabilizer", "--seed", "0",
                      "--out", str(out), "--format", "json"])
        assert rc == 0
        doc = json.loads((out / "cluster.json").read_text())
        assert len(doc["vertices"]) == 10000
        # interior square-lattice adjacency: vertex (i,j)=(50,50) has 4 nbrs
        centre = 50 * 100 + 50
        deg = sum(1 for e in doc["edges"] if centre in e)
        assert deg == 4

    def test_with_noise_flag(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "lx": 2, "ly": 2, "seed": 1,
            "defects": {"p_init_n": 0.5}}))
        rc = run_cli(["build-cluster", "--config", str(cfg), "--with-noise",
                      "--out", str(tmp_path / "o")])
        assert rc == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert any(e[0] == "init_x_flip" for e in report["error_log"])


class TestVerifyProtocol:
    def test_passes_and_has_skip_rows(self, tmp_path):
        out = tmp_path / "v.txt"
        rc = run_cli(["verify-protocol", "--seed", "1", "--out", str(out)])
        assert rc == 0
        text = out.read_text()
        assert "SKIP" in text
        assert "FAIL " not in text

    def test_negative_control(self, tmp_path):
        rc = run_cli(["verify-protocol", "--selftest-negate-predictor",
                      "--out", str(tmp_path / "v.txt")])
        assert rc == EXIT_CHECK_FAILED


class TestPulse:
    def test_default_rows(self, tmp_path):
        out = tmp_path / "sweep.csv"
        rc = run_cli(["pulse", "--theta", "pi", "--omega1", "inst,25",
                      "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "theta,omega1_hz,fidelity,duration_s"
        inst = lines[1].split(",")
        assert float(inst[2]) > 1 - 1e-10
        finite = lines[2].split(",")
        assert float(finite[3]) == pytest.approx(40e-9, rel=1e-9)

    def test_empty_grid(self):
        assert run_cli(["pulse", "--theta", "", "--omega1", "25"]) == EXIT_CONFIG

    def test_bad_theta(self):
        assert run_cli(["pulse", "--theta", "banana", "--omega1", "25"]) == EXIT_CONFIG


class TestMbqc:
    def test_builtin_wire_report(self, tmp_path):
        out = tmp_path / "r.json"
        rc = run_cli(["mbqc", "--cluster", "line:3", "--builtin", "wire:3",
                      "--seed", "5", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["channel_distance"] < 1e-9
        assert doc["distance_ok"] is True

    def test_rotation_builtin(self, tmp_path):
        out = tmp_path / "r.json"
        rc = run_cli(["mbqc", "--cluster", "line:5", "--builtin",
                      "rotation:0.4,-0.9,1.3", "--seed", "2", "--out", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())["channel_distance"] < 1e-9

    def test_pattern_file_roundtrip(self, tmp_path):
        from sicluster.mbqc import wire_pattern

        pf = tmp_path / "pattern.json"
        pf.write_text(wire_pattern(3).to_json())
        out = tmp_path / "r.json"
        rc = run_cli(["mbqc", "--cluster", "line:3", "--pattern", str(pf),
                      "--target", "identity", "--seed", "1", "--out", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())["channel_distance"] < 1e-9

    def test_missing_pattern_file(self):
        assert run_cli(["mbqc", "--cluster", "line:3",
                        "--pattern", "/nonexistent.json"]) == EXIT_CONFIG

    def test_invalid_pattern_file(self, tmp_path):
        pf = tmp_path / "bad.json"
        pf.write_text("{]")
        assert run_cli(["mbqc", "--cluster", "line:3",
                        "--pattern", str(pf)]) == EXIT_CONFIG

    def test_carve_success(self, tmp_path):
        out = tmp_path / "r.json"
        rc = run_cli(["mbqc", "--cluster", "grid:3x3", "--carve", "0:6",
                      "--seed", "3", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["carve"]["path"] == [0, 3, 6]
        assert doc["identity_wire_distance"] < 1e-9

    def test_carve_blocked_exit_4(self):
        rc = run_cli(["mbqc", "--cluster", "grid:3x3", "--carve", "0:8",
                      "--dead-vertices", "1,3,4,5,7"])
        assert rc == EXIT_NO_PATH

    def test_exported_protocol_graph_feeds_mbqc(self, tmp_path):
        out = tmp_path / "o"
        assert run_cli(["build-cluster", "--size", "4x4", "--protocol", "square",
                        "--seed", "3", "--out", str(out),
                        "--format", "json"]) == 0
        report = tmp_path / "carve.json"
        rc = run_cli(["mbqc", "--cluster", f"file:{out}/cluster.json",
                      "--strip-ops", "--carve", "0:12", "--seed", "1",
                      "--out", str(report)])
        assert rc == 0
        doc = json.loads(report.read_text())
        assert doc["carve"]["path"][0] == 0 and doc["carve"]["path"][-1] == 12
        if "identity_wire_distance" in doc:
            assert doc["identity_wire_distance"] < 1e-9


class TestTiming:
    def test_table_values(self, tmp_path):
        out = tmp_path / "t.csv"
        rc = run_cli(["timing", "--n", "1,10000", "--mode", "both",
                      "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "N,mode,seconds"
        table = {(r.split(",")[0], r.split(",")[1]): float(r.split(",")[2])
                 for r in lines[1:] if not r.startswith("#")}
        assert table[("10000", "sequential")] == pytest.approx(1.001e-4, rel=1e-9)
        assert table[("10000", "parallel")] == pytest.approx(2.1e-6, rel=1e-9)
        assert table[("1", "sequential")] == pytest.approx(1.1e-6, rel=1e-9)
        assert "figure_of_merit" in lines[-1]
        assert "100000.0" in lines[-1]


class TestSurvey:
    def test_survey_report(self, tmp_path):
        out = tmp_path / "s.json"
        rc = run_cli(["survey", "--size", "10x10", "--dead-fraction", "0.05",
                      "--seed", "4", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["dead"] == 5
        assert doc["n_sites"] == 100

    def test_deterministic(self, tmp_path):
        outs = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            run_cli(["survey", "--size", "8x8", "--dead-fraction", "0.1",
                     "--seed", "9", "--out", str(path)])
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]


class TestHelpAndEntrypoint:
    def test_help_exits_zero(self):
        assert run_cli(["--help"]) == 0
        for sub in ("build-cluster", "pulse", "mbqc", "timing", "survey",
                    "verify-protocol"):
            assert run_cli([sub, "--help"]) == 0

    def test_no_command_is_config_error(self):
        assert run_cli([]) == EXIT_CONFIG

    def test_subprocess_smoke(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "sicluster.cli", "timing", "--n", "100"],
            capture_output=True, text=True, timeout=180)
        assert proc.returncode == 0
        assert "N,mode,seconds" in proc.stdout
