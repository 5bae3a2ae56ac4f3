import csv
import json
from pathlib import Path

import pytest

from graphdual.cli.common import parse_names
from graphdual.cli.main import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, build_parser, dispatch
from graphdual.persistence.repo import MANIFEST_NAME, digest_of_file
from graphdual.schemas.models import RunManifest
from graphdual.schemas.validator import REPORT_SCHEMA, schema_errors

GOLDEN = Path(__file__).parent / "golden"


def run_cli(tmp_path, *argv):
    out = tmp_path / "out"
    code = dispatch([*argv, "--output", str(out)])
    return code, out


def read_report(out: Path) -> dict:
    document = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert schema_errors(document, REPORT_SCHEMA) == []
    return document


def read_csv(path: Path) -> list[list[str]]:
    with path.open(encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


def test_moments_matches_golden_table(tmp_path, capsys):
    code, out = run_cli(tmp_path, "moments", "--graph", "C4", "--alpha", "1", "--order", "2", "--exact")
    assert code == EXIT_OK
    report = read_report(out)
    golden = json.loads((GOLDEN / "moments_C4_alpha1_order2.json").read_text(encoding="utf-8"))
    assert report["result"]["table"] == golden
    assert report["result"]["graph"]["edges"] == [[1, 2], [1, 4], [2, 3], [3, 4]]
    assert report["seed"] is None
    assert json.loads(capsys.readouterr().out)["runId"] == report["runId"]


def test_moments_csv_table(tmp_path):
    code, out = run_cli(tmp_path, "moments", "--graph", "C4", "--alpha", "1/4", "--order", "2",
                        "--exact", "--format", "csv")
    assert code == EXIT_OK
    rows = read_csv(out / "moments.csv")
    assert rows[0] == ["a_1", "a_2", "a_3", "a_4", "value"]
    assert rows[1] == ["0", "0", "0", "0", "1/1"]
    assert len(rows) == 1 + 15


def test_time_dependent_moments(tmp_path):
    code, out = run_cli(tmp_path, "moments", "--graph", "C4", "--order", "2", "--t", "0,1")
    assert code == EXIT_OK
    tables = read_report(out)["result"]["tables"]
    assert [tab["t"] for tab in tables] == [0.0, 1.0]
    first = {tuple(row["a"]): row["value"] for row in tables[0]["rows"]}
    assert first[(1, 1, 0, 0)] == pytest.approx(1 / 16)


def test_json_format_writes_no_csv(tmp_path):
    code, out = run_cli(tmp_path, "moments", "--graph", "K3", "--alpha", "1", "--order", "1")
    assert code == EXIT_OK
    assert not (out / "moments.csv").exists()


def test_select_graph_matches_golden(tmp_path):
    code, out = run_cli(tmp_path, "select-graph", "--graphs", "S3,C4,K4", "--a", "1,0,1,0",
                        "--alpha", "0.25", "--format", "csv")
    assert code == EXIT_OK
    result = read_report(out)["result"]
    golden = json.loads((GOLDEN / "select_graph_S3_C4_K4_quarter.json").read_text(encoding="utf-8"))
    assert result["selection"] == golden
    assert result["best"] == "C4"
    rows = read_csv(out / "bayes_factors.csv")
    assert rows[0] == ["graph", "probability", "S3", "C4", "K4"]
    assert rows[2][3] == "1/1" and rows[2][2] == "2/1"


def test_select_graph_keeps_bipartite_names():
    assert parse_names("C4,K3,2,S3") == ["C4", "K3,2", "S3"]


def test_estimate_records_seed(tmp_path):
    code, out = run_cli(tmp_path, "estimate", "--graph", "C4", "--a", "1,0,1,0", "--alpha", "1",
                        "--samples", "2000", "--seed", "7", "--threads", "1", "--steps")
    assert code == EXIT_OK
    report = read_report(out)
    assert report["seed"] == {"entropy": 7, "spawn_key": []}
    est = report["result"]["estimate"]
    assert est["samples"] == 2000
    assert abs(est["mean"] - 1 / 16) < 5 * est["stdError"]
    assert report["result"]["steps"]["bound"] == pytest.approx(2 + 1 / 1)


def test_find_is_reports_one_based_sets(tmp_path):
    code, out = run_cli(tmp_path, "find-is", "--graph", "C4", "--particles", "8", "--runs", "5",
                        "--seed", "3", "--format", "csv")
    assert code == EXIT_OK
    summary = read_report(out)["result"]["summary"]
    assert summary["runs"] == 5
    assert summary["allIndependent"]
    assert summary["threshold"] == 50 * 64
    for entry in summary["sets"]:
        assert set(entry["set"]) <= {1, 2, 3, 4}
    assert len(read_csv(out / "runs.csv")) == 6


def test_simulate_dual_absorbing_run(tmp_path):
    code, out = run_cli(tmp_path, "simulate-dual", "--graph", "C4", "--start", "1,1,1,0",
                        "--paths", "200", "--export-paths", "2", "--seed", "11")
    assert code == EXIT_OK
    result = read_report(out)["result"]
    assert result["longRun"] == "absorbs_into_01"
    assert result["absorbedFraction"] == 1.0
    assert result["absorbedInto01Fraction"] == pytest.approx(1.0)
    for k in (1, 2):
        lines = (out / f"path_{k}.jsonl").read_text(encoding="utf-8").splitlines()
        assert json.loads(lines[0])["state"] == [1, 1, 1, 0]


def test_simulate_dual_needs_horizon_when_uniform(tmp_path):
    code, _ = run_cli(tmp_path, "simulate-dual", "--graph", "C4", "--start", "2,1,1,1", "--paths", "10")
    assert code == EXIT_VALIDATION


def test_simulate_sde_writes_paths(tmp_path):
    code, out = run_cli(tmp_path, "simulate-sde", "--graph", "K3", "--dt", "0.01", "--t", "0.5",
                        "--paths", "20", "--record-every", "10", "--seed", "5")
    assert code == EXIT_OK
    result = read_report(out)["result"]
    assert sum(result["finalMean"]) == pytest.approx(1.0)
    assert "supports" in result
    rows = read_csv(out / "paths.csv")
    assert rows[0] == ["path", "t", "x1", "x2", "x3"]
    assert len(rows) == 1 + 20 * 6


def test_simulate_discrete_from_particle_count(tmp_path):
    code, out = run_cli(tmp_path, "simulate-discrete", "--graph", "C4", "--particles", "8",
                        "--steps", "100", "--record-every", "10", "--seed", "2")
    assert code == EXIT_OK
    result = read_report(out)["result"]
    assert result["particles"] == 8
    assert sum(result["n0"]) == 8 and min(result["n0"]) >= 1
    assert (out / "trajectory.csv").is_file()


def test_simulate_discrete_rejects_too_few_particles(tmp_path):
    code, _ = run_cli(tmp_path, "simulate-discrete", "--graph", "C4", "--particles", "3", "--steps", "5")
    assert code == EXIT_VALIDATION


def test_spectrum(tmp_path):
    code, out = run_cli(tmp_path, "spectrum", "--graph", "C4", "--independent-sets")
    assert code == EXIT_OK
    result = read_report(out)["result"]
    assert result["eigenvalues"] == pytest.approx([0.0, 2.0, 2.0, 4.0], abs=1e-9)
    assert result["algebraicConnectivity"] == pytest.approx(2.0)
    assert result["diameter"] == 2
    assert result["independentSets"]["sets"] == [[1, 3], [2, 4]]


def test_manifest_records_drawn_seed_and_digests(tmp_path):
    code, out = run_cli(tmp_path, "simulate-discrete", "--graph", "K3", "--n0", "1,1,1", "--steps", "10")
    assert code == EXIT_OK
    manifest = RunManifest.model_validate_json((out / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert manifest.seed is not None and manifest.seed.entropy >= 0
    assert manifest.command == "simulate-discrete"
    assert set(manifest.outputs) == {"trajectory.csv", "report.json"}
    assert manifest.outputs["report.json"] == digest_of_file(out / "report.json")
    assert read_report(out)["seed"]["entropy"] == manifest.seed.entropy


@pytest.mark.parametrize("argv", [
    ["moments", "--graph", "C4", "--alpha", "1", "--order", "99", "--exact"],
    ["moments", "--graph", "C4", "--order", "2"],
    ["moments", "--graph", "C4", "--order", "2", "--colour", "blue"],
    ["moments", "--graph", "no/such/graph.json", "--alpha", "1", "--order", "2"],
    ["estimate", "--graph", "C4", "--a", "1,x", "--alpha", "1"],
    ["select-graph", "--graphs", "C4,C5", "--a", "1,0,1,0", "--alpha", "1/4"],
])
def test_invalid_input_exits_with_validation_code(tmp_path, capsys, argv):
    code, _ = run_cli(tmp_path, *argv)
    assert code == EXIT_VALIDATION
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert set(error) == {"type", "message"}


def test_unexpected_failures_exit_with_runtime_code(tmp_path, monkeypatch, capsys):
    from graphdual.cli import spectrum

    def boom(g):
        raise ArithmeticError("overflow")

    monkeypatch.setattr(spectrum, "laplacian_spectrum", boom)
    code, _ = run_cli(tmp_path, "spectrum", "--graph", "C4")
    assert code == EXIT_RUNTIME
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["type"] == "simulation_error"


def test_parser_lists_every_command():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    assert set(sub.choices) == {
        "moments", "estimate", "select-graph", "find-is",
        "simulate-dual", "simulate-sde", "simulate-discrete", "spectrum",
    }
