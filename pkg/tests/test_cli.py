"""Tests for the branched command-line interface."""

import json
from unittest.mock import patch

import pytest
from click.testing import CliRunner

from branched.cli import main
from branched.core.reproduce import TableReport, load_reference_tables
from branched.integrations import create_file_store


@pytest.fixture
def runner():
    return CliRunner()


def test_help_lists_commands(runner):
    """Test the group help names every subcommand."""
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in (
        "spectrum",
        "quantize",
        "perturb",
        "classical",
        "polycheck",
        "scan",
        "eigenfunction",
        "table",
        "potential",
        "sweep",
    ):
        assert command in result.output


def test_spectrum_harmonic_limit_json(runner):
    """Test k = 0 prints 15, 35, 55 as JSON on stdout."""
    result = runner.invoke(
        main,
        ["spectrum", "--omega", "10", "--k", "0", "--eps", "0.25", "--levels", "3", "--out", "-"],
    )
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert len(data["spectra"]) == 1
    assert data["spectra"][0]["energies"] == pytest.approx([15.0, 35.0, 55.0], abs=1e-5)
    assert data["spectra"][0]["params"]["branch"] == "plus"


def test_spectrum_both_branches_csv(runner, tmp_path):
    """Test --branch both writes one CSV row per branch and level."""
    out = tmp_path / "levels.csv"
    result = runner.invoke(
        main,
        ["spectrum", "--branch", "both", "--levels", "2", "--grid-n", "1000",
         "--out", str(out), "--format", "csv"],
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0] == "branch,n,energy,est_error"
    assert len(lines) == 5
    assert lines[1].startswith("plus,0,")
    assert lines[3].startswith("minus,0,")


def test_spectrum_prints_table(runner):
    """Test the console table is printed without --out."""
    result = runner.invoke(main, ["spectrum", "--levels", "1", "--grid-n", "1000"])
    assert result.exit_code == 0, result.output
    assert "est. error" in result.output


def test_invalid_option_is_usage_error(runner):
    """Test a negative epsilon is rejected with exit code 2."""
    result = runner.invoke(main, ["spectrum", "--eps", "-1"])
    assert result.exit_code == 2


def test_quantize_requires_epsilon_one_quarter(runner):
    """Test a domain error from the core maps to exit code 2."""
    result = runner.invoke(main, ["quantize", "--eps", "0.5"])
    assert result.exit_code == 2
    assert "epsilon = 1/4" in result.output


def test_quantize_csv(runner):
    """Test the quantize CSV columns and harmonic roots."""
    result = runner.invoke(
        main, ["quantize", "--k", "0", "--levels", "2", "--out", "-", "--format", "csv"]
    )
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == "branch,n,mu,energy,residual"
    assert lines[1].startswith("plus,0,1.0,15.0")


def test_perturb_csv(runner):
    """Test the perturbative table on stdout."""
    result = runner.invoke(
        main, ["perturb", "--eps", "0.5", "--levels", "3", "--out", "-", "--format", "csv"]
    )
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == "n,e0,delta_plus,e1_plus,e1_minus"
    assert len(lines) == 4


def test_classical_json(runner):
    """Test the measured period and the Hamiltonian comparison."""
    result = runner.invoke(
        main, ["classical", "--amplitudes", "1", "--periods", "2", "--out", "-"]
    )
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    run = data["runs"][0]
    assert run["period"] == pytest.approx(data["expected_period"], rel=1e-6)
    assert run["branch"] == "plus"
    assert run["branch_crossings"] == 0
    assert run["energy_drift"] < 1e-8


def test_classical_writes_trajectory(runner, tmp_path):
    """Test --trajectory writes the first amplitude's samples."""
    path = tmp_path / "orbit.csv"
    result = runner.invoke(
        main,
        ["classical", "--amplitudes", "0.1,5", "--no-hamiltonian", "--trajectory", str(path),
         "--out", "-", "--format", "csv"],
    )
    assert result.exit_code == 0, result.output
    assert path.read_text().splitlines()[0] == "t,x,v"
    assert result.output.splitlines()[0] == "amplitude,period,relative_error"


def test_classical_rejects_bad_amplitudes(runner):
    """Test a malformed amplitude list is a usage error."""
    result = runner.invoke(main, ["classical", "--amplitudes", "one,two"])
    assert result.exit_code == 2


def test_polycheck_emden(runner):
    """Test f = kx with k = 1 is compatible with L = -2/9."""
    result = runner.invoke(main, ["polycheck", "k*x", "--set", "k=1", "--omega-sq", "100"])
    assert result.exit_code == 0, result.output
    assert "g(x) = 100*x + 1/9*x^3" in result.output
    assert "compatible, L = -2/9" in result.output


def test_polycheck_incompatible_json(runner):
    """Test f = x + 1 is reported incompatible."""
    result = runner.invoke(main, ["polycheck", "x + 1", "--out", "-"])
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["compatible"] is False
    assert data["verdict"] == "incompatible"
    assert data["chiellini_constant"] is None


def test_polycheck_parse_error(runner):
    """Test an unknown symbol is a usage error."""
    result = runner.invoke(main, ["polycheck", "q*x"])
    assert result.exit_code == 2


def test_scan_summary(runner):
    """Test the degree-1 scan and the affine certificate."""
    result = runner.invoke(main, ["scan", "--max-degree", "1"])
    assert result.exit_code == 0, result.output
    assert "tested 8 polynomials up to degree 1" in result.output
    assert "certified" in result.output


def test_eigenfunction_csv(runner):
    """Test the eigenfunction is written as xi,phi."""
    result = runner.invoke(
        main, ["eigenfunction", "--level", "1", "--grid-n", "1000", "--out", "-"]
    )
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == "xi,phi"
    assert len(lines) == 1002


def test_potential_csv(runner):
    """Test the potential table columns."""
    result = runner.invoke(main, ["potential", "--xi-max", "5", "--points", "5", "--out", "-"])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == "xi,v_plus,v_minus"
    assert len(lines) == 6


def test_table_passes(runner, tmp_path):
    """Test the perturbative table is reproduced with exit code 0."""
    out = tmp_path / "table3.json"
    result = runner.invoke(main, ["table", "3", "--out", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert data["passed"] is True
    assert "max |deviation|" in result.output


def test_table_deviation_exit_code(runner, tmp_path):
    """Test a deviation beyond tolerance exits with code 4."""
    reference = load_reference_tables()["3"]
    failing = TableReport(
        reference=reference,
        plus=reference.plus,
        minus=reference.minus,
        max_deviation=1.0,
        splitting_deviation=0.0,
    )
    with patch("branched.cli.reproduce_table", return_value=failing):
        result = runner.invoke(main, ["table", "3", "--out", str(tmp_path / "t.json")])
    assert result.exit_code == 4
    assert "deviates beyond its tolerance" in result.output


def test_sweep_stores_levels(runner, tmp_path):
    """Test the sweep writes both branches per k to DuckDB."""
    db = tmp_path / "sweep.duckdb"
    result = runner.invoke(
        main,
        ["sweep", "--k-values", "0.5,1", "--levels", "2", "--grid-n", "1000",
         "--db", str(db), "--run-id", "test", "--out", "-"],
    )
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["run_id"] == "test"
    assert len(data["spectra"]) == 4

    store = create_file_store(db)
    frame = store.fetch_spectra("test")
    store.close()
    assert frame.height == 8
    assert sorted(set(frame["k"].to_list())) == [0.5, 1.0]


def test_config_file_defaults(runner, tmp_path):
    """Test option defaults come from the config file and flags override them."""
    config = tmp_path / "branched.json"
    config.write_text(json.dumps({"spectrum": {"k": 0, "levels": 2, "grid-n": 1000}}))
    result = runner.invoke(main, ["--config", str(config), "spectrum", "--out", "-"])
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["spectra"][0]["energies"] == pytest.approx([15.0, 35.0], abs=1e-3)
    assert data["spectra"][0]["grid"]["n_points"] == 1000

    result = runner.invoke(
        main, ["--config", str(config), "spectrum", "--levels", "1", "--out", "-"]
    )
    assert result.exit_code == 0, result.output
    assert len(json.loads(result.output)["spectra"][0]["energies"]) == 1


def test_bad_config_file(runner, tmp_path):
    """Test a malformed config file is a usage error."""
    config = tmp_path / "bad.json"
    config.write_text("[1, 2]")
    result = runner.invoke(main, ["--config", str(config), "spectrum"])
    assert result.exit_code == 2
