import json

import pytest

from taxframe.accounts import load_emissions, load_household_accounts, load_sector_accounts
from taxframe.cli import cli_main
from taxframe.errors import MissingWeightsWarning
from taxframe.fiscal import TaxScenario, run_scenario

from .factories import write_emissions, write_households, write_sectors
from .table1 import TABLE1_TOTAL_DY

WEIGHTS = "urban=0.56,rural=0.44"
SIX_FILES = {
    "impact_all.csv",
    "impact_urban.csv",
    "impact_rural.csv",
    "contribution.csv",
    "lorenz_all.json",
    "diagnostics.json",
}


def fixture_args(fixture_dir, out, *extra):
    return [
        "run",
        "--sectors", str(fixture_dir / "sectors.csv"),
        "--households", str(fixture_dir / "households.csv"),
        "--scenario", str(fixture_dir / "scenario.json"),
        "--out", str(out),
        *extra,
    ]


def toy_inputs(tmp_path, **sector_overrides):
    sectors = write_sectors(tmp_path / "sectors.csv", **sector_overrides)
    households = write_households(tmp_path / "households.csv")
    write_emissions(tmp_path / "emissions.csv", {"s1": 100.0, "s2": 20.0})
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps({"label": "toy", "emissions_file": "emissions.csv"}), encoding="utf-8")
    return sectors, households, scenario


class TestRun:
    def test_writes_six_files(self, fixture_dir, tmp_path):
        out = tmp_path / "out"

        assert cli_main(fixture_args(fixture_dir, out, "--population-weights", WEIGHTS)) == 0

        assert {p.name for p in out.iterdir()} == SIX_FILES
        lorenz = json.loads((out / "lorenz_all.json").read_text())
        assert len(lorenz["knots_before"]) == 21
        assert lorenz["delta"] > 0
        diagnostics = json.loads((out / "diagnostics.json").read_text())
        assert diagnostics["regressivity"]["All"]["verdict"] == "Regressive"
        assert diagnostics["skipped_scopes"] == []

    def test_byte_identical_reruns(self, fixture_dir, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"

        assert cli_main(fixture_args(fixture_dir, first, "--population-weights", WEIGHTS)) == 0
        assert cli_main(fixture_args(fixture_dir, second, "--population-weights", WEIGHTS)) == 0

        for name in SIX_FILES:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_combined_gini_skipped_without_weights(self, fixture_dir, tmp_path, monkeypatch):
        monkeypatch.delenv("TAXFRAME_POPULATION_WEIGHTS", raising=False)
        out = tmp_path / "out"

        with pytest.warns(MissingWeightsWarning):
            assert cli_main(fixture_args(fixture_dir, out, "--population-weights", "")) == 0

        assert {p.name for p in out.iterdir()} == SIX_FILES - {"lorenz_all.json"}
        assert json.loads((out / "diagnostics.json").read_text())["skipped_scopes"] == ["All"]

    def test_regional_scope(self, fixture_dir, tmp_path):
        out = tmp_path / "out"

        assert cli_main(fixture_args(fixture_dir, out, "--scope", "urban")) == 0

        payload = json.loads((out / "lorenz_urban.json").read_text())
        assert payload["scope"] == "Urban"
        assert len(payload["knots_after"]) == 11

    def test_open_model_flag(self, fixture_dir, tmp_path):
        out = tmp_path / "out"

        assert cli_main(fixture_args(fixture_dir, out, "--open-model", "--scope", "rural")) == 0

        diagnostics = json.loads((out / "diagnostics.json").read_text())
        assert diagnostics["open_model"] is True
        assert diagnostics["induced_share"] is None

    def test_missing_scenario_flag(self, fixture_dir, tmp_path, capsys):
        args = fixture_args(fixture_dir, tmp_path / "out")
        del args[5:7]

        assert cli_main(args) == 1
        err = capsys.readouterr().err
        assert "usage:" in err
        assert "--scenario" in err

    def test_unbalanced_table(self, tmp_path, capsys):
        sectors, households, scenario = toy_inputs(tmp_path, f=[50.0, 80.0])
        args = ["run", "--sectors", str(sectors), "--households", str(households)]
        args += ["--scenario", str(scenario), "--out", str(tmp_path / "out")]

        assert cli_main(args) == 1
        err = capsys.readouterr().err
        assert "BalanceError" in err
        assert "row 2" in err

    def test_non_productive_economy(self, tmp_path, capsys):
        sectors, households, scenario = toy_inputs(
            tmp_path, Z=[[60.0, 60.0], [60.0, 60.0]], f=[-20.0, -20.0], va=[-20.0, -20.0]
        )
        args = ["run", "--sectors", str(sectors), "--households", str(households)]
        args += ["--scenario", str(scenario), "--out", str(tmp_path / "out")]

        assert cli_main(args) == 2
        assert "NonProductiveError" in capsys.readouterr().err

    def test_missing_input_file(self, tmp_path, capsys):
        sectors, _, scenario = toy_inputs(tmp_path)
        args = ["run", "--sectors", str(sectors), "--households", str(tmp_path / "absent.csv")]
        args += ["--scenario", str(scenario), "--out", str(tmp_path / "out")]

        assert cli_main(args) == 3
        assert "MissingFileError" in capsys.readouterr().err

    def test_bad_population_weights(self, fixture_dir, tmp_path, capsys):
        args = fixture_args(fixture_dir, tmp_path / "out", "--population-weights", "urban=0.5,rural=0.6")

        assert cli_main(args) == 1
        assert "ConfigError" in capsys.readouterr().err

    def test_toy_economy_runs(self, tmp_path):
        sectors, households, scenario = toy_inputs(tmp_path)

        code = cli_main(
            ["run", "--sectors", str(sectors), "--households", str(households),
             "--scenario", str(scenario), "--out", str(tmp_path / "out"), "--scope", "urban"]
        )

        assert code == 0
        assert (tmp_path / "out" / "impact_all.csv").read_text().startswith("class,y1,dy,y2,pct_dy,pct_cy\n")


class TestCalibrate:
    def test_writes_scaled_intensities(self, fixture_dir, tmp_path, capsys):
        target = tmp_path / "emissions_calibrated.csv"
        args = [
            "calibrate",
            "--sectors", str(fixture_dir / "sectors.csv"),
            "--households", str(fixture_dir / "households.csv"),
            "--scenario", str(fixture_dir / "scenario.json"),
            "--target-total", str(TABLE1_TOTAL_DY),
            "--write", str(target),
        ]

        assert cli_main(args) == 0
        assert "scale=" in capsys.readouterr().out

        accounts = load_sector_accounts(fixture_dir / "sectors.csv")
        households = load_household_accounts(fixture_dir / "households.csv", accounts.sector_ids)
        scenario = TaxScenario(load_emissions(target, accounts.sector_ids), rate=30.0)
        result = run_scenario(accounts, households, scenario)
        assert result.total_decline == pytest.approx(TABLE1_TOTAL_DY, rel=1e-9)

    def test_missing_target(self, fixture_dir, capsys):
        args = ["calibrate", "--sectors", str(fixture_dir / "sectors.csv")]

        assert cli_main(args) == 1
        assert "usage:" in capsys.readouterr().err
