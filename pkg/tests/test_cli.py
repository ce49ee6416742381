import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest
import yaml

from cdwsim import cli
from cdwsim.config import SCENARIOS, ConfigError, default_config, load_config, validate_config
from cdwsim.scenarios import compute, render_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL = {
    "single_chain_resonance": {"n_steps": 50, "record_every": 5, "grid": {"n_points": 101}},
    "stability_scan": {"grid": {"n_points": 32}, "dt_min": 1e-3, "dt_max": 1.0, "factor": 4.0, "n_steps": 50},
    "multichain_kink": {"n_points": 401, "x0": -10.0, "z0": -3.0, "n_steps": 200},
    "sine_gordon_kink": {"z_min": -10.0, "z_max": 10.0, "dz": 0.1, "dt": 0.05, "n_steps": 40},
    "tunneling_report": {"n_modes": 2, "separations": [1.0, 2.0]},
    "bogomolnyi_sweep": {"n_random": 5, "grid": {"n_points": 33, "lo": -8.0, "hi": 8.0}},
}


def write(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc) if isinstance(doc, dict) else doc)
    return path


def small_doc(scenario, **extra):
    doc = {"scenario": scenario, "seed": 1, "params": SMALL[scenario]}
    doc.update(extra)
    return doc


class TestValidation:
    def test_minimal_config_gets_defaults(self):
        cfg = validate_config("scenario: single_chain_resonance\n")
        assert cfg.params.D == 1.0
        assert cfg.params.scheme == "crank_nicolson"
        assert cfg.params.sign_variant == "standard"
        assert cfg.params.grid.n_points == 401
        assert cfg.seed == 0 and cfg.emit_svg is False
        assert cfg.output_dir == Path("out")

    def test_zero_D_names_field_and_invariant(self):
        with pytest.raises(ConfigError) as info:
            validate_config("scenario: single_chain_resonance\nparams:\n  D: 0\n")
        assert len(info.value.errors) == 1
        msg = info.value.errors[0]
        assert msg.startswith("params.D:")
        assert "D > 0" in msg

    def test_unknown_scenario_lists_all(self):
        with pytest.raises(ConfigError) as info:
            validate_config("scenario: warp_drive\n")
        text = str(info.value)
        assert all(name in text for name in SCENARIOS)

    def test_all_errors_reported(self):
        doc = "scenario: sine_gordon_kink\nseed: -1\nparams:\n  beta: 1.5\n  dz: -0.1\n  colour: red\n"
        with pytest.raises(ConfigError) as info:
            validate_config(doc)
        errs = info.value.errors
        assert any(e.startswith("seed:") for e in errs)
        assert any(e.startswith("params.beta:") and "beta < 1" in e for e in errs)
        assert any(e.startswith("params.dz:") for e in errs)
        assert any(e.startswith("params.colour:") and "unknown key" in e for e in errs)

    def test_nested_paths(self):
        with pytest.raises(ConfigError) as info:
            validate_config("scenario: single_chain_resonance\nparams:\n  grid:\n    n_points: 2\n")
        assert info.value.errors[0].startswith("params.grid.n_points:")

    def test_parse_error_has_position(self):
        with pytest.raises(ConfigError) as info:
            validate_config("scenario: stability_scan\nparams:\n  dt_min: [1, 2\n")
        assert "line" in str(info.value) and "column" in str(info.value)

    def test_non_mapping_rejected(self):
        with pytest.raises(ConfigError):
            validate_config("- a\n- b\n")

    def test_cross_field_rules(self):
        with pytest.raises(ConfigError, match="dt must be < dz"):
            validate_config("scenario: sine_gordon_kink\nparams:\n  dt: 0.1\n  dz: 0.05\n")
        with pytest.raises(ConfigError, match="dt_min"):
            validate_config("scenario: stability_scan\nparams:\n  dt_min: 1.0\n  dt_max: 0.1\n")
        with pytest.raises(ConfigError, match="hi > lo"):
            validate_config("scenario: bogomolnyi_sweep\nparams:\n  grid: {lo: 1, hi: 0}\n")

    @pytest.mark.parametrize("scenario", SCENARIOS)
    def test_shipped_configs_validate(self, scenario):
        cfg = load_config(CONFIGS / f"{scenario}.yaml")
        assert cfg.scenario == scenario

    @pytest.mark.parametrize("scenario", SCENARIOS)
    def test_defaults_exist_for_every_scenario(self, scenario):
        assert default_config(scenario).scenario == scenario

    def test_config_is_frozen(self):
        cfg = default_config("tunneling_report")
        with pytest.raises(Exception):
            cfg.seed = 3


class TestCommands:
    def test_list_scenarios(self, capsys):
        assert cli.main(["list-scenarios"]) == 0
        assert capsys.readouterr().out.split() == list(SCENARIOS)

    def test_validate(self, tmp_path, capsys):
        assert cli.main(["validate", str(write(tmp_path, small_doc("tunneling_report")))]) == 0
        assert "valid" in capsys.readouterr().out
        bad = write(tmp_path, {"scenario": "single_chain_resonance", "params": {"D": 0}}, "bad.yaml")
        assert cli.main(["validate", str(bad)]) == 2
        assert "params.D" in capsys.readouterr().err

    def test_run_writes_artifacts(self, tmp_path):
        out = tmp_path / "o"
        cfg = write(tmp_path, small_doc("sine_gordon_kink"))
        assert cli.main(["run", str(cfg), "--out", str(out), "--svg"]) == 0
        names = sorted(p.name for p in out.iterdir())
        assert "timeseries.csv" in names and "summary.json" in names
        svgs = [n for n in names if n.startswith("plot_") and n.endswith(".svg")]
        assert svgs
        for n in svgs:
            assert ET.parse(out / n).getroot().tag.endswith("svg")
        summary = json.loads((out / "summary.json").read_text())
        assert summary["status"] == "ok" and summary["scenario"] == "sine_gordon_kink"
        rows = list(csv.reader((out / "timeseries.csv").open()))
        assert rows[0] == ["step", "time", "center", "width", "winding", "energy", "l2_error"]
        assert len(rows) > 2

    def test_validation_failure_writes_nothing(self, tmp_path):
        out = tmp_path / "never"
        cfg = write(tmp_path, {"scenario": "multichain_kink", "output_dir": str(out), "params": {"m_e": -1}})
        assert cli.main(["run", str(cfg)]) == 2
        assert cli.main(["run", str(cfg), "--out", str(out)]) == 2
        assert not out.exists()

    def test_missing_file_is_io_error(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "nope.yaml")]) == 4

    def test_unwritable_output_is_io_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        cfg = write(tmp_path, small_doc("tunneling_report"))
        assert cli.main(["run", str(cfg), "--out", str(blocker / "sub")]) == 4

    def test_regime_violation_is_runtime_error(self, tmp_path, capsys):
        doc = small_doc("multichain_kink")
        doc["params"] = dict(doc["params"], delta_prime=5.0)
        assert cli.main(["run", str(write(tmp_path, doc)), "--out", str(tmp_path / "o")]) == 3
        assert "delta'" in capsys.readouterr().err

    def test_blow_up_is_runtime_error_with_step(self, tmp_path):
        doc = small_doc("single_chain_resonance")
        doc["params"] = dict(doc["params"], scheme="rk4", dt=0.5, n_steps=2000)
        out = tmp_path / "o"
        assert cli.main(["run", str(write(tmp_path, doc)), "--out", str(out)]) == 3
        summary = json.loads((out / "summary.json").read_text())
        assert summary["status"] == "error"
        assert isinstance(summary["blow_up_step"], int) and summary["blow_up_step"] > 0

    def test_negative_seed_rejected(self, tmp_path):
        cfg = write(tmp_path, small_doc("bogomolnyi_sweep"))
        assert cli.main(["run", str(cfg), "--seed", "-3"]) == 2

    def test_seed_override(self, tmp_path):
        cfg = write(tmp_path, small_doc("bogomolnyi_sweep"))
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["run", str(cfg), "--out", str(a), "--seed", "1"]) == 0
        assert cli.main(["run", str(cfg), "--out", str(b), "--seed", "2"]) == 0
        assert json.loads((b / "summary.json").read_text())["seed"] == 2
        assert (a / "timeseries.csv").read_bytes() != (b / "timeseries.csv").read_bytes()


class TestOutputs:
    @pytest.mark.parametrize("scenario", SCENARIOS)
    def test_rerun_is_byte_identical(self, scenario, tmp_path):
        cfg = write(tmp_path, small_doc(scenario, emit_svg=True))
        outs = []
        for name in ("a", "b"):
            assert cli.main(["run", str(cfg), "--out", str(tmp_path / name)]) == 0
            outs.append({p.name: p.read_bytes() for p in (tmp_path / name).iterdir()})
        assert outs[0] == outs[1]

    @pytest.mark.parametrize("scenario", SCENARIOS)
    def test_header_depends_on_scenario_only(self, scenario):
        a = validate_config(yaml.safe_dump(small_doc(scenario)))
        b = validate_config(yaml.safe_dump({"scenario": scenario, "params": SMALL[scenario], "seed": 9}))
        ha = render_csv(compute(a)).splitlines()[0]
        hb = render_csv(compute(b)).splitlines()[0]
        assert ha == hb
        assert ha.startswith("step,time")

    def test_floats_round_trip(self):
        cfg = validate_config(yaml.safe_dump(small_doc("single_chain_resonance")))
        outcome = compute(cfg)
        rows = list(csv.reader(render_csv(outcome).splitlines()))
        for got, want in zip(rows[1], outcome.rows[0]):
            if isinstance(want, float):
                assert float(got) == want

    def test_resonance_summary_flag(self, tmp_path):
        cfg = write(tmp_path, small_doc("single_chain_resonance"))
        cli.main(["run", str(cfg), "--out", str(tmp_path / "o")])
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["tunneled"] is False
        assert summary["norm_drift"] < 1e-10
