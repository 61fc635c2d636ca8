"""Batch runner checks: spec validation, artifact round trips, exit codes."""

import json
import math
import types

import numpy as np
import pytest

from lil_lab import bounds, cli


class TestValidateSpec:
    def test_defaults_filled(self):
        spec = cli.validate_spec({"kind": "hclass", "h": "2*(LL)^1"})
        assert spec["q"] == 0.0
        assert spec["tol"] == 0.02
        assert spec["seed"] == 0
        assert spec["workers"] is None
        assert spec["format"] == "json"
        assert spec["out"] == "."

    def test_unknown_keys_rejected(self):
        with pytest.raises(cli.SpecError) as err:
            cli.validate_spec({"kind": "hclass", "h": "2*(LL)^1", "bogus": 1})
        assert err.value.context == {"unknown": ["bogus"]}

    def test_bad_kind(self):
        with pytest.raises(cli.SpecError):
            cli.validate_spec({"kind": "frobnicate"})
        with pytest.raises(cli.SpecError):
            cli.validate_spec([1, 2])

    def test_type_checks(self):
        with pytest.raises(cli.SpecError):
            cli.validate_spec({"kind": "hclass", "h": "2*(LL)^1", "seed": 1.5})
        with pytest.raises(cli.SpecError):
            cli.validate_spec({"kind": "hclass", "h": "2*(LL)^1", "seed": True})
        with pytest.raises(cli.SpecError):
            cli.validate_spec({"kind": "hclass", "h": 7})
        with pytest.raises(cli.SpecError):
            cli.validate_spec({"kind": "hclass", "h": "2*(LL)^1", "q": "zero"})

    def test_format_gate(self):
        with pytest.raises(cli.SpecError):
            cli.validate_spec({"kind": "hclass", "h": "2*(LL)^1", "format": "xml"})

    def test_int_accepted_for_float_key(self):
        spec = cli.validate_spec({"kind": "hclass", "h": "2*(LL)^1", "q": 0})
        assert spec["q"] == 0.0 and isinstance(spec["q"], float)


class TestParsers:
    def test_space(self):
        sp = cli.parse_space("5,inf")
        assert sp.dim == 5 and sp.norm_p == math.inf
        assert cli.parse_space("2,1").norm_p == 1.0
        with pytest.raises(cli.SpecError):
            cli.parse_space("2")
        with pytest.raises(cli.SpecError):
            cli.parse_space("0,2")

    def test_grid(self):
        np.testing.assert_allclose(cli.parse_grid("1:100:5"), np.geomspace(1, 100, 5))
        with pytest.raises(cli.SpecError):
            cli.parse_grid("1:100")
        with pytest.raises(cli.SpecError):
            cli.parse_grid("100:1:5")
        with pytest.raises(cli.SpecError):
            cli.parse_grid("0:1:5")


class TestArtifacts:
    def test_hclass_artifact_shape(self, tmp_path):
        rc = cli.execute({"kind": "hclass", "h": "2*(LL)^1", "q": 0.0, "out": str(tmp_path)})
        assert rc == 0
        with open(tmp_path / "hclass.json") as fh:
            doc = json.load(fh)
        # resolved spec plus seed plus the body, nothing volatile
        assert set(doc) == {"resolved_spec", "seed", "report"}
        assert doc["seed"] == 0
        assert doc["resolved_spec"]["kind"] == "hclass"
        assert doc["report"]["verdict"] == "MEMBER"
        assert doc["report"]["heuristic"] is True

    def test_vacuous_membership_has_empty_witnesses(self, tmp_path):
        cli.execute({"kind": "hclass", "h": "2*(LL)^1", "q": 1.0, "out": str(tmp_path)})
        with open(tmp_path / "hclass.json") as fh:
            doc = json.load(fh)
        assert doc["report"]["per_tau"] == []

    def test_constants_round_trip_is_byte_identical(self, tmp_path):
        spec = {
            "kind": "constants", "h": "2*(LL)^1", "H": "const:1",
            "out": str(tmp_path), "seed": 4,
        }
        assert cli.execute(spec) == 0
        path = tmp_path / "constants.json"
        first = path.read_bytes()
        assert cli.run(str(path)) == 0
        assert path.read_bytes() == first

    def test_run_override_changes_seed(self, tmp_path):
        cli.execute({"kind": "hclass", "h": "2*(LL)^1", "out": str(tmp_path)})
        path = str(tmp_path / "hclass.json")
        assert cli.main(["run", path, "--seed", "9"]) == 0
        with open(path) as fh:
            doc = json.load(fh)
        assert doc["seed"] == 9 and doc["resolved_spec"]["seed"] == 9

    def test_fn_bound_artifact(self, tmp_path):
        rc = cli.main([
            "fn-bound", "--t", "10", "--lambda-n", "4.0", "--n", "100",
            "--m-bound", "1", "--moment-s", "0", "--out", str(tmp_path),
        ])
        assert rc == 0
        with open(tmp_path / "fn_bound.json") as fh:
            doc = json.load(fh)
        assert doc["bound"] == pytest.approx(math.exp(-100.0 / 12.0))
        assert doc["poly_term"] == 0.0
        assert set(doc["constants"]) == {
            "epsilon", "D", "K_s", "C_prime", "C_dprime", "C", "rho_formula",
        }

    def test_sim_csv_side_file(self, tmp_path):
        rc = cli.main([
            "lil-sim", "--dist", "gauss:dim=1,var=1", "--space", "1,2",
            "--h", "2*(LL)^1", "--N", "400", "--trials", "3",
            "--format", "csv", "--out", str(tmp_path), "--seed", "2",
        ])
        assert rc == 0
        with open(tmp_path / "sim.json") as fh:
            doc = json.load(fh)
        assert set(doc) >= {"resolved_spec", "seed", "checkpoints", "a_values", "ratios", "limsup"}
        lines = (tmp_path / "sim_paths.csv").read_text().strip().splitlines()
        assert lines[0].startswith("# seed=2")
        assert lines[1] == "trial,n,ratio"

    def test_report_merges_and_writes_plot_script(self, tmp_path):
        cli.execute({"kind": "hclass", "h": "2*(LL)^1", "out": str(tmp_path)})
        cli.main([
            "lil-sim", "--dist", "gauss:dim=1,var=1", "--space", "1,2",
            "--h", "2*(LL)^1", "--N", "400", "--trials", "3", "--out", str(tmp_path),
        ])
        assert cli.main(["report", str(tmp_path)]) == 0
        with open(tmp_path / "summary.json") as fh:
            doc = json.load(fh)
        assert doc["present"] == ["hclass", "lil-sim"]
        assert "constants.json" in doc["missing"]
        assert "median" in doc["simulation"]
        assert (tmp_path / "plot_script.py").exists()

    def test_report_missing_dir(self, tmp_path, capsys):
        rc = cli.main(["report", str(tmp_path / "nope")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["code"] == "io_error"

    def test_report_empty_dir(self, tmp_path, capsys):
        rc = cli.main(["report", str(tmp_path)])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["code"] == "missing_artifacts"


class TestExitCodes:
    def test_validation_error_json(self, tmp_path, capsys):
        rc = cli.main(["constants", "--out", str(tmp_path)])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert set(err) == {"code", "message", "context"}
        assert "needs --h" in err["message"]

    def test_dimension_mismatch_is_exit_2(self, tmp_path, capsys):
        rc = cli.main([
            "constants", "--h", "2*(LL)^1", "--dist", "gauss:dim=2,var=1",
            "--space", "1,2", "--out", str(tmp_path),
        ])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["context"] == {"dist_dim": 2, "space_dim": 1}

    def test_bad_spec_file(self, tmp_path, capsys):
        path = tmp_path / "spec.json"
        path.write_text("{not json")
        assert cli.main(["run", str(path)]) == 2
        capsys.readouterr()
        assert cli.main(["run", str(tmp_path / "absent.json")]) == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["code"] == "io_error"

    def test_violation_exit_code(self, tmp_path, monkeypatch):
        def fake_verify(*args, **kwargs):
            row = types.SimpleNamespace(violation=True)
            return types.SimpleNamespace(
                rows=[row],
                any_violation=True,
                to_json_dict=lambda: {"any_violation": True, "rows": [
                    {"kind": "fn", "x": 1.0, "p_hat": 1.0, "se": 0.0,
                     "bound": 0.5, "violation": True},
                ]},
            )

        monkeypatch.setattr(bounds, "mc_verify", fake_verify)
        rc = cli.main([
            "fn-verify", "--dist", "rademacher:dim=2", "--space", "2,inf",
            "--n", "50", "--trials", "100", "--out", str(tmp_path),
        ])
        assert rc == 3
        with open(tmp_path / "verify.json") as fh:
            doc = json.load(fh)
        assert doc["report"]["any_violation"] is True

    def test_workers_env_does_not_change_results(self, tmp_path, monkeypatch):
        argv = [
            "lil-sim", "--dist", "gauss:dim=1,var=1", "--space", "1,2",
            "--h", "2*(LL)^1", "--N", "400", "--trials", "4",
        ]
        assert cli.main(argv + ["--out", str(tmp_path / "a")]) == 0
        monkeypatch.setenv("LIL_LAB_WORKERS", "3")
        assert cli.main(argv + ["--out", str(tmp_path / "b")]) == 0
        a = json.loads((tmp_path / "a" / "sim.json").read_text())
        b = json.loads((tmp_path / "b" / "sim.json").read_text())
        assert a["resolved_spec"]["workers"] is None
        assert b["resolved_spec"]["workers"] is None
        assert a["ratios"] == b["ratios"]
