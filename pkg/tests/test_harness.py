import csv
import json
import os

import numpy as np
import pytest

from tanakasim import __version__
from tanakasim.girsanov import EssCollapseError
from tanakasim.harness import ConfigError, UnknownScenarioError, list_scenarios, resolve_config, run_scenario
from tanakasim.harness.cli import main
from tanakasim.harness.config import ScenarioConfig, load_config
from tanakasim.parallel import THREADS_ENV, chunk_bounds, default_threads, map_chunks

SMALL = dict(n_paths=200, dt=1e-2)


def test_registry():
    names = [n for n, _, _ in list_scenarios()]
    for required in ("remark1-hitting", "thm1-closed-form", "thm2-absorption", "thm3-warren",
                     "thm4-occupation", "thm4-invariant", "localtime-levy", "thm5-corr", "thm5-indep",
                     "properties"):
        assert required in names
    assert len(names) == len(set(names))


class TestConfig:
    def test_precedence(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[DEFAULT]\nseed = 5\ndt = 0.5\n\n[thm4-occupation]\npaths = 300\ndt = 0.01\ntol.z_positive = 3\n")
        cfg = resolve_config("thm4-occupation", f)
        assert (cfg.seed, cfg.n_paths, cfg.dt, cfg.tol["z_positive"]) == (5, 300, 0.01, 3.0)
        cfg = resolve_config("thm4-occupation", f, n_paths=50, seed=None)
        assert (cfg.seed, cfg.n_paths) == (5, 50)
        cfg = resolve_config("thm1-closed-form", f)
        assert (cfg.seed, cfg.dt, cfg.lam) == (5, 0.5, -1.0)

    def test_aliases_and_extras(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[thm2-absorption]\nzeta = 2\nlambda = 0\nepsilon = 0.1\n")
        parsed = load_config(f, "thm2-absorption")
        assert parsed["x0"] == 2.0 and parsed["lam"] == 0.0 and parsed["extra"]["epsilon"] == 0.1

    def test_bad_value(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[thm2-absorption]\ndt = fast\n")
        with pytest.raises(ConfigError):
            resolve_config("thm2-absorption", f)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/x.ini", "thm2-absorption")

    @pytest.mark.parametrize("kw", [dict(dt=0.0), dict(n_paths=0), dict(horizon=-1.0), dict(seed=-1)])
    def test_field_validation(self, kw):
        with pytest.raises(ConfigError):
            ScenarioConfig("x", **kw)

    @pytest.mark.parametrize("name,kw", [
        ("thm5-corr", dict(eta=0.5)),
        ("thm5-indep", dict(eta=0.0)),
        ("thm3-warren", dict(lam=-1.0)),
        ("thm1-closed-form", dict(lam=1.0)),
        ("thm2-absorption", dict(lam=-1.0)),
        ("remark1-hitting", dict(x0=-1.0)),
        ("thm4-invariant", dict(lam=0.0)),
        ("thm3-warren", dict(dt=0.3)),
    ])
    def test_scenario_constraints(self, name, kw):
        with pytest.raises(ConfigError):
            resolve_config(name, **kw)

    def test_run_rejects_before_simulating(self):
        cfg = ScenarioConfig("thm5-corr", eta=0.5)
        with pytest.raises(ConfigError):
            run_scenario(cfg)

    def test_unknown(self):
        with pytest.raises(UnknownScenarioError):
            resolve_config("thm9")


class TestRuns:
    def test_report_fields(self):
        r = run_scenario(resolve_config("thm4-occupation", **SMALL), threads=1)
        d = json.loads(r.to_json())
        assert set(d) >= {"scenario", "config", "estimates", "verdicts", "duration_s", "version"}
        assert d["version"] == __version__ and d["scenario"] == "thm4-occupation"
        assert {"name", "value", "stderr", "ess"} <= set(d["estimates"][0])
        assert d["config"]["n_paths"] == 200

    def test_reproducible_and_thread_independent(self):
        cfg = resolve_config("thm4-occupation", **SMALL, extra={"chunk": 30.0})
        a = run_scenario(cfg, threads=1)
        b = run_scenario(cfg, threads=3)
        assert [e.to_dict() for e in a.estimates] == [e.to_dict() for e in b.estimates]

    def test_ess_collapse(self):
        with pytest.raises(EssCollapseError):
            run_scenario(resolve_config("thm4-occupation", lam=8.0, n_paths=1000, dt=1e-2), threads=1)

    def test_hitting_small(self):
        r = run_scenario(resolve_config("remark1-hitting", n_paths=2000, dt=1e-3, horizon=10.0), threads=1)
        assert r.passed

    def test_csv(self, tmp_path):
        r = run_scenario(resolve_config("thm4-occupation", **SMALL), threads=1)
        out = tmp_path / "p.csv"
        r.write_csv(out)
        rows = list(csv.reader(open(out)))
        assert rows[0] == ["path_index", "terminal_value", "occupation_at_zero", "weight"]
        assert len(rows) == 201 and rows[1][0] == "0"


class TestCli:
    def test_list(self, capsys):
        assert main(["list-scenarios"]) == 0
        assert "thm3-warren" in capsys.readouterr().out

    def test_unknown(self):
        assert main(["run", "nope"]) == 3

    def test_invalid_config(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[thm5-corr]\neta = 0.5\n")
        assert main(["run", "thm5-corr", "--config", str(f)]) == 2

    def test_bad_grid_flag(self):
        assert main(["run", "thm4-occupation", "--dt", "0.3"]) == 2

    def test_ess_exit(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[thm4-occupation]\nlambda = 8\n")
        assert main(["run", "thm4-occupation", "--config", str(f), "--paths", "1000", "--dt", "0.01"]) == 4

    def test_run_outputs(self, tmp_path, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "2")
        out, table = tmp_path / "r.json", tmp_path / "r.csv"
        code = main(["run", "thm4-occupation", "--paths", "300", "--dt", "0.01", "--seed", "3",
                     "--out", str(out), "--csv", str(table)])
        d = json.loads(out.read_text())
        assert code == (0 if all(v["pass"] for v in d["verdicts"]) else 1)
        assert d["config"]["seed"] == 3 and d["config"]["dt"] == 0.01
        assert table.exists()

    def test_statistical_failure_exit(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[thm4-invariant]\ntol.stationary_mean = 0\n")
        assert main(["run", "thm4-invariant", "--config", str(f), "--paths", "50", "--horizon", "2",
                     "--dt", "0.01", "--out", str(tmp_path / "r.json")]) == 1


class TestParallel:
    def test_env(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert default_threads() == 3
        monkeypatch.setenv(THREADS_ENV, "0")
        with pytest.raises(ValueError):
            default_threads()
        monkeypatch.delenv(THREADS_ENV)
        assert default_threads() == (os.cpu_count() or 1)

    def test_chunks(self):
        assert chunk_bounds(5, 2) == [(0, 2), (2, 4), (4, 5)]
        assert map_chunks(lambda a, b: list(range(a, b)), 7, 3, threads=4) == [[0, 1, 2], [3, 4, 5], [6]]
