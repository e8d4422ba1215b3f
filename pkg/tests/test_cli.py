"""Config ingestion, scenario orchestration, artifact schemas, exit codes."""

import numpy as np
import pytest

import chemoblow as cb
import chemoblow.cli as cli
from chemoblow.errors import ConfigError
from chemoblow.radial import make_state
from chemoblow.verify import bump_initial_state

BASE = (
    "n = 3\nR = 1.0\nk = 1.0\nsigma = 2.0\n"
    "M_lo = 8.0\nM_hi = 16.0\nmode = blowup\n"
)


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestConfig:
    def test_full_config(self, tmp_path):
        cfg = cli.config_from_file(write_cfg(
            tmp_path, BASE + "scenario = certify-only\nM = 64\nNs = 300\n"))
        assert cfg.scenario == "certify-only"
        assert cfg.M == 64 and cfg.Ns == 300
        assert cfg.Nt == 256  # default

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown"):
            cli.config_from_file(write_cfg(tmp_path, BASE + "scenario = blowup\nq = 1\n"))

    def test_bad_scenario(self, tmp_path):
        with pytest.raises(ConfigError, match="scenario"):
            cli.config_from_file(write_cfg(tmp_path, BASE + "scenario = dance\n"))

    def test_sweep_requires_sigma_list(self, tmp_path):
        with pytest.raises(ConfigError, match="sigma_list"):
            cli.config_from_file(write_cfg(tmp_path, BASE + "scenario = sweep\n"))

    def test_scenario_override(self, tmp_path):
        cfg = cli.config_from_file(
            write_cfg(tmp_path, BASE + "scenario = blowup\n"),
            scenario_override="certify-only")
        assert cfg.scenario == "certify-only"


class TestScenarios:
    def test_certify_only(self, tmp_path):
        path = write_cfg(tmp_path, BASE + "scenario = certify-only\nNs = 256\nNt = 128\n")
        out = tmp_path / "out"
        code = cli.main(["--config", str(path), "--out", str(out)])
        assert code == 0
        for name in ("spec.txt", "certificate.txt", "certificate.csv",
                     "residual_grid.csv", "verdict.txt", "plot.py"):
            assert (out / name).exists(), name
        verdict = (out / "verdict.txt").read_text()
        assert verdict.startswith("scenario=certify-only sigma=2.0 n=3 pass=true")
        profile = (out / "profiles_mid.csv").read_text().strip().splitlines()
        assert profile[0] == "s,uU,uU_t,uU_s,uU_ss,uW,uW_t,uW_s,uW_ss,side"
        sides = {line.rsplit(",", 1)[1] for line in profile[1:]}
        assert sides == {"inner", "outer"}  # samples straddle the kink

    def test_blowup_pipeline_artifacts(self, tmp_path):
        path = write_cfg(tmp_path, BASE + (
            "scenario = blowup\nM = 128\nNs = 256\nNt = 128\ndt_min = 1e-7\n"))
        out = tmp_path / "out"
        code = cli.main(["--config", str(path), "--out", str(out)])
        assert code == 0
        for name in ("run.csv", "ordering.csv", "ordering.txt", "verdict.txt",
                     "initial_data.txt", "mass_initial.csv", "overlay_0.csv",
                     "checkpoint_first.csv", "checkpoint_last.csv"):
            assert (out / name).exists(), name
        assert "pass=true" in (out / "verdict.txt").read_text()
        assert "w_sup_ok = false" in (out / "initial_data.txt").read_text()

    def test_probe_scenario(self, tmp_path):
        cfg = (BASE.replace("sigma = 2.0", "sigma = 1.0")
                   .replace("mode = blowup", "mode = simulate")
               + "scenario = subcritical-probe\nM = 64\nt_end = 1.0\ndt_min = 1e-10\n")
        out = tmp_path / "out"
        code = cli.main(["--config", str(write_cfg(tmp_path, cfg)), "--out", str(out)])
        assert code == 0
        assert "pass=true" in (out / "verdict.txt").read_text()

    def test_missing_config_is_usage_error(self, tmp_path):
        assert cli.main(["--config", str(tmp_path / "nope.cfg")]) == 1

    def test_unknown_key_is_usage_error(self, tmp_path):
        path = write_cfg(tmp_path, BASE + "scenario = blowup\nwhat = 1\n")
        assert cli.main(["--config", str(path)]) == 1

    def test_sweep_rows_and_critical_case(self, tmp_path):
        cfg = (
            "n = 4\nR = 1.0\nk = 1.0\nsigma = 2.0\nM_lo = 8.0\nM_hi = 16.0\n"
            "mode = simulate\nscenario = sweep\nsigma_list = 0.8, 1.0, 2.0\n"
            "M = 128\nNs = 256\nNt = 128\nt_end = 1.0\ndt_min = 1e-8\n"
        )
        out = tmp_path / "sweep"
        code = cli.main(["--config", str(write_cfg(tmp_path, cfg)), "--out", str(out)])
        assert code == 0
        rows = (out / "sweep.csv").read_text().strip().splitlines()
        assert rows[0] == "sigma,outcome,detail"
        assert rows[1].startswith("0.8,bounded")
        assert rows[2].startswith("1.0,inconclusive")  # exactly critical: 4/n
        assert rows[3].startswith("2.0,blowup")

    def test_certification_determinism(self, tmp_path):
        path = write_cfg(tmp_path, BASE + "scenario = certify-only\nNs = 256\nNt = 128\n")
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert cli.main(["--config", str(path), "--out", str(out)]) == 0
            outs.append(out)
        for fname in ("certificate.txt", "certificate.csv", "spec.txt",
                      "residual_grid.csv"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


class TestEmitOutputs:
    def test_empty_run_still_emits_valid_artifacts(self, tmp_path):
        p = cb.ModelParams(n=3, R=1.0, k=1.0, sigma=1.0, M_lo=1.0, M_hi=100.0)
        grid = cb.build_grid(p, 32)
        state = bump_initial_state(p, grid)
        report = cb.run(state, p, cb.RunControls(t_end=0.0, keep_states=True))
        cli.emit_outputs(tmp_path, cli.RunArtifacts(report=report))
        lines = (tmp_path / "run.csv").read_text().strip().splitlines()
        assert len(lines) == 2  # header + the single t = 0 row
        script = (tmp_path / "plot.py").read_text()
        compile(script, "plot.py", "exec")  # emitted script is valid python

    def test_collapse_run_sup_increases_through_last_decade(self, tmp_path):
        p = cb.ModelParams(n=3, R=1.0, k=1.0, sigma=2.0, M_lo=1.0, M_hi=1e6)
        grid = cb.build_grid(p, 128)
        u0 = 200.0 * np.exp(-((4.0 * grid.r) ** 2))
        state = make_state(grid, 0.0, u0, u0)
        report = cb.run(state, p,
                        cb.RunControls(t_end=2.0, dt_init=1e-5, dt_min=1e-10,
                                       blowup_factor=1000.0))
        assert report.blowup_flag
        cli.emit_outputs(tmp_path, cli.RunArtifacts(report=report))
        sup = report.sup_u_history
        decade = sup >= 0.1 * sup.max()
        assert np.all(np.diff(sup[decade]) > 0.0)
