"""Tests for file formats, config validation and the command-line flow."""

import json
import subprocess
import sys

import numpy as np
import pytest

import tonewalk as tw
from tonewalk import cli, io


@pytest.fixture
def config():
    return tw.BlockConfig(n_per_block=64, n_blocks=16, sample_period=1.0)


def write_cfg(path, text):
    path.write_text(text)
    return str(path)


BASE_CFG = """\
n_per_block = 64
n_blocks = 16
sample_period = 1.0
scenario = "H1"
jump_model = "normal"
alpha = 0.05
"""


class TestSampleFiles:
    def test_round_trip_bit_exact(self, config, tmp_path):
        record = tw.generate_noise_blocks(config, 1.0, tw.substream(500, 0))
        path = tmp_path / "samples.cw"
        io.write_samples(path, record, config)
        loaded, loaded_cfg = io.read_samples(path)
        assert np.array_equal(loaded.samples, record.samples)
        assert loaded_cfg == config
        assert np.all(loaded.blocks[:-1, -1] == loaded.blocks[1:, 0])

    def test_header_mismatch_detected(self, config, tmp_path):
        record = tw.generate_noise_blocks(config, 1.0, tw.substream(501, 0))
        path = tmp_path / "samples.cw"
        io.write_samples(path, record, config)
        data = path.read_bytes()
        path.write_bytes(data[:-16])  # truncate payload
        with pytest.raises(tw.DataFormatError):
            io.read_samples(path)

    def test_missing_magic(self, tmp_path):
        path = tmp_path / "bad.cw"
        path.write_bytes(b"not a sample file\n")
        with pytest.raises(tw.DataFormatError):
            io.read_samples(path)

    def test_csv_import(self, tmp_path):
        config = tw.BlockConfig(n_per_block=8, n_blocks=2, sample_period=0.5)
        record = tw.generate_noise_blocks(config, 1.0, tw.substream(502, 0))
        lines = ["t,re,im"]
        for i, z in enumerate(record.samples):
            lines.append(f"{i * 0.5},{float(z.real)!r},{float(z.imag)!r}")
        path = tmp_path / "data.csv"
        path.write_text("\n".join(lines) + "\n")
        loaded = io.read_samples_csv(path, config)
        np.testing.assert_allclose(loaded.samples, record.samples, rtol=0, atol=0)

    def test_csv_wrong_length(self, tmp_path):
        config = tw.BlockConfig(n_per_block=8, n_blocks=2, sample_period=0.5)
        path = tmp_path / "data.csv"
        path.write_text("t,re,im\n0.0,1.0,0.0\n")
        with pytest.raises(tw.DataFormatError):
            io.read_samples_csv(path, config)

    def test_pivot_sidecar_round_trip(self, config, tmp_path):
        pivots = tw.generate_pivots(config, tw.StableRandomWalk(), tw.substream(503, 0))
        path = tmp_path / "pivots.json"
        io.write_pivots(path, pivots)
        loaded = io.read_pivots(path)
        assert np.array_equal(loaded.pivot_bins, pivots.pivot_bins)
        assert np.array_equal(loaded.pivot_freqs, pivots.pivot_freqs)
        assert np.array_equal(loaded.jumps, pivots.jumps)


class TestConfigLoading:
    def test_defaults_filled(self, tmp_path):
        cfg = io.load_config(write_cfg(tmp_path / "c.toml", BASE_CFG))
        assert cfg["n_per_block"] == 64
        assert cfg["amplitude"] == 1.0
        assert cfg["j_lags"] == 7

    def test_unknown_key_line_reported(self, tmp_path):
        text = BASE_CFG + "n_per_blok = 3\n"
        with pytest.raises(tw.ConfigError) as err:
            io.load_config(write_cfg(tmp_path / "c.toml", text))
        assert "n_per_blok" in str(err.value)
        assert ":7" in str(err.value)  # line number of the typo

    def test_missing_required_key(self, tmp_path):
        with pytest.raises(tw.ConfigError):
            io.load_config(write_cfg(tmp_path / "c.toml", 'n_per_block = 64\n'))

    def test_type_mismatch(self, tmp_path):
        text = BASE_CFG.replace("n_blocks = 16", 'n_blocks = "many"')
        with pytest.raises(tw.ConfigError):
            io.load_config(write_cfg(tmp_path / "c.toml", text))

    def test_toml_syntax_error(self, tmp_path):
        with pytest.raises(tw.ConfigError):
            io.load_config(write_cfg(tmp_path / "c.toml", "n_per_block = = 4\n"))

    def test_scenario_construction(self, tmp_path):
        cfg = io.load_config(write_cfg(tmp_path / "c.toml", BASE_CFG))
        scenario = io.scenario_from(cfg)
        assert isinstance(scenario, tw.StableRandomWalk)
        cfg["scenario"] = "H3"
        cfg["all_bin_jumps"] = True
        assert isinstance(io.scenario_from(cfg), tw.UnstableNonRW)


class TestSimulateCommand:
    def test_h0_sample_count(self, tmp_path):
        cfg = write_cfg(tmp_path / "c.toml", BASE_CFG.replace('scenario = "H1"', 'scenario = "H0"'))
        out = tmp_path / "h0.cw"
        assert cli.main(["simulate", "--config", cfg, "--seed", "5", "--out", str(out)]) == 0
        record, block = io.read_samples(out)
        assert len(record.samples) == 16 * 63 + 1
        assert not (tmp_path / "h0.cw.pivots.json").exists()

    def test_deterministic_bytes(self, tmp_path):
        cfg = write_cfg(tmp_path / "c.toml", BASE_CFG)
        out_a, out_b = tmp_path / "a.cw", tmp_path / "b.cw"
        cli.main(["simulate", "--config", cfg, "--seed", "5", "--out", str(out_a)])
        cli.main(["simulate", "--config", cfg, "--seed", "5", "--out", str(out_b)])
        assert out_a.read_bytes() == out_b.read_bytes()
        assert (
            (tmp_path / "a.cw.pivots.json").read_bytes()
            == (tmp_path / "b.cw.pivots.json").read_bytes()
        )

    def test_h1_sidecar_length(self, tmp_path):
        cfg = write_cfg(tmp_path / "c.toml", BASE_CFG)
        out = tmp_path / "h1.cw"
        cli.main(["simulate", "--config", cfg, "--seed", "6", "--out", str(out)])
        pivots = io.read_pivots(tmp_path / "h1.cw.pivots.json")
        assert len(pivots.pivot_bins) == 17
        manifest = json.loads((tmp_path / "h1.cw.manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["master_seed"] == 6

    def test_config_error_exit_code(self, tmp_path):
        cfg = write_cfg(tmp_path / "c.toml", "nonsense = true\n")
        assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "x.cw")]) == 2


class TestDetectCommand:
    def test_constant_tone_degenerate(self, tmp_path, capsys):
        config = tw.BlockConfig(n_per_block=64, n_blocks=16, sample_period=1.0)
        tone = np.exp(2j * np.pi * 5 * np.arange(config.n_record) / 64)
        record = tw.BlockRecord(samples=tone, n_per_block=64)
        path = tmp_path / "tone.cw"
        io.write_samples(path, record, config)
        cfg = write_cfg(tmp_path / "c.toml", BASE_CFG)
        code = cli.main(["detect", "--config", cfg, "--input", str(path)])
        assert code == cli.EXIT_DEGENERATE
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "error:degenerate-series"

    def test_h1_verdict_end_to_end(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path / "c.toml", BASE_CFG)
        out = tmp_path / "h1.cw"
        cli.main(["simulate", "--config", cfg, "--seed", "7", "--out", str(out)])
        capsys.readouterr()  # discard the simulate status line
        code = cli.main(["detect", "--config", cfg, "--input", str(out), "--alpha", "0.05"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "H1"
        assert len(report["peak_bins"]) == 16
        assert len(report["first_differences"]) == 15
        assert report["cvt"]["stable"] is True
        assert len(report["vr_test"]["lags"]) == 7

    def test_h0_verdict_majority_over_seeds(self, tmp_path, capsys):
        cfg_text = BASE_CFG.replace('scenario = "H1"', 'scenario = "H0"')
        cfg = write_cfg(tmp_path / "c.toml", cfg_text)
        verdicts = []
        for seed in range(40):
            out = tmp_path / f"h0_{seed}.cw"
            cli.main(["simulate", "--config", cfg, "--seed", str(seed), "--out", str(out)])
            capsys.readouterr()
            cli.main(["detect", "--config", cfg, "--input", str(out), "--alpha", "0.05"])
            verdicts.append(json.loads(capsys.readouterr().out)["verdict"])
        assert sum(v == "H0" for v in verdicts) >= 36

    def test_shape_mismatch_is_data_error(self, tmp_path):
        config = tw.BlockConfig(n_per_block=32, n_blocks=16, sample_period=1.0)
        record = tw.generate_noise_blocks(config, 1.0, tw.substream(504, 0))
        path = tmp_path / "small.cw"
        io.write_samples(path, record, config)
        cfg = write_cfg(tmp_path / "c.toml", BASE_CFG)
        assert cli.main(["detect", "--config", cfg, "--input", str(path)]) == cli.EXIT_DATA

    def test_report_written_with_manifest(self, tmp_path):
        cfg = write_cfg(tmp_path / "c.toml", BASE_CFG)
        sample = tmp_path / "h1.cw"
        cli.main(["simulate", "--config", cfg, "--seed", "8", "--out", str(sample)])
        report_path = tmp_path / "report.json"
        cli.main(
            ["detect", "--config", cfg, "--input", str(sample), "--out", str(report_path)]
        )
        report = json.loads(report_path.read_text())
        assert report["manifest"] == "report.json.manifest.json"
        assert (tmp_path / "report.json.manifest.json").exists()


ROC_CFG = """\
n_per_block = 64
n_blocks = 16
sample_period = 0.1
alphas = [0.05, 0.2, 0.5]
n_trials = 100
master_seed = 3
j_lags = 7
"""


class TestRocCommand:
    def test_smoke_runs_quickly(self, tmp_path):
        cfg = write_cfg(tmp_path / "e.toml", ROC_CFG)
        out = tmp_path / "roc.csv"
        assert cli.main(["roc", "--config", cfg, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# manifest:")
        assert lines[1] == (
            "alpha,alpha_star,pd_analytical,pd_empirical,pd_stderr,"
            "pfa_empirical,converged_flag"
        )
        assert len(lines) == 5  # comment + header + 3 grid points

    def test_analytical_only_seed_independent(self, tmp_path):
        cfg = write_cfg(tmp_path / "e.toml", ROC_CFG)
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["roc", "--config", cfg, "--out", str(out_a), "--analytical-only", "--seed", "1"])
        cli.main(["roc", "--config", cfg, "--out", str(out_b), "--analytical-only", "--seed", "99"])
        strip = lambda p: p.read_text().splitlines()[1:]  # manifest names differ
        assert strip(out_a) == strip(out_b)

    def test_empirical_deterministic(self, tmp_path):
        cfg = write_cfg(tmp_path / "e.toml", ROC_CFG.replace("n_trials = 100", "n_trials = 30"))
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["roc", "--config", cfg, "--out", str(out_a)])
        cli.main(["roc", "--config", cfg, "--out", str(out_b)])
        assert out_a.read_text().splitlines()[1:] == out_b.read_text().splitlines()[1:]

    def test_trials_override(self, tmp_path):
        cfg = write_cfg(tmp_path / "e.toml", ROC_CFG)
        out = tmp_path / "roc.csv"
        cli.main(["roc", "--config", cfg, "--out", str(out), "--trials", "20"])
        manifest = json.loads((tmp_path / "roc.csv.manifest.json").read_text())
        assert manifest["config"]["n_trials"] == 100  # config file value echoed
        assert manifest["config"]["n_trials_used"] == 20  # effective override recorded


STUDY_CFG = """\
n_per_block = 64
n_blocks = 16
sample_period = 1.0
n_trials = 40
master_seed = 4
j_lags = 7
dof_n_grid = [16, 32]
esterr_sweep_param = "n_blocks"
esterr_values = [12, 16]
"""


class TestStudyCommand:
    def test_unknown_kind_is_usage_error(self, tmp_path):
        cfg = write_cfg(tmp_path / "s.toml", STUDY_CFG)
        code = cli.main(["study", "--kind", "banana", "--config", cfg, "--out", str(tmp_path / "x.csv")])
        assert code == cli.EXIT_CONFIG

    def test_dof_table(self, tmp_path):
        cfg = write_cfg(tmp_path / "s.toml", STUDY_CFG)
        out = tmp_path / "dof.csv"
        assert cli.main(["study", "--kind", "dof", "--config", cfg, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[1].split(",")[:3] == ["n_per_block", "jump_model", "mean_dof"]
        assert len(lines) == 2 + 2 * 2  # two N values x two jump models

    def test_esterr_table(self, tmp_path):
        cfg = write_cfg(tmp_path / "s.toml", STUDY_CFG)
        out = tmp_path / "err.csv"
        assert cli.main(["study", "--kind", "esterr", "--config", cfg, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 2 + 2


class TestMoreCliPaths:
    def test_detect_csv_input(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path / "c.toml", BASE_CFG)
        block = tw.BlockConfig(n_per_block=64, n_blocks=16, sample_period=1.0)
        pivots = tw.generate_pivots(block, tw.StableRandomWalk(), tw.substream(9, 0))
        record = tw.synthesize_blocks(
            pivots, tw.SignalParams(1.0, 1.0), block, tw.substream(9, 1)
        )
        lines = ["t,re,im"] + [
            f"{i},{float(z.real)!r},{float(z.imag)!r}"
            for i, z in enumerate(record.samples)
        ]
        path = tmp_path / "ext.csv"
        path.write_text("\n".join(lines) + "\n")
        code = cli.main(["detect", "--config", cfg, "--input", str(path), "--csv-input"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "H1"

    def test_sidak_exponent_flag_changes_level(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path / "c.toml", BASE_CFG)
        out = tmp_path / "h1.cw"
        cli.main(["simulate", "--config", cfg, "--seed", "10", "--out", str(out)])
        capsys.readouterr()
        cli.main(["detect", "--config", cfg, "--input", str(out)])
        plain = json.loads(capsys.readouterr().out)
        cli.main(
            ["detect", "--config", cfg, "--input", str(out), "--sidak-exponent", "J+1"]
        )
        variant = json.loads(capsys.readouterr().out)
        assert variant["alpha_star"] == pytest.approx(tw.sidak(0.05, 8), rel=1e-12)
        assert variant["alpha_star"] < plain["alpha_star"]

    @pytest.mark.parametrize(
        "scenario_lines",
        [
            'scenario = "H2"\nrho = 0.9\n',
            'scenario = "H3"\nrho = 1.05\n',
            'scenario = "H3"\nall_bin_jumps = true\n',
        ],
    )
    def test_simulate_other_scenarios(self, tmp_path, scenario_lines):
        text = BASE_CFG.replace('scenario = "H1"\njump_model = "normal"\n', scenario_lines)
        cfg = write_cfg(tmp_path / "c.toml", text)
        out = tmp_path / "rec.cw"
        assert cli.main(["simulate", "--config", cfg, "--seed", "3", "--out", str(out)]) == 0
        pivots = io.read_pivots(tmp_path / "rec.cw.pivots.json")
        assert len(pivots.pivot_bins) == 17

    def test_workers_env_var_does_not_change_study(self, tmp_path, monkeypatch):
        from tonewalk.experiments import dof_convergence_study

        cfg = tw.ExperimentConfig(
            config=tw.BlockConfig(32, 16, 1.0),
            params=tw.SignalParams(1.0, 1.0),
            j_lags=7,
            alphas=(0.05,),
            n_trials=24,
            master_seed=77,
        )
        serial = dof_convergence_study(cfg, [16], jump_models=[tw.JumpModel.ROUNDED_NORMAL])
        monkeypatch.setenv("TONEWALK_WORKERS", "2")
        pooled = dof_convergence_study(cfg, [16], jump_models=[tw.JumpModel.ROUNDED_NORMAL])
        assert serial == pooled


class TestEntryPoint:
    def test_installed_script(self):
        proc = subprocess.run(
            [sys.executable, "-m", "tonewalk.cli", "--version"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "tonewalk" in proc.stdout
