import csv

import numpy as np
import pytest

from cascadecomp.cli import main, parse_config
from cascadecomp.errors import ConfigError

HEAT_YAML = """\
kind: heat_ode
output: {out}
plant:
  mu: 10.0
  a2: [[-1.0, 0.0], [0.0, -2.0]]
  b2: [1.0, 1.0]
  c2: [1.0, 1.0]
design:
  plant_poles: [-2.0]
sim:
  dx: 2.0e-2
  dt: 1.0e-4
  t_end: {t_end}
  snapshot_stride: {stride}
  w0: sin_pi_x
  x2_0: [1.0, 1.0]
"""

DELAY_YAML = """\
kind: delay
output: {out}
plant:
  a1: [[1.0]]
  b1: [1.0]
  tau: 1.0
  k: [-2.0]
sim:
  grid: 50
  t_end: 3.0
  snapshot_stride: 1
  x1_0: [1.0]
  w0: zero
"""

CASCADE_YAML = """\
kind: cascade_fd
output: {out}
plant:
  a1: [[1.0]]
  b1: [1.0]
  c2: [[1.0]]
  a2: [[0.0]]
  b2: [1.0]
design:
  actuator_poles: [-2.0]
  plant_poles: [-1.0]
sim:
  dt: 0.01
  t_end: 10.0
  snapshot_stride: 10
  x0: [1.0, 1.0]
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def read_gains(path):
    out = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            key = (row["name"], int(row["row"]), int(row["col"]))
            out[key] = float(row["value"])
    return out


class TestParseConfig:
    def test_minimal_heat_config(self):
        cfg = parse_config(HEAT_YAML.format(out="out", t_end=1.0, stride=100))
        assert cfg.kind == "heat_ode"
        assert cfg.plant["mu"] == 10.0
        assert cfg.plant["a2"].shape == (2, 2)

    def test_missing_field_named(self):
        text = HEAT_YAML.format(out="out", t_end=1.0, stride=100).replace(
            "  b2: [1.0, 1.0]\n", ""
        )
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert any("plant.b2" in e for e in err.value.errors)

    def test_cfl_violation_cites_rule(self):
        text = HEAT_YAML.format(out="out", t_end=1.0, stride=100).replace(
            "dt: 1.0e-4", "dt: 1.0e-3"
        )
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert any("dx^2/2" in e for e in err.value.errors)

    def test_all_errors_collected(self):
        text = (
            HEAT_YAML.format(out="out", t_end=1.0, stride=100)
            .replace("  b2: [1.0, 1.0]\n", "")
            .replace("dt: 1.0e-4", "dt: 1.0e-3")
        )
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert len(err.value.errors) >= 2

    def test_syntax_error_reports_location(self):
        with pytest.raises(ConfigError) as err:
            parse_config("kind: [unclosed")
        assert "line" in err.value.errors[0]

    def test_wrong_pole_count_for_mu(self):
        text = HEAT_YAML.format(out="out", t_end=1.0, stride=100).replace(
            "plant_poles: [-2.0]", "plant_poles: [-2.0, -3.0]"
        )
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert any("plant_poles" in e for e in err.value.errors)

    def test_bad_kind_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("kind: quantum\n")


class TestSynthesize:
    def test_heat_gains_file(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(
            tmp_path, "h.yaml", HEAT_YAML.format(out=out, t_end=1.0, stride=100)
        )
        assert main(["synthesize", "--config", cfg]) == 0
        gains = read_gains(out / "gains.csv")
        lam = gains[("Lambda_N", 1, 1)]
        b = gains[("B_N", 1, 1)]
        l = gains[("L_N", 1, 1)]
        assert abs(lam - 7.5326) <= 1e-4
        assert abs(b - 0.3130) <= 2e-3
        # internal consistency: the placed block sits at the target pole
        assert abs(lam + b * l - (-2.0)) <= 1e-6

    def test_cascade_gains_file(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(tmp_path, "c.yaml", CASCADE_YAML.format(out=out))
        assert main(["synthesize", "--config", cfg]) == 0
        gains = read_gains(out / "gains.csv")
        assert abs(gains[("K2", 1, 1)] + 2.0) <= 1e-9
        assert abs(gains[("S", 1, 1)] - 1.0 / 3.0) <= 1e-9
        assert abs(gains[("K1", 1, 1)] + 6.0) <= 1e-8

    def test_deterministic_output(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(
            tmp_path, "h.yaml", HEAT_YAML.format(out=out, t_end=1.0, stride=100)
        )
        main(["synthesize", "--config", cfg])
        first = (out / "gains.csv").read_bytes()
        main(["synthesize", "--config", cfg])
        assert (out / "gains.csv").read_bytes() == first


class TestVerify:
    def test_heat_all_checks_pass(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = write(
            tmp_path, "h.yaml", HEAT_YAML.format(out=out, t_end=1.0, stride=100)
        )
        assert main(["verify", "--config", cfg]) == 0
        report = (out / "verify_report.txt").read_text()
        assert "FAIL" not in report
        assert "spectrum-separation" in report

    def test_delay_all_checks_pass(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(tmp_path, "d.yaml", DELAY_YAML.format(out=out))
        assert main(["verify", "--config", cfg]) == 0
        report = (out / "verify_report.txt").read_text()
        assert "controller-equivalence" in report
        assert "FAIL" not in report

    def test_cascade_all_checks_pass(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(tmp_path, "c.yaml", CASCADE_YAML.format(out=out))
        assert main(["verify", "--config", cfg]) == 0
        report = (out / "verify_report.txt").read_text()
        assert "similarity-residual" in report
        assert "FAIL" not in report

    def test_separation_violation_exits_2(self, tmp_path, capsys):
        # actuator eigenvalue placed exactly on the second heat mode
        bad = HEAT_YAML.format(out=tmp_path / "out", t_end=1.0, stride=100).replace(
            "a2: [[-1.0, 0.0], [0.0, -2.0]]",
            "a2: [[-12.206609902451056, 0.0], [0.0, -2.0]]",
        )
        cfg = write(tmp_path, "bad.yaml", bad)
        code = main(["verify", "--config", cfg])
        assert code == 2
        assert "separation" in capsys.readouterr().err


class TestSimulate:
    def test_heat_artifacts(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(
            tmp_path, "h.yaml", HEAT_YAML.format(out=out, t_end=0.2, stride=100)
        )
        assert main(["simulate", "--config", cfg]) == 0
        for name in ("sim.csv", "sim_snapshots.csv", "plot_lines.py", "plot_surface.py"):
            assert (out / name).exists(), name
        header = (out / "sim.csv").read_text().splitlines()[0]
        assert header == "t,energy,u,x2_1,x2_2"

    def test_cascade_has_no_surface_script(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(tmp_path, "c.yaml", CASCADE_YAML.format(out=out))
        assert main(["simulate", "--config", cfg]) == 0
        assert (out / "plot_lines.py").exists()
        assert not (out / "plot_surface.py").exists()

    def test_scripts_deterministic(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(
            tmp_path, "h.yaml", HEAT_YAML.format(out=out, t_end=0.2, stride=100)
        )
        main(["simulate", "--config", cfg])
        first = (out / "plot_surface.py").read_bytes()
        main(["simulate", "--config", cfg])
        assert (out / "plot_surface.py").read_bytes() == first

    def test_open_loop_flag(self, tmp_path):
        out = tmp_path / "out"
        text = HEAT_YAML.format(out=out, t_end=0.2, stride=100).replace(
            "  w0: sin_pi_x", "  open_loop: true\n  w0: sin_pi_x"
        )
        cfg = write(tmp_path, "h.yaml", text)
        assert main(["simulate", "--config", cfg]) == 0
        data = np.genfromtxt(out / "sim.csv", delimiter=",", names=True)
        assert np.all(data["u"] == 0.0)


class TestSpectrum:
    def test_heat_spectrum_listing(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(
            tmp_path, "h.yaml", HEAT_YAML.format(out=out, t_end=1.0, stride=100)
        )
        assert main(["spectrum", "--config", cfg]) == 0
        rows = np.genfromtxt(out / "spectrum.csv", delimiter=",", names=True)
        assert rows["re"].size == 60
        assert abs(np.max(rows["re"]) + 2.0) <= 1e-6

    def test_cascade_spectrum(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(tmp_path, "c.yaml", CASCADE_YAML.format(out=out))
        assert main(["spectrum", "--config", cfg]) == 0
        rows = np.genfromtxt(out / "spectrum.csv", delimiter=",", names=True)
        assert sorted(np.round(rows["re"], 6)) == [-2.0, -1.0]


class TestExitCodes:
    def test_validation_error_is_1(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.yaml", "kind: heat_ode\nplant: 3\nsim: {}\n")
        assert main(["verify", "--config", cfg]) == 1
        assert capsys.readouterr().err

    def test_missing_file_is_4(self, tmp_path):
        assert main(["verify", "--config", str(tmp_path / "nope.yaml")]) == 4

    def test_multiple_configs_require_batch(self, tmp_path):
        cfg = write(tmp_path, "d.yaml", DELAY_YAML.format(out=tmp_path / "o"))
        assert main(["verify", "--config", cfg, "--config", cfg]) == 1

    def test_batch_runs_all(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CASCADECOMP_THREADS", "2")
        c1 = write(tmp_path, "c1.yaml", CASCADE_YAML.format(out=tmp_path / "o1"))
        c2 = write(tmp_path, "c2.yaml", DELAY_YAML.format(out=tmp_path / "o2"))
        code = main(
            [
                "synthesize",
                "--config",
                c1,
                "--config",
                c2,
                "--batch",
                "--out",
                str(tmp_path / "base"),
            ]
        )
        assert code == 0
        assert (tmp_path / "base" / "c1" / "gains.csv").exists()
        assert (tmp_path / "base" / "c2" / "gains.csv").exists()

    def test_batch_propagates_worst_code(self, tmp_path):
        good = write(tmp_path, "good.yaml", DELAY_YAML.format(out=tmp_path / "og"))
        bad = write(tmp_path, "bad.yaml", "kind: delay\nplant: {}\nsim: {}\n")
        code = main(["verify", "--config", good, "--config", bad, "--batch"])
        assert code == 1


class TestPlotScripts:
    def test_lines_script_runs_headless(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(tmp_path, "c.yaml", CASCADE_YAML.format(out=out))
        main(["simulate", "--config", cfg])
        import matplotlib

        matplotlib.use("Agg", force=True)
        script = (out / "plot_lines.py").read_text()
        import os

        cwd = os.getcwd()
        try:
            os.chdir(out)
            exec(compile(script, "plot_lines.py", "exec"), {"__name__": "__main__"})
        finally:
            os.chdir(cwd)
        assert (out / "lines.png").exists()
