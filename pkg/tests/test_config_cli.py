import math
import os
import subprocess
import sys

import pytest

from kerrkitten import __version__
from kerrkitten.cli import main
from kerrkitten.config import parse_config, parse_time
from kerrkitten.errors import ConfigError

CAT = """\
# even cat with one added photon
alpha = 2
r = 0.5
c = 1
kappa = 1
delta = 1
points_per_axis = 121
"""


def write(tmp_path, text, name="run.cfg"):
    out = tmp_path / "out"
    path = tmp_path / name
    path.write_text(text + f"output_dir = {out}\n")
    return path, out


def manifest(out):
    # keys like delta_r[sigma=0.6] contain "=", values never do
    return dict(line.rsplit("=", 1) for line in (out / "manifest.txt").read_text().splitlines())


class TestParse:
    def test_values(self):
        cfg = parse_config(CAT + "times = 0, pi/8, 3*pi/16\nsigma = 0.5, 0.8\ndamping = phase\ngamma = 0.5\n")
        assert cfg.params.alpha == 2 and cfg.params.kappa == 1 and cfg.params.lambda_kerr == 1.0
        assert cfg.times == (0.0, math.pi / 8, 3 * math.pi / 16)
        assert cfg.sigmas == (0.5, 0.8)
        assert cfg.damping.kind == "phase" and cfg.damping.gamma == 0.5
        assert cfg.points_per_axis == 121

    def test_digest_ignores_formatting(self):
        a = parse_config("alpha = 2\nr = 0.5\n")
        b = parse_config("# comment\nr=0.50\n\nalpha=2.0   # trailing\n")
        assert a.digest() == b.digest()
        assert a.digest() != parse_config("alpha = 2\nr = 0.4\n").digest()

    def test_time_parsing(self):
        assert parse_time("pi/8") == math.pi / 8
        assert math.isinf(parse_time("inf"))
        with pytest.raises(ConfigError):
            parse_time("-1")

    @pytest.mark.parametrize("text", [
        "alpha = 2\nbogus = 1\n",
        "alpha = 2\nalpha = 3\n",
        "alpha\n",
        "r = __import__('os')\n",
        "r = 1/0\n",
        "kappa = 1.5\n",
        "damping = thermal\n",
        "gamma = 0.5\n",
        "times = inf\n",
        "sigma = 1.5\n",
        "eps_trunc = 1e-3\n",
        "cache = maybe\n",
        "scan_start = 1\nscan_end = 0.5\n",
        "r = -1\n",
        "delta = 0\n",
    ])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)


class TestCompute:
    def test_wigner_negativity_and_files(self, tmp_path, capsys):
        path, out = write(tmp_path, CAT + "times = pi/8\n")
        assert main(["compute", "negativity", "--config", str(path)]) == 0
        m = manifest(out)
        assert float(m["delta_w"]) == pytest.approx(1.9224, abs=0.05)
        assert m["version"] == __version__ and m["config.alpha"] == "(2+0j)"
        assert os.path.exists(out / "negativity.csv")
        assert "delta_w=" in capsys.readouterr().out

    def test_rerun_with_cache_is_bit_identical(self, tmp_path):
        path, out = write(tmp_path, CAT + "times = 0.3, pi/8\n")
        assert main(["compute", "wigner", "--config", str(path)]) == 0
        first = (out / "manifest.txt").read_text()
        csv = (out / "wigner_t0.300000.csv").read_bytes()
        assert len(list((out / "cache").iterdir())) == 2
        assert main(["compute", "wigner", "--config", str(path)]) == 0
        assert (out / "manifest.txt").read_text() == first
        assert (out / "wigner_t0.300000.csv").read_bytes() == csv

    def test_vacuum_wehrl(self, tmp_path):
        path, out = write(tmp_path, "alpha = 0\nc = 0\ncache = off\n")
        assert main(["compute", "wehrl", "--config", str(path)]) == 0
        assert float(manifest(out)["s_q"]) == pytest.approx(1 + math.log(math.pi), abs=1e-3)

    def test_hs_scan_minimum(self, tmp_path):
        path, out = write(tmp_path, CAT + "scan_points_per_period = 48\n")
        assert main(["compute", "hs_scan", "--config", str(path)]) == 0
        m = manifest(out)
        assert float(m["lambda_t_min"]) == pytest.approx(math.pi / 8)
        assert float(m["d_hs_min"]) < 1e-3

    def test_tomogram_polarq_rdist(self, tmp_path):
        path, out = write(tmp_path, CAT + "times = pi/8\nx_points = 201\nphi_points = 8\nsigma = 0.6, 1\n")
        assert main(["compute", "tomogram", "--config", str(path)]) == 0
        assert float(manifest(out)["tomogram_norm_max_dev"]) < 1e-6
        assert main(["compute", "polarq", "--config", str(path)]) == 0
        assert float(manifest(out)["polarq_integral"]) == pytest.approx(1.0, abs=1e-10)
        assert main(["compute", "negativity_r", "--config", str(path)]) == 0
        m = manifest(out)
        assert float(m["delta_r[sigma=1.0]"]) == pytest.approx(0.0, abs=1e-6)
        assert float(m["delta_r[sigma=0.6]"]) > 0

    def test_damped_long_time(self, tmp_path):
        path, out = write(tmp_path, CAT + "damping = phase\ngamma = 0.5\ntimes = 1, inf\n")
        assert main(["compute", "wehrl", "--config", str(path)]) == 0
        m = manifest(out)
        assert float(m["s_q[1]"]) == pytest.approx(4.461696, abs=0.01)
        assert float(m["s_q[0]"]) < float(m["s_q[1]"])


class TestExitCodes:
    def test_config_error(self, tmp_path, capsys):
        path, _ = write(tmp_path, "alpha = 2\nnonsense = 1\n")
        assert main(["compute", "wigner", "--config", str(path)]) == 2
        assert "ConfigError" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["compute", "wigner", "--config", str(tmp_path / "none.cfg")]) == 2

    def test_under_resolved(self, tmp_path):
        path, _ = write(tmp_path, "alpha = 14\nc = 0\nhalf_width = 0.5\npoints_per_axis = 5\n")
        assert main(["compute", "wigner", "--config", str(path)]) == 3

    def test_degenerate(self, tmp_path):
        path, _ = write(tmp_path, "alpha = 0\nr = 0.3\nc = -1\nkappa = 0\n")
        assert main(["compute", "wigner", "--config", str(path)]) == 4

    def test_argparse_usage_errors(self):
        with pytest.raises(SystemExit) as exc:
            main(["compute", "nothing", "--config", "x"])
        assert exc.value.code == 2


def test_reproduce_fast_target(tmp_path):
    report = tmp_path / "r.txt"
    assert main(["reproduce", "kitten_times", "--report", str(report)]) == 0
    text = report.read_text()
    assert "PASS" in text and "FAIL" not in text


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "kerrkitten.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout
