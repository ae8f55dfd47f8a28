import json
import math

import pytest

from szegokernel.cli import main
from szegokernel.config import ConfigError, config_hash, load_config

SPHERE_INI = """\
[domain]
n = 1
order = 2
rho = m0^2 + m1^2

[point]
x = 0.6, 0.8

[quadrature]
nodes = 32
levels = 3
tol = 1e-9

[run]
k_min = 2
k_max = 8
"""


@pytest.fixture
def sphere_config(tmp_path):
	path = tmp_path / "sphere.ini"
	path.write_text(SPHERE_INI)
	return str(path)


def test_config_round_trip_and_hash(sphere_config):
	cfg = load_config(sphere_config)
	assert cfg.domain.n == 1
	assert cfg.quadrature.nodes_per_dim == 32
	assert cfg.k_min == 2 and cfg.k_max == 8
	assert cfg.route == "boundary" and cfg.workers == 1
	digest = config_hash(cfg)
	assert digest == config_hash(load_config(sphere_config))
	assert config_hash(cfg.with_overrides(nodes=64)) != digest
	assert config_hash(cfg.with_overrides(workers=4)) == digest


def test_config_rejects_bad_input(tmp_path):
	bad = tmp_path / "bad.ini"
	bad.write_text("[domain]\nn = 1\norder = 2\nrho = m0^2 + m1^2\n[typo]\nx = 1\n")
	with pytest.raises(ConfigError):
		load_config(str(bad))
	bad.write_text("[domain]\nn = 1\norder = 0\nrho = m0^2 + m1^2\n")
	with pytest.raises(ConfigError):
		load_config(str(bad))
	bad.write_text("[domain]\nn = 1\norder = 2\nrho = m0^2 + m1^2\n[point]\nx = 1, 2, 3\n")
	with pytest.raises(ConfigError):
		load_config(str(bad))
	with pytest.raises(ConfigError):
		load_config(str(tmp_path / "missing.ini"))


def test_validate_command(sphere_config, tmp_path, capsys):
	assert main(["validate", sphere_config]) == 0
	out = capsys.readouterr().out
	assert "domain valid" in out
	assert "euler_identities: ok" in out
	bad = tmp_path / "open.ini"
	bad.write_text("[domain]\nn = 1\norder = 2\nrho = m0^2 - m1^2\n")
	assert main(["validate", str(bad)]) == 1
	assert "FAIL" in capsys.readouterr().out


def test_norms_csv_matches_closed_form(sphere_config, capsys):
	assert main(["norms", sphere_config, "--k-max", "4"]) == 0
	lines = capsys.readouterr().out.strip().splitlines()
	meta = [l for l in lines if l.startswith("#")]
	assert meta[0].startswith("# szegokernel ")
	assert any(l.startswith("# config_hash = ") for l in meta)
	body = [l for l in lines if not l.startswith("#")]
	assert body[0] == "k,j0,j1,norm,log_norm,rel_err"
	rows = [l.split(",") for l in body[1:]]
	assert len(rows) == sum(k + 1 for k in range(2, 5))
	for row in rows:
		k, j0, j1 = int(row[0]), int(row[1]), int(row[2])
		assert j0 + j1 == k
		expected = 2 * math.pi ** 2 * math.factorial(j0) * math.factorial(j1) / math.factorial(k + 1)
		assert float(row[3]) == pytest.approx(expected, rel=1e-9)


def test_norms_cache_hit(sphere_config, tmp_path, capsys):
	out = tmp_path / "norms.csv"
	assert main(["norms", sphere_config, "--out", str(out)]) == 0
	first = out.read_bytes()
	assert main(["norms", sphere_config, "--out", str(out)]) == 0
	assert "skipping" in capsys.readouterr().out
	assert out.read_bytes() == first
	# a semantic change invalidates the cache and rewrites the file
	assert main(["norms", sphere_config, "--out", str(out), "--k-max", "9"]) == 0
	assert out.read_bytes() != first


def test_szego_values(sphere_config, capsys):
	assert main(["szego", sphere_config]) == 0
	body = [
		l
		for l in capsys.readouterr().out.strip().splitlines()
		if not l.startswith("#")
	]
	assert body[0] == "k,value"
	for line in body[1:]:
		k, value = line.split(",")
		assert float(value) == pytest.approx(
			(int(k) + 1) / (2 * math.pi ** 2), rel=1e-9
		)


def test_coeffs_json(sphere_config, capsys):
	assert main(["coeffs", sphere_config]) == 0
	data = json.loads(capsys.readouterr().out)
	assert data["tool_version"]
	assert data["power"] == 1
	assert data["a0"] == pytest.approx(1 / (2 * math.pi ** 2), rel=1e-10)
	assert data["a1"] == pytest.approx(1 / (2 * math.pi ** 2), rel=1e-10)


def test_verify_pass_and_route_consistency(sphere_config, capsys):
	assert main(["verify", sphere_config, "--route", "both", "--k-max", "12"]) == 0
	data = json.loads(capsys.readouterr().out)
	assert data["pass"] is True
	assert set(data["reports"]) == {"boundary", "projective"}
	assert data["route_consistency"] < 1e-8
	report = data["reports"]["boundary"]
	assert report["rel_a0"] < 1e-6
	assert len(report["ks"]) == 11


def test_verify_failure_exit_code(tmp_path, capsys):
	ini = tmp_path / "strict.ini"
	ini.write_text(
		"[domain]\nn = 1\norder = 2\nrho = m0^2 + 4*m1^2\n"
		"[point]\nx = 0.6, 0.4\n"
		"[quadrature]\nnodes = 32\n"
		"[run]\nk_min = 4\nk_max = 10\ntol_a0 = 1e-9\ntol_a1 = 1e-9\n"
	)
	assert main(["verify", str(ini)]) == 1
	assert json.loads(capsys.readouterr().out)["pass"] is False


def test_usage_errors_exit_two(sphere_config, tmp_path, capsys):
	assert main(["norms", str(tmp_path / "nope.ini")]) == 2
	assert main(["norms", sphere_config, "--route", "both"]) == 2
	no_point = tmp_path / "nopoint.ini"
	no_point.write_text("[domain]\nn = 1\norder = 2\nrho = m0^2 + m1^2\n")
	assert main(["szego", str(no_point)]) == 2
	assert main(["verify", sphere_config, "--k-min", "9", "--k-max", "3"]) == 2
	capsys.readouterr()


def test_starved_quadrature_exits_three(tmp_path, capsys):
	ini = tmp_path / "starved.ini"
	ini.write_text(
		"[domain]\nn = 1\norder = 2\nrho = m0^2 + 4*m1^2\n"
		"[quadrature]\nnodes = 8\nlevels = 1\ntol = 1e-15\n"
		"[run]\nk_min = 5\nk_max = 6\n"
	)
	assert main(["norms", str(ini)]) == 3
	capsys.readouterr()


def test_verify_deterministic_across_workers(sphere_config, tmp_path):
	paths = []
	for workers in (1, 2):
		out = tmp_path / f"verify_{workers}.json"
		assert (
			main(
				[
					"verify",
					sphere_config,
					"--workers",
					str(workers),
					"--out",
					str(out),
				]
			)
			== 0
		)
		paths.append(out)
	assert paths[0].read_bytes() == paths[1].read_bytes()
