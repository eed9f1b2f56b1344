import json
import os

import numpy as np
import pytest

from sqfn.cli import _CHECKS, config_hash, main, parse_config
from sqfn.errors import UsageError


def test_defaults_without_file():
    cfg = parse_config(None)
    assert cfg["operator.name"] == "laplacian"
    assert cfg["family.seed"] == "7"


def test_parse_config_file(tmp_path):
    path = tmp_path / "cfg"
    path.write_text(
        "# comment\n"
        "[operator]\n"
        "n = 128  # inline comment\n"
        "[family]\n"
        "seed = 3\n"
    )
    cfg = parse_config(str(path))
    assert cfg["operator.n"] == "128"
    assert cfg["family.seed"] == "3"


def test_parse_config_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad"
    path.write_text("[operator]\nnot a pair\n")
    with pytest.raises(UsageError, match="bad:2"):
        parse_config(str(path))
    path.write_text("key = outside\n")
    with pytest.raises(UsageError, match="outside any"):
        parse_config(str(path))
    path.write_text("[operator]\nbogus = 1\n")
    with pytest.raises(UsageError, match="operator.bogus"):
        parse_config(str(path))
    with pytest.raises(UsageError, match="cannot read"):
        parse_config(str(tmp_path / "missing"))
    with pytest.raises(UsageError, match="unknown config key"):
        parse_config(None, {"nope.nope": "1"})


def test_config_hash_stable_and_sensitive():
    a = parse_config(None)
    b = parse_config(None, {"operator.n": "128"})
    assert config_hash(a) == config_hash(parse_config(None))
    assert config_hash(a) != config_hash(b)
    assert len(config_hash(a)) == 12


def test_list_checks_and_describe(capsys):
    assert main(["list-checks"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert sorted(out) == sorted(_CHECKS)
    assert main(["describe", "spectral_identity"]) == 0
    text = capsys.readouterr().out
    assert "formula:" in text and "tolerance:" in text
    assert main(["describe", "nope"]) == 2


def test_run_writes_reports(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SQFN_OUT", str(tmp_path / "out"))
    code = main([
        "run", "--check", "finite_propagation",
        "--set", "operator.n=128",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS finite_propagation" in out
    lines = (tmp_path / "out" / "report.jsonl").read_text().splitlines()
    header = json.loads(lines[0])
    assert "config_hash" in header and "timestamp" in header
    rec = json.loads(lines[1])
    assert rec["tag"] == "finite_propagation"
    assert rec["passed"] is True
    assert rec["config_hash"] == header["config_hash"]
    csv_lines = (tmp_path / "out" / "summary.csv").read_text().splitlines()
    assert csv_lines[0].startswith("tag,value,bound,passed")
    assert csv_lines[1].startswith("finite_propagation,")


def test_run_jsonl_body_is_config_stable(tmp_path, monkeypatch):
    """Identical configurations produce byte-identical record lines."""
    bodies = []
    for sub in ("a", "b"):
        monkeypatch.setenv("SQFN_OUT", str(tmp_path / sub))
        assert main(["run", "--check", "finite_propagation",
                     "--set", "operator.n=128"]) == 0
        lines = (tmp_path / sub / "report.jsonl").read_text().splitlines()
        bodies.append(lines[1:])
    assert bodies[0] == bodies[1]


def test_run_growth_writes_dat(tmp_path, monkeypatch):
    monkeypatch.setenv("SQFN_OUT", str(tmp_path / "out"))
    code = main([
        "run", "--check", "growth_in_p",
        "--set", "operator.n=128", "--set", "family.count=8",
        "--set", "times.per_octave=4",
    ])
    assert code == 0
    dat = (tmp_path / "out" / "growth_in_p.dat").read_text().splitlines()
    assert dat[0].startswith("# growth_in_p config_hash=")
    xs = np.array([float(line.split()[0]) for line in dat[1:]])
    np.testing.assert_allclose(xs, [2, 4, 8, 16, 32])


def test_run_unknown_check_is_usage_error(capsys):
    assert main(["run", "--check", "nope"]) == 2
    assert "unknown check" in capsys.readouterr().err


def test_bad_set_syntax(capsys):
    assert main(["run", "--set", "garbage"]) == 2
    assert "--set expects" in capsys.readouterr().err


def test_kernel_bounds_rejects_hermite(capsys):
    assert main(["run", "--check", "kernel_bounds",
                 "--set", "operator.name=hermite"]) == 2
    assert "torus" in capsys.readouterr().err


def test_dump_function(tmp_path, capsys):
    out = tmp_path / "f.csv"
    code = main(["dump-function", "--index", "0", "--out", str(out),
                 "--set", "operator.n=128", "--set", "family.count=4"])
    assert code == 0
    assert out.exists() and out.read_text()
    assert main(["dump-function", "--index", "99", "--out", str(out),
                 "--set", "operator.n=128", "--set", "family.count=4"]) == 2


def test_dump_operator(tmp_path):
    out = tmp_path / "k.csv"
    code = main(["dump-operator", "--symbol", "s_h", "--t", "0.1",
                 "--out", str(out), "--set", "operator.n=64"])
    assert code == 0
    data = np.loadtxt(out, delimiter=",")
    assert data.shape == (64, 64)
    np.testing.assert_allclose(data, data.T, atol=1e-12)
