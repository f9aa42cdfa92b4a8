import json

import pytest

from ultraconv.cli import main


@pytest.fixture
def out(tmp_path, monkeypatch):
    d = tmp_path / "results"
    monkeypatch.setenv("QK_OUTPUT_DIR", str(d))
    return d


def _record(out, prefix):
    (path,) = [p for p in out.glob(f"{prefix}-*.json") if not p.name.endswith(".meta.json")]
    return json.loads(path.read_text())


def test_seq_check(out):
    assert main(["seq", "check", "--gevrey", "1", "--pmax", "256", "--q", "2"]) == 0
    rec = _record(out, "seq-check")
    assert rec["status"] == "ok" and rec["result"]["report"]["m1"] is True
    assert rec["config"]["output"]["dir"] == str(out)
    assert (out / (next(out.glob("seq-check-*.json")).name.split(".")[0] + ".meta.json")).exists()


def test_param_delta_with_config(out, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seq.generator=factorial\ngrid.x_max=32\ntol.delta=1e-6\n")
    assert main(["param", "delta", "--config", str(cfg), "--phi", "gaussian(0,1)"]) == 0
    rec = _record(out, "param-delta")
    assert rec["result"]["residual"] <= 1e-6 and rec["result"]["pass"] is True
    assert "seq.generator=factorial" in rec["config"]["seq"]


def test_conv_check_fails_is_data(out):
    assert main(["conv", "check", "--f1", "const(1)", "--f2", "const(1)"]) == 0
    assert _record(out, "conv-check")["result"]["verdict"] == "fails"


def test_domain_error_exit_1(out):
    assert main(["seq", "check", "--gevrey", "-1"]) == 1
    rec = _record(out, "seq-check")
    assert rec["status"] == "error" and rec["result"]["code"] == "invalid-sequence"


@pytest.mark.parametrize("argv", [
    ["seq", "nope"],
    ["conv", "check", "--f1", "gauss(0,1)", "--f2", "const(1)"],
    ["conv", "check", "--f1", "const(1)"],
    [],
])
def test_usage_errors_exit_2(out, argv, capsys):
    assert main(argv) == 2
    assert not out.exists() or not list(out.glob("*.json"))


def test_bad_config_exit_2(out, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("tol.kernel=-1\n")
    assert main(["seq", "check", "--config", str(cfg)]) == 2


def test_out_flag_and_env_override(tmp_path, monkeypatch):
    monkeypatch.delenv("QK_OUTPUT_DIR", raising=False)
    a = tmp_path / "a"
    assert main(["seq", "assoc", "--rho", "1,2", "--out", str(a)]) == 0
    assert list(a.glob("seq-assoc-*.json"))
    b = tmp_path / "b"
    monkeypatch.setenv("QK_OUTPUT_DIR", str(b))
    assert main(["seq", "assoc", "--rho", "1,2", "--out", str(a)]) == 0
    assert list(b.glob("seq-assoc-*.json"))


def test_deterministic_records(out):
    argv = ["seq", "subordinate", "--random", "40"]
    assert main(argv) == 0
    (p,) = [q for q in out.glob("seq-subordinate-*.json") if not q.name.endswith(".meta.json")]
    first = p.read_bytes()
    assert main(argv) == 0
    assert p.read_bytes() == first


def test_sidecar_csv(out):
    assert main(["gs", "seminorm", "--phi", "gaussian(0,1)", "--alpha-cap", "10"]) == 0
    rec = _record(out, "gs-seminorm")
    (csv,) = rec["files"]
    lines = (out / csv).read_text().splitlines()
    assert lines[0] == "alpha,sup_x" and len(lines) == 12
