import json
import shutil
import subprocess

import pytest

from salimits.cli import EXIT_FAIL, EXIT_INFEASIBLE, EXIT_PASS, EXIT_USAGE, main
from salimits.formula import load_doc, measure_format


@pytest.fixture
def files(tmp_path):
    paths = {
        "f1": tmp_path / "f1.saf",
        "two": tmp_path / "two.saf",
        "mono": tmp_path / "mono.saf",
        "half": tmp_path / "half.saf",
        "broken": tmp_path / "broken.saf",
        "empty": tmp_path / "empty.saf",
    }
    paths["f1"].write_text("x1*(x1^2+x2^2-1) = 0\n")
    paths["two"].write_text("x1^2 + x2^2 - 1 <= 0 & x1*x2 - x1 = 0\n")
    paths["mono"].write_text("3*x1^2*x2 > 0\n")
    paths["half"].write_text("x1 <= 0\n")
    paths["broken"].write_text("x1 + = 0\n")
    paths["empty"].write_text("x1^2 + 1 = 0\n# arity: 2\n")
    return {k: str(v) for k, v in paths.items()}


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_inspect_reports_dense_format(files, capsys):
    code, out, _ = run(["--json", "inspect", files["f1"]], capsys)
    assert code == EXIT_PASS
    data = json.loads(out)
    assert data["dense"] == {"s": 1, "d": 3, "k": 2}


def test_inspect_monomial_has_zero_additive(files, capsys):
    code, out, _ = run(["--json", "inspect", files["mono"]], capsys)
    assert json.loads(out)["additive"]["a"] == 0


def test_broken_file_is_a_usage_error(files, capsys):
    code, _, err = run(["inspect", files["broken"]], capsys)
    assert code == EXIT_USAGE
    assert "line 1" in err and "column" in err


def test_limit_family_transform(tmp_path, capsys):
    out = str(tmp_path / "fam.json")
    code, _, _ = run(["transform", "limit-family", "--P", "x1^2*(x1^2+x2^2-1)", "--Q", "x1", "--arity", "2", "--R", "2", "-o", out], capsys)
    assert code == EXIT_PASS
    doc = load_doc(out)
    assert doc.meta["N"] == 3 and doc.arity == 3
    prov = json.loads(open(out + ".prov.json").read())
    assert prov["params"]["R"] == "2"


def test_diagonal_transform_dimension_and_bound(files, tmp_path, capsys):
    out = str(tmp_path / "diag.json")
    code, _, _ = run(["transform", "diagonal", files["two"], "--p", "1", "--eps", "0.01", "-o", out], capsys)
    doc = load_doc(out)
    assert doc.arity == 7
    # the clause-by-clause count exceeds the closed form by C(p+1,2)
    assert code == EXIT_FAIL
    prov = json.loads(open(out + ".prov.json").read())
    assert prov["bound_check"]["passed"] is False
    code, _, _ = run(["transform", "diagonal", files["two"], "--p", "1", "--eps", "0.01", "--bound-variant", "clause-sum", "-o", out], capsys)
    assert code == EXIT_PASS


def test_dagger_literal_mode_noted(files, tmp_path, capsys):
    out = str(tmp_path / "dag.json")
    code, _, _ = run(["transform", "dagger", files["half"], "--R", "1", "--mode", "paper-literal", "-o", out], capsys)
    assert code == EXIT_PASS
    prov = json.loads(open(out + ".prov.json").read())
    assert "paper-literal" in json.dumps(prov)


def test_transform_is_reproducible(files, tmp_path, capsys):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    run(["transform", "join", files["half"], "--p", "1", "--R", "1", "-o", a], capsys)
    run(["transform", "join", files["half"], "--p", "1", "--R", "1", "-o", b], capsys)
    assert open(a).read() == open(b).read()


def test_predict_format(capsys):
    code, out, _ = run(["--json", "predict-format", "diagonal", "--p", "1", "--k", "2", "--a", "3", "--s", "2", "--d", "2"], capsys)
    data = json.loads(out)
    assert code == EXIT_PASS
    assert (data["M"], data["M_dense"], data["N"]) == (18, 14, 7)


def test_verify_formats_negative_control(files, tmp_path, capsys):
    diag = str(tmp_path / "d0.json")
    run(["transform", "diagonal", files["half"], "--p", "0", "--eps", "0.01", "-o", diag], capsys)
    code, _, _ = run(["verify", "formats", diag, "--source", files["half"], "--construction", "diagonal", "--p", "0"], capsys)
    assert code == EXIT_PASS
    M = measure_format(load_doc(diag)).a
    code, _, _ = run(["verify", "formats", diag, "--source", files["half"], "--construction", "diagonal", "--p", "0", "--bound-M", str(M - 1)], capsys)
    assert code == EXIT_FAIL


def test_verify_convergence_slab(tmp_path, capsys):
    rep = str(tmp_path / "conv.json")
    code, _, _ = run(
        ["--tau", "0.01", "--resolution", "101", "verify", "convergence", "--P", "x1", "--Q", "1", "--F", "x1", "--arity", "2", "--R", "2", "--schedule", "0.1,0.05,0.01", "-o", rep],
        capsys,
    )
    assert code == EXIT_PASS
    assert json.loads(open(rep).read())["passed"] is True


def test_verify_dagger_detects_literal(files, capsys):
    assert run(["verify", "dagger", files["half"], "--R", "1"], capsys)[0] == EXIT_PASS
    assert run(["verify", "dagger", files["half"], "--R", "1", "--mode", "paper-literal"], capsys)[0] == EXIT_FAIL


def test_verify_lift(files, capsys):
    assert run(["--resolution", "41", "verify", "lift", files["two"], "--samples", "100"], capsys)[0] == EXIT_PASS


def test_infeasible_sandwich_has_its_own_code(files, capsys):
    code, _, _ = run(["--resolution", "21", "verify", "sandwich", files["empty"], "--f", "x1,0", "--p", "1", "--R", "1", "--eps", "0.05"], capsys)
    assert code == EXIT_INFEASIBLE


def test_export_is_byte_identical(files, tmp_path, capsys):
    fam = str(tmp_path / "fam.json")
    run(["transform", "limit-family", "--P", "x1^2*(x1^2+x2^2-1)", "--Q", "x1", "--arity", "2", "--R", "2", "-o", fam], capsys)
    d1, d2 = tmp_path / "one", tmp_path / "two"
    for d in (d1, d2):
        code, _, _ = run(["--resolution", "101", "export", fam, files["f1"], "--t", "0.005", "--outdir", str(d)], capsys)
        assert code == EXIT_PASS
    names = sorted(p.name for p in d1.iterdir())
    assert names == sorted(p.name for p in d2.iterdir())
    assert len(names) == 2
    for n in names:
        assert (d1 / n).read_bytes() == (d2 / n).read_bytes()


def test_export_rejects_zero_count(files, tmp_path, capsys):
    code, _, _ = run(["--tau", "0.1", "export", files["f1"], "--sampling", "random", "--count", "0", "--outdir", str(tmp_path)], capsys)
    assert code == EXIT_USAGE


def test_export_warns_on_empty_cloud(files, tmp_path, capsys):
    code, _, err = run(["--tau", "0.1", "--resolution", "21", "export", files["empty"], "--outdir", str(tmp_path)], capsys)
    assert code == EXIT_PASS
    assert "empty" in err


def test_config_file_and_flag_precedence(files, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"resolution": 31, "tau": "0.05"}))
    code, _, _ = run(["--config", str(cfg), "--resolution", "21", "export", files["f1"], "--outdir", str(tmp_path)], capsys)
    assert code == EXIT_PASS
    text = next(tmp_path.glob("f1*.csv")).read_text()
    assert "# resolution: 21" in text


def test_unknown_subcommand_is_usage_error(capsys):
    assert run(["frobnicate"], capsys)[0] == EXIT_USAGE


@pytest.mark.skipif(shutil.which("salimits") is None, reason="console script not installed")
def test_console_script(files):
    proc = subprocess.run(["salimits", "inspect", files["f1"]], capture_output=True, text=True)
    assert proc.returncode == 0
