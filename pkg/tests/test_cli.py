import json
import subprocess
import sys

import pytest

from slecft.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_derive_constants_json(capsys):
    code, out = run(capsys, "derive-constants")
    d = json.loads(out.out)
    assert code == 0
    assert (d["kappa"], d["alpha"]) == ("8/3", "5/8")


def test_derive_constants_defects(capsys):
    code, out = run(capsys, "derive-constants", "--emit-defects")
    assert "a*(3*k-8)/x1^4" in out.out


def test_derive_constants_csv(capsys):
    code, out = run(capsys, "derive-constants", "--format", "csv")
    assert code == 0
    assert out.out.splitlines() == ["kappa,alpha", "8/3,5/8"]


def test_verify_small_tower(capsys):
    code, out = run(capsys, "verify", "--tower-height", "2")
    d = json.loads(out.out)
    assert code == 0 and d["all_exact_zero"]
    assert {c["status"] for c in d["checks"]} == {"exact-zero"}
    assert max(c["level"] for c in d["checks"]) <= 2


def test_verify_wrong_alpha_fails_with_named_checks(capsys):
    code, out = run(capsys, "verify", "--alpha", "1/2", "--tower-height", "2")
    d = json.loads(out.out)
    assert code == 1
    assert {"evolution@2", "degeneracy@2"} <= set(d["failing"])
    assert "evolution@2" in out.err
    bad = [c for c in d["checks"] if c["check-name"] == "evolution" and c["level"] == 2][0]
    assert bad["status"] == "defect" and bad["defect"] != "((0))"


def test_verify_default_full_suite(capsys):
    code, out = run(capsys, "verify")
    d = json.loads(out.out)
    assert code == 0 and d["tower_height"] == 4 and d["alpha"] == "5/8"
    names = {c["check-name"].split("[")[0] for c in d["checks"]}
    assert {"evolution", "degeneracy", "weight-alpha", "commutator", "stability"} <= names


def test_simulate_is_byte_stable(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["simulate", "--kappa", "8/3", "--steps", "2000", "--seed", "1", "--stride", "10",
                     "-o", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].startswith(b"t,re,im\n")
    assert len(outs[0].splitlines()) == 1 + 201


def test_simulate_kappa_zero_is_vertical(capsys):
    code, out = run(capsys, "simulate", "--kappa", "0", "--steps", "100", "--stride", "50")
    rows = [r.split(",") for r in out.out.splitlines()[1:]]
    assert all(float(r[1]) == 0.0 for r in rows)


@pytest.mark.parametrize("hull", ["slit:0:1", "disk:1:2", "blob:1:1", "slit:1"])
def test_invalid_hull_rejected(capsys, hull):
    with pytest.raises(SystemExit) as e:
        main(["restriction", "--hull", hull])
    assert e.value.code == 2


def test_usage_errors(capsys):
    for argv in (["exponent", "--kappa", "9"], ["simulate", "--kappa", "-1"], ["exponent", "--kappa", "6", "--eps", "0.1"]):
        with pytest.raises(SystemExit) as e:
            main(argv)
        assert e.value.code == 2


def test_restriction_small_run_and_worker_invariance(capsys):
    args = ["restriction", "--hull", "slit:1:0.5", "--hull", "disk:2:1", "--paths", "200", "--steps", "2000"]
    code, out = run(capsys, *args)
    d = json.loads(out.out)
    assert [r["analytic"] for r in d["records"]] == pytest.approx([0.93264, 0.835436], abs=1e-5)
    assert code == (0 if d["ok"] else 1)
    _, again = run(capsys, *args, "--workers", "2")
    assert again.out == out.out


def test_exponent_small_run(capsys, tmp_path):
    table = tmp_path / "t.csv"
    code, out = run(capsys, "exponent", "--kappa", "6", "--paths", "60", "--steps", "2000", "--T", "4",
                    "--eps", "0.2,0.4", "--table", str(table))
    d = json.loads(out.out)
    assert d["record"]["analytic"] == pytest.approx(1 / 3)
    assert code == (0 if d["ok"] else 1)
    assert table.read_text().splitlines()[0] == "eps,p_hat,stderr"


def test_b1_limit_csv(capsys):
    code, out = run(capsys, "b1-limit", "--eps", "0.3,0.6", "--paths", "50", "--steps", "2000", "--format", "csv")
    lines = out.out.splitlines()
    assert lines[0].startswith("eps,p_hat,stderr,scaled")
    assert len(lines) == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "slecft", "derive-constants"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["alpha"] == "5/8"
