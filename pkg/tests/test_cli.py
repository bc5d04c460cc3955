import json
import subprocess
import sys

import numpy as np
import pytest

from chernlab import cli
from chernlab.identities import IdentityId


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    rows = [json.loads(line) for line in out.splitlines() if line]
    return code, rows, out, err


def summary(err):
    return json.loads(err.strip().splitlines()[-1])


def test_catalog(capsys):
    code, rows, _, _ = run(capsys, "catalog")
    assert code == 0
    assert [r["name"] for r in rows] == ["flat3", "fubini_study3", "iwasawa", "hopf3"]


def test_identities_flat(capsys):
    code, rows, _, err = run(capsys, "identities", "flat3", "--points", "5")
    assert code == 0
    assert rows and all(r["pass"] and r["max_abs_residual"] == 0 for r in rows)
    doc = summary(err)
    assert doc["verdicts"]["all_pass"] and "duration_ms" in doc


def test_identities_rows_sorted_and_schema(capsys):
    code, rows, _, _ = run(capsys, "identities", "hopf3", "--points", "2")
    order = list(IdentityId)
    keys = [(r["point_index"], order.index(IdentityId(r["identity"]))) for r in rows]
    assert keys == sorted(keys)
    assert set(rows[0]) == {"manifold", "point_index", "identity", "variant", "max_abs_residual", "argmax_indices", "pass"}


def test_exit_code_tracks_rows(capsys):
    code, rows, _, _ = run(capsys, "identities", "hopf3", "--points", "2")
    assert code == 1 and not all(r["pass"] for r in rows)
    code, rows, _, _ = run(capsys, "identities", "hopf3", "--points", "2", "--only", "B1,C1,C3")
    assert code == 0 and all(r["pass"] for r in rows)


def test_reports_are_reproducible(capsys):
    first = run(capsys, "identities", "hopf3", "--points", "3", "--seed", "9")[2]
    second = run(capsys, "identities", "hopf3", "--points", "3", "--seed", "9")[2]
    assert first == second
    third = run(capsys, "identities", "hopf3", "--points", "3", "--seed", "10")[2]
    assert third != first


def test_constant_c_selects_identity(capsys):
    _, rows, _, err = run(capsys, "identities", "fubini_study3", "--points", "2", "--c", "2", "--only", "EQ11,EQ31")
    assert {r["identity"] for r in rows} == {"EQ31"}
    assert summary(err)["verdicts"]["constant_B"] == {"c": 2.0, "holds": False}


def test_variants_named_in_summary(capsys):
    _, _, _, err = run(capsys, "identities", "hopf3", "--points", "2", "--only", "B2")
    assert summary(err)["verdicts"]["passing_variants"] == {"B2": ["standard"]}


def test_fd_jets(capsys):
    code, rows, _, _ = run(capsys, "identities", "hopf3", "--points", "1", "--fd", "--only", "B1,C1,C3")
    assert code == 0
    assert all(r["max_abs_residual"] <= 1e-3 for r in rows)


def test_flatness_iwasawa(capsys):
    code, rows, _, err = run(capsys, "flatness", "iwasawa", "--points", "20")
    assert code == 0
    verdicts = summary(err)["verdicts"]
    assert verdicts["balanced"] and verdicts["chern_flat"] and verdicts["P_vanishes"]
    assert max(r["max_abs_residual"] for r in rows if r["identity"] == "chern_flat") <= 1e-6
    assert max(r["max_abs_residual"] for r in rows if r["identity"] == "P") <= 1e-8


def test_flatness_hopf_not_balanced(capsys):
    code, rows, _, err = run(capsys, "flatness", "hopf3", "--points", "2")
    assert code == 1
    assert not summary(err)["verdicts"]["balanced"]
    assert any(r["variant"].startswith("skipped") for r in rows)


def test_eval(capsys):
    code, rows, _, _ = run(capsys, "eval", "iwasawa", "--point", "0,0,0")
    assert code == 0
    T = np.array(rows[0]["torsion"])
    assert T.shape == (3, 3, 3, 2)
    assert T[2, 0, 1, 0] == pytest.approx(-1)
    assert rows[0]["torsion_norm"] == pytest.approx(2)


def test_normalize(capsys):
    code, rows, _, _ = run(capsys, "normalize", "iwasawa", "--point", "0.2+0.1i,-i,0.3")
    assert code == 0 and rows[0]["pass"]
    code, rows, _, err = run(capsys, "normalize", "hopf3", "--point", "1,0,0")
    assert code == 1 and "not balanced" in err


def test_bspectrum(capsys):
    code, rows, _, _ = run(capsys, "bspectrum", "fubini_study3", "--point", "0,0,0", "--restarts", "8")
    assert code == 0
    assert rows[0]["min"] == pytest.approx(2, abs=1e-3)
    assert rows[0]["max"] == pytest.approx(4, abs=1e-3)
    assert rows[0]["sign"] == "positive"


def test_config_path(capsys, tmp_path):
    path = tmp_path / "flat.json"
    path.write_text(
        json.dumps(
            {
                "name": "cfgflat",
                "dimension": 3,
                "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
                "sample_region": [{"re": [-1, 1], "im": [-1, 1]}] * 3,
            }
        )
    )
    code, rows, _, _ = run(capsys, "identities", str(path), "--points", "2")
    assert code == 0 and rows[0]["manifold"] == "cfgflat"


@pytest.mark.parametrize(
    "argv",
    [
        ["identities", "nosuch"],
        ["eval", "flat3", "--point", "1,2"],
        ["eval", "flat3", "--point", "1,2,x"],
        ["identities", "flat3", "--only", "B9"],
        ["identities", "flat3", "--points", "0"],
        ["eval", "hopf3", "--point", "0,0,0"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, _, err = run(capsys, *argv)
    assert code == 2
    assert len(err.strip().splitlines()) == 1


def test_argparse_errors():
    with pytest.raises(SystemExit) as info:
        cli.main(["bogus"])
    assert info.value.code == 2


@pytest.mark.parametrize(
    "text, expected",
    [("1,2,3", [1, 2, 3]), ("i,-i,0.5+2i", [1j, -1j, 0.5 + 2j]), (" 1e-3 , -0.5-i , 2i ", [1e-3, -0.5 - 1j, 2j])],
)
def test_parse_point(text, expected):
    assert np.allclose(cli.parse_point(text, 3), expected)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chernlab", "identities", "nosuch"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "unknown manifold" in proc.stderr
