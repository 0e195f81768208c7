import csv
import io
import json

import pytest

from higherdl.cli import SCHEMA, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def envelope(capsys, *argv):
    code, out = run_cli(capsys, *argv)
    return code, json.loads(out)


def test_group_envelope(capsys):
    code, env = envelope(capsys, "group", "--n", "2", "--p", "2", "--r", "2")
    assert code == 0 and env["status"] == "pass"
    assert env["schema"] == SCHEMA and env["tool"] == "higherdl"
    assert env["config"]["torus"] == "2"
    orders = {it["name"]: it["order"] for it in env["items"]}
    assert orders["G"] == 96 and orders["G^1"] == 16
    assert len(next(iter(env["checksums"].values()))) == 64


def test_rationals_are_integer_pairs(capsys):
    code, env = envelope(capsys, "verify-main", "--n", "2", "--p", "2", "--mode", "both")
    assert code == 0
    row = env["items"][0]
    assert row["norm"] == [1, 1] and row["degree"] == [2, 1]


def test_output_is_deterministic(capsys):
    args = ("chars", "--n", "2", "--p", "3", "--theta", "all")
    _, a = envelope(capsys, *args)
    _, b = envelope(capsys, *args)
    a.pop("timing"), b.pop("timing")
    assert a == b


def test_theta_coordinates(capsys):
    code, env = envelope(capsys, "verify-main", "--n", "2", "--p", "2", "--theta", "1,0,0;0,0,0")
    assert code == 0
    assert [it["generic"] for it in env["items"]] == [True, False]


def test_csv_format(capsys):
    code, out = run_cli(capsys, "prop35", "--n", "2", "--p", "2", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 12 and set(rows[0]) >= {"theta", "regular", "general_position"}


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.json"
    assert main(["torus", "--n", "2", "--p", "2", "-o", str(path)]) == 0
    assert json.loads(path.read_text())["summary"]["torus_order"] == 12


@pytest.mark.parametrize("argv,code,status", [
    (("group", "--p", "4"), 2, "invalid_config"),
    (("verify-main", "--r", "3"), 2, "invalid_config"),
    (("group", "--n", "2", "--torus", "2,1"), 2, "invalid_config"),
    (("verify-main", "--theta", "9,9,9"), 2, "invalid_config"),
    (("group", "--n", "2", "--p", "7", "--r", "3"), 3, "resource_cap"),
    (("verify-main", "--n", "3", "--torus", "1,1,1"), 4, "no_generic"),
])
def test_exit_codes(capsys, argv, code, status):
    got, env = envelope(capsys, *argv)
    assert got == code and env["status"] == status


def test_bad_choice_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["group", "--mode", "fast"])
    assert exc.value.code == 2


def test_cache_dir(tmp_path, capsys):
    args = ("group", "--n", "2", "--p", "3", "--cache-dir", str(tmp_path))
    _, a = envelope(capsys, *args)
    assert list(tmp_path.glob("*.hdlg"))
    _, b = envelope(capsys, *args)
    assert a["checksums"] == b["checksums"]


def test_worker_count_does_not_change_output():
    import subprocess
    import sys

    outs = []
    for w in ("1", "2"):
        res = subprocess.run([sys.executable, "-m", "higherdl.cli", "mackey-check", "--n", "2", "--p", "2",
                              "--workers", w], capture_output=True, text=True, check=True)
        env = json.loads(res.stdout)
        env.pop("timing")
        outs.append(env)
    assert outs[0] == outs[1]
