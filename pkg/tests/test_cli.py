import json
import os
import subprocess
import sys

import pytest

from conftest import GOLDEN
from rumflow.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, parse_instance_spec, parse_pair_spec, parse_target_spec
from rumflow.document import load
from rumflow.theorem import check_theorem

TESTS = os.path.dirname(__file__)
UPDATE = os.environ.get("RUMFLOW_UPDATE_GOLDEN") == "1"

# (golden name, argv, expected exit code)
GOLDEN_CASES = [
    ("check-falmagne", ["check", "fixtures/falmagne.json", "--certificate"], EXIT_OK),
    ("check-transport", ["check", "fixtures/transport.json", "--certificate"], EXIT_OK),
    ("check-school", ["check", "fixtures/school.json", "--certificate"], EXIT_OK),
    ("check-mr-gap", ["check", "fixtures/mr_gap.json"], EXIT_FAIL),
    ("bounds-falmagne", ["bounds", "fixtures/falmagne.json", "--all-hidden"], EXIT_OK),
    ("bounds-transport", ["bounds", "fixtures/transport.json", "--all-hidden"], EXIT_OK),
    ("bounds-school", ["bounds", "fixtures/school.json", "--all-hidden", "--method", "decomposed"], EXIT_OK),
    ("bounds-mr-gap", ["bounds", "fixtures/mr_gap.json", "--all-hidden"], EXIT_FAIL),
    ("witness-falmagne", ["witness", "--instance", "a,b,c;", "--pair", "{a,b}:b"], EXIT_OK),
    ("witness-transport", ["witness", "--instance", "w,d,b,t;w,d", "--target", "A={b};E={w}"], EXIT_OK),
    ("witness-school", ["witness", "--instance", "a,b,c,d,e;d,e", "--target", "A={a};E={d,e}"], EXIT_OK),
]


def run(argv, cwd=TESTS, env=None):
    proc = subprocess.run(
        [sys.executable, "-m", "rumflow", *argv],
        cwd=cwd,
        capture_output=True,
        text=True,
        env=dict(os.environ, **(env or {})),
    )
    return proc.returncode, proc.stdout, proc.stderr


def render(code, out, err):
    return f"exit: {code}\n--- stdout\n{out}--- stderr\n{err}"


@pytest.mark.parametrize("name,argv,code", GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
def test_golden(name, argv, code):
    first = run(argv)
    second = run(argv)
    assert first == second
    assert first[0] == code
    text = render(*first)
    path = GOLDEN / f"{name}.txt"
    if UPDATE:
        path.write_text(text)
    assert path.read_text() == text


def test_goldens_agree_with_library():
    # the golden bounds are exact and must match a fresh library computation
    from rumflow.bounds import ru_bounds

    ds = load(os.path.join(TESTS, "fixtures", "transport.json"))
    body = (GOLDEN / "bounds-transport.txt").read_text().split("--- stdout\n")[1].split("--- stderr")[0]
    rows = body.splitlines()[1:]
    assert len(rows) == len(ds.instance.hidden_pairs)
    for (d, x), row in zip(ds.instance.hidden_pairs, rows):
        iv = ru_bounds(ds, d, x)
        cells = row.rsplit(",", 6)
        assert cells[2:4] == [str(iv.lower), str(iv.upper)]


def test_worker_count_does_not_change_output():
    argv = ["bounds", "fixtures/school.json", "--all-hidden"]
    assert run(argv, env={"RUMFLOW_WORKERS": "1"}) == run(argv, env={"RUMFLOW_WORKERS": "3"})


def test_witness_file_output(tmp_path):
    out = tmp_path / "w.json"
    code, stdout, stderr = run(["witness", "--instance", "a,b,c,d;c,d", "--target", "A={a};E={c},{d}", "--out", str(out)])
    assert code == EXIT_OK and stderr == ""
    rep = check_theorem(load(out))
    assert rep.violation_count == 1
    value = rep.condition_ii_violations[0][1]
    assert value < 0
    assert stdout.startswith(f"violated: delta[A={{a}};E={{c}},{{d}}] = {value} (")
    code, stdout, _ = run(["check", str(out)])
    assert code == EXIT_FAIL and "negative collections: 1" in stdout


def test_check_writes_report_and_dot(tmp_path):
    report, dot = tmp_path / "r.json", tmp_path / "n.dot"
    code = main(["check", os.path.join(TESTS, "fixtures", "transport.json"), "--report", str(report), "--dot", str(dot)])
    assert code == EXIT_OK
    assert json.loads(report.read_text())["verdict"] == "rationalizable"
    assert dot.read_text().startswith("digraph lattice {")


def test_bounds_csv_file_and_table(tmp_path, capsys):
    csv_path = tmp_path / "b.csv"
    code = main(["bounds", os.path.join(TESTS, "fixtures", "transport.json"), "--pair", "{w,d,b,t}:w", "--csv", str(csv_path)])
    assert code == EXIT_OK
    assert csv_path.read_text().splitlines()[0] == "menu,alternative,lower,upper,method,naive_lower,naive_upper"
    assert capsys.readouterr().out.splitlines()[0].split()[:2] == ["menu", "alt"]


def test_gen_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["gen", "--out", str(d), "--seed", "3", "--count", "3", "--mode", "perturbed"]) == EXIT_OK
    names = sorted(p.name for p in a.iterdir())
    assert names == ["instance-00003.json", "instance-00004.json", "instance-00005.json"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
        assert json.loads((a / n).read_text())["meta"]["generator"]["seed"] == int(n[9:14])


def test_mr_command(capsys):
    gap = os.path.join(TESTS, "fixtures", "mr_gap.json")
    assert main(["mr", gap, "--m", "1"]) == EXIT_OK
    assert "member: yes" in capsys.readouterr().out
    assert main(["mr", os.path.join(TESTS, "fixtures", "falmagne.json"), "--m", "2"]) == EXIT_OK
    assert "examined: 2374" in capsys.readouterr().out


def test_oracle_command(capsys):
    gap = os.path.join(TESTS, "fixtures", "mr_gap.json")
    assert main(["oracle", gap]) == EXIT_FAIL
    assert capsys.readouterr().out == "verdict: not rationalizable\n"
    tr = os.path.join(TESTS, "fixtures", "transport.json")
    assert main(["oracle", tr, "--all-hidden"]) == EXIT_OK
    via_oracle = capsys.readouterr().out.replace("oracle", "X")
    main(["bounds", tr, "--all-hidden"])
    assert capsys.readouterr().out.replace("ru-monolithic", "X") == via_oracle


def test_calibrate(tmp_path, capsys):
    out = tmp_path / "cal.json"
    assert main(["calibrate", os.path.join(TESTS, "fixtures", "falmagne.json"), "--out", str(out), "--grid-digits", "6"]) == EXIT_OK
    assert "iterations:" in capsys.readouterr().out
    assert check_theorem(load(out)).verdict


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "/nonexistent.json"],
        ["bounds", "fixtures/transport.json", "--pair", "{w,d,b,t}:b"],
        ["bounds", "fixtures/transport.json", "--all-hidden", "--method", "decomposed"],
        ["witness", "--instance", "a,b,c,d;c,d", "--target", "A={a};E={}"],
        ["witness", "--instance", "a,b,c,d;c,d", "--pair", "{a}:a"],
        ["mr", "fixtures/school.json", "--m", "2"],
    ],
)
def test_usage_errors_exit_two(argv):
    code, stdout, stderr = run(argv)
    assert code == EXIT_USAGE
    assert stderr.startswith("error: ")


def test_argparse_errors_exit_two():
    assert run(["check"])[0] == EXIT_USAGE
    assert run(["check", "fixtures/falmagne.json", "--precision", "-1"])[0] == EXIT_USAGE


def test_spec_parsers():
    inst = parse_instance_spec("a,b,c,d;c,d")
    assert inst.names(inst.unobservable) == ["c", "d"]
    assert parse_pair_spec(inst, "{a,b}:b") == parse_pair_spec(inst, "a,b:b") == (0b0011, 1)
    tc = parse_target_spec(inst, "A={a};E={c},{d}")
    assert tc.describe(inst) == "A={a};E={c},{d}"
