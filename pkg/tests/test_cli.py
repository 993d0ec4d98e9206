import csv
import io
import json


from ietforge.cli import main
from ietforge.serialize import iem_from_dict, iem_to_dict
from ietforge.families import golden_rotation


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_golden_analyze(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--example", "golden", "--steps", "200", "--delta-horizon", "1000")
    assert code == 0
    doc = json.loads(out)
    assert doc["audit"]["ok"] is True
    assert len(doc["run"]["steps"]) == 200
    assert doc["profile_Z"]["extremum"] == 3
    assert doc["profile_D"]["extremum"] == "2/1-1/1*sqrt(5)" or doc["profile_D"]["extremum"].endswith("sqrt(5)")
    assert doc["input"]["backend"] == "quad:5"


def test_tie_exit_code(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--lengths", "1/2,1/2", "--top", "AB", "--bottom", "BA")
    assert code == 2
    assert json.loads(out)["run"]["violation"]["step"] == 0


def test_second_family_rows(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--example", "dio4", "--blocks", "3")
    assert code == 0
    doc = json.loads(out)
    rows = doc["example2"]
    assert [r["k"] for r in rows] == [1, 2, 3]
    assert [r["height"] for r in rows] == [51, 5178, 26276667]
    assert all(r["height_below"] for r in rows)
    assert doc["profile_Z"]["verdict"] == "bounded-so-far"


def test_first_family_extra(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--example", "ex1", "--schedule", "1,2,3,4,5,6")
    assert code == 0
    ex = json.loads(out)["example1"]
    assert ex["cone_contains_golden"] is True


def test_usage_errors(capsys):
    assert run_cli(capsys, "analyze")[0] == 1
    assert run_cli(capsys, "analyze", "--example", "golden", "--lengths", "1,2")[0] == 1
    assert run_cli(capsys, "analyze", "--example", "nope")[0] == 1
    assert run_cli(capsys, "analyze", "--lengths", "1,2", "--top", "AB")[0] == 1
    assert run_cli(capsys, "analyze", "--lengths", "1,x", "--top", "AB", "--bottom", "BA")[0] == 1
    assert run_cli(capsys, "analyze", "--example", "golden", "--backend", "quad:4")[0] == 1
    assert run_cli(capsys, "analyze", "--example", "golden", "--steps", "0")[0] == 1
    assert run_cli(capsys, "witness", "--json", "{not json")[0] == 1
    assert run_cli(capsys)[0] == 1


def test_precision_exit_code(capsys):
    code, _, _ = run_cli(
        capsys, "analyze", "--lengths", "1/3,1/3", "--top", "AB", "--bottom", "BA", "--backend", "ball", "--precision", "16"
    )
    assert code == 3


def test_precision_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("IETFORGE_PRECISION", "40")
    code, out, _ = run_cli(capsys, "analyze", "--example", "golden", "--backend", "ball", "--steps", "10")
    assert code == 0
    lam = json.loads(out)["input"]["lengths"]["A"]
    assert lam.startswith("[") and json.loads(out)["input"]["backend"] == "ball"
    monkeypatch.setenv("IETFORGE_PRECISION", "many")
    assert run_cli(capsys, "analyze", "--example", "golden")[0] == 1


def test_diagram(capsys):
    code, out, _ = run_cli(capsys, "diagram", "--top", "AB", "--bottom", "BA", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["vertices"]) == 1 and len(doc["arrows"]) == 2
    code, out, _ = run_cli(capsys, "diagram", "--top", "ABC", "--bottom", "CBA")
    assert out.count("[label=\"A") == 3
    code, _, err = run_cli(capsys, "diagram", "--top", "AB", "--bottom", "AB")
    assert code == 1 and "not admissible" in err


def test_witness(capsys):
    code, out, _ = run_cli(capsys, "witness", "--example", "golden")
    assert code == 0 and json.loads(out) == {"witnesses": []}
    code, out, _ = run_cli(capsys, "witness", "--lengths", "1,31/3", "--top", "AB", "--bottom", "BA")
    ws = json.loads(out)["witnesses"]
    assert code == 0 and len(ws) == 1
    assert ws[0]["recurrence"]["bound"] == "1/4"


def test_formats(capsys, tmp_path):
    base = ["analyze", "--example", "golden", "--steps", "40", "--delta-horizon", "50", "--recurrence-horizon", "100"]
    code, out, _ = run_cli(capsys, *base, "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["series", "index", "value"]
    assert sum(1 for r in rows if r[0] == "n_delta") == 50
    code, out, _ = run_cli(capsys, *base, "--format", "text")
    assert out.startswith("map       A B / B A")
    code, out, _ = run_cli(capsys, *base, "--approx")
    ext = json.loads(out)["profile_D"]["extremum"]
    assert set(ext) == {"exact", "approx"}
    p = tmp_path / "report.json"
    assert main(base + ["--out", str(p)]) == 0
    assert json.loads(p.read_text(encoding="utf-8"))["requested_steps"] == 40


def test_input_file_roundtrip(capsys, tmp_path):
    p = tmp_path / "map.json"
    p.write_text(json.dumps(iem_to_dict(golden_rotation())), encoding="utf-8")
    assert iem_from_dict(json.loads(p.read_text())) == golden_rotation()
    code, out, _ = run_cli(capsys, "analyze", "--input", str(p), "--steps", "20", "--delta-horizon", "20")
    assert code == 0
    code2, out2, _ = run_cli(capsys, "analyze", "--example", "golden", "--steps", "20", "--delta-horizon", "20")
    assert json.loads(out)["profile_D"] == json.loads(out2)["profile_D"]


def test_jobs_do_not_change_output(capsys):
    base = ["analyze", "--example", "golden", "--steps", "30", "--delta-horizon", "30", "--recurrence-horizon", "300"]
    _, one, _ = run_cli(capsys, *base)
    _, two, _ = run_cli(capsys, *base, "--jobs", "2")
    assert one == two
