import json
import subprocess
import sys

import jsonschema
import pytest

from twisted_k3.assoc import verify_certificate
from twisted_k3.cli import main
from twisted_k3.report import ReportDocument, flatten, load_schema

CASES = [
    (["check-dstar", "8"], 0),
    (["check-dstar", "7"], 1),
    (["check-dstar", "686"], 0),
    (["witness", "2", "2"], 0),
    (["witness", "8", "2"], 1),
    (["witness", "26", "5"], 0),
    (["components", "2", "2"], 0),
    (["components", "2", "1"], 0),
    (["components", "14", "7"], 0),
    (["disc", "2", "2", "1", "1"], 0),
    (["disc", "2", "2", "0", "0"], 0),
    (["disc", "14", "7", "0", "1"], 0),
    (["example", "c8"], 0),
    (["example", "c14"], 0),
]


def run_json(args, capsys):
    code = main(["--json", *args])
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.mark.parametrize("args,code", CASES)
def test_exit_codes_and_schema(args, code, capsys):
    got, doc = run_json(args, capsys)
    assert got == code
    jsonschema.validate(doc, load_schema())
    assert doc["command"] == args[0]


@pytest.mark.parametrize("args,code", CASES)
def test_text_and_json_report_the_same_values(args, code, capsys):
    _, doc = run_json(args, capsys)
    assert main(list(args)) == code
    text = capsys.readouterr().out
    parsed = {}
    for line in text.splitlines():
        path, _, value = line.partition("  ")
        parsed[path.strip()] = value.strip()
    for path, value in flatten({k: v for k, v in doc.items() if k != "version"}):
        shown = value if isinstance(value, str) else json.dumps(value, ensure_ascii=False)
        assert parsed[path] == shown, path
    assert parsed["version"] == doc["version"]


def test_usage_errors_exit_2(capsys):
    assert main(["example", "bogus"]) == 2
    assert main(["disc", "3", "2", "1", "1"]) == 2
    assert main(["witness", "2", "0"]) == 2
    assert main(["check-dstar", "0"]) == 2
    assert main([]) == 2
    assert main(["witness", "two", "2"]) == 2
    capsys.readouterr()


def test_round_trip_and_certificates(capsys):
    _, doc = run_json(["check-dstar", "686"], capsys)
    rep = ReportDocument.from_dict(doc)
    assert rep.to_dict() == doc
    assert len(rep.certificates) == 2
    assert all(verify_certificate(c) for c in rep.certificates)
    assert ReportDocument.from_json(json.dumps(doc)).to_dict() == doc


def test_schema_rejects_floats_and_bad_fractions(capsys):
    _, doc = run_json(["witness", "2", "2"], capsys)
    bad = json.loads(json.dumps(doc))
    bad["certificates"][0]["x"] = 3.5
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, load_schema())
    bad = json.loads(json.dumps(doc))
    bad["results"]["x"] = 0.5
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, load_schema())


def test_values_in_reports(capsys):
    _, doc = run_json(["witness", "2", "2"], capsys)
    assert doc["results"]["witness"] == [1, 1] and doc["results"]["x"] == 3
    _, doc = run_json(["witness", "8", "2"], capsys)
    assert doc["results"]["reason"] == "4 divides d"
    _, doc = run_json(["disc", "2", "2", "1", "1"], capsys)
    assert doc["results"]["formula_factors"] == [1, 1, 8]
    assert doc["results"]["form"]["generators"][0]["q"] == "3/8"
    _, doc = run_json(["disc", "2", "2", "0", "0"], capsys)
    assert doc["results"]["form"] is None and doc["results"]["unclassified_factors"] == [2, 2, 2]
    _, doc = run_json(["disc", "14", "7", "0", "1"], capsys)
    assert doc["results"]["w_square"] == "1371/686"  # -1/686 mod 2
    _, doc = run_json(["components", "2", "2"], capsys)
    assert doc["results"]["upper_bound"] == 4
    assert [[0, 0], [1, 0]] in doc["results"]["groups"]
    _, doc = run_json(["components", "14", "7"], capsys)
    assert doc["results"]["upper_bound"] == 49
    _, doc = run_json(["example", "c8"], capsys)
    assert len(doc["results"]["checks"]) == 5 and doc["results"]["all_passed"]
    _, doc = run_json(["example", "c14"], capsys)
    assert doc["results"]["all_passed"]


def test_sweep_flag(capsys):
    code, doc = run_json(["--sweep", "30", "4", "--seed", "3", "--samples", "50"], capsys)
    assert code == 0 and doc["results"]["passed"] and doc["results"]["cells"] == 16


def test_sweep_output_independent_of_workers(capsys):
    _, a = run_json(["--sweep", "40", "3", "--workers", "1"], capsys)
    _, b = run_json(["--sweep", "40", "3", "--workers", "2"], capsys)
    a["inputs"].pop("workers")
    b["inputs"].pop("workers")
    assert a == b


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "twisted_k3", "--json", "example", "c8"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["results"]["all_passed"]
