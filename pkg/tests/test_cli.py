import hashlib
import json
import subprocess
import sys
from pathlib import Path

import pytest

from realstreams.cli import main
from realstreams.names import Consistent, check_consistency, load_name_file

DEMO = Path(__file__).resolve().parent.parent / "demos" / "external_threshold.py"


def run(*argv):
    return main([str(a) for a in argv])


def values(path):
    return load_name_file(Path(path).read_text())[2]


def digest(root):
    h = hashlib.sha256()
    for p in sorted(Path(root).rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(root)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()


@pytest.fixture
def names(tmp_path):
    run("gen", "--target", "1/3", "--tag", "LOWER", "--level", "0", "--length", 20,
        "-o", tmp_path / "lt.jsonl")
    run("gen", "--target", "1/3", "--tag", "UPPER", "--level", "0", "--length", 20,
        "-o", tmp_path / "gt.jsonl")
    run("gen", "--target", "1", "--tag", "FAST", "--level", "0", "--length", 40,
        "-o", tmp_path / "one.jsonl")
    run("gen", "--target", "1/3", "--tag", "FAST", "--level", "1", "--junk", 2,
        "--length", 64, "-o", tmp_path / "junk.jsonl")
    return tmp_path


def test_gen_header(names):
    tag, params, vals = load_name_file((names / "lt.jsonl").read_text())
    assert str(tag) == "LOWER(0)" and len(vals) == 20
    assert params["synthetic"]["target"] == "1/3"


def test_convert_join_gives_fast_name(names):
    out = names / "rho.jsonl"
    assert run("convert", "--edge", "lt+gt-to-rho", "-i", names / "lt.jsonl",
               "--input2", names / "gt.jsonl", "-o", out, "--length", 8) == 0
    tag, _, vals = load_name_file(out.read_text())
    assert str(tag) == "FAST(0)"
    assert isinstance(check_consistency(tag, vals), Consistent)


def test_convert_join_needs_second_input(names):
    assert run("convert", "--edge", "lt+gt-to-rho", "-i", names / "lt.jsonl",
               "-o", names / "x") == 2


def test_convert_fast_subsequence_writes_survivors(names):
    out = names / "sub"
    assert run("convert", "--edge", "rho1-to-rho", "-i", names / "junk.jsonl", "-o", out,
               "--depth", 6, "--length", 3) == 0
    files = sorted(p.name for p in out.glob("path-*.jsonl"))
    assert files
    summary = json.loads((out / "summary.json").read_text())
    assert summary["files"] == [f for f in summary["files"]] and sorted(summary["files"]) == files
    for f in files:
        assert [str(v) for v in values(out / f)] == ["1/3"] * 3


def test_convert_binary_of_one_has_two_survivors(names):
    out = names / "bin"
    assert run("convert", "--edge", "rho-to-binary", "-i", names / "one.jsonl", "-o", out,
               "--depth", 9, "--length", 8) == 0
    assert sorted(p.name for p in out.glob("path-*.jsonl")) == \
        ["path-01111111.jsonl", "path-10000000.jsonl"]


def test_convert_all_junk_has_no_survivors(tmp_path):
    run("gen", "--target", "0", "--tag", "FAST", "--level", "1", "--junk", 60, "--length", 200,
        "-o", tmp_path / "aj.jsonl")
    assert run("convert", "--edge", "rho1-to-rho", "-i", tmp_path / "aj.jsonl",
               "-o", tmp_path / "out", "--depth", 6, "--length", 3) == 4


def test_convert_errors(names, tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("garbage\n")
    assert run("convert", "--edge", "nope", "-i", names / "one.jsonl", "-o", tmp_path / "x") == 3
    assert run("convert", "--edge", "square", "-i", bad, "-o", tmp_path / "x") == 2
    assert run("convert", "--edge", "square", "-i", tmp_path / "missing.jsonl",
               "-o", tmp_path / "x") == 2
    assert run("convert", "--edge", "square", "-i", names / "lt.jsonl", "-o", tmp_path / "x") == 3


def test_exhaustion_errors_unless_padded(names):
    args = ["convert", "--edge", "square", "-i", names / "one.jsonl", "-o", names / "sq.jsonl",
            "--length", 60]
    assert run(*args) == 2
    assert run(*args, "--pad-last") == 0
    assert set(values(names / "sq.jsonl")) == {1}


def test_retag_edges(names):
    assert run("convert", "--edge", "rho-to-hotz", "-i", names / "one.jsonl",
               "-o", names / "h.jsonl", "--length", 10) == 0
    assert str(load_name_file((names / "h.jsonl").read_text())[0]) == "HOTZ"
    assert run("convert", "--edge", "hotz-to-rho1", "-i", names / "one.jsonl",
               "-o", names / "x.jsonl") == 3


def test_eval_commands(names, tmp_path):
    assert run("eval", "-i", names / "one.jsonl", "-o", tmp_path / "a.jsonl",
               "--machine", "square", "--length", 5) == 0
    assert run("eval", "-i", names / "one.jsonl", "-o", tmp_path / "a.jsonl",
               "--machine", "ghost") == 6
    assert run("eval", "-i", names / "one.jsonl", "-o", tmp_path / "a.jsonl",
               "--lsc", "ghost") == 6
    poly = tmp_path / "p.json"
    poly.write_text('["0", "0", "1"]')
    assert run("eval", "-i", names / "junk.jsonl", "-o", tmp_path / "p.jsonl",
               "--poly", poly, "--length", 5) == 0
    assert [str(v) for v in values(tmp_path / "p.jsonl")][2:] == ["1/9"] * 3
    assert run("eval", "-i", names / "one.jsonl", "-o", tmp_path / "p.jsonl",
               "--poly", poly) == 3


def test_nondet_command(names, tmp_path, capsys):
    code = run("nondet", "--machine", "rho-to-binary", "-i", names / "one.jsonl", "--depth", 9,
               "--budget-emits", 8, "--format", "json", "-o", tmp_path / "r.json")
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert [p["path"]["choices"][:2] for p in data["surviving"]] == [[0, 1], [1, 0]]
    assert run("nondet", "--machine", "ghost", "-i", names / "one.jsonl") == 6


def test_adversary_and_verify(tmp_path, capsys):
    cert = tmp_path / "c.json"
    assert run("adversary", "--claimant", "threshold-heaviside", "--variant", "FAST_FAST",
               "-o", cert) == 0
    assert run("verify-certificate", cert) == 0
    data = json.loads(cert.read_text())
    data["runs"][0]["trace"]["emitted"][-1] = "5/1"
    edited = tmp_path / "edited.json"
    edited.write_text(json.dumps(data))
    assert run("verify-certificate", edited) == 1
    data = json.loads(cert.read_text())
    data["claimant"] = {"registry": "absent-from-this-build"}
    ghost = tmp_path / "ghost.json"
    ghost.write_text(json.dumps(data))
    assert run("verify-certificate", ghost) == 6
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{")
    assert run("verify-certificate", garbled) == 2


def test_adversary_correct_machine_survives(capsys):
    assert run("adversary", "--claimant", "heaviside-lt", "--variant", "LOWER_LOWER",
               "--format", "json") == 5
    out = json.loads(capsys.readouterr().out)
    assert out["falsified"] is False and out["nonproductive"] is True


def test_adversary_errors(tmp_path):
    assert run("adversary", "--claimant", "ghost") == 6
    assert run("adversary", "--claimant", "threshold-heaviside", "--variant", "LOWER_LOWER") == 3
    assert run("adversary") == 2
    assert run("adversary", "--external", "true") == 2


def test_adversary_external_claimant(tmp_path):
    cert = tmp_path / "ext.json"
    cmd = "%s %s" % (sys.executable, DEMO)
    assert run("adversary", "--external", cmd, "--variant", "FAST_FAST",
               "--target", "HEAVISIDE", "-o", cert) == 0
    data = json.loads(cert.read_text())
    assert data["claimant"]["external"][-1] == str(DEMO)
    assert all(r["trace"]["emitted"] for r in data["runs"])
    assert run("verify-certificate", cert) == 0


def test_custom_target_file(tmp_path):
    from realstreams.registry import DECREASING
    target = tmp_path / "t.json"
    target.write_text(json.dumps(DECREASING.to_json()))
    assert run("adversary", "--claimant", "one-minus-sup", "--target", target,
               "-o", tmp_path / "c.json") == 0
    bad = tmp_path / "bad.json"
    bad.write_text("[")
    assert run("adversary", "--claimant", "one-minus-sup", "--target", bad) == 2


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "realstreams.cli", "adversary", "--claimant",
                          "ghost"], capture_output=True, text=True)
    assert res.returncode == 6 and "unknown claimant" in res.stderr


def _pipeline(root):
    root.mkdir()
    codes = [
        run("gen", "--target=-2/7", "--tag", "FAST", "--level", "1", "--junk", 3, "--seed", 5,
            "--approach", "random", "--length", 80, "-o", root / "in.jsonl"),
        run("convert", "--edge", "rho1-to-rho", "-i", root / "in.jsonl", "-o", root / "sub",
            "--depth", 6, "--length", 3),
        run("adversary", "--claimant", "liminf-flipped", "-o", root / "cert.json"),
    ]
    assert codes == [0, 0, 0]
    return digest(root)


def test_reruns_are_byte_identical(tmp_path):
    assert _pipeline(tmp_path / "a") == _pipeline(tmp_path / "b")


def test_adversary_without_output_file(capsys):
    assert run("adversary", "--claimant", "threshold-heaviside") == 0
    assert capsys.readouterr().out.strip() == "falsified (use -o to save the certificate)"
