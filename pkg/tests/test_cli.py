import json
import pytest

from conftest import chsh_inequality, pr_box
from gyni.cli import main
from gyni.game import instance
from gyni.io import InputError, dumps, load_behavior, load_distribution, load_inequality, write_json
from gyni.nosignalling import box_p1
from gyni.scenario import Behavior, is_no_signalling


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


def test_behavior_round_trip(tmp_path):
    path = tmp_path / "pr.json"
    write_json(path, pr_box().to_json())
    assert load_behavior(path) == pr_box()
    assert load_inequality(chsh_inequality().to_json()) == chsh_inequality()
    assert load_distribution(instance(3).prior.to_json()) == instance(3).prior


def test_dumps_is_stable():
    assert dumps({"b": 1, "a": [1, 2]}) == dumps({"a": [1, 2], "b": 1})
    assert dumps({}).endswith("\n")


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        load_behavior(bad)
    data = pr_box().to_json()
    data["table"]["00|00"] = "0.5"
    with pytest.raises(InputError):
        load_behavior(data)
    data = pr_box().to_json()
    data["table"]["00|00"] = "1/1"
    with pytest.raises(InputError):
        load_behavior(data)


def test_bounds_command(capsys):
    code, rep = _run(capsys, "bounds", "--parties", "3", "--ns")
    assert code == 0 and rep["pass"]
    res = rep["sections"][0]["results"]
    assert res["omega_c"] == "1/4" and res["omega_ns"] == "1/3" and res["ratio"] == "4/3"


def test_decimal_rendering(capsys):
    _, rep = _run(capsys, "bounds", "--parties", "3", "--decimal")
    assert rep["sections"][0]["results"]["omega_c"] == {"exact": "1/4", "decimal": "0.25"}


def test_ns_bound_witness(capsys, tmp_path):
    path = tmp_path / "w.json"
    code, rep = _run(capsys, "ns-bound", "--parties", "4", "--method", "symmetric", "--witness", str(path))
    assert code == 0
    assert is_no_signalling(load_behavior(path))


def test_distribution_file(capsys, tmp_path):
    path = tmp_path / "q.json"
    write_json(path, instance(3, "uniform").prior.to_json())
    code, rep = _run(capsys, "bounds", "--dist", str(path), "--ns")
    assert code == 0 and rep["sections"][0]["results"]["omega_ns"] == "1/4"


def test_facet_command_on_file(capsys, tmp_path):
    path = tmp_path / "chsh.json"
    write_json(path, chsh_inequality().to_json())
    code, rep = _run(capsys, "facet", "--inequality", str(path))
    assert code == 0 and rep["sections"][0]["results"]["is_facet"] is True


def test_corrupted_box_fails(capsys, tmp_path):
    t = list(box_p1().table)
    # move weight between two outputs of one input: still normalized, now signalling
    i = next(k for k, v in enumerate(t) if v)
    block = i - i % 8
    j = next(k for k in range(block, block + 8) if not t[k])
    t[i], t[j] = t[j], t[i]
    path = tmp_path / "p1.json"
    write_json(path, Behavior(box_p1().scenario, tuple(t)).to_json())
    code, rep = _run(capsys, "boxes", "verify", "--p1", str(path))
    assert code == 1 and not rep["pass"]
    assert rep["failures"] and all(f["section"] == "boxes" for f in rep["failures"])


def test_usage_errors(capsys, tmp_path):
    assert main(["bounds", "--parties", "1"]) == 2
    assert main(["bounds", "--dist", str(tmp_path / "missing.json")]) == 2
    assert main(["appendix-c", "--odd-n", "4"]) == 2
    assert main(["seesaw", "--parties", "5"]) == 2


def test_emit_report(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, rep = _run(capsys, "sos-check", "--parties", "4", "--dist", "uniform", "--emit-report", str(path))
    assert code == 0
    assert json.loads(path.read_text()) == rep


def test_nlc_emit_report(capsys, tmp_path):
    path = tmp_path / "nlc.json"
    code, rep = _run(capsys, "nlc-audit", "--n", "2", "--emit-report", str(path))
    assert code == 0
    emitted = json.loads(path.read_text())
    assert emitted == rep
    assert len(rep["sections"][0]["results"]["entries"]) == 16


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("GYNI_THREADS", "many")
    assert main(["bounds", "--parties", "3"]) == 2
