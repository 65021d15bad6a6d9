import json

import pytest
from reference import FIXTURES

from orbitkit import formats
from orbitkit.cli import main


def fx(name):
    return str(FIXTURES / name)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_accept_and_reject(capsys):
    code, out, _ = run_cli(capsys, "run", fx("def_in_de.dfa"), "--word", "1 2 1")
    assert code == 0 and "result: accept" in out
    code, out, _ = run_cli(capsys, "run", fx("def_in_de.dfa"), "--word", "1 2 3")
    assert code == 1 and "result: reject" in out
    code, out, _ = run_cli(capsys, "run", fx("monotone.dfa"), "--word", '""')
    assert code == 0


def test_run_nfa_and_fma(capsys):
    assert run_cli(capsys, "run", fx("tagged_match.nfa"), "--word", "a:1 b:1")[0] == 0
    assert run_cli(capsys, "run", fx("two_labels.fma"), "--word", "b:1 a:1")[0] == 1
    assert run_cli(capsys, "run", fx("two_labels.fma"), "--word", "1")[0] == 2


def test_orbits(capsys):
    code, out, _ = run_cli(capsys, "orbits", "--expr", "prod(otuple(2),atom)", "--symmetry", "order")
    assert code == 0 and out.splitlines()[0] == "orbits: 5"
    code, out, _ = run_cli(capsys, "orbits", "--expr", "prod(dtuple(2),atom)", "--domain", "0,1,2,3,4")
    assert code == 0 and "bruteforce: 3" in out
    code, _, err = run_cli(capsys, "orbits", "--expr", "prod(")
    assert code == 2 and "error" in err


def test_equiv_and_empty(capsys):
    assert run_cli(capsys, "equiv", fx("def_in_de.dfa"), fx("def_in_de_min.dfa"))[0] == 0
    code, out, _ = run_cli(capsys, "equiv", fx("def_in_de.dfa"), fx("first_equals_last.dfa"))
    assert code == 1 and "counterexample" in out
    code, out, _ = run_cli(capsys, "--format", "json", "empty", fx("def_in_de.dfa"))
    report = json.loads(out)
    assert code == 1 and report["empty"] is False and len(report["witness"].split()) == 3
    assert run_cli(capsys, "equiv", fx("def_in_de.dfa"), fx("monotone.dfa"))[0] == 2


def test_minimize_and_product_outputs_reparse(tmp_path, capsys):
    out = tmp_path / "m.dfa"
    code, text, _ = run_cli(capsys, "minimize", fx("def_in_de.dfa"), "-o", str(out))
    assert code == 0 and "orbits: 6" in text
    assert run_cli(capsys, "validate", str(out))[0] == 0
    assert run_cli(capsys, "equiv", str(out), fx("def_in_de.dfa"))[0] == 0
    prod = tmp_path / "p.dfa"
    assert run_cli(capsys, "product", fx("monotone.dfa"), fx("third_between.dfa"), "--op", "and", "-o", str(prod))[0] == 0
    assert run_cli(capsys, "empty", str(prod))[0] == 0


def test_annotations(capsys):
    code, out, _ = run_cli(capsys, "annotations", fx("third_between.dfa"), "--state", "two")
    assert code == 0 and "count: 5" in out and "ext{0<*; *<1} -> top" in out
    assert run_cli(capsys, "annotations", fx("third_between.dfa"), "--state", "nope")[0] == 2


def test_translations(tmp_path, capsys):
    nfa = tmp_path / "r.nfa"
    assert run_cli(capsys, "fma2nfa", fx("repeated.fma"), "-o", str(nfa))[0] == 0
    code, out, _ = run_cli(capsys, "oracle", str(nfa), "--domain", "0,1,2", "--maxlen", "4",
                           "--against", fx("repeated_letter.nfa"))
    assert code == 0 and "divergences: 0" in out
    fma = tmp_path / "r.fma"
    assert run_cli(capsys, "nfa2fma", fx("repeated_letter.nfa"), "-o", str(fma))[0] == 0
    assert run_cli(capsys, "oracle", str(fma), "--domain", "0,1,2", "--against", fx("repeated.fma"))[0] == 0
    det = tmp_path / "d.fma"
    assert run_cli(capsys, "dfa2fma", fx("def_in_de.dfa"), "-o", str(det))[0] == 0
    assert run_cli(capsys, "oracle", str(det), "--domain", "0,1,2", "--against", fx("def_in_de.dfa"))[0] == 0


def test_oracle_reports_divergence(capsys):
    code, out, _ = run_cli(capsys, "oracle", fx("def_in_de.dfa"), "--domain", "0,1,2",
                           "--against", fx("first_equals_last.dfa"))
    assert code == 1 and "first_divergence" in out


def test_validate_errors(tmp_path, capsys):
    bad = tmp_path / "bad.dfa"
    bad.write_text('symmetry order\ndfa\nstate q registers 2 sym "(0 1)"\ninitial q\n')
    code, _, err = run_cli(capsys, "validate", str(bad))
    assert code == 2 and "line 3" in err and "not an automorphism" in err
    assert run_cli(capsys, "validate", str(tmp_path / "missing.dfa"))[0] == 2


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*")), ids=lambda p: p.name)
def test_validate_fixtures(path, capsys):
    code, out, _ = run_cli(capsys, "validate", str(path))
    assert code == 0 and "valid: true" in out


def test_json_output_is_deterministic(capsys):
    a = run_cli(capsys, "--format", "json", "validate", fx("edge_pair.dfa"))[1]
    b = run_cli(capsys, "--format", "json", "validate", fx("edge_pair.dfa"))[1]
    assert a == b and json.loads(a)["kind"] == "dfa"


def test_inconclusive_exit_code(monkeypatch, capsys):
    monkeypatch.setenv("ORBITKIT_NFA_CAP", "1")
    code, _, err = run_cli(capsys, "run", fx("repeated_letter.nfa"), "--word", "1 2 3")
    assert code == 3 and "inconclusive" in err


def test_cap_flag_overrides_environment(monkeypatch, capsys):
    monkeypatch.setenv("ORBITKIT_NFA_CAP", "1")
    code, out, _ = run_cli(capsys, "run", fx("repeated_letter.nfa"), "--word", "1 2 1", "--cap", "1000")
    assert code == 0 and "cap: 1000" in out and "explored:" in out
    code, _, err = run_cli(capsys, "run", fx("repeated_letter.nfa"), "--word", "1 2 3 4", "--cap", "2")
    assert code == 3 and "--cap" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2
    assert formats.read_kind("dfa\n") == "dfa"
