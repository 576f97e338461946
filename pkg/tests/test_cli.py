import subprocess
import sys

import pytest

from ptmrnn.cli import main
from ptmrnn.fixtures import fixture_path


def fx(name: str) -> str:
    return str(fixture_path(name))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fields(text: str) -> dict[str, str]:
    return dict(line.split(" ", 1) for line in text.splitlines() if not line.startswith("row ") and " " in line)


def rows(text: str) -> list[str]:
    return [line[4:] for line in text.splitlines() if line.startswith("row ")]


def test_enumerate_m_rt(capsys):
    code, out, _ = run(capsys, "enumerate", fx("m_rt"), "--max-steps", "2")
    assert code == 0
    assert rows(out) == ["b 1/2 exact", "ab 1/4 exact"]
    assert fields(out)["halting_mass"] == "3/4"


def test_enumerate_paths_flag(capsys):
    code, out, _ = run(capsys, "enumerate", fx("m_geo"), "--max-steps", "3", "--paths")
    assert code == 0
    assert rows(out) == ["aa 1/8 3 0,0,1", "a 1/4 2 0,1", "ε 1/2 1 1"]


def test_compile_then_check_equiv(capsys, tmp_path):
    target = tmp_path / "m_geo.rnn"
    code, out, _ = run(capsys, "compile", "--pass", "2pda-to-rnn", fx("m_geo"), "-o", str(target))
    assert code == 0 and target.exists()
    assert fields(out)["grade"] == "strong"
    code, out, _ = run(
        capsys, "check-equiv", fx("m_geo"), str(target), "--mode", "weak", "--max-len", "4", "--max-steps", "32"
    )
    assert code == 0
    assert fields(out)["verdict"] == "equal"


def test_compile_pipeline_to_stdout(capsys):
    code, out, err = run(capsys, "compile", "--pass", "binarize,dyadicize", fx("m_third"))
    assert code == 0
    assert "kind ptm" in out
    assert "grade weak" in err


def test_mismatch_exit_code(capsys):
    code, out, _ = run(capsys, "check-equiv", fx("m_geo"), fx("m_rt"), "--max-len", "2", "--max-steps", "16")
    assert code == 1
    assert "row ε 1/2 0 exact exact mismatch" in out


def test_inconclusive_exit_code(capsys, tmp_path):
    target = tmp_path / "third.ptm.machine"
    run(capsys, "compile", "--pass", "binarize,dyadicize", fx("m_third"), "-o", str(target))
    code, out, _ = run(capsys, "check-equiv", fx("m_third"), str(target), "--max-len", "2", "--max-steps", "20")
    assert code == 2
    assert fields(out)["verdict"] == "inconclusive"


def test_strong_and_statistical_modes(capsys, tmp_path):
    target = tmp_path / "tape.2pda"
    run(capsys, "compile", "--pass", "qptm-to-2pda", fx("m_tape"), "-o", str(target))
    code, out, _ = run(capsys, "check-equiv", fx("m_tape"), str(target), "--mode", "strong", "--max-steps", "12")
    assert code == 0 and fields(out)["mode"] == "strong-multiset"
    code, out, _ = run(
        capsys, "check-equiv", fx("m_geo"), fx("m_geo"), "--mode", "stat", "--max-steps", "64", "--n", "300"
    )
    assert code == 0 and fields(out)["mode"] == "statistical"


def test_validate_reports_violations(capsys, tmp_path):
    bad = tmp_path / "bad.machine"
    bad.write_text(fixture_path("m_geo").read_text(encoding="utf-8").replace("ε qf ε ε ε ε 1/2", "ε qf ε ε ε ε 1/3"))
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1
    assert fields(out)["verdict"] == "violation"
    assert any("sum 5/6" in r for r in rows(out))
    code, out, _ = run(capsys, "validate", fx("m_six"))
    assert code == 0 and fields(out)["verdict"] == "ok"


def test_info_predicates(capsys):
    code, out, _ = run(capsys, "info", fx("m_rt"))
    info = fields(out)
    assert code == 0
    assert (info["sigma_deterministic"], info["deterministic"], info["real_time"], info["rd"]) == ("yes",) * 4
    _, out, _ = run(capsys, "info", fx("m_geo"))
    assert fields(out)["real_time"] == "no"
    _, out, _ = run(capsys, "info", fx("m_walk"))
    assert fields(out)["class"] == "Ptm"


def test_sample_report(capsys):
    code, out, _ = run(capsys, "sample", fx("m_rt"), "--seed", "5", "--n", "4")
    assert code == 0
    assert [r.split()[0] for r in rows(out)] == ["5", "6", "7", "8"]
    assert fields(out)["cutoff_fraction"] == "0"
    _, again, _ = run(capsys, "sample", fx("m_rt"), "--seed", "5", "--n", "4")
    assert again == out


def test_semimeasure_command(capsys):
    code, out, _ = run(capsys, "semimeasure", fx("m_third"), "--max-len", "1", "--max-steps", "8")
    assert code == 0 and rows(out) == ["b 2/3 exact"]


@pytest.mark.parametrize(
    "argv",
    [
        ["compile", "--pass", "nope", "FIXTURE"],
        ["enumerate", "missing.machine", "--max-steps", "3"],
        ["enumerate", "FIXTURE", "--max-steps", "-1"],
        ["check-equiv", "FIXTURE", "FIXTURE", "--max-steps", "3"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    argv = [fx("m_geo") if a == "FIXTURE" else a for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["enumerate"])
    assert exc.value.code == 2


def test_budget_error_exit_2(capsys, monkeypatch):
    monkeypatch.setenv("PTMRNN_NODE_BUDGET", "4")
    code, _, err = run(capsys, "enumerate", fx("m_count"), "--max-steps", "30")
    assert code == 2 and "exceeded" in err


def test_refused_compilation_exits_1(capsys):
    code, _, err = run(capsys, "compile", "--pass", "2pda-to-rnn", fx("m_tape"))
    assert code == 1 and "expects TwoPda" in err


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "ptmrnn", "enumerate", fx("m_rt"), "--max-steps", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert result.returncode == 0
    assert "row ab 1/4 exact" in result.stdout
