import os
import subprocess
import sys

from conftest import DATA
from lpac.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


EX1 = DATA / "example1.proof"
EX2 = DATA / "example2.proof"


def test_check_example1(capsys):
    code, out, err = run(capsys, "check", EX1, "--target", DATA / "example1.target")
    assert code == 0
    assert "ACCEPTED" in out and "l8" in out


def test_check_example2_debug(capsys):
    code, _, _ = run(capsys, "check", EX2, "--target", DATA / "example2.target", "--debug")
    assert code == 0


def test_check_mutation_reports_line(capsys, tmp_path):
    bad = tmp_path / "bad.proof"
    bad.write_text(EX1.read_text().replace("out [ l6 : x-2*z ]", "out [ l6 : x-3*z ]"))
    code, out, err = run(capsys, "check", bad, "--target", DATA / "example1.target", "--machine")
    assert code == 1
    assert "line 7" in err
    assert "STATUS=rejected STEP=l6 LINE=7" in err


def test_check_mutated_conclusion_in_flat_step(capsys, tmp_path):
    bad = tmp_path / "bad.proof"
    bad.write_text((DATA / "example1_flat.proof").read_text().replace("L l6, x-2*z", "L l6, x-3*z"))
    code, _, err = run(capsys, "check", bad, "--target", DATA / "example1.target")
    assert code == 1
    assert "line 6" in err


def test_check_target_not_found_message(capsys, tmp_path):
    t = tmp_path / "t.target"
    t.write_text("x*y*z ;\n")
    code, out, _ = run(capsys, "check", EX1, "--target", t)
    assert code == 1
    assert "not derived" in out


def test_check_truncated_file(capsys, tmp_path):
    bad = tmp_path / "cut.proof"
    bad.write_text(EX1.read_text()[:200])
    code, _, err = run(capsys, "check", bad)
    assert code == 2
    assert "line" in err


def test_check_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "check", tmp_path / "nope.proof")
    assert code == 2


def test_check_aggregate_exit_is_max(capsys, tmp_path):
    bad = tmp_path / "cut.proof"
    bad.write_text("A l1, x")
    code, _, _ = run(capsys, "check", EX1, bad)
    assert code == 2


def test_check_stats_row(capsys):
    code, out, _ = run(capsys, "check", EX2, "--stats")
    assert code == 0
    header, row = out.splitlines()[-2:]
    assert header.split()[:3] == ["Name", "Axioms", "Steps"]
    assert row.split()[0] == "example2.proof"


def test_check_color(capsys, monkeypatch):
    monkeypatch.setenv("LPAC_COLOR", "1")
    _, out, _ = run(capsys, "check", EX1)
    assert "\033[32mACCEPTED" in out
    monkeypatch.setenv("LPAC_COLOR", "0")
    _, out, _ = run(capsys, "check", EX1)
    assert "\033[" not in out


def test_gen_and_compress(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "chain", "--blocks", 8, "--flavor", "flat", "--out", tmp_path)
    assert code == 0
    base = tmp_path / "chain8_flat"
    comp = tmp_path / "c.proof"
    code, out, _ = run(
        capsys, "compress", f"{base}.proof", comp,
        "--axioms", f"{base}.axioms", "--target", f"{base}.target",
    )
    assert code == 0
    summary = out.splitlines()[-1]
    assert '"patterns": 1' in summary and '"applies": 8' in summary
    code, _, _ = run(capsys, "check", comp, "--axioms", f"{base}.axioms", "--target", f"{base}.target")
    assert code == 0


def test_compress_no_repeats_is_identity(capsys, tmp_path):
    src = tmp_path / "plain.proof"
    src.write_text("# header\nA l1, x ;\nA l2, y-1 ;\nL l3, 2*x, (2)*l1 ;\n")
    out_path = tmp_path / "out.proof"
    code, out, _ = run(capsys, "compress", src, out_path)
    assert code == 0
    kept = [l for l in src.read_text().splitlines() if not l.startswith("#")]
    assert out_path.read_text().splitlines() == kept
    assert '"step_delta": 0' in out


def test_compress_refuses_pattern_input(capsys, tmp_path):
    code, _, err = run(capsys, "compress", EX1, tmp_path / "o.proof")
    assert code == 1 and "pattern" in err


def test_compress_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.proof"
    bad.write_text("A l1 ;")
    assert run(capsys, "compress", bad, tmp_path / "o.proof")[0] == 2


def test_gen_two_blocks_pattern(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "chain", "--blocks", 2, "--flavor", "pattern", "--out", tmp_path)
    assert code == 0
    proof = (tmp_path / "chain2_pattern.proof").read_text().splitlines()
    assert [l[0] for l in proof] == ["N", "U", "U", "L"]
    assert len((tmp_path / "chain2_pattern.axioms").read_text().splitlines()) == 5


def test_gen_one_flat_block(capsys, tmp_path):
    code, _, _ = run(capsys, "gen", "chain", "--blocks", 1, "--flavor", "flat", "--out", tmp_path, "--name", "m")
    assert code == 0
    assert [l[0] for l in (tmp_path / "m.proof").read_text().splitlines()] == ["L", "L"]


def test_gen_io_failure(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, _ = run(capsys, "gen", "chain", "--blocks", 2, "--out", blocker / "sub")
    assert code == 2


def test_gen_64_blocks_pattern_file_smaller(capsys, tmp_path):
    for flavor in ("flat", "pattern"):
        run(capsys, "gen", "chain", "--blocks", 64, "--flavor", flavor, "--out", tmp_path)
    flat = (tmp_path / "chain64_flat.proof").stat().st_size
    pattern = (tmp_path / "chain64_pattern.proof").stat().st_size
    assert pattern < flat


def _row(out):
    header, row = out.splitlines()
    return dict(zip(header.split(), row.split()))


def test_stats_example1(capsys):
    code, out, _ = run(capsys, "stats", EX1)
    r = _row(out)
    assert code == 0
    assert (r["#"], r["Apply"], r["max|S|"]) == ("1", "2", "1")


def test_stats_example2(capsys):
    r = _row(run(capsys, "stats", EX2)[1])
    assert (r["#"], r["Apply"], r["max|S|"], r["Ext"]) == ("1", "1", "2", "1")


def test_stats_empty(capsys, tmp_path):
    empty = tmp_path / "empty.proof"
    empty.write_text("")
    r = _row(run(capsys, "stats", empty)[1])
    counts = [r[k] for k in ("Axioms", "Steps", "Ext", "Del", "#", "Apply", "max|S|", "File(B)")]
    assert counts == ["0"] * 8


def test_stats_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.proof"
    bad.write_text("L ;")
    assert run(capsys, "stats", bad)[0] == 2


def test_module_entry_point():
    env = dict(os.environ, LPAC_COLOR="0")
    proc = subprocess.run(
        [sys.executable, "-m", "lpac", "check", str(EX1), "--machine"],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0
    assert proc.stderr.strip() == "STATUS=accepted STEP=- LINE=-"
