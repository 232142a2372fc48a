import csv
import io

import pytest

from tcamsplit.cli import main, parse_range
from tcamsplit.tcam import parse_table, table_induced_partition


@pytest.fixture
def split_file(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("W=3 k=5\n4 1 1 1 1\n")
    return str(path)


def test_complexity(split_file, capsys):
    assert main(["complexity", split_file]) == 0
    assert capsys.readouterr().out.strip() == "5"


def test_approx(split_file, capsys):
    assert main(["approx", split_file, "-n", "2", "--kind", "linfrel+"]) == 0
    out = capsys.readouterr().out
    assert "7 1 0 0 0" in out
    assert "error 3/4" in out
    assert "degenerate" in out
    table_text = "".join(l + "\n" for l in out.splitlines() if "->" in l)
    assert table_induced_partition(parse_table(table_text, 5)).parts == (7, 1, 0, 0, 0)


def test_approx_rational(tmp_path, capsys):
    path = tmp_path / "r.txt"
    path.write_text("W=2 k=2\n3/2 5/2\n")
    assert main(["approx", str(path), "--rules", "1"]) == 0
    assert "error 3/2" in capsys.readouterr().out


def test_synth(split_file, capsys):
    assert main(["synth", split_file, "--algorithm", "niagara", "--sequence"]) == 0
    out = capsys.readouterr().out
    assert "BOT]" in out
    rules = "".join(l + "\n" for l in out.splitlines() if "->" in l and "[" not in l)
    assert table_induced_partition(parse_table(rules, 5)).parts == (4, 1, 1, 1, 1)


def test_study_to_file(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["study", "--study", "error-vs-n", "--W", "10", "--k", "3",
                 "--n", "1:3", "--samples", "5", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["n"] for r in rows] == ["1", "2", "3"]


def test_study_real_data(tmp_path, capsys):
    counts = tmp_path / "c.txt"
    counts.write_text("10,20,30\n5,5\n")
    assert main(["study", "--study", "real-data", "--W", "8", "--counts", str(counts),
                 "--fractions", "1/2,1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("frame,kind,fraction")
    assert len(lines) == 5


def test_predict(capsys):
    assert main(["predict", "--n", "50", "--k", "50", "--w", "32"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0193e7, rel=1e-3)


def test_oracle_check(capsys):
    assert main(["oracle-check", "--max-w", "2", "--max-k", "2"]) == 0
    assert "all oracle checks passed" in capsys.readouterr().out


def test_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("W=3 k=2\n4 5\n")
    assert main(["complexity", str(bad)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["complexity", str(tmp_path / "missing.txt")]) == 2
    with pytest.raises(SystemExit):
        main(["approx", str(bad), "-n", "2", "--kind", "l2"])


def test_parse_range():
    assert parse_range("5") == [5]
    assert parse_range("1,2,8") == [1, 2, 8]
    assert parse_range("10:20:5") == [10, 15, 20]
    assert parse_range("0.5:1.0:0.25", float) == [0.5, 0.75, 1.0]
