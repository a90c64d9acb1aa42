import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from grlrpc.cli import format_vector, main, parse_range, read_vector
from grlrpc.lrpc import load_code
from grlrpc.rings import make_ring, make_tower


@pytest.fixture(scope="module")
def code_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "code.json"
    rc = main(["gen-code", "--p", "2", "--r", "2", "--s", "1", "--m", "21", "--n", "20", "--k", "8",
               "--lambda", "2", "--seed", "7", "--out", str(path)])
    assert rc == 0
    return path


def test_parse_range():
    assert parse_range("1..7") == list(range(1, 8))
    assert parse_range("1,3") == [1, 3]
    assert parse_range("4") == [4]


def test_vector_format_roundtrip(tmp_path):
    S = make_tower(make_ring(2, 2, 2), 3)
    v = S.random(np.random.default_rng(0), (4,))
    path = tmp_path / "v.txt"
    path.write_text(format_vector(v))
    assert np.array_equal(read_vector(str(path), S), v)


def test_gen_code_writes_json(code_file):
    obj = json.loads(code_file.read_text())
    assert {"tower", "n", "k", "lambda", "f", "H"} <= set(obj)
    code = load_code(code_file)
    assert (code.n, code.k, code.lam, code.tower.deg) == (20, 8, 2, 21)


def test_bounds_rows(code_file, capsys):
    assert main(["bounds", "--code", str(code_file), "--t", "1..7"]) == 0
    out = capsys.readouterr()
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert [int(r["t"]) for r in rows] == list(range(1, 8))
    assert "config:" in out.err
    assert main(["bounds", "--p", "2", "--r", "2", "--s", "4", "--m", "101", "--n", "101", "--k", "40",
                 "--lambda", "2", "--t", "30"]) == 0
    row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert abs(float(row["log2_total_simple"]) + 6) < 0.01


def test_round_trip(code_file, tmp_path, capsys):
    word, err, msg_out, cw_out = (tmp_path / n for n in ("w.txt", "e.txt", "m.txt", "c.txt"))
    msg = tmp_path / "msg.txt"
    S = load_code(code_file).tower
    m = S.random(np.random.default_rng(1), (8,))
    msg.write_text(format_vector(m))
    assert main(["encode", "--code", str(code_file), "--msg", str(msg), "--error-rank", "2",
                 "--error-out", str(err), "--seed", "3", "--out", str(word)]) == 0
    e = read_vector(str(err), S)
    assert e.any()
    assert main(["decode", "--code", str(code_file), "--word", str(word), "--out", str(cw_out),
                 "--msg-out", str(msg_out)]) == 0
    assert np.array_equal(read_vector(str(msg_out), S), m)
    c = read_vector(str(cw_out), S)
    assert np.array_equal((c + e) % S.q, read_vector(str(word), S))


def test_decode_failure_exit_code(code_file, tmp_path):
    S = load_code(code_file).tower
    rng = np.random.default_rng(2)
    path = tmp_path / "junk.txt"
    path.write_text(format_vector(S.random(rng, (20,))))
    assert main(["decode", "--code", str(code_file), "--word", str(path)]) == 3


def test_usage_errors(code_file, tmp_path, capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["bounds", "--t", "1..3"]) == 1
    assert main(["bounds", "--code", str(code_file), "--t", "3..1"]) == 1
    assert main(["gen-code", "--p", "2"]) == 1
    assert main(["decode", "--code", str(tmp_path / "missing.json"), "--word", "x"]) == 1
    bad = tmp_path / "short.txt"
    bad.write_text("1 2\n")
    assert main(["decode", "--code", str(code_file), "--word", str(bad)]) == 1
    assert main(["gen-code", "--p", "4", "--r", "2", "--s", "1", "--m", "21", "--n", "20", "--k", "8",
                 "--lambda", "2"]) == 1
    assert main(["bounds", "--code", str(code_file), "--t", "1..3", "--bogus"]) == 1
    capsys.readouterr()


def test_infeasible_only_bounds(code_file):
    assert main(["bounds", "--code", str(code_file), "--t", "7"]) == 2


def test_simulate_small(tmp_path):
    out = tmp_path / "sim.csv"
    args = ["simulate", "--t", "1,2", "--profiles", "phi1", "--min-trials", "20", "--max-trials", "20",
            "--batch", "10", "--seed", "4", "--out", str(out)]
    assert main(args) == 0
    first = out.read_text()
    assert main(args) == 0
    assert out.read_text() == first
    assert len(list(csv.DictReader(io.StringIO(first)))) == 2


def test_selftest_and_entry_point():
    res = subprocess.run([sys.executable, "-m", "grlrpc", "selftest"], capture_output=True, text=True)
    assert res.returncode == 0, res.stdout + res.stderr
    assert res.stdout.count("PASS") == 5
