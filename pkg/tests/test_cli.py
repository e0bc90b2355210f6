import hashlib
import json
import subprocess
import sys

import pytest

from hypermatch.cli import EXIT_ERROR, EXIT_NO, EXIT_YES, main
from hypermatch.hypergraph import Hypergraph, parse_text, to_text
from hypermatch.instances import space_barrier


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def space6(tmp_path):
    path = tmp_path / "space6.txt"
    path.write_text(to_text(space_barrier(6, 3)))
    return str(path)


@pytest.fixture
def k6(tmp_path):
    path = tmp_path / "k6.txt"
    path.write_text(to_text(Hypergraph.complete(6, 3)))
    return str(path)


def test_decide_exit_codes(capsys, space6, k6):
    assert run(capsys, "decide", "--input", k6, "--ell", "2")[0] == EXIT_YES
    code, out, _ = run(capsys, "decide", "--input", space6, "--ell", "2")
    assert code == EXIT_NO and out.startswith("no (certificate")


def test_decide_bad_ell_and_missing_file(capsys, k6, tmp_path):
    code, _, err = run(capsys, "decide", "--input", k6, "--ell", "5")
    assert code == EXIT_ERROR and err.startswith("error:")
    code, _, err = run(capsys, "decide", "--input", str(tmp_path / "missing.txt"), "--ell", "2")
    assert code == EXIT_ERROR and "error:" in err


def test_decide_malformed_file(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 6 1\n0 1 1\n")
    assert run(capsys, "decide", "--input", str(path), "--ell", "2")[0] == EXIT_ERROR


def test_decide_json_is_deterministic(capsys, space6):
    _, a, _ = run(capsys, "decide", "--input", space6, "--ell", "2", "--json")
    _, b, _ = run(capsys, "decide", "--input", space6, "--ell", "2", "--json")
    assert a == b
    data = json.loads(a)
    assert data["verdict"] == "no" and "timings" not in data
    assert data["certificate"]["coset_order"] == 2


def test_decide_timings_flag(capsys, k6):
    _, out, _ = run(capsys, "decide", "--input", k6, "--ell", "2", "--json", "--timings")
    assert "timings" in json.loads(out)


def test_oracle(capsys, k6, space6):
    code, out, _ = run(capsys, "oracle", "--input", k6)
    assert code == EXIT_YES and len(json.loads(out)["matching"]) == 2
    assert run(capsys, "oracle", "--input", space6)[0] == EXIT_NO


def test_gen_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "random", "9", "3", "1/2", "--seed", "4")
    assert code == 0
    H = parse_text(out)
    assert (H.n, H.k) == (9, 3)
    path = tmp_path / "lat.txt"
    run(capsys, "gen", "lattice", "--sizes", "3,3", "--k", "3", "--allowed", "3,0;0,3", "--out", str(path))
    assert len(parse_text(path.read_text()).edges) == 2


def test_gen_pipes_into_decide():
    gen = subprocess.run(
        [sys.executable, "-m", "hypermatch.cli", "gen", "space", "9", "3"], capture_output=True, text=True, check=True
    )
    dec = subprocess.run(
        [sys.executable, "-m", "hypermatch.cli", "decide", "--input", "-", "--ell", "2"],
        input=gen.stdout,
        capture_output=True,
        text=True,
    )
    assert dec.returncode == EXIT_NO and dec.stdout.startswith("no")


def test_fractional(capsys, tmp_path):
    path = tmp_path / "c9.txt"
    run(capsys, "gen", "cover", "9", "3", "--out", str(path))
    _, out, _ = run(capsys, "fractional", "--input", str(path), "--dual")
    data = json.loads(out)
    assert data["value"] == data["dual_value"] == "2" and data["perfect"] is False


def test_partition_and_lattice_info(capsys, space6):
    code, out, _ = run(capsys, "partition", "--input", space6, "--ell", "2")
    assert code == 0 and json.loads(out)["certified"] is True
    code, out, _ = run(capsys, "lattice-info", "--input", space6, "--ell", "2")
    data = json.loads(out)
    assert code == 0 and data["coset_group"]["order"] == 2 and data["leftover_residue"] == [1]


def test_partition_not_certified(capsys, tmp_path):
    # a sparse random instance whose closing step leaves a singleton part
    path = tmp_path / "sparse.txt"
    run(capsys, "gen", "random", "12", "3", "1/5", "--seed", "11", "--out", str(path))
    code, out, _ = run(capsys, "partition", "--input", str(path), "--ell", "2")
    assert code == EXIT_ERROR and json.loads(out)["certified"] is False


def test_cross_validate_csv_hash_stable(capsys, tmp_path):
    digests = []
    for i in range(2):
        out = tmp_path / f"cv{i}.csv"
        code, summary, _ = run(capsys, "cross-validate", "--count", "12", "--seed", "9", "--out", str(out))
        assert code == 0 and json.loads(summary)["disagreements"] == 0
        digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
    assert digests[0] == digests[1]
