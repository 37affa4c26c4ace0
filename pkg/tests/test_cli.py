import json

from cli import main
from election_file import read_election


def kemeny_report(capsys, *argv):
    capsys.readouterr()
    assert main(["kemeny", *argv, "--jsonl"]) == 0
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_generate_domain(tmp_path):
    out = tmp_path / "sp8.txt"
    assert main(["generate", "--domain", "sp", "--m", "8", "-o", str(out)]) == 0
    e = read_election(out)
    assert len(e.votes) == 128 and e.m == 8
    assert e.certificate.sp_axis == tuple(range(8))


def test_generate_to_stdout(capsys):
    assert main(["generate", "--domain", "GS/cat", "--m", "4"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("# m: 4\n# n: 8\n# gs-tree: (1 (2 (3 4)))\n")
    assert "GS/cat: 8 votes" in captured.err


def test_generate_culture_is_seeded(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        assert main(["generate", "--culture", "conitzer", "--m", "6", "--n", "40", "--seed", "7",
                     "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(read_election(a).votes) == 40


def test_generate_rejects_bad_input(tmp_path):
    assert main(["generate", "--domain", "tree", "--m", "4"]) == 2
    assert main(["generate", "--culture", "mallows", "--m", "4"]) == 2
    assert main(["generate", "--culture", "rbox", "--r", "0", "--m", "4"]) == 2


def test_kemeny_on_identical_votes(tmp_path, capsys):
    path = tmp_path / "same.txt"
    path.write_text("# m: 3\n5: 1 > 2 > 3\n")
    report = kemeny_report(capsys, str(path), "--seed", "1", "--extra-ic", "8")
    assert report["score"] == 0
    assert report["centers"] == [[1, 2, 3]]
    assert report["cluster_sizes"] == [5]

    assert main(["kemeny", str(path), "--solver", "exact"]) == 0
    text = capsys.readouterr().out
    assert "score: 0  (exact, exact)" in text
    assert "center 1: 1 > 2 > 3  [5 voters]" in text


def test_single_crossing_and_partition_dp_agree(tmp_path, capsys):
    path = tmp_path / "sc.txt"
    assert main(["generate", "--domain", "sc", "--m", "5", "--seed", "3", "-o", str(path)]) == 0
    sc = kemeny_report(capsys, str(path), "--k", "2", "--solver", "sc")
    fpt = kemeny_report(capsys, str(path), "--k", "2", "--solver", "fpt")
    assert sc["score"] == fpt["score"]
    assert sc["method"] == "sc" and fpt["method"] == "fpt"
    assert sum(sc["cluster_sizes"]) == 11


def test_kemeny_exit_codes(tmp_path):
    sp6 = tmp_path / "sp6.txt"
    assert main(["generate", "--domain", "SP", "--m", "6", "-o", str(sp6)]) == 0
    assert main(["kemeny", str(sp6), "--k", "2", "--solver", "fpt"]) == 3
    assert main(["kemeny", str(sp6), "--solver", "sc"]) == 2
    assert main(["kemeny", str(tmp_path / "missing.txt")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("# m: 3\n1: 1 > 1 > 3\n")
    assert main(["kemeny", str(bad)]) == 2


def test_experiment_from_config_and_manifest(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"experiment": "sc-gaps", "m": 5, "n": 20, "reps": 1, "t_values": [0]}))
    assert main(["experiment", "--config", str(cfg), "--output-dir", str(tmp_path / "a"), "--no-record"]) == 0
    manifest = tmp_path / "a" / "sc-gaps-seed0" / "manifest.json"
    assert manifest.exists()
    assert main(["experiment", "--manifest", str(manifest), "--output-dir", str(tmp_path / "b"),
                 "--no-record"]) == 0
    rerun = tmp_path / "b" / "sc-gaps-seed0"
    assert (rerun / "sc_gaps.csv").read_bytes() == (manifest.parent / "sc_gaps.csv").read_bytes()


def test_experiment_input_errors(tmp_path):
    assert main(["experiment", "--output-dir", str(tmp_path), "--no-record"]) == 2
    assert main(["experiment", "sc-gaps", "--config", str(tmp_path / "missing.json"), "--no-record"]) == 2
